#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "capcf/experiment.hpp"
#include "capcf/train.hpp"

using namespace capcf;
namespace fs = std::filesystem;

namespace {

/// 12x12 full grid of explicit ratings; every user and item has 12 ratings
/// so the default min-ratings filter (> 10) keeps everything.
std::string write_grid_dataset(const fs::path& dir) {
  fs::create_directories(dir);
  const fs::path path = dir / "ratings.tsv";
  std::ofstream out(path);
  for (int u = 1; u <= 12; ++u)
    for (int i = 1; i <= 12; ++i)
      out << "u" << u << "\t" << "i" << i << "\t" << 1 + (u * 7 + i * 3) % 5
          << "\t" << 882000000 + u + i << "\n";
  return path.string();
}

ExperimentConfig tiny_config(const fs::path& dir) {
  ExperimentConfig cfg;
  cfg.data_path = write_grid_dataset(dir);
  cfg.feedback = "explicit";
  cfg.out_dir = (dir / "out").string();
  cfg.models = {"cap-pmf", "pmf"};
  cfg.alphas = {0.0, 0.5};
  cfg.repetitions = 1;
  cfg.topk = {1, 2};
  cfg.rank = 2;
  cfg.max_iters = 5;
  cfg.tol = 0.0;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config entries parse into typed fields") {
  ExperimentConfig cfg;
  apply_config_entry(cfg, "alphas", "0,0.25,1");
  REQUIRE(cfg.alphas.size() == 3);
  CHECK(cfg.alphas[1] == doctest::Approx(0.25));
  apply_config_entry(cfg, "models", "cap-bpr,postprocess-pmf");
  CHECK(cfg.models == std::vector<std::string>{"cap-bpr", "postprocess-pmf"});
  apply_config_entry(cfg, "rank", "7");
  CHECK(cfg.rank == 7);
  apply_config_entry(cfg, "seeds", "3,9");
  CHECK(cfg.effective_seeds() == std::vector<std::uint64_t>{3, 9});
  CHECK_THROWS_AS(apply_config_entry(cfg, "no_such_key", "1"),
                  std::invalid_argument);
}

TEST_CASE("default seeds run from one to the repetition count") {
  ExperimentConfig cfg;
  cfg.repetitions = 3;
  CHECK(cfg.effective_seeds() == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("config hash covers science parameters but not execution knobs") {
  ExperimentConfig a, b;
  CHECK(a.config_hash() == b.config_hash());
  b.threads = 8;
  b.reference_mode = true;
  CHECK(a.config_hash() == b.config_hash());
  b.alphas = {0.0, 0.1};
  CHECK(a.config_hash() != b.config_hash());
}

TEST_CASE("config file round trip") {
  const fs::path dir = fs::temp_directory_path() / "capcf_cfgtest";
  fs::create_directories(dir);
  const fs::path path = dir / "exp.cfg";
  {
    std::ofstream out(path);
    out << "# comment line\n"
        << "rank = 4\n"
        << "surrogate = hinge\n"
        << "alphas = 0,1\n"
        << "\n"
        << "capacity = uniform:3\n";
  }
  auto cfg = load_config_file(path.string());
  CHECK(cfg.rank == 4);
  CHECK(cfg.surrogate == "hinge");
  CHECK(cfg.alphas == std::vector<double>{0.0, 1.0});
  auto kind = parse_capacity_kind(cfg.capacity);
  CHECK(kind.tag == CapacityKind::kUniform);
  CHECK(kind.uniform_value == doctest::Approx(3.0));
  fs::remove_all(dir);
}

TEST_CASE("enum parsers reject unknown names") {
  CHECK_THROWS_AS(parse_surrogate("quadratic"), std::invalid_argument);
  CHECK_THROWS_AS(parse_capacity_kind("bogus"), std::invalid_argument);
  CHECK_THROWS_AS(parse_propensity_kind("bogus"), std::invalid_argument);
}

TEST_CASE("prepare writes loadable artifacts that partition the ratings") {
  const fs::path dir = fs::temp_directory_path() / "capcf_preptest";
  fs::remove_all(dir);
  auto cfg = tiny_config(dir);
  cmd_prepare(cfg);

  for (const char* name :
       {"train_s1.tsv", "train_clean_s1.tsv", "test_s1.tsv",
        "capacities_s1.csv", "propensities_s1.csv", "meta.txt"})
    CHECK(fs::exists(fs::path(cfg.out_dir) / name));

  auto d = load_prepared(cfg, 1);
  CHECK(d.train.num_users() == 12);
  CHECK(d.train.num_items() == 12);
  CHECK(d.ctx.propensities.size() == 12);
  CHECK(d.ctx.capacities.size() == 12);
  CHECK_FALSE(d.geo);

  // explicit feedback: train == train_clean, and together with test it
  // reproduces the full 12x12 support with per-user ceil(12/2) = 6 train
  CHECK(d.train.ratings().size() == d.train_clean.ratings().size());
  for (int i = 0; i < 12; ++i) {
    CHECK(d.train.by_user(i).size() == 6);
    CHECK(d.test.by_user(i).size() == 6);
    for (int j = 0; j < 12; ++j)
      CHECK((d.train.has_rating(i, j) != d.test.has_rating(i, j)));
  }
  fs::remove_all(dir);
}

TEST_CASE("prepare is byte-identical across reruns") {
  const fs::path dir = fs::temp_directory_path() / "capcf_prep2";
  fs::remove_all(dir);
  auto cfg = tiny_config(dir);
  cfg.feedback = "implicit01";
  cmd_prepare(cfg);
  const std::string first = slurp(cfg.out_dir + "/train_s1.tsv") +
                            slurp(cfg.out_dir + "/test_s1.tsv") +
                            slurp(cfg.out_dir + "/capacities_s1.csv");
  cmd_prepare(cfg);
  const std::string second = slurp(cfg.out_dir + "/train_s1.tsv") +
                             slurp(cfg.out_dir + "/test_s1.tsv") +
                             slurp(cfg.out_dir + "/capacities_s1.csv");
  CHECK(first == second);

  // implicit feedback pairs every train positive with a sampled negative
  auto d = load_prepared(cfg, 1);
  for (int i = 0; i < d.train.num_users(); ++i)
    CHECK(d.train.positives(i).size() >= d.train.negatives(i).size());
  fs::remove_all(dir);
}

TEST_CASE("sweep produces a complete metrics table") {
  const fs::path dir = fs::temp_directory_path() / "capcf_sweeptest";
  fs::remove_all(dir);
  auto cfg = tiny_config(dir);
  cmd_prepare(cfg);
  cmd_sweep(cfg);

  const std::string csv = slurp(cfg.out_dir + "/metrics.csv");
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header.rfind("dataset,model,alpha,surrogate,capacity,propensity,"
                     "seed,config_hash,status,iterations,stop_reason,"
                     "rmse,pairwise01,capacity_loss,overall", 0) == 0);
  CHECK(header.find("map_at_1") != std::string::npos);
  CHECK(header.find("wmcv_at_2") != std::string::npos);

  int data_rows = 0, summary_rows = 0, error_rows = 0;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (line.find(",mean,") != std::string::npos ||
        line.find(",std,") != std::string::npos)
      ++summary_rows;
    else
      ++data_rows;
    if (line.find("error") != std::string::npos) ++error_rows;
  }
  // cap-pmf over {0, 0.5} plus unconstrained pmf at 0 = 3 cells
  CHECK(data_rows == 3);
  CHECK(summary_rows == 3 * 2);
  CHECK(error_rows == 0);

  // every cell left a checkpoint and a trace behind
  CHECK(fs::exists(checkpoint_path(cfg, "cap-pmf", 0.5, 1)));
  CHECK(fs::exists(fs::path(cfg.out_dir) / "trace_pmf_a0_s1.csv"));
  fs::remove_all(dir);
}

TEST_CASE("sweep output is byte-identical in reference mode") {
  const fs::path dir = fs::temp_directory_path() / "capcf_sweepdet";
  fs::remove_all(dir);
  auto cfg = tiny_config(dir);
  cfg.models = {"cap-pmf"};
  cfg.alphas = {0.0, 1.0};
  cfg.reference_mode = true;
  cmd_prepare(cfg);
  cmd_sweep(cfg);
  const std::string first = slurp(cfg.out_dir + "/metrics.csv");
  cmd_sweep(cfg);
  CHECK(slurp(cfg.out_dir + "/metrics.csv") == first);
  fs::remove_all(dir);
}

TEST_CASE("baseline demands the matching unconstrained checkpoint") {
  const fs::path dir = fs::temp_directory_path() / "capcf_basetest";
  fs::remove_all(dir);
  auto cfg = tiny_config(dir);
  cfg.models = {"postprocess-pmf"};
  cmd_prepare(cfg);
  CHECK_THROWS_WITH_AS(cmd_baseline(cfg),
                       doctest::Contains("ckpt_pmf_a0_s1.bin"),
                       std::runtime_error);

  // after training the unconstrained cell the baseline runs through
  cmd_train(cfg, "pmf", 0.0, 1);
  cmd_baseline(cfg);
  CHECK(fs::exists(fs::path(cfg.out_dir) / "baseline.csv"));
  fs::remove_all(dir);
}

TEST_CASE("single-cell eval writes a one-row report") {
  const fs::path dir = fs::temp_directory_path() / "capcf_evaltest";
  fs::remove_all(dir);
  auto cfg = tiny_config(dir);
  cmd_prepare(cfg);
  cmd_train(cfg, "cap-pmf", 0.5, 1);
  cmd_eval(cfg, "cap-pmf", 0.5, 1);
  const std::string csv = slurp(cfg.out_dir + "/eval_cap-pmf_a0.5_s1.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + row
  fs::remove_all(dir);
}
