/**
 * Copyright (c) 2026 the capcf authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "capcf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "capcf/eval.hpp"
#include "capcf/ingest.hpp"
#include "capcf/objective.hpp"
#include "capcf/train.hpp"

namespace fs = std::filesystem;

namespace capcf {

namespace {

struct ModelSpec {
  std::string family;   // pmf | bpr | geomf | geobpr
  std::string variant;  // constrained | unconstrained | onlycap | postprocess
  AccuracyKind accuracy = AccuracyKind::kSquare;
  bool geo = false;
};

ModelSpec parse_model(const std::string& s) {
  ModelSpec m;
  std::string rest = s;
  if (rest.rfind("cap-", 0) == 0) {
    m.variant = "constrained";
    rest = rest.substr(4);
  } else if (rest.rfind("onlycap-", 0) == 0) {
    m.variant = "onlycap";
    rest = rest.substr(8);
  } else if (rest.rfind("postprocess-", 0) == 0) {
    m.variant = "postprocess";
    rest = rest.substr(12);
  } else {
    m.variant = "unconstrained";
  }
  if (rest != "pmf" && rest != "bpr" && rest != "geomf" && rest != "geobpr")
    throw std::invalid_argument("unknown model family: " + s);
  m.family = rest;
  m.accuracy = (rest == "bpr" || rest == "geobpr") ? AccuracyKind::kBpr
                                                   : AccuracyKind::kSquare;
  m.geo = rest == "geomf" || rest == "geobpr";
  return m;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string fmt_metric(double v) {
  return std::isfinite(v) ? fmt_double(v) : "nan";
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

std::string seed_tag(std::uint64_t seed) { return "s" + std::to_string(seed); }

std::string cell_tag(const std::string& model, double alpha,
                     std::uint64_t seed) {
  return model + "_a" + fmt_double(alpha) + "_" + seed_tag(seed);
}

}  // namespace

std::vector<std::uint64_t> ExperimentConfig::effective_seeds() const {
  if (!seeds.empty()) return seeds;
  std::vector<std::uint64_t> out;
  for (int r = 1; r <= repetitions; ++r) out.push_back(r);
  return out;
}

std::string ExperimentConfig::canonical_text() const {
  std::map<std::string, std::string> kv;
  kv["data"] = data_path;
  kv["format"] = format;
  kv["poi"] = poi_path;
  kv["feedback"] = feedback;
  kv["min_ratings"] = std::to_string(min_ratings);
  kv["capacity"] = capacity;
  kv["propensity"] = propensity;
  kv["capacity_file"] = capacity_file;
  kv["propensity_file"] = propensity_file;
  kv["models"] = join(models, ",");
  {
    std::vector<std::string> a;
    for (double v : alphas) a.push_back(fmt_double(v));
    kv["alphas"] = join(a, ",");
  }
  kv["surrogate"] = surrogate;
  kv["repetitions"] = std::to_string(repetitions);
  {
    std::vector<std::string> s;
    for (auto v : effective_seeds()) s.push_back(std::to_string(v));
    kv["seeds"] = join(s, ",");
  }
  {
    std::vector<std::string> t;
    for (int v : topk) t.push_back(std::to_string(v));
    kv["topk"] = join(t, ",");
  }
  kv["out"] = out_dir;
  kv["rank"] = std::to_string(rank);
  kv["lambda"] = fmt_double(lambda);
  kv["tol"] = fmt_double(tol);
  kv["max_iters"] = std::to_string(max_iters);
  kv["init_scale"] = fmt_double(init_scale);
  kv["bandwidth"] = fmt_double(bandwidth);
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  return out;
}

void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value) {
  if (key == "data") cfg.data_path = value;
  else if (key == "format") cfg.format = value;
  else if (key == "poi") cfg.poi_path = value;
  else if (key == "feedback") cfg.feedback = value;
  else if (key == "min_ratings") cfg.min_ratings = std::stoi(value);
  else if (key == "capacity") cfg.capacity = value;
  else if (key == "propensity") cfg.propensity = value;
  else if (key == "capacity_file") cfg.capacity_file = value;
  else if (key == "propensity_file") cfg.propensity_file = value;
  else if (key == "models") cfg.models = split_list(value);
  else if (key == "alphas") {
    cfg.alphas.clear();
    for (const auto& s : split_list(value)) cfg.alphas.push_back(std::stod(s));
  } else if (key == "surrogate") cfg.surrogate = value;
  else if (key == "repetitions") cfg.repetitions = std::stoi(value);
  else if (key == "seeds") {
    cfg.seeds.clear();
    for (const auto& s : split_list(value)) cfg.seeds.push_back(std::stoull(s));
  } else if (key == "topk") {
    cfg.topk.clear();
    for (const auto& s : split_list(value)) cfg.topk.push_back(std::stoi(s));
  } else if (key == "out") cfg.out_dir = value;
  else if (key == "rank") cfg.rank = std::stoi(value);
  else if (key == "lambda") cfg.lambda = std::stod(value);
  else if (key == "tol") cfg.tol = std::stod(value);
  else if (key == "max_iters") cfg.max_iters = std::stoi(value);
  else if (key == "init_scale") cfg.init_scale = std::stod(value);
  else if (key == "bandwidth") cfg.bandwidth = std::stod(value);
  else if (key == "threads") cfg.threads = std::stoi(value);
  else if (key == "reference_mode") cfg.reference_mode = value == "true" || value == "1";
  else throw std::invalid_argument("unknown config key: " + key);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": expected key=value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      if (b == std::string::npos) return std::string();
      return s.substr(b, s.find_last_not_of(" \t") - b + 1);
    };
    apply_config_entry(cfg, trim(line.substr(0, eq)),
                       trim(line.substr(eq + 1)));
  }
  return cfg;
}

CapacityKind parse_capacity_kind(const std::string& s) {
  if (s == "actual") return {CapacityKind::kActual, 0.0};
  if (s == "binning") return {CapacityKind::kBinning, 0.0};
  if (s == "linear_max") return {CapacityKind::kLinearMax, 0.0};
  if (s == "linear_mean") return {CapacityKind::kLinearMean, 0.0};
  if (s == "reverse_binning") return {CapacityKind::kReverseBinning, 0.0};
  if (s.rfind("uniform:", 0) == 0)
    return CapacityKind::uniform(std::stod(s.substr(8)));
  if (s == "uniform") return CapacityKind::uniform(10.0);
  throw std::invalid_argument("unknown capacity kind: " + s);
}

PropensityKind parse_propensity_kind(const std::string& s) {
  if (s == "actual") return PropensityKind::kActual;
  if (s == "median") return PropensityKind::kMedian;
  if (s == "linear") return PropensityKind::kLinear;
  throw std::invalid_argument("unknown propensity kind: " + s);
}

SurrogateKind parse_surrogate(const std::string& s) {
  if (s == "logistic") return SurrogateKind::kLogistic;
  if (s == "exponential") return SurrogateKind::kExponential;
  if (s == "hinge") return SurrogateKind::kHinge;
  throw std::invalid_argument("unknown surrogate: " + s);
}

std::string checkpoint_path(const ExperimentConfig& cfg,
                            const std::string& model, double alpha,
                            std::uint64_t seed) {
  return (fs::path(cfg.out_dir) / ("ckpt_" + cell_tag(model, alpha, seed) +
                                   ".bin")).string();
}

namespace {

bool dataset_is_geo(const ExperimentConfig& cfg) {
  for (const auto& m : cfg.models)
    if (parse_model(m).geo) return true;
  return false;
}

std::string meta_path(const ExperimentConfig& cfg) {
  return (fs::path(cfg.out_dir) / "meta.txt").string();
}

std::string artifact(const ExperimentConfig& cfg, const std::string& name) {
  return (fs::path(cfg.out_dir) / name).string();
}

void write_influence_with_dims(const std::string& path,
                               const InfluenceMatrix& infl) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "dims," << infl.Y.rows() << "," << infl.Y.cols() << ","
      << infl.bandwidth << "\n";
  for (int j = 0; j < infl.Y.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(infl.Y, j); it; ++it)
      out << it.row() << "," << it.col() << "," << it.value() << "\n";
}

InfluenceMatrix read_influence_with_dims(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty " + path);
  InfluenceMatrix infl;
  int L = 0, N = 0;
  if (std::sscanf(line.c_str(), "dims,%d,%d,%lf", &L, &N, &infl.bandwidth) != 3)
    throw std::runtime_error(path + ": bad dims header");
  std::vector<Eigen::Triplet<double>> trips;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int r, c;
    double v;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &r, &c, &v) != 3)
      throw std::runtime_error(path + ": bad triplet line");
    trips.emplace_back(r, c, v);
  }
  infl.Y.resize(L, N);
  infl.Y.setFromTriplets(trips.begin(), trips.end());
  infl.Y.makeCompressed();
  return infl;
}

struct Meta {
  int num_users = 0;
  int num_items = 0;
  std::string feedback;
  bool geo = false;
};

void write_meta(const ExperimentConfig& cfg, const Meta& m) {
  std::ofstream out(meta_path(cfg));
  out << "num_users=" << m.num_users << "\n"
      << "num_items=" << m.num_items << "\n"
      << "feedback=" << m.feedback << "\n"
      << "geo=" << (m.geo ? 1 : 0) << "\n"
      << "config_hash=" << hash_hex(cfg.config_hash()) << "\n";
}

Meta read_meta(const ExperimentConfig& cfg) {
  std::ifstream in(meta_path(cfg));
  if (!in)
    throw std::runtime_error("missing prepared artifacts (run prepare): " +
                             meta_path(cfg));
  Meta m;
  std::string line;
  while (std::getline(in, line)) {
    auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string k = line.substr(0, eq), v = line.substr(eq + 1);
    if (k == "num_users") m.num_users = std::stoi(v);
    else if (k == "num_items") m.num_items = std::stoi(v);
    else if (k == "feedback") m.feedback = v;
    else if (k == "geo") m.geo = v == "1";
  }
  return m;
}

}  // namespace

void cmd_prepare(const ExperimentConfig& cfg) {
  const bool geo = dataset_is_geo(cfg);
  if (geo && cfg.poi_path.empty())
    throw std::runtime_error("geo models require a POI coordinate file (poi=)");

  const FileFormat fmt = cfg.format == "checkin-tsv" ? FileFormat::kCheckinTsv
                                                     : FileFormat::kMovielensTab;
  auto raw = parse_interactions(cfg.data_path, fmt);
  auto indexed = index_interactions(raw);
  RatingsDataset full(static_cast<int>(indexed.user_ids.size()),
                      static_cast<int>(indexed.item_ids.size()),
                      indexed.ratings, FeedbackMode::kRawStars);

  std::vector<int> kept_items;
  RatingsDataset filtered =
      filter_min_ratings(full, cfg.min_ratings, nullptr, &kept_items);

  const PolarizeMode pmode = cfg.feedback == "explicit"
                                 ? PolarizeMode::kExplicitThreshold4
                                 : PolarizeMode::kImplicit01;
  RatingsDataset polar = polarize(filtered, pmode);

  fs::create_directories(cfg.out_dir);

  // Influence matrix is split-independent; built once over surviving items.
  InfluenceMatrix infl;
  if (geo) {
    auto coords = parse_poi_coords(cfg.poi_path);
    std::vector<TileCoord> tiles;
    for (int j : kept_items) {
      const std::string& id = indexed.item_ids[j];
      auto it = coords.find(id);
      if (it == coords.end())
        throw std::runtime_error("POI '" + id + "' has no coordinates in " +
                                 cfg.poi_path);
      tiles.push_back(latlon_to_tile(it->second.first, it->second.second));
    }
    infl = build_influence_matrix(tiles, cfg.bandwidth);
    write_influence_with_dims(artifact(cfg, "influence.csv"), infl);
  }

  for (std::uint64_t seed : cfg.effective_seeds()) {
    SplitSpec spec;
    spec.seed = seed;
    auto [train_clean, test_clean] = split_train_test(polar, spec);

    // Context vectors come from the pre-negative-sampling training split.
    ContextVectors ctx;
    ctx.capacities = cfg.capacity_file.empty()
                         ? make_capacities(train_clean,
                                           parse_capacity_kind(cfg.capacity))
                         : read_vector_csv(cfg.capacity_file);
    ctx.propensities =
        cfg.propensity_file.empty()
            ? make_propensities(train_clean,
                                parse_propensity_kind(cfg.propensity))
            : read_vector_csv(cfg.propensity_file);
    ctx.validate();

    RatingsDataset train = train_clean;
    RatingsDataset test = test_clean;
    if (pmode == PolarizeMode::kImplicit01) {
      train = sample_negatives(train_clean, test_clean, seed);
      // Test-side negatives (drawn from items unrated anywhere, excluding
      // the train-side samples) so ranking metrics are non-degenerate.
      test = sample_negatives(test_clean, train, seed ^ 0x7e57ULL);
    }

    const std::string st = seed_tag(seed);
    write_ratings_tsv(artifact(cfg, "train_clean_" + st + ".tsv"), train_clean);
    write_ratings_tsv(artifact(cfg, "train_" + st + ".tsv"), train);
    write_ratings_tsv(artifact(cfg, "test_" + st + ".tsv"), test);
    write_vector_csv(artifact(cfg, "capacities_" + st + ".csv"),
                     ctx.capacities);
    write_vector_csv(artifact(cfg, "propensities_" + st + ".csv"),
                     ctx.propensities);
  }

  Meta meta;
  meta.num_users = polar.num_users();
  meta.num_items = polar.num_items();
  meta.feedback = cfg.feedback;
  meta.geo = geo;
  write_meta(cfg, meta);
}

PreparedData load_prepared(const ExperimentConfig& cfg, std::uint64_t seed) {
  const Meta meta = read_meta(cfg);
  const FeedbackMode mode = meta.feedback == "explicit"
                                ? FeedbackMode::kExplicitPM1
                                : FeedbackMode::kImplicit01;
  const std::string st = seed_tag(seed);
  PreparedData d{
      read_ratings_tsv(artifact(cfg, "train_" + st + ".tsv"), meta.num_users,
                       meta.num_items, mode),
      read_ratings_tsv(artifact(cfg, "train_clean_" + st + ".tsv"),
                       meta.num_users, meta.num_items, mode),
      read_ratings_tsv(artifact(cfg, "test_" + st + ".tsv"), meta.num_users,
                       meta.num_items, mode),
      ContextVectors{},
      InfluenceMatrix{},
      meta.geo};
  d.ctx.propensities =
      read_vector_csv(artifact(cfg, "propensities_" + st + ".csv"));
  d.ctx.capacities =
      read_vector_csv(artifact(cfg, "capacities_" + st + ".csv"));
  if (meta.geo)
    d.influence = read_influence_with_dims(artifact(cfg, "influence.csv"));
  return d;
}

namespace {

struct CellResult {
  std::string model;
  double alpha = 0.0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  int iterations = 0;
  std::string stop_reason;
  MetricsReport metrics;
};

TrainConfig cell_train_config(const ExperimentConfig& cfg,
                              const ModelSpec& spec, double alpha,
                              std::uint64_t seed) {
  TrainConfig tc;
  tc.alpha = alpha;
  tc.lambda = cfg.lambda;
  tc.rank = cfg.rank;
  tc.surrogate = parse_surrogate(cfg.surrogate);
  tc.accuracy = spec.accuracy;
  tc.geo = spec.geo;
  tc.max_iters = cfg.max_iters;
  tc.tol = cfg.tol;
  tc.seed = seed;
  tc.init_scale = cfg.init_scale;
  return tc;
}

MetricsReport evaluate_model(const ExperimentConfig& cfg,
                             const ModelSpec& spec, double alpha,
                             const LatentModel& model,
                             const PreparedData& data) {
  MetricsReport r;
  r.rmse = rmse(model, data.test);
  try {
    r.pairwise01 = pairwise01_loss(model, data.test);
  } catch (const std::exception&) {
    r.pairwise01 = std::nan("");
  }
  r.capacity_loss =
      capacity_loss_metric(model, data.ctx, parse_surrogate(cfg.surrogate));
  r.overall = overall_metric(
      spec.accuracy == AccuracyKind::kSquare ? r.rmse : r.pairwise01,
      r.capacity_loss, alpha, spec.accuracy);

  const auto rel = relevant_items(data.test);
  if (spec.variant == "postprocess") {
    const Eigen::MatrixXd scores = model.predict_all();
    std::vector<std::vector<int>> candidates(data.test.num_users());
    for (int i = 0; i < data.test.num_users(); ++i) {
      for (int idx : data.test.by_user(i))
        candidates[i].push_back(data.test.ratings()[idx].item);
      std::sort(candidates[i].begin(), candidates[i].end());
    }
    for (int top : cfg.topk) {
      const RankedList ranked =
          post_process_baseline(scores, data.ctx, top, &candidates);
      r.map_at[top] = map_at_k(ranked, rel, top);
      r.wap_at[top] = wap_at_k(ranked, rel, data.ctx.propensities, top);
      r.wmcv_at[top] = wmcv_at_k(ranked, data.ctx, data.test.num_items(), top);
    }
  } else {
    const RankedList ranked = rank_test_items(model, data.test);
    for (int top : cfg.topk) {
      r.map_at[top] = map_at_k(ranked, rel, top);
      r.wap_at[top] = wap_at_k(ranked, rel, data.ctx.propensities, top);
      r.wmcv_at[top] = wmcv_at_k(ranked, data.ctx, data.test.num_items(), top);
    }
  }
  return r;
}

CellResult run_cell(const ExperimentConfig& cfg, const std::string& model_name,
                    double alpha, std::uint64_t seed) {
  CellResult res;
  res.model = model_name;
  res.alpha = alpha;
  res.seed = seed;
  try {
    const ModelSpec spec = parse_model(model_name);
    const PreparedData data = load_prepared(cfg, seed);
    const TrainConfig tc = cell_train_config(cfg, spec, alpha, seed);
    const double train_alpha = spec.variant == "postprocess" ? 0.0 : alpha;
    TrainConfig tc2 = tc;
    tc2.alpha = train_alpha;
    auto [model, trace] =
        train(data.train, data.ctx, tc2, spec.geo ? &data.influence.Y : nullptr);
    res.iterations = trace.iterations;
    res.stop_reason = trace.stop_reason == TrainTrace::StopReason::kConverged
                          ? "converged"
                          : "max_iters";
    save_checkpoint(checkpoint_path(cfg, model_name, alpha, seed), model,
                    cfg.config_hash());
    write_trace_csv(artifact(cfg, "trace_" + cell_tag(model_name, alpha, seed) +
                                      ".csv"),
                    trace);
    res.metrics = evaluate_model(cfg, spec, alpha, model, data);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    res.status = "error: " + msg;
  }
  return res;
}

std::string metrics_header(const ExperimentConfig& cfg) {
  std::string h =
      "dataset,model,alpha,surrogate,capacity,propensity,seed,config_hash,"
      "status,iterations,stop_reason,rmse,pairwise01,capacity_loss,overall";
  for (int top : cfg.topk)
    h += ",map_at_" + std::to_string(top) + ",wap_at_" + std::to_string(top) +
         ",wmcv_at_" + std::to_string(top);
  return h;
}

std::string metrics_row(const ExperimentConfig& cfg, const CellResult& c,
                        const std::string& seed_field) {
  std::ostringstream out;
  out << fs::path(cfg.data_path).filename().string() << "," << c.model << ","
      << fmt_double(c.alpha) << "," << cfg.surrogate << "," << cfg.capacity
      << "," << cfg.propensity << "," << seed_field << ","
      << hash_hex(cfg.config_hash()) << "," << c.status << "," << c.iterations
      << "," << c.stop_reason << "," << fmt_metric(c.metrics.rmse) << ","
      << fmt_metric(c.metrics.pairwise01) << ","
      << fmt_metric(c.metrics.capacity_loss) << ","
      << fmt_metric(c.metrics.overall);
  for (int top : cfg.topk) {
    auto at = [&](const std::map<int, double>& m) {
      auto it = m.find(top);
      return it == m.end() ? std::nan("") : it->second;
    };
    out << "," << fmt_metric(at(c.metrics.map_at)) << ","
        << fmt_metric(at(c.metrics.wap_at)) << ","
        << fmt_metric(at(c.metrics.wmcv_at));
  }
  return out.str();
}

/// Mean/std summary over the seed rows of one (model, alpha) cell group.
void append_summary(const ExperimentConfig& cfg, std::ostream& out,
                    const std::vector<const CellResult*>& group) {
  auto stat_rows = [&](auto extract, CellResult& mean_row, CellResult& std_row,
                       auto assign) {
    std::vector<double> vals;
    for (const CellResult* c : group) {
      const double v = extract(*c);
      if (std::isfinite(v)) vals.push_back(v);
    }
    double mean = std::nan(""), sd = std::nan("");
    if (!vals.empty()) {
      mean = 0.0;
      for (double v : vals) mean += v;
      mean /= vals.size();
      sd = 0.0;
      for (double v : vals) sd += (v - mean) * (v - mean);
      sd = vals.size() > 1 ? std::sqrt(sd / (vals.size() - 1)) : 0.0;
    }
    assign(mean_row, mean);
    assign(std_row, sd);
  };

  CellResult mean_row = *group.front();
  CellResult std_row = *group.front();
  mean_row.status = std_row.status = "summary";
  mean_row.stop_reason = std_row.stop_reason = "";
  mean_row.iterations = std_row.iterations = 0;

  stat_rows([](const CellResult& c) { return c.metrics.rmse; }, mean_row,
            std_row, [](CellResult& c, double v) { c.metrics.rmse = v; });
  stat_rows([](const CellResult& c) { return c.metrics.pairwise01; }, mean_row,
            std_row, [](CellResult& c, double v) { c.metrics.pairwise01 = v; });
  stat_rows([](const CellResult& c) { return c.metrics.capacity_loss; },
            mean_row, std_row,
            [](CellResult& c, double v) { c.metrics.capacity_loss = v; });
  stat_rows([](const CellResult& c) { return c.metrics.overall; }, mean_row,
            std_row, [](CellResult& c, double v) { c.metrics.overall = v; });
  for (int top : cfg.topk) {
    stat_rows(
        [top](const CellResult& c) {
          auto it = c.metrics.map_at.find(top);
          return it == c.metrics.map_at.end() ? std::nan("") : it->second;
        },
        mean_row, std_row,
        [top](CellResult& c, double v) { c.metrics.map_at[top] = v; });
    stat_rows(
        [top](const CellResult& c) {
          auto it = c.metrics.wap_at.find(top);
          return it == c.metrics.wap_at.end() ? std::nan("") : it->second;
        },
        mean_row, std_row,
        [top](CellResult& c, double v) { c.metrics.wap_at[top] = v; });
    stat_rows(
        [top](const CellResult& c) {
          auto it = c.metrics.wmcv_at.find(top);
          return it == c.metrics.wmcv_at.end() ? std::nan("") : it->second;
        },
        mean_row, std_row,
        [top](CellResult& c, double v) { c.metrics.wmcv_at[top] = v; });
  }
  out << metrics_row(cfg, mean_row, "mean") << "\n";
  out << metrics_row(cfg, std_row, "std") << "\n";
}

}  // namespace

void cmd_train(const ExperimentConfig& cfg, const std::string& model,
               double alpha, std::uint64_t seed) {
  const CellResult res = run_cell(cfg, model, alpha, seed);
  if (res.status != "ok") throw std::runtime_error(res.status);
}

void cmd_sweep(const ExperimentConfig& cfg) {
  struct Cell {
    std::string model;
    double alpha;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (const auto& model_name : cfg.models) {
    const ModelSpec spec = parse_model(model_name);
    std::vector<double> alphas;
    if (spec.variant == "constrained") alphas = cfg.alphas;
    else if (spec.variant == "onlycap") alphas = {1.0};
    else alphas = {0.0};  // unconstrained and postprocess
    for (double a : alphas)
      for (std::uint64_t s : cfg.effective_seeds())
        cells.push_back({model_name, a, s});
  }

  std::vector<CellResult> results(cells.size());
  const int threads = cfg.reference_mode ? 1 : std::max(1, cfg.threads);
  if (threads == 1) {
    for (std::size_t c = 0; c < cells.size(); ++c)
      results[c] = run_cell(cfg, cells[c].model, cells[c].alpha, cells[c].seed);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
      pool.emplace_back([&] {
        for (std::size_t c = next.fetch_add(1); c < cells.size();
             c = next.fetch_add(1))
          results[c] =
              run_cell(cfg, cells[c].model, cells[c].alpha, cells[c].seed);
      });
    for (auto& th : pool) th.join();
  }

  // Atomic publish: write fully, then rename into place.
  fs::create_directories(cfg.out_dir);
  const std::string final_path = artifact(cfg, "metrics.csv");
  const std::string tmp_path = final_path + ".tmp";
  {
    std::ofstream out(tmp_path);
    if (!out) throw std::runtime_error("cannot write " + tmp_path);
    out << metrics_header(cfg) << "\n";
    std::size_t c = 0;
    while (c < results.size()) {
      // Rows are grouped by (model, alpha) with seeds contiguous.
      std::size_t end = c;
      std::vector<const CellResult*> group;
      while (end < results.size() && results[end].model == results[c].model &&
             results[end].alpha == results[c].alpha) {
        out << metrics_row(cfg, results[end], std::to_string(results[end].seed))
            << "\n";
        group.push_back(&results[end]);
        ++end;
      }
      append_summary(cfg, out, group);
      c = end;
    }
  }
  fs::rename(tmp_path, final_path);
}

void cmd_baseline(const ExperimentConfig& cfg) {
  // Distinct families among the configured models.
  std::vector<std::string> families;
  for (const auto& m : cfg.models) {
    const std::string fam = parse_model(m).family;
    if (std::find(families.begin(), families.end(), fam) == families.end())
      families.push_back(fam);
  }

  const std::string final_path = artifact(cfg, "baseline.csv");
  const std::string tmp_path = final_path + ".tmp";
  std::ofstream out(tmp_path);
  if (!out) throw std::runtime_error("cannot write " + tmp_path);
  std::string header = "dataset,model,seed,config_hash";
  for (int top : cfg.topk)
    header += ",map_at_" + std::to_string(top) + ",wap_at_" +
              std::to_string(top) + ",wmcv_at_" + std::to_string(top);
  out << header << "\n";

  for (const auto& fam : families) {
    for (std::uint64_t seed : cfg.effective_seeds()) {
      const std::string ckpt = checkpoint_path(cfg, fam, 0.0, seed);
      if (!fs::exists(ckpt))
        throw std::runtime_error("missing unconstrained checkpoint " + ckpt +
                                 " (train '" + fam + "' at alpha=0 first)");
      const LatentModel model = load_checkpoint(ckpt);
      const PreparedData data = load_prepared(cfg, seed);
      const Eigen::MatrixXd scores = model.predict_all();
      std::vector<std::vector<int>> candidates(data.test.num_users());
      for (int i = 0; i < data.test.num_users(); ++i) {
        for (int idx : data.test.by_user(i))
          candidates[i].push_back(data.test.ratings()[idx].item);
        std::sort(candidates[i].begin(), candidates[i].end());
      }
      const auto rel = relevant_items(data.test);
      out << fs::path(cfg.data_path).filename().string() << ",postprocess-"
          << fam << "," << seed << "," << hash_hex(cfg.config_hash());
      for (int top : cfg.topk) {
        const RankedList ranked =
            post_process_baseline(scores, data.ctx, top, &candidates);
        out << "," << fmt_metric(map_at_k(ranked, rel, top)) << ","
            << fmt_metric(wap_at_k(ranked, rel, data.ctx.propensities, top))
            << ","
            << fmt_metric(
                   wmcv_at_k(ranked, data.ctx, data.test.num_items(), top));
      }
      out << "\n";
    }
  }
  out.close();
  fs::rename(tmp_path, final_path);
}

void cmd_eval(const ExperimentConfig& cfg, const std::string& model_name,
              double alpha, std::uint64_t seed) {
  const std::string ckpt = checkpoint_path(cfg, model_name, alpha, seed);
  if (!fs::exists(ckpt))
    throw std::runtime_error("missing checkpoint " + ckpt);
  const ModelSpec spec = parse_model(model_name);
  const LatentModel model = load_checkpoint(ckpt);
  const PreparedData data = load_prepared(cfg, seed);

  CellResult res;
  res.model = model_name;
  res.alpha = alpha;
  res.seed = seed;
  res.stop_reason = "loaded";
  res.metrics = evaluate_model(cfg, spec, alpha, model, data);

  const std::string path =
      artifact(cfg, "eval_" + cell_tag(model_name, alpha, seed) + ".csv");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << metrics_header(cfg) << "\n"
      << metrics_row(cfg, res, std::to_string(seed)) << "\n";
}

}  // namespace capcf
