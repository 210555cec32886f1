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

#include <CLI11.hpp>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "capcf/experiment.hpp"

namespace {

struct CommonOpts {
  std::string config_file;
  std::vector<std::string> overrides;  // key=value
};

capcf::ExperimentConfig resolve_config(const CommonOpts& opts) {
  capcf::ExperimentConfig cfg;
  if (!opts.config_file.empty())
    cfg = capcf::load_config_file(opts.config_file);
  for (const auto& kv : opts.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("override must be key=value: " + kv);
    capcf::apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("-c,--config", opts.config_file,
                  "flat key=value config file");
  cmd->add_option("-s,--set", opts.overrides,
                  "config override, key=value (repeatable)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capacity-constrained latent-factor recommendation"};
  app.require_subcommand(1);

  CommonOpts prepare_opts, train_opts, sweep_opts, baseline_opts, eval_opts;
  std::string train_model = "cap-pmf", eval_model = "cap-pmf";
  double train_alpha = 0.2, eval_alpha = 0.2;
  std::uint64_t train_seed = 1, eval_seed = 1;
  int threads = 1;
  bool reference_mode = false;

  auto* prepare = app.add_subcommand(
      "prepare", "parse, filter, split and write dataset artifacts");
  add_common(prepare, prepare_opts);

  auto* train = app.add_subcommand("train", "train one (model, alpha, seed)");
  add_common(train, train_opts);
  train->add_option("--model", train_model, "model cell, e.g. cap-pmf");
  train->add_option("--alpha", train_alpha, "trade-off parameter in [0,1]");
  train->add_option("--seed", train_seed, "split/init seed");

  auto* sweep = app.add_subcommand(
      "sweep", "train and evaluate every (model, alpha, seed) cell");
  add_common(sweep, sweep_opts);
  sweep->add_option("--threads", threads, "sweep worker pool size");
  sweep->add_flag("--reference-mode", reference_mode,
                  "single-threaded deterministic reference run");

  auto* baseline = app.add_subcommand(
      "baseline", "capacity-respecting post-processing of unconstrained runs");
  add_common(baseline, baseline_opts);

  auto* eval = app.add_subcommand("eval", "evaluate an existing checkpoint");
  add_common(eval, eval_opts);
  eval->add_option("--model", eval_model, "model cell name");
  eval->add_option("--alpha", eval_alpha, "alpha the checkpoint was trained at");
  eval->add_option("--seed", eval_seed, "seed the checkpoint was trained at");

  CLI11_PARSE(app, argc, argv);

  try {
    if (prepare->parsed()) {
      capcf::cmd_prepare(resolve_config(prepare_opts));
    } else if (train->parsed()) {
      capcf::cmd_train(resolve_config(train_opts), train_model, train_alpha,
                       train_seed);
    } else if (sweep->parsed()) {
      auto cfg = resolve_config(sweep_opts);
      cfg.threads = threads;
      cfg.reference_mode = reference_mode;
      capcf::cmd_sweep(cfg);
    } else if (baseline->parsed()) {
      capcf::cmd_baseline(resolve_config(baseline_opts));
    } else if (eval->parsed()) {
      capcf::cmd_eval(resolve_config(eval_opts), eval_model, eval_alpha,
                      eval_seed);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
