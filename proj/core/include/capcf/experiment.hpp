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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "capcf/context.hpp"
#include "capcf/data.hpp"
#include "capcf/geo.hpp"
#include "capcf/io.hpp"
#include "capcf/model.hpp"

namespace capcf {

/// Flat key=value experiment configuration; list values comma-separated.
/// Defaults follow the reference parameter setting (k=10, lambda=1e-5,
/// tol=1e-5, 3000 iterations, logistic surrogate).
struct ExperimentConfig {
  std::string data_path;
  std::string format = "movielens-tab";  // movielens-tab | checkin-tsv
  std::string poi_path;
  std::string feedback = "implicit01";   // implicit01 | explicit
  int min_ratings = 10;

  std::string capacity = "actual";
  std::string propensity = "actual";
  std::string capacity_file;    // optional override vectors
  std::string propensity_file;

  // Model cells: family in {pmf,bpr,geomf,geobpr}, variant encoded as
  // "cap-<family>" (constrained), "<family>" (unconstrained, alpha=0),
  // "onlycap-<family>" (alpha=1), "postprocess-<family>".
  std::vector<std::string> models = {"cap-pmf"};
  std::vector<double> alphas = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  std::string surrogate = "logistic";  // logistic | exponential | hinge
  int repetitions = 5;
  std::vector<std::uint64_t> seeds;  // default: 1..repetitions
  std::vector<int> topk = {1, 5, 10};
  std::string out_dir = "out";

  int rank = 10;
  double lambda = 1e-5;
  double tol = 1e-5;
  int max_iters = 3000;
  double init_scale = 0.1;
  double bandwidth = 1.0;

  int threads = 1;
  bool reference_mode = false;

  std::vector<std::uint64_t> effective_seeds() const;

  /// Sorted key=value lines; the SHA-256 of this text is the config hash
  /// stamped on every artifact.
  std::string canonical_text() const;
  ConfigHash config_hash() const { return sha256(canonical_text()); }
};

ExperimentConfig load_config_file(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key,
                        const std::string& value);

CapacityKind parse_capacity_kind(const std::string& s);
PropensityKind parse_propensity_kind(const std::string& s);
SurrogateKind parse_surrogate(const std::string& s);

/// Prepared, seed-stamped artifacts reloaded from out_dir.
struct PreparedData {
  RatingsDataset train;        // negatives included for implicit feedback
  RatingsDataset train_clean;  // pre-negative-sampling split
  RatingsDataset test;
  ContextVectors ctx;
  InfluenceMatrix influence;   // empty for non-geo datasets
  bool geo = false;
};

/// Filter, polarize, split, sample negatives, synthesize context vectors
/// and (for check-in data) the influence matrix; everything written under
/// cfg.out_dir, one set per seed.
void cmd_prepare(const ExperimentConfig& cfg);

PreparedData load_prepared(const ExperimentConfig& cfg, std::uint64_t seed);

/// Train one (model, alpha, seed) cell; writes checkpoint + trace CSV.
void cmd_train(const ExperimentConfig& cfg, const std::string& model,
               double alpha, std::uint64_t seed);

/// Train and evaluate every (model, alpha, seed) cell; writes metrics.csv
/// (one row per cell plus mean/std summary rows per (model, alpha)).
void cmd_sweep(const ExperimentConfig& cfg);

/// Capacity-respecting re-ranking of existing unconstrained checkpoints;
/// writes baseline.csv with MAP/WAP/WMCV per configured top.
void cmd_baseline(const ExperimentConfig& cfg);

/// Evaluate one existing checkpoint; writes a single-row metrics CSV.
void cmd_eval(const ExperimentConfig& cfg, const std::string& model,
              double alpha, std::uint64_t seed);

/// Conventional checkpoint path for a cell.
std::string checkpoint_path(const ExperimentConfig& cfg,
                            const std::string& model, double alpha,
                            std::uint64_t seed);

}  // namespace capcf
