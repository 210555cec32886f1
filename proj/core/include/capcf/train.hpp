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

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "capcf/data.hpp"
#include "capcf/model.hpp"
#include "capcf/objective.hpp"

namespace capcf {

/// Per-parameter squared-gradient accumulators; entries are monotone
/// non-decreasing across iterations.
struct AdagradState {
  Eigen::MatrixXd accum_u;  // k x M
  Eigen::MatrixXd accum_v;  // k x N
  Eigen::MatrixXd accum_x;  // L' x M, empty when non-geo
  double epsilon = 1e-8;
};

struct TrainTrace {
  std::vector<ObjectiveBreakdown> objectives;  // one per iteration
  enum class StopReason { kConverged, kMaxIters } stop_reason =
      StopReason::kMaxIters;
  int iterations = 0;
  int clipped_gradients = 0;  // exponential-surrogate norm clipping events
};

/// Shared per-block state: slack and surrogate weight per item, evaluated
/// once per parameter block at the block's model snapshot.
struct CapacityBlockState {
  Eigen::VectorXd delta;   // N: c_j - E[usage(j)]
  Eigen::VectorXd weight;  // N: surrogate_weight(kind, delta_j)
};

CapacityBlockState capacity_block_state(const LatentModel& model,
                                        const ContextVectors& ctx,
                                        SurrogateKind kind);

// Capacity-term gradients (excluding the alpha factor, which the caller
// applies). Per-vector entry points recompute the block state themselves.
Eigen::VectorXd grad_capacity_u(const LatentModel& model,
                                const ContextVectors& ctx, SurrogateKind kind,
                                int i);
Eigen::VectorXd grad_capacity_v(const LatentModel& model,
                                const ContextVectors& ctx, SurrogateKind kind,
                                int j);
Eigen::VectorXd grad_capacity_x(const LatentModel& model,
                                const ContextVectors& ctx, SurrogateKind kind,
                                int i);

// Whole-block capacity gradients at a shared state; these are what the
// training loop consumes.
Eigen::MatrixXd capacity_grad_u_block(const LatentModel& model,
                                      const Eigen::VectorXd& p,
                                      const CapacityBlockState& state);
Eigen::MatrixXd capacity_grad_v_block(const LatentModel& model,
                                      const Eigen::VectorXd& p,
                                      const CapacityBlockState& state);
Eigen::MatrixXd capacity_grad_x_block(const LatentModel& model,
                                      const Eigen::VectorXd& p,
                                      const CapacityBlockState& state);

// Accuracy-term gradients (excluding the (1-alpha) factor) for a whole
// block: k x M for U, k x N for V, L' x M for X.
Eigen::MatrixXd accuracy_grad_u_block(const LatentModel& model,
                                      const RatingsDataset& train,
                                      AccuracyKind kind);
Eigen::MatrixXd accuracy_grad_v_block(const LatentModel& model,
                                      const RatingsDataset& train,
                                      AccuracyKind kind);
Eigen::MatrixXd accuracy_grad_x_block(const LatentModel& model,
                                      const RatingsDataset& train,
                                      AccuracyKind kind);

/// Accuracy gradient for one vector (u_i, v_j, or x_i).
enum class GradTarget { kUser, kItem, kActivity };
Eigen::VectorXd grad_accuracy(const LatentModel& model,
                              const RatingsDataset& train, AccuracyKind kind,
                              GradTarget which, int index);

/// Deterministic N(0, init_scale^2) factor initialization.
LatentModel init_model(const TrainConfig& cfg, int num_users, int num_items,
                       const Eigen::SparseMatrix<double>* influence);

/// Alternating block minimization with Adagrad. Updates all u_i at the
/// iteration-start snapshot, then all v_j with U already advanced, then all
/// x_i (geo only). Stops when the objective improvement drops below cfg.tol
/// or after cfg.max_iters iterations.
std::pair<LatentModel, TrainTrace> train(const RatingsDataset& train_data,
                                         const ContextVectors& ctx,
                                         const TrainConfig& cfg,
                                         const Eigen::SparseMatrix<double>*
                                             influence = nullptr);

void write_trace_csv(const std::string& path, const TrainTrace& trace);

}  // namespace capcf
