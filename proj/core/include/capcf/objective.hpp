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

#include "capcf/data.hpp"
#include "capcf/model.hpp"

namespace capcf {

struct ObjectiveBreakdown {
  double accuracy = 0.0;
  double capacity = 0.0;
  double regularization = 0.0;
  double total = 0.0;
  double alpha = 0.0;
};

/// E[usage(j)] = sum_i p_i * sigmoid(rhat_ij).
double expected_usage(const LatentModel& model, const Eigen::VectorXd& p,
                      int j);

/// All N expected usages at once.
Eigen::VectorXd expected_usage_all(const LatentModel& model,
                                   const Eigen::VectorXd& p);

/// Surrogate penalty on the slack delta = c_j - E[usage(j)].
/// logistic: log(1+exp(-delta)) (stable form); exponential: exp(-delta),
/// +inf for delta < -700; hinge: max(-delta, 0).
double surrogate_loss(SurrogateKind kind, double delta);

/// -d/d(delta) surrogate_loss; the multiplier on capacity gradients.
/// logistic: sigmoid(-delta); exponential: exp(-delta); hinge: 1[delta<0].
double surrogate_weight(SurrogateKind kind, double delta);

/// (1/N) * sum_j surrogate_loss(kind, c_j - E[usage(j)]).
double capacity_term(const LatentModel& model, const ContextVectors& ctx,
                     SurrogateKind kind);

/// square: sum of squared residuals over observed ratings; bpr: full
/// positive x negative logistic pair sum per user (geo models score pairs
/// with the geo-augmented rhat difference).
double accuracy_term(const LatentModel& model, const RatingsDataset& train,
                     AccuracyKind kind);

/// total = (1-alpha)*accuracy + alpha*capacity
///         + lambda*(|U|_F^2 + |V|_F^2 [+ |X|_F^2]).
/// The regularizer is not scaled by alpha.
ObjectiveBreakdown objective_value(const LatentModel& model,
                                   const RatingsDataset& train,
                                   const ContextVectors& ctx,
                                   const TrainConfig& cfg);

}  // namespace capcf
