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

#include "capcf/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "capcf/math.hpp"

namespace capcf {

double expected_usage(const LatentModel& model, const Eigen::VectorXd& p,
                      int j) {
  if (p.size() != model.num_users())
    throw std::invalid_argument("propensity dimension mismatch");
  Eigen::VectorXd scores = model.U.transpose() * model.V.col(j);
  if (model.geo()) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(model.Y, j); it; ++it)
      scores += model.X.row(it.row()).transpose() * it.value();
  }
  double e = 0.0;
  for (int i = 0; i < scores.size(); ++i) e += p[i] * sigmoid(scores[i]);
  return e;
}

Eigen::VectorXd expected_usage_all(const LatentModel& model,
                                   const Eigen::VectorXd& p) {
  Eigen::VectorXd e(model.num_items());
  for (int j = 0; j < model.num_items(); ++j)
    e[j] = expected_usage(model, p, j);
  return e;
}

double surrogate_loss(SurrogateKind kind, double delta) {
  switch (kind) {
    case SurrogateKind::kLogistic:
      return stable_log1pexp_neg(delta);
    case SurrogateKind::kExponential:
      if (delta < -700.0) return std::numeric_limits<double>::infinity();
      return std::exp(-delta);
    case SurrogateKind::kHinge:
      return std::max(-delta, 0.0);
  }
  throw std::logic_error("unreachable");
}

double surrogate_weight(SurrogateKind kind, double delta) {
  switch (kind) {
    case SurrogateKind::kLogistic:
      return sigmoid(-delta);
    case SurrogateKind::kExponential:
      if (delta < -700.0) return std::numeric_limits<double>::infinity();
      return std::exp(-delta);
    case SurrogateKind::kHinge:
      return delta < 0.0 ? 1.0 : 0.0;
  }
  throw std::logic_error("unreachable");
}

double capacity_term(const LatentModel& model, const ContextVectors& ctx,
                     SurrogateKind kind) {
  const int n = model.num_items();
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    const double delta =
        ctx.capacities[j] - expected_usage(model, ctx.propensities, j);
    sum += surrogate_loss(kind, delta);
  }
  return sum / n;
}

double accuracy_term(const LatentModel& model, const RatingsDataset& train,
                     AccuracyKind kind) {
  if (kind == AccuracyKind::kSquare) {
    double sum = 0.0;
    for (const Rating& r : train.ratings()) {
      const double resid = r.value - model.predict(r.user, r.item);
      sum += resid * resid;
    }
    return sum;
  }
  // BPR: full triple sum over (user, positive, negative).
  double sum = 0.0;
  for (int i = 0; i < train.num_users(); ++i) {
    const auto& pos = train.positives(i);
    const auto& neg = train.negatives(i);
    if (pos.empty() || neg.empty()) continue;  // user contributes 0
    for (int k : pos) {
      const double rk = model.predict(i, k);
      for (int j : neg)
        sum += stable_log1pexp_neg(rk - model.predict(i, j));
    }
  }
  return sum;
}

ObjectiveBreakdown objective_value(const LatentModel& model,
                                   const RatingsDataset& train,
                                   const ContextVectors& ctx,
                                   const TrainConfig& cfg) {
  if (cfg.geo != model.geo())
    throw std::invalid_argument("config geo flag does not match model");
  ObjectiveBreakdown b;
  b.alpha = cfg.alpha;
  b.accuracy = cfg.alpha < 1.0 ? accuracy_term(model, train, cfg.accuracy) : 0.0;
  b.capacity = cfg.alpha > 0.0 ? capacity_term(model, ctx, cfg.surrogate) : 0.0;
  b.regularization =
      cfg.lambda * (model.U.squaredNorm() + model.V.squaredNorm() +
                    (model.geo() ? model.X.squaredNorm() : 0.0));
  b.total = (1.0 - cfg.alpha) * b.accuracy + cfg.alpha * b.capacity +
            b.regularization;
  return b;
}

}  // namespace capcf
