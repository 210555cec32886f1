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
#include <map>
#include <vector>

#include "capcf/data.hpp"
#include "capcf/model.hpp"

namespace capcf {

/// Per-user item lists sorted by predicted score descending, ties broken by
/// ascending item index. Users may have empty lists (no candidates).
using RankedList = std::vector<std::vector<int>>;

struct MetricsReport {
  double rmse = 0.0;
  double pairwise01 = 0.0;
  double capacity_loss = 0.0;
  double overall = 0.0;
  std::map<int, double> map_at;   // top -> MAP@top
  std::map<int, double> wap_at;   // top -> WAP@top
  std::map<int, double> wmcv_at;  // top -> WMCV@top
};

/// Per-user-normalized RMSE: sqrt(mean_i mean_{j in L_i,test} resid^2).
/// Users without test ratings are excluded from the outer mean.
double rmse(const LatentModel& model, const RatingsDataset& test);

/// Fraction of incorrectly ordered (negative, positive) test pairs, ties
/// counted as errors, averaged over users with both sets non-empty.
double pairwise01_loss(const LatentModel& model, const RatingsDataset& test);

/// objective::capacity_term on the trained model, exposed for reporting.
double capacity_loss_metric(const LatentModel& model,
                            const ContextVectors& ctx,
                            SurrogateKind surrogate = SurrogateKind::kLogistic);

/// square: (1-alpha)*rmse^2 + alpha*caploss;
/// bpr: (1-alpha)*pairwise01 + alpha*caploss.
double overall_metric(double rmse_or_pairwise, double capacity_loss,
                      double alpha, AccuracyKind kind);

/// Rank each user's test items by model score (candidate set is the user's
/// test items only).
RankedList rank_test_items(const LatentModel& model,
                           const RatingsDataset& test);

/// Relevance labels: relevant(i) = items rated positive by user i in test.
std::vector<std::vector<int>> relevant_items(const RatingsDataset& test);

/// AP@k per the precision-at-relevant-positions formula, normalized by
/// min(k, #relevant); mean over users with >= 1 relevant item.
double map_at_k(const RankedList& ranked,
                const std::vector<std::vector<int>>& relevant, int k);

/// Propensity-weighted MAP@k.
double wap_at_k(const RankedList& ranked,
                const std::vector<std::vector<int>>& relevant,
                const Eigen::VectorXd& propensities, int k);

/// Fraction of items whose top-k recommendation propensity mass reaches
/// capacity: (1/N) sum_j 1[ sum_{i in Re^top(j)} p_i >= c_j ].
double wmcv_at_k(const RankedList& ranked, const ContextVectors& ctx,
                 int num_items, int k);

/// Capacity-respecting re-ranking of an unconstrained score matrix: item j
/// is recommendable only to its floor(c_j) best-scored users; each user's
/// top-k is drawn from their recommendable items. Optional per-user
/// candidate sets restrict both sides.
RankedList post_process_baseline(
    const Eigen::MatrixXd& scores, const ContextVectors& ctx, int k,
    const std::vector<std::vector<int>>* candidates = nullptr);

}  // namespace capcf
