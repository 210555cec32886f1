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

#include "capcf/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "capcf/objective.hpp"

namespace capcf {

namespace {

/// Sort item indices by score descending, ties by ascending item index.
void sort_by_score_desc(std::vector<int>& items,
                        const std::vector<double>& score) {
  std::sort(items.begin(), items.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
}

double ap_at_k(const std::vector<int>& ranked,
               const std::unordered_set<int>& rel, int k) {
  const int depth = std::min<int>(k, static_cast<int>(ranked.size()));
  int hits = 0;
  double sum = 0.0;
  for (int r = 0; r < depth; ++r) {
    if (rel.count(ranked[r])) {
      ++hits;
      sum += static_cast<double>(hits) / (r + 1);
    }
  }
  const int denom = std::min<int>(k, static_cast<int>(rel.size()));
  return denom == 0 ? 0.0 : sum / denom;
}

}  // namespace

double rmse(const LatentModel& model, const RatingsDataset& test) {
  if (test.ratings().empty()) throw std::invalid_argument("empty test set");
  double outer = 0.0;
  int users = 0;
  for (int i = 0; i < test.num_users(); ++i) {
    const auto& lst = test.by_user(i);
    if (lst.empty()) continue;
    double inner = 0.0;
    for (int idx : lst) {
      const Rating& r = test.ratings()[idx];
      const double resid = model.predict(r.user, r.item) - r.value;
      inner += resid * resid;
    }
    outer += inner / lst.size();
    ++users;
  }
  return std::sqrt(outer / users);
}

double pairwise01_loss(const LatentModel& model, const RatingsDataset& test) {
  double outer = 0.0;
  int users = 0;
  for (int i = 0; i < test.num_users(); ++i) {
    const auto& pos = test.positives(i);
    const auto& neg = test.negatives(i);
    if (pos.empty() || neg.empty()) continue;
    int wrong = 0;
    for (int j : neg) {
      const double rj = model.predict(i, j);
      for (int k : pos)
        if (rj >= model.predict(i, k)) ++wrong;
    }
    outer += static_cast<double>(wrong) / (pos.size() * neg.size());
    ++users;
  }
  if (users == 0)
    throw std::invalid_argument(
        "no user with both positive and negative test items");
  return outer / users;
}

double capacity_loss_metric(const LatentModel& model,
                            const ContextVectors& ctx,
                            SurrogateKind surrogate) {
  return capacity_term(model, ctx, surrogate);
}

double overall_metric(double rmse_or_pairwise, double capacity_loss,
                      double alpha, AccuracyKind kind) {
  const double acc = kind == AccuracyKind::kSquare
                         ? rmse_or_pairwise * rmse_or_pairwise
                         : rmse_or_pairwise;
  return (1.0 - alpha) * acc + alpha * capacity_loss;
}

RankedList rank_test_items(const LatentModel& model,
                           const RatingsDataset& test) {
  RankedList out(test.num_users());
  for (int i = 0; i < test.num_users(); ++i) {
    std::vector<int> items;
    std::vector<double> score(test.num_items(), 0.0);
    for (int idx : test.by_user(i)) {
      const int j = test.ratings()[idx].item;
      items.push_back(j);
      score[j] = model.predict(i, j);
    }
    sort_by_score_desc(items, score);
    out[i] = std::move(items);
  }
  return out;
}

std::vector<std::vector<int>> relevant_items(const RatingsDataset& test) {
  std::vector<std::vector<int>> out(test.num_users());
  for (int i = 0; i < test.num_users(); ++i) out[i] = test.positives(i);
  return out;
}

double map_at_k(const RankedList& ranked,
                const std::vector<std::vector<int>>& relevant, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  double sum = 0.0;
  int users = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (relevant[i].empty()) continue;
    std::unordered_set<int> rel(relevant[i].begin(), relevant[i].end());
    sum += ap_at_k(ranked[i], rel, k);
    ++users;
  }
  if (users == 0)
    throw std::invalid_argument("no user with relevant test items");
  return sum / users;
}

double wap_at_k(const RankedList& ranked,
                const std::vector<std::vector<int>>& relevant,
                const Eigen::VectorXd& propensities, int k) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  double num = 0.0, denom = 0.0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (relevant[i].empty()) continue;
    std::unordered_set<int> rel(relevant[i].begin(), relevant[i].end());
    num += propensities[static_cast<int>(i)] * ap_at_k(ranked[i], rel, k);
    denom += propensities[static_cast<int>(i)];
  }
  if (denom == 0.0) throw std::invalid_argument("zero total propensity");
  return num / denom;
}

double wmcv_at_k(const RankedList& ranked, const ContextVectors& ctx,
                 int num_items, int k) {
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(num_items);
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    const int depth = std::min<int>(k, static_cast<int>(ranked[i].size()));
    for (int r = 0; r < depth; ++r)
      mass[ranked[i][r]] += ctx.propensities[static_cast<int>(i)];
  }
  int violated = 0;
  for (int j = 0; j < num_items; ++j)
    if (mass[j] >= ctx.capacities[j]) ++violated;
  return static_cast<double>(violated) / num_items;
}

RankedList post_process_baseline(
    const Eigen::MatrixXd& scores, const ContextVectors& ctx, int k,
    const std::vector<std::vector<int>>* candidates) {
  const int M = static_cast<int>(scores.rows());
  const int N = static_cast<int>(scores.cols());

  auto is_candidate = [&](int i, int j) {
    if (!candidates) return true;
    const auto& c = (*candidates)[i];
    return std::binary_search(c.begin(), c.end(), j);
  };

  // Item j is recommendable only to its floor(c_j) best-scored eligible
  // users (ties broken by lower user index).
  std::vector<std::vector<char>> allowed(M, std::vector<char>(N, 0));
  for (int j = 0; j < N; ++j) {
    std::vector<int> users;
    for (int i = 0; i < M; ++i)
      if (is_candidate(i, j)) users.push_back(i);
    std::sort(users.begin(), users.end(), [&](int a, int b) {
      if (scores(a, j) != scores(b, j)) return scores(a, j) > scores(b, j);
      return a < b;
    });
    const int cap = static_cast<int>(std::floor(ctx.capacities[j]));
    const int take = std::min<int>(cap, static_cast<int>(users.size()));
    for (int t = 0; t < take; ++t) allowed[users[t]][j] = 1;
  }

  RankedList out(M);
  for (int i = 0; i < M; ++i) {
    std::vector<int> items;
    for (int j = 0; j < N; ++j)
      if (allowed[i][j]) items.push_back(j);
    std::vector<double> score(N);
    for (int j : items) score[j] = scores(i, j);
    sort_by_score_desc(items, score);
    if (static_cast<int>(items.size()) > k) items.resize(k);
    out[i] = std::move(items);
  }
  return out;
}

}  // namespace capcf
