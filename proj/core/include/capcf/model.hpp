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
#include <Eigen/Sparse>
#include <cstdint>
#include <stdexcept>

namespace capcf {

enum class SurrogateKind { kLogistic, kExponential, kHinge };
enum class AccuracyKind { kSquare, kBpr };

/// Latent factors. U is k x M (column u_i per user), V is k x N (column v_j
/// per item). The geo variant additionally carries the learned user activity
/// X (L' x M) and the fixed POI influence Y (L' x N); Y is never modified by
/// training.
struct LatentModel {
  Eigen::MatrixXd U;                 // k x M
  Eigen::MatrixXd V;                 // k x N
  Eigen::MatrixXd X;                 // L' x M, empty when non-geo
  Eigen::SparseMatrix<double> Y;     // L' x N, empty when non-geo

  bool geo() const { return X.size() > 0; }
  int rank() const { return static_cast<int>(U.rows()); }
  int num_users() const { return static_cast<int>(U.cols()); }
  int num_items() const { return static_cast<int>(V.cols()); }
  int geo_dim() const { return static_cast<int>(X.rows()); }

  /// u_i^T v_j, plus x_i^T y_j for geo models.
  double predict(int i, int j) const {
    if (i < 0 || i >= num_users() || j < 0 || j >= num_items())
      throw std::invalid_argument("predict: user/item index out of range");
    double r = U.col(i).dot(V.col(j));
    if (geo()) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(Y, j); it; ++it)
        r += X(it.row(), i) * it.value();
    }
    return r;
  }

  /// Predicted scores of user i for all items (length N).
  Eigen::VectorXd predict_user(int i) const {
    Eigen::VectorXd r = V.transpose() * U.col(i);
    if (geo()) r += Y.transpose() * X.col(i);
    return r;
  }

  /// Full score matrix, M x N.
  Eigen::MatrixXd predict_all() const {
    Eigen::MatrixXd r = U.transpose() * V;
    if (geo()) r += (X.transpose() * Y).eval();
    return r;
  }
};

/// Propensity vector p (length M, entries in [0,1]) and capacity vector c
/// (length N, entries > 0).
struct ContextVectors {
  Eigen::VectorXd propensities;
  Eigen::VectorXd capacities;

  void validate() const {
    for (int i = 0; i < propensities.size(); ++i)
      if (!(propensities[i] >= 0.0 && propensities[i] <= 1.0))
        throw std::invalid_argument("propensity outside [0,1]");
    for (int j = 0; j < capacities.size(); ++j)
      if (!(capacities[j] > 0.0))
        throw std::invalid_argument("capacity must be positive");
  }
};

struct TrainConfig {
  double alpha = 0.2;
  double lambda = 1e-5;
  int rank = 10;
  SurrogateKind surrogate = SurrogateKind::kLogistic;
  AccuracyKind accuracy = AccuracyKind::kSquare;
  bool geo = false;
  int max_iters = 3000;
  double tol = 1e-5;
  std::uint64_t seed = 0;
  double adagrad_epsilon = 1e-8;
  double init_scale = 0.1;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0))
      throw std::invalid_argument("alpha outside [0,1]");
    if (lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
    if (!(tol >= 0.0)) throw std::invalid_argument("tol must be >= 0");
    if (rank < 1) throw std::invalid_argument("rank must be >= 1");
  }
};

}  // namespace capcf
