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

#include "capcf/train.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <stdexcept>

#include "capcf/math.hpp"

namespace capcf {

namespace {

constexpr double kExpClipNorm = 1e3;

Eigen::MatrixXd sigmoid_matrix(const Eigen::MatrixXd& m) {
  return m.unaryExpr([](double v) { return sigmoid(v); });
}

/// A_ij = p_i * w_j * sigma(rhat_ij) * sigma(-rhat_ij); the shared factor in
/// all three capacity gradients.
Eigen::MatrixXd capacity_factor(const LatentModel& model,
                                const Eigen::VectorXd& p,
                                const Eigen::VectorXd& weight) {
  const Eigen::MatrixXd sig = sigmoid_matrix(model.predict_all());
  Eigen::MatrixXd a =
      sig.array() * (1.0 - sig.array()) *
      (p * weight.transpose()).array();
  return a;
}

void add_sparse_col(Eigen::VectorXd& dst, const Eigen::SparseMatrix<double>& m,
                    int col, double coef) {
  for (Eigen::SparseMatrix<double>::InnerIterator it(m, col); it; ++it)
    dst[it.row()] += coef * it.value();
}

}  // namespace

CapacityBlockState capacity_block_state(const LatentModel& model,
                                        const ContextVectors& ctx,
                                        SurrogateKind kind) {
  CapacityBlockState st;
  st.delta = ctx.capacities - expected_usage_all(model, ctx.propensities);
  st.weight.resize(st.delta.size());
  for (int j = 0; j < st.delta.size(); ++j)
    st.weight[j] = surrogate_weight(kind, st.delta[j]);
  return st;
}

Eigen::MatrixXd capacity_grad_u_block(const LatentModel& model,
                                      const Eigen::VectorXd& p,
                                      const CapacityBlockState& state) {
  const Eigen::MatrixXd a = capacity_factor(model, p, state.weight);
  return (model.V * a.transpose()) / model.num_items();
}

Eigen::MatrixXd capacity_grad_v_block(const LatentModel& model,
                                      const Eigen::VectorXd& p,
                                      const CapacityBlockState& state) {
  const Eigen::MatrixXd a = capacity_factor(model, p, state.weight);
  return (model.U * a) / model.num_items();
}

Eigen::MatrixXd capacity_grad_x_block(const LatentModel& model,
                                      const Eigen::VectorXd& p,
                                      const CapacityBlockState& state) {
  const Eigen::MatrixXd a = capacity_factor(model, p, state.weight);
  return (model.Y * a.transpose()) / model.num_items();
}

Eigen::VectorXd grad_capacity_u(const LatentModel& model,
                                const ContextVectors& ctx, SurrogateKind kind,
                                int i) {
  const auto state = capacity_block_state(model, ctx, kind);
  return capacity_grad_u_block(model, ctx.propensities, state).col(i);
}

Eigen::VectorXd grad_capacity_v(const LatentModel& model,
                                const ContextVectors& ctx, SurrogateKind kind,
                                int j) {
  const auto state = capacity_block_state(model, ctx, kind);
  return capacity_grad_v_block(model, ctx.propensities, state).col(j);
}

Eigen::VectorXd grad_capacity_x(const LatentModel& model,
                                const ContextVectors& ctx, SurrogateKind kind,
                                int i) {
  if (!model.geo())
    throw std::invalid_argument("grad_capacity_x requires a geo model");
  const auto state = capacity_block_state(model, ctx, kind);
  return capacity_grad_x_block(model, ctx.propensities, state).col(i);
}

namespace {

struct BprBlockGrads {
  Eigen::MatrixXd u;  // k x M
  Eigen::MatrixXd v;  // k x N
  Eigen::MatrixXd x;  // L' x M, empty when non-geo
};

/// One pass over all (user, positive, negative) triples accumulating the
/// three pair-loss gradient blocks.
BprBlockGrads bpr_grads(const LatentModel& model, const RatingsDataset& train) {
  BprBlockGrads g;
  g.u.setZero(model.rank(), model.num_users());
  g.v.setZero(model.rank(), model.num_items());
  if (model.geo()) g.x.setZero(model.geo_dim(), model.num_users());
  for (int i = 0; i < train.num_users(); ++i) {
    const auto& pos = train.positives(i);
    const auto& neg = train.negatives(i);
    if (pos.empty() || neg.empty()) continue;
    for (int k : pos) {
      const double rk = model.predict(i, k);
      for (int j : neg) {
        const double w = sigmoid(-(rk - model.predict(i, j)));
        g.u.col(i) -= w * (model.V.col(k) - model.V.col(j));
        g.v.col(k) -= w * model.U.col(i);
        g.v.col(j) += w * model.U.col(i);
        if (model.geo()) {
          Eigen::VectorXd xg = g.x.col(i);
          add_sparse_col(xg, model.Y, k, -w);
          add_sparse_col(xg, model.Y, j, w);
          g.x.col(i) = xg;
        }
      }
    }
  }
  return g;
}

struct SquareBlockGrads {
  Eigen::MatrixXd u;
  Eigen::MatrixXd v;
  Eigen::MatrixXd x;
};

SquareBlockGrads square_grads(const LatentModel& model,
                              const RatingsDataset& train) {
  SquareBlockGrads g;
  g.u.setZero(model.rank(), model.num_users());
  g.v.setZero(model.rank(), model.num_items());
  if (model.geo()) g.x.setZero(model.geo_dim(), model.num_users());
  for (const Rating& r : train.ratings()) {
    const double coef = -2.0 * (r.value - model.predict(r.user, r.item));
    g.u.col(r.user) += coef * model.V.col(r.item);
    g.v.col(r.item) += coef * model.U.col(r.user);
    if (model.geo()) {
      Eigen::VectorXd xg = g.x.col(r.user);
      add_sparse_col(xg, model.Y, r.item, coef);
      g.x.col(r.user) = xg;
    }
  }
  return g;
}

}  // namespace

Eigen::MatrixXd accuracy_grad_u_block(const LatentModel& model,
                                      const RatingsDataset& train,
                                      AccuracyKind kind) {
  return kind == AccuracyKind::kSquare ? square_grads(model, train).u
                                       : bpr_grads(model, train).u;
}

Eigen::MatrixXd accuracy_grad_v_block(const LatentModel& model,
                                      const RatingsDataset& train,
                                      AccuracyKind kind) {
  return kind == AccuracyKind::kSquare ? square_grads(model, train).v
                                       : bpr_grads(model, train).v;
}

Eigen::MatrixXd accuracy_grad_x_block(const LatentModel& model,
                                      const RatingsDataset& train,
                                      AccuracyKind kind) {
  return kind == AccuracyKind::kSquare ? square_grads(model, train).x
                                       : bpr_grads(model, train).x;
}

Eigen::VectorXd grad_accuracy(const LatentModel& model,
                              const RatingsDataset& train, AccuracyKind kind,
                              GradTarget which, int index) {
  switch (which) {
    case GradTarget::kUser:
      return accuracy_grad_u_block(model, train, kind).col(index);
    case GradTarget::kItem:
      return accuracy_grad_v_block(model, train, kind).col(index);
    case GradTarget::kActivity:
      if (!model.geo())
        throw std::invalid_argument("activity gradient requires a geo model");
      return accuracy_grad_x_block(model, train, kind).col(index);
  }
  throw std::logic_error("unreachable");
}

LatentModel init_model(const TrainConfig& cfg, int num_users, int num_items,
                       const Eigen::SparseMatrix<double>* influence) {
  LatentModel m;
  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, cfg.init_scale);
  m.U.resize(cfg.rank, num_users);
  m.V.resize(cfg.rank, num_items);
  for (int i = 0; i < m.U.size(); ++i) m.U.data()[i] = gauss(rng);
  for (int i = 0; i < m.V.size(); ++i) m.V.data()[i] = gauss(rng);
  if (cfg.geo) {
    if (!influence)
      throw std::invalid_argument("geo training requires an influence matrix");
    if (influence->cols() != num_items)
      throw std::invalid_argument("influence matrix item count mismatch");
    m.Y = *influence;
    m.X.resize(m.Y.rows(), num_users);
    for (int i = 0; i < m.X.size(); ++i) m.X.data()[i] = gauss(rng);
  }
  return m;
}

namespace {

/// Adagrad step with the current squared gradient included in the
/// accumulator: theta -= g / (eps + sqrt(accum)).
void adagrad_update(Eigen::MatrixXd& param, Eigen::MatrixXd& accum,
                    const Eigen::MatrixXd& grad, double eps) {
  accum.array() += grad.array().square();
  param.array() -= grad.array() / (eps + accum.array().sqrt());
}

int clip_columns(Eigen::MatrixXd& grad, double max_norm) {
  int clipped = 0;
  for (int c = 0; c < grad.cols(); ++c) {
    const double n = grad.col(c).norm();
    if (std::isfinite(n) && n > max_norm) {
      grad.col(c) *= max_norm / n;
      ++clipped;
    }
  }
  return clipped;
}

}  // namespace

std::pair<LatentModel, TrainTrace> train(const RatingsDataset& train_data,
                                         const ContextVectors& ctx,
                                         const TrainConfig& cfg,
                                         const Eigen::SparseMatrix<double>*
                                             influence) {
  cfg.validate();
  if (ctx.propensities.size() != train_data.num_users() ||
      ctx.capacities.size() != train_data.num_items())
    throw std::invalid_argument("context vector dimension mismatch");

  LatentModel model = init_model(cfg, train_data.num_users(),
                                 train_data.num_items(),
                                 cfg.geo ? influence : nullptr);
  AdagradState st;
  st.epsilon = cfg.adagrad_epsilon;
  st.accum_u.setZero(model.U.rows(), model.U.cols());
  st.accum_v.setZero(model.V.rows(), model.V.cols());
  if (cfg.geo) st.accum_x.setZero(model.X.rows(), model.X.cols());

  TrainTrace trace;
  const bool use_capacity = cfg.alpha > 0.0;
  const bool use_accuracy = cfg.alpha < 1.0;
  const bool clip = cfg.surrogate == SurrogateKind::kExponential;

  auto block_grad = [&](char block) -> Eigen::MatrixXd {
    Eigen::MatrixXd g;
    switch (block) {
      case 'u': g.setZero(model.U.rows(), model.U.cols()); break;
      case 'v': g.setZero(model.V.rows(), model.V.cols()); break;
      default:  g.setZero(model.X.rows(), model.X.cols()); break;
    }
    if (use_accuracy) {
      switch (block) {
        case 'u':
          g += (1.0 - cfg.alpha) *
               accuracy_grad_u_block(model, train_data, cfg.accuracy);
          break;
        case 'v':
          g += (1.0 - cfg.alpha) *
               accuracy_grad_v_block(model, train_data, cfg.accuracy);
          break;
        default:
          g += (1.0 - cfg.alpha) *
               accuracy_grad_x_block(model, train_data, cfg.accuracy);
          break;
      }
    }
    if (use_capacity) {
      const auto state = capacity_block_state(model, ctx, cfg.surrogate);
      switch (block) {
        case 'u':
          g += cfg.alpha *
               capacity_grad_u_block(model, ctx.propensities, state);
          break;
        case 'v':
          g += cfg.alpha *
               capacity_grad_v_block(model, ctx.propensities, state);
          break;
        default:
          g += cfg.alpha *
               capacity_grad_x_block(model, ctx.propensities, state);
          break;
      }
    }
    switch (block) {
      case 'u': g += 2.0 * cfg.lambda * model.U; break;
      case 'v': g += 2.0 * cfg.lambda * model.V; break;
      default:  g += 2.0 * cfg.lambda * model.X; break;
    }
    if (clip) trace.clipped_gradients += clip_columns(g, kExpClipNorm);
    return g;
  };

  double prev = std::numeric_limits<double>::infinity();
  for (int t = 0; t < cfg.max_iters; ++t) {
    {
      Eigen::MatrixXd g = block_grad('u');
      adagrad_update(model.U, st.accum_u, g, st.epsilon);
    }
    {
      Eigen::MatrixXd g = block_grad('v');
      adagrad_update(model.V, st.accum_v, g, st.epsilon);
    }
    if (cfg.geo) {
      Eigen::MatrixXd g = block_grad('x');
      adagrad_update(model.X, st.accum_x, g, st.epsilon);
    }

    const ObjectiveBreakdown b = objective_value(model, train_data, ctx, cfg);
    if (!std::isfinite(b.total)) {
      std::string diag = "non-finite training objective at iteration " +
                         std::to_string(t);
      if (cfg.surrogate == SurrogateKind::kExponential)
        diag += " (exponential surrogate overflow)";
      throw std::runtime_error(diag);
    }
    trace.objectives.push_back(b);
    trace.iterations = t + 1;
    if (t > 0 && std::abs(prev - b.total) < cfg.tol) {
      trace.stop_reason = TrainTrace::StopReason::kConverged;
      return {std::move(model), std::move(trace)};
    }
    prev = b.total;
  }
  trace.stop_reason = TrainTrace::StopReason::kMaxIters;
  return {std::move(model), std::move(trace)};
}

void write_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  out << "iter,accuracy,capacity,regularization,total\n";
  for (std::size_t t = 0; t < trace.objectives.size(); ++t) {
    const auto& b = trace.objectives[t];
    out << t << "," << b.accuracy << "," << b.capacity << ","
        << b.regularization << "," << b.total << "\n";
  }
}

}  // namespace capcf
