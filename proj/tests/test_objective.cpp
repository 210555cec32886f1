#include <doctest.h>

#include <cmath>

#include "capcf/math.hpp"
#include "capcf/objective.hpp"
#include "test_util.hpp"

using namespace capcf;

TEST_CASE("expected_usage basics") {
  LatentModel m;
  m.U = Eigen::MatrixXd::Zero(2, 10);
  m.V = Eigen::MatrixXd::Zero(2, 3);

  Eigen::VectorXd p0 = Eigen::VectorXd::Zero(10);
  CHECK(expected_usage(m, p0, 0) == doctest::Approx(0.0));

  Eigen::VectorXd p1 = Eigen::VectorXd::Ones(10);
  CHECK(expected_usage(m, p1, 0) == doctest::Approx(5.0));  // 10 * sigmoid(0)
}

TEST_CASE("expected_usage scalar composition") {
  // M=2, p=(0.5,1.0), rhat=(0,2)
  LatentModel m;
  m.U.resize(1, 2);
  m.V.resize(1, 1);
  m.U << 0.0, 2.0;
  m.V << 1.0;
  Eigen::VectorXd p(2);
  p << 0.5, 1.0;
  CHECK(expected_usage(m, p, 0) ==
        doctest::Approx(0.5 * 0.5 + 1.0 * sigmoid(2.0)).epsilon(1e-12));
  CHECK(expected_usage(m, p, 0) == doctest::Approx(1.13080).epsilon(1e-4));
}

TEST_CASE("surrogate losses at anchor points") {
  CHECK(surrogate_loss(SurrogateKind::kLogistic, 0.0) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(surrogate_loss(SurrogateKind::kHinge, 2.0) == doctest::Approx(0.0));
  CHECK(surrogate_loss(SurrogateKind::kExponential, -1.0) ==
        doctest::Approx(std::exp(1.0)).epsilon(1e-12));
  CHECK(std::isinf(surrogate_loss(SurrogateKind::kExponential, -701.0)));
}

TEST_CASE("stable logistic form agrees with naive form") {
  for (double d = -30.0; d <= 700.0; d += 0.37) {
    const double naive = std::log(1.0 + std::exp(-d));
    if (std::isfinite(naive) && naive > 0.0)
      CHECK(surrogate_loss(SurrogateKind::kLogistic, d) ==
            doctest::Approx(naive).epsilon(1e-12));
  }
}

TEST_CASE("surrogate convexity and monotonicity on a grid") {
  const int n = 10000;
  for (auto kind : {SurrogateKind::kLogistic, SurrogateKind::kExponential,
                    SurrogateKind::kHinge}) {
    double prev = std::numeric_limits<double>::infinity();
    std::vector<double> vals(n + 1);
    for (int t = 0; t <= n; ++t) {
      const double d = -30.0 + 60.0 * t / n;
      vals[t] = surrogate_loss(kind, d);
      if (kind != SurrogateKind::kHinge) CHECK(vals[t] < prev);
      else CHECK(vals[t] <= prev);
      prev = vals[t];
    }
    for (int t = 1; t < n; ++t)
      CHECK(vals[t - 1] - 2.0 * vals[t] + vals[t + 1] >= -1e-9);
  }
}

TEST_CASE("capacity_term anchors") {
  LatentModel m;
  m.U = Eigen::MatrixXd::Zero(1, 1);
  m.V = Eigen::MatrixXd::Zero(1, 1);
  ContextVectors ctx;
  ctx.propensities = Eigen::VectorXd::Ones(1);

  // single item at delta = 0: c = E[usage] = 0.5
  ctx.capacities = Eigen::VectorXd::Constant(1, 0.5);
  CHECK(capacity_term(m, ctx, SurrogateKind::kLogistic) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // slack >= 50: essentially zero
  ctx.capacities = Eigen::VectorXd::Constant(1, 51.0);
  CHECK(capacity_term(m, ctx, SurrogateKind::kLogistic) < 1e-20);
}

TEST_CASE("capacity_term hinge arithmetic") {
  // 2 items, deltas (-1, 3): (1 + 0) / 2
  LatentModel m;
  m.U = Eigen::MatrixXd::Zero(1, 2);
  m.V = Eigen::MatrixXd::Zero(1, 2);
  ContextVectors ctx;
  ctx.propensities = Eigen::VectorXd::Ones(2);  // E = 1 per item
  ctx.capacities.resize(2);
  ctx.capacities << 0.0, 4.0;
  CHECK(capacity_term(m, ctx, SurrogateKind::kHinge) == doctest::Approx(0.5));
}

TEST_CASE("capacity_term invariant under consistent permutation") {
  auto inst = testutil::random_instance(4, 6, 2, false, 99);
  const double before =
      capacity_term(inst.model, inst.ctx, SurrogateKind::kLogistic);
  // rotate item indices by one
  LatentModel m2 = inst.model;
  ContextVectors c2 = inst.ctx;
  const int n = inst.model.num_items();
  for (int j = 0; j < n; ++j) {
    m2.V.col((j + 1) % n) = inst.model.V.col(j);
    c2.capacities[(j + 1) % n] = inst.ctx.capacities[j];
  }
  CHECK(capacity_term(m2, c2, SurrogateKind::kLogistic) ==
        doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("accuracy_term square") {
  LatentModel m;
  m.U.resize(1, 1);
  m.V.resize(1, 2);
  m.U << 1.0;
  m.V << 0.5, -0.25;
  std::vector<Rating> rs = {{0, 0, 1.0}, {0, 1, -1.0}};
  RatingsDataset data(1, 2, rs, FeedbackMode::kExplicitPM1);
  CHECK(accuracy_term(m, data, AccuracyKind::kSquare) ==
        doctest::Approx(0.25 + 0.5625).epsilon(1e-12));

  // perfect reconstruction
  m.V << 1.0, -1.0;
  CHECK(accuracy_term(m, data, AccuracyKind::kSquare) ==
        doctest::Approx(0.0));
}

TEST_CASE("accuracy_term bpr at zero margin") {
  LatentModel m;
  m.U = Eigen::MatrixXd::Zero(1, 1);
  m.V = Eigen::MatrixXd::Zero(1, 2);
  std::vector<Rating> rs = {{0, 0, 1.0}, {0, 1, -1.0}};
  RatingsDataset data(1, 2, rs, FeedbackMode::kExplicitPM1);
  CHECK(accuracy_term(m, data, AccuracyKind::kBpr) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("objective breakdown re-sums and respects alpha endpoints") {
  auto inst = testutil::random_instance(5, 7, 3, false, 123);
  TrainConfig cfg;
  cfg.rank = 3;
  cfg.lambda = 0.01;

  for (double alpha : {0.0, 0.3, 1.0}) {
    cfg.alpha = alpha;
    auto b = objective_value(inst.model, inst.data, inst.ctx, cfg);
    CHECK(b.total == doctest::Approx((1 - alpha) * b.accuracy +
                                     alpha * b.capacity + b.regularization)
                         .epsilon(1e-10));
    if (alpha == 0.0) {
      // reduces to the unconstrained objective exactly
      const double unconstrained =
          accuracy_term(inst.model, inst.data, AccuracyKind::kSquare) +
          cfg.lambda * (inst.model.U.squaredNorm() + inst.model.V.squaredNorm());
      CHECK(b.total == doctest::Approx(unconstrained).epsilon(1e-12));
    }
    if (alpha == 1.0) CHECK(b.accuracy == 0.0);
  }
}

TEST_CASE("objective scalar composition at zero factors") {
  // lambda=0, zero factors, p=1, c=1, M=N=1, square, r=1:
  // total = (1-a)*1 + a*log(1+exp(0.5-1))
  LatentModel m;
  m.U = Eigen::MatrixXd::Zero(1, 1);
  m.V = Eigen::MatrixXd::Zero(1, 1);
  std::vector<Rating> rs = {{0, 0, 1.0}};
  RatingsDataset data(1, 1, rs, FeedbackMode::kExplicitPM1);
  ContextVectors ctx;
  ctx.propensities = Eigen::VectorXd::Ones(1);
  ctx.capacities = Eigen::VectorXd::Ones(1);
  TrainConfig cfg;
  cfg.rank = 1;
  cfg.lambda = 0.0;
  cfg.alpha = 0.4;
  auto b = objective_value(m, data, ctx, cfg);
  const double cap = std::log(1.0 + std::exp(0.5 - 1.0));
  CHECK(cap == doctest::Approx(0.47408).epsilon(1e-4));
  CHECK(b.total == doctest::Approx(0.6 * 1.0 + 0.4 * cap).epsilon(1e-10));
}
