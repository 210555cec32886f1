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

// Microbenchmarks for the hot paths: objective evaluation, one block
// gradient, one full training iteration, and KDE influence construction.
#include <benchmark/benchmark.h>

#include <random>

#include "capcf/geo.hpp"
#include "capcf/objective.hpp"
#include "capcf/train.hpp"

namespace {

using namespace capcf;

struct BenchInstance {
  RatingsDataset data;
  LatentModel model;
  ContextVectors ctx;
  TrainConfig cfg;
};

BenchInstance make_instance(int M, int N, int k) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> g(0.0, 0.3);
  std::uniform_real_distribution<double> u(0.0, 1.0);

  std::vector<Rating> ratings;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < N; ++j)
      if (u(rng) < 0.1) ratings.push_back({i, j, u(rng) < 0.5 ? 1.0 : -1.0});

  BenchInstance b{RatingsDataset(M, N, ratings, FeedbackMode::kExplicitPM1),
                  {}, {}, {}};
  b.model.U.resize(k, M);
  b.model.V.resize(k, N);
  for (int t = 0; t < b.model.U.size(); ++t) b.model.U.data()[t] = g(rng);
  for (int t = 0; t < b.model.V.size(); ++t) b.model.V.data()[t] = g(rng);
  b.ctx.propensities = Eigen::VectorXd::Constant(M, 0.1);
  b.ctx.capacities = Eigen::VectorXd::Constant(N, 5.0);
  b.cfg.rank = k;
  b.cfg.alpha = 0.2;
  return b;
}

void BM_ObjectiveValue(benchmark::State& state) {
  auto b = make_instance(static_cast<int>(state.range(0)),
                         static_cast<int>(state.range(1)), 10);
  for (auto _ : state)
    benchmark::DoNotOptimize(
        objective_value(b.model, b.data, b.ctx, b.cfg).total);
}
BENCHMARK(BM_ObjectiveValue)->Args({200, 300})->Args({500, 800});

void BM_CapacityGradBlock(benchmark::State& state) {
  auto b = make_instance(static_cast<int>(state.range(0)),
                         static_cast<int>(state.range(1)), 10);
  for (auto _ : state) {
    const auto st = capacity_block_state(b.model, b.ctx, b.cfg.surrogate);
    benchmark::DoNotOptimize(
        capacity_grad_v_block(b.model, b.ctx.propensities, st).sum());
  }
}
BENCHMARK(BM_CapacityGradBlock)->Args({200, 300})->Args({500, 800});

void BM_TrainIteration(benchmark::State& state) {
  auto b = make_instance(static_cast<int>(state.range(0)),
                         static_cast<int>(state.range(1)), 10);
  b.cfg.max_iters = 1;
  b.cfg.tol = 0.0;
  for (auto _ : state)
    benchmark::DoNotOptimize(train(b.data, b.ctx, b.cfg).second.iterations);
}
BENCHMARK(BM_TrainIteration)->Args({200, 300});

void BM_BuildInfluence(benchmark::State& state) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> off(-20, 20);
  std::vector<TileCoord> tiles;
  for (int t = 0; t < state.range(0); ++t)
    tiles.push_back({16384 + off(rng), 16384 + off(rng), 15});
  for (auto _ : state)
    benchmark::DoNotOptimize(build_influence_matrix(tiles, 1.0).geo_dim());
}
BENCHMARK(BM_BuildInfluence)->Arg(200)->Arg(1000);

}  // namespace

BENCHMARK_MAIN();
