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

#include "capcf/context.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace capcf {

namespace {

constexpr double kLinearFloor = 1e-6;

Eigen::VectorXd actual_capacities(const RatingsDataset& train) {
  Eigen::VectorXd c(train.num_items());
  for (int j = 0; j < train.num_items(); ++j)
    c[j] = static_cast<double>(train.by_item(j).size());
  return c;
}

double bin3(double actual, double lo, double mid, double hi) {
  if (actual <= 20.0) return lo;
  if (actual <= 100.0) return mid;
  return hi;
}

/// Values linearly spaced in [0, top], assigned by ascending rank of the
/// base vector (ties broken by index); minimum clamped to the floor.
Eigen::VectorXd linear_ramp(const Eigen::VectorXd& base, double top) {
  const int n = static_cast<int>(base.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return base[a] < base[b]; });
  Eigen::VectorXd out(n);
  for (int t = 0; t < n; ++t) {
    const double v = n == 1 ? top : top * static_cast<double>(t) / (n - 1);
    out[order[t]] = std::max(v, kLinearFloor);
  }
  return out;
}

}  // namespace

Eigen::VectorXd make_capacities(const RatingsDataset& train,
                                const CapacityKind& kind) {
  if (train.ratings().empty()) throw std::invalid_argument("empty train set");
  const Eigen::VectorXd actual = actual_capacities(train);
  const int n = static_cast<int>(actual.size());
  Eigen::VectorXd c(n);
  switch (kind.tag) {
    case CapacityKind::kActual:
      c = actual;
      break;
    case CapacityKind::kBinning:
      for (int j = 0; j < n; ++j) c[j] = bin3(actual[j], 5.0, 50.0, 150.0);
      break;
    case CapacityKind::kUniform:
      if (!(kind.uniform_value > 0.0))
        throw std::invalid_argument("uniform capacity must be positive");
      c.setConstant(kind.uniform_value);
      break;
    case CapacityKind::kLinearMax:
      c = linear_ramp(actual, actual.maxCoeff());
      break;
    case CapacityKind::kLinearMean:
      c = linear_ramp(actual, 2.0 * actual.mean());
      break;
    case CapacityKind::kReverseBinning:
      for (int j = 0; j < n; ++j) c[j] = bin3(actual[j], 150.0, 50.0, 5.0);
      break;
  }
  // items that happen to have no training raters would otherwise get a
  // zero (hence invalid) capacity
  return c.cwiseMax(1e-6);
}

Eigen::VectorXd make_propensities(const RatingsDataset& train,
                                  PropensityKind kind) {
  if (train.ratings().empty()) throw std::invalid_argument("empty train set");
  const int m = train.num_users();
  Eigen::VectorXd actual(m);
  for (int i = 0; i < m; ++i)
    actual[i] = static_cast<double>(train.by_user(i).size()) /
                static_cast<double>(train.num_items());

  switch (kind) {
    case PropensityKind::kActual:
      return actual;
    case PropensityKind::kMedian: {
      std::vector<double> sorted(actual.data(), actual.data() + m);
      std::sort(sorted.begin(), sorted.end());
      const double median = m % 2 == 1
                                ? sorted[m / 2]
                                : 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]);
      Eigen::VectorXd p(m);
      for (int i = 0; i < m; ++i) p[i] = actual[i] >= median ? 0.45 : 0.01;
      return p;
    }
    case PropensityKind::kLinear: {
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(),
                       [&](int a, int b) { return actual[a] < actual[b]; });
      Eigen::VectorXd p(m);
      for (int t = 0; t < m; ++t)
        p[order[t]] = m == 1 ? 0.6 : 0.6 * static_cast<double>(t) / (m - 1);
      return p;
    }
  }
  throw std::logic_error("unreachable");
}

void write_vector_csv(const std::string& path, const Eigen::VectorXd& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (int i = 0; i < v.size(); ++i) out << i << "," << v[i] << "\n";
}

Eigen::VectorXd read_vector_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<double> vals;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos)
      throw std::runtime_error(path + ": malformed CSV line");
    vals.push_back(std::stod(line.substr(comma + 1)));
  }
  return Eigen::Map<Eigen::VectorXd>(vals.data(),
                                     static_cast<Eigen::Index>(vals.size()));
}

}  // namespace capcf
