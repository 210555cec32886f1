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

#include "capcf/data.hpp"

namespace capcf {

struct CapacityKind {
  enum Tag {
    kActual,         // c_j = # training raters of item j
    kBinning,        // [0,20]->5, [21,100]->50, [101,max]->150
    kUniform,        // c_j = value for all j
    kLinearMax,      // linear ramp over ascending-usage rank, top = max actual
    kLinearMean,     // same ramp, top = 2 * mean actual
    kReverseBinning  // [0,20]->150, [21,100]->50, [101,max]->5
  };
  Tag tag = kActual;
  double uniform_value = 10.0;

  static CapacityKind uniform(double k) { return {kUniform, k}; }
};

enum class PropensityKind {
  kActual,  // p_i = |L_i,train| / N
  kMedian,  // 0.45 if actual >= median, else 0.01
  kLinear   // ramp over ascending-propensity rank, top = 0.6
};

/// Capacity vector per the chosen definition, computed on the training
/// split. Linear variants floor at 1e-6 so capacities stay positive.
Eigen::VectorXd make_capacities(const RatingsDataset& train,
                                const CapacityKind& kind);

Eigen::VectorXd make_propensities(const RatingsDataset& train,
                                  PropensityKind kind);

/// CSV "index,value" audit dump / override input.
void write_vector_csv(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::string& path);

}  // namespace capcf
