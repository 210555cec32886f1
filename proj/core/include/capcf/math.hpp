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

#include <cmath>

namespace capcf {

/// Numerically stable logistic sigmoid; never exponentiates a large
/// positive argument, so it is finite for |x| up to ~700 and beyond.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(-d)) via max(0,-d) + log1p(exp(-|d|)).
inline double stable_log1pexp_neg(double d) {
  return std::max(0.0, -d) + std::log1p(std::exp(-std::abs(d)));
}

}  // namespace capcf
