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

#include <cstddef>
#include <string>
#include <vector>

namespace capcf {

enum class FeedbackMode {
  kImplicit01,    // observed -> 1, plus sampled -1 negatives
  kExplicitPM1,   // stars thresholded to +1 / -1
  kRawStars,      // untransformed values
};

struct Rating {
  int user = 0;
  int item = 0;
  double value = 0.0;
};

/// Sparse user-item ratings with both user-major and item-major indexes,
/// built once at construction. Immutable afterwards.
class RatingsDataset {
 public:
  RatingsDataset() = default;
  RatingsDataset(int num_users, int num_items, std::vector<Rating> ratings,
                 FeedbackMode mode);

  int num_users() const { return num_users_; }
  int num_items() const { return num_items_; }
  FeedbackMode mode() const { return mode_; }
  const std::vector<Rating>& ratings() const { return ratings_; }

  /// Indices into ratings() for user i / item j.
  const std::vector<int>& by_user(int i) const { return by_user_[i]; }
  const std::vector<int>& by_item(int j) const { return by_item_[j]; }

  /// Items rated positively / negatively by user i (polarity defined when
  /// values are signed; in raw-star mode both lists are empty).
  const std::vector<int>& positives(int i) const { return user_pos_[i]; }
  const std::vector<int>& negatives(int i) const { return user_neg_[i]; }

  bool has_rating(int i, int j) const;

 private:
  int num_users_ = 0;
  int num_items_ = 0;
  FeedbackMode mode_ = FeedbackMode::kRawStars;
  std::vector<Rating> ratings_;
  std::vector<std::vector<int>> by_user_;
  std::vector<std::vector<int>> by_item_;
  std::vector<std::vector<int>> user_pos_;  // item ids
  std::vector<std::vector<int>> user_neg_;  // item ids
};

}  // namespace capcf
