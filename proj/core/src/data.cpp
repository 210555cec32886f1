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

#include "capcf/data.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>
#include <utility>

namespace capcf {

RatingsDataset::RatingsDataset(int num_users, int num_items,
                               std::vector<Rating> ratings, FeedbackMode mode)
    : num_users_(num_users),
      num_items_(num_items),
      mode_(mode),
      ratings_(std::move(ratings)) {
  by_user_.resize(num_users_);
  by_item_.resize(num_items_);
  user_pos_.resize(num_users_);
  user_neg_.resize(num_users_);

  std::unordered_set<std::int64_t> seen;
  seen.reserve(ratings_.size());
  for (int idx = 0; idx < static_cast<int>(ratings_.size()); ++idx) {
    const Rating& r = ratings_[idx];
    if (r.user < 0 || r.user >= num_users_ || r.item < 0 ||
        r.item >= num_items_)
      throw std::invalid_argument("rating index out of range");
    const std::int64_t key =
        static_cast<std::int64_t>(r.user) * num_items_ + r.item;
    if (!seen.insert(key).second)
      throw std::invalid_argument("duplicate (user,item) pair in dataset");
    by_user_[r.user].push_back(idx);
    by_item_[r.item].push_back(idx);
    if (mode_ != FeedbackMode::kRawStars) {
      if (r.value > 0.0)
        user_pos_[r.user].push_back(r.item);
      else
        user_neg_[r.user].push_back(r.item);
    }
  }

  // Sort index lists by the opposite coordinate so iteration order is
  // canonical regardless of input order.
  auto by_item_key = [this](int a, int b) {
    return ratings_[a].item < ratings_[b].item;
  };
  auto by_user_key = [this](int a, int b) {
    return ratings_[a].user < ratings_[b].user;
  };
  for (auto& v : by_user_) std::sort(v.begin(), v.end(), by_item_key);
  for (auto& v : by_item_) std::sort(v.begin(), v.end(), by_user_key);
  for (auto& v : user_pos_) std::sort(v.begin(), v.end());
  for (auto& v : user_neg_) std::sort(v.begin(), v.end());
}

bool RatingsDataset::has_rating(int i, int j) const {
  const auto& lst = by_user_[i];
  auto it = std::lower_bound(lst.begin(), lst.end(), j,
                             [this](int idx, int item) {
                               return ratings_[idx].item < item;
                             });
  return it != lst.end() && ratings_[*it].item == j;
}

}  // namespace capcf
