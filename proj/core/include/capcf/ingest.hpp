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

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "capcf/data.hpp"

namespace capcf {

struct RawInteraction {
  std::string user_id;
  std::string item_id;
  double value = 0.0;
  std::optional<double> lat;
  std::optional<double> lon;
};

enum class FileFormat { kMovielensTab, kCheckinTsv };

struct SplitSpec {
  std::uint64_t seed = 0;
  bool negative_sampling = true;  // implicit feedback only
};

/// Raw interactions, dense 0-based ids, and the id maps used to produce
/// them. Duplicate (user,item) pairs keep the last occurrence.
struct IndexedInteractions {
  std::vector<Rating> ratings;
  std::vector<std::string> user_ids;  // dense index -> original id
  std::vector<std::string> item_ids;
  int duplicates_dropped = 0;
};

/// One RawInteraction per non-blank line. Ids preserved verbatim.
/// movielens-tab: "user<TAB>item<TAB>rating<TAB>timestamp" (timestamp
/// ignored); checkin-tsv: "user<TAB>item<TAB>1". Accepts \n and \r\n.
std::vector<RawInteraction> parse_interactions(const std::string& path,
                                               FileFormat format);

/// POI coordinate file: "item<TAB>lat<TAB>lon".
std::unordered_map<std::string, std::pair<double, double>> parse_poi_coords(
    const std::string& path);

/// Dense re-indexing in order of first appearance; keep-last on duplicates.
IndexedInteractions index_interactions(
    const std::vector<RawInteraction>& interactions);

/// Drop users and items with <= threshold ratings, re-filtering to a fixed
/// point since removals cascade. Survivors are densely re-indexed; the
/// surviving original indices are reported through kept_users/kept_items.
RatingsDataset filter_min_ratings(const RatingsDataset& data, int threshold,
                                  std::vector<int>* kept_users = nullptr,
                                  std::vector<int>* kept_items = nullptr);

enum class PolarizeMode { kImplicit01, kExplicitThreshold4 };

/// explicit-threshold4: stars >= 4 -> +1, else -1. implicit01: every
/// observed rating -> 1. Support (user,item pairs) is preserved exactly.
RatingsDataset polarize(const RatingsDataset& data, PolarizeMode mode);

/// Per-user random half split: ceil(|L_i|/2) ratings to train, rest to test.
/// Deterministic given spec.seed (per-user RNG streams).
std::pair<RatingsDataset, RatingsDataset> split_train_test(
    const RatingsDataset& data, const SplitSpec& spec);

/// For each user with n train positives, add n items rated -1, sampled
/// uniformly without replacement from items unrated in both train and test.
/// Shortage is clipped; the number of short users is reported if non-null.
RatingsDataset sample_negatives(const RatingsDataset& train,
                                const RatingsDataset& test,
                                std::uint64_t seed,
                                int* short_users = nullptr);

}  // namespace capcf
