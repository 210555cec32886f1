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

#include "capcf/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace capcf {

namespace {

// splitmix64; used to derive independent per-user RNG streams.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::mt19937_64 user_rng(std::uint64_t seed, int user) {
  return std::mt19937_64(mix64(seed ^ mix64(static_cast<std::uint64_t>(user) + 1)));
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find('\t', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_real(const std::string& s, const std::string& path, int lineno) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing garbage");
    return v;
  } catch (const std::exception&) {
    throw std::runtime_error(path + ":" + std::to_string(lineno) +
                             ": malformed numeric field '" + s + "'");
  }
}

std::string strip_cr(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

}  // namespace

std::vector<RawInteraction> parse_interactions(const std::string& path,
                                               FileFormat format) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open interactions file: " + path);
  std::vector<RawInteraction> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    const std::size_t min_fields =
        format == FileFormat::kMovielensTab ? 3u : 3u;
    if (fields.size() < min_fields || fields[0].empty() || fields[1].empty())
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed line");
    RawInteraction r;
    r.user_id = fields[0];
    r.item_id = fields[1];
    r.value = parse_real(fields[2], path, lineno);
    out.push_back(std::move(r));
  }
  return out;
}

std::unordered_map<std::string, std::pair<double, double>> parse_poi_coords(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open POI file: " + path);
  std::unordered_map<std::string, std::pair<double, double>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = strip_cr(line);
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() < 3)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed POI line");
    double lat = parse_real(fields[1], path, lineno);
    double lon = parse_real(fields[2], path, lineno);
    if (lat < -90.0 || lat > 90.0 || lon < -180.0 || lon > 180.0)
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": coordinate out of range");
    out[fields[0]] = {lat, lon};
  }
  return out;
}

IndexedInteractions index_interactions(
    const std::vector<RawInteraction>& interactions) {
  IndexedInteractions out;
  std::unordered_map<std::string, int> umap, imap;
  std::unordered_map<std::int64_t, int> pair_to_pos;  // (u,i) -> ratings idx
  for (const auto& r : interactions) {
    auto uit = umap.find(r.user_id);
    if (uit == umap.end()) {
      uit = umap.emplace(r.user_id, static_cast<int>(out.user_ids.size())).first;
      out.user_ids.push_back(r.user_id);
    }
    auto iit = imap.find(r.item_id);
    if (iit == imap.end()) {
      iit = imap.emplace(r.item_id, static_cast<int>(out.item_ids.size())).first;
      out.item_ids.push_back(r.item_id);
    }
    const int u = uit->second, i = iit->second;
    const std::int64_t key = (static_cast<std::int64_t>(u) << 32) | i;
    auto pit = pair_to_pos.find(key);
    if (pit != pair_to_pos.end()) {
      out.ratings[pit->second].value = r.value;  // keep last
      ++out.duplicates_dropped;
    } else {
      pair_to_pos[key] = static_cast<int>(out.ratings.size());
      out.ratings.push_back({u, i, r.value});
    }
  }
  return out;
}

RatingsDataset filter_min_ratings(const RatingsDataset& data, int threshold,
                                  std::vector<int>* kept_users,
                                  std::vector<int>* kept_items) {
  if (threshold < 0) throw std::invalid_argument("threshold must be >= 0");
  const int M = data.num_users(), N = data.num_items();
  std::vector<char> ukeep(M, 1), ikeep(N, 1);
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<int> ucount(M, 0), icount(N, 0);
    for (const Rating& r : data.ratings()) {
      if (ukeep[r.user] && ikeep[r.item]) {
        ++ucount[r.user];
        ++icount[r.item];
      }
    }
    for (int i = 0; i < M; ++i)
      if (ukeep[i] && ucount[i] <= threshold) { ukeep[i] = 0; changed = true; }
    for (int j = 0; j < N; ++j)
      if (ikeep[j] && icount[j] <= threshold) { ikeep[j] = 0; changed = true; }
  }

  std::vector<int> unew(M, -1), inew(N, -1);
  std::vector<int> usurv, isurv;
  for (int i = 0; i < M; ++i)
    if (ukeep[i]) { unew[i] = static_cast<int>(usurv.size()); usurv.push_back(i); }
  for (int j = 0; j < N; ++j)
    if (ikeep[j]) { inew[j] = static_cast<int>(isurv.size()); isurv.push_back(j); }

  std::vector<Rating> kept;
  for (const Rating& r : data.ratings())
    if (ukeep[r.user] && ikeep[r.item])
      kept.push_back({unew[r.user], inew[r.item], r.value});
  if (kept.empty()) throw std::runtime_error("empty dataset after filtering");

  if (kept_users) *kept_users = std::move(usurv);
  if (kept_items) *kept_items = std::move(isurv);
  return RatingsDataset(static_cast<int>(std::count(ukeep.begin(), ukeep.end(), 1)),
                        static_cast<int>(std::count(ikeep.begin(), ikeep.end(), 1)),
                        std::move(kept), data.mode());
}

RatingsDataset polarize(const RatingsDataset& data, PolarizeMode mode) {
  std::vector<Rating> out;
  out.reserve(data.ratings().size());
  for (const Rating& r : data.ratings()) {
    double v;
    if (mode == PolarizeMode::kExplicitThreshold4)
      v = r.value >= 4.0 ? 1.0 : -1.0;
    else
      v = 1.0;
    out.push_back({r.user, r.item, v});
  }
  const FeedbackMode fm = mode == PolarizeMode::kExplicitThreshold4
                              ? FeedbackMode::kExplicitPM1
                              : FeedbackMode::kImplicit01;
  return RatingsDataset(data.num_users(), data.num_items(), std::move(out), fm);
}

std::pair<RatingsDataset, RatingsDataset> split_train_test(
    const RatingsDataset& data, const SplitSpec& spec) {
  std::vector<Rating> train, test;
  for (int i = 0; i < data.num_users(); ++i) {
    const auto& lst = data.by_user(i);
    if (lst.size() < 2)
      throw std::runtime_error("user " + std::to_string(i) +
                               " has < 2 ratings; filter first");
    std::vector<int> idx(lst.begin(), lst.end());
    auto rng = user_rng(spec.seed, i);
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t ntrain = (idx.size() + 1) / 2;  // odd -> train
    for (std::size_t t = 0; t < idx.size(); ++t)
      (t < ntrain ? train : test).push_back(data.ratings()[idx[t]]);
  }
  return {RatingsDataset(data.num_users(), data.num_items(), std::move(train),
                         data.mode()),
          RatingsDataset(data.num_users(), data.num_items(), std::move(test),
                         data.mode())};
}

RatingsDataset sample_negatives(const RatingsDataset& train,
                                const RatingsDataset& test,
                                std::uint64_t seed, int* short_users) {
  if (train.mode() != FeedbackMode::kImplicit01)
    throw std::invalid_argument("negative sampling requires implicit feedback");
  const int N = train.num_items();
  std::vector<Rating> out = train.ratings();
  int shorted = 0;
  for (int i = 0; i < train.num_users(); ++i) {
    int n_pos = 0;
    for (int idx : train.by_user(i))
      if (train.ratings()[idx].value > 0.0) ++n_pos;
    if (n_pos == 0) continue;
    std::vector<int> pool;
    pool.reserve(N);
    for (int j = 0; j < N; ++j)
      if (!train.has_rating(i, j) && !test.has_rating(i, j)) pool.push_back(j);
    auto rng = user_rng(seed ^ 0xa5a5a5a5ULL, i);
    std::shuffle(pool.begin(), pool.end(), rng);
    const int take = std::min<int>(n_pos, static_cast<int>(pool.size()));
    if (take < n_pos) ++shorted;
    for (int t = 0; t < take; ++t) out.push_back({i, pool[t], -1.0});
  }
  if (short_users) *short_users = shorted;
  return RatingsDataset(train.num_users(), N, std::move(out), train.mode());
}

}  // namespace capcf
