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

#include "capcf/geo.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <stdexcept>

namespace capcf {

namespace {
constexpr double kMaxLat = 85.05112878;
constexpr double kSparsityCutoff = 1e-12;
}  // namespace

TileCoord latlon_to_tile(double lat, double lon, int level) {
  if (std::isnan(lat) || std::isnan(lon))
    throw std::invalid_argument("NaN coordinate");
  if (lon < -180.0 || lon > 180.0)
    throw std::invalid_argument("longitude out of range");
  lat = std::clamp(lat, -kMaxLat, kMaxLat);

  const double phi = lat * std::numbers::pi / 180.0;
  const double x_norm = (lon + 180.0) / 360.0;
  const double y_norm =
      0.5 - std::log((1.0 + std::sin(phi)) / (1.0 - std::sin(phi))) /
                (4.0 * std::numbers::pi);
  const int scale = 1 << level;
  TileCoord t;
  t.level = level;
  t.x = std::clamp(static_cast<int>(std::floor(x_norm * scale)), 0, scale - 1);
  t.y = std::clamp(static_cast<int>(std::floor(y_norm * scale)), 0, scale - 1);
  return t;
}

InfluenceMatrix build_influence_matrix(const std::vector<TileCoord>& poi_tiles,
                                       double bandwidth) {
  if (poi_tiles.empty()) throw std::invalid_argument("empty POI list");
  if (!(bandwidth > 0.0)) throw std::invalid_argument("bandwidth must be > 0");

  // Distinct occupied tiles, ordered for deterministic row assignment.
  std::map<std::pair<int, int>, int> tile_row;
  std::vector<TileCoord> tiles;
  for (const TileCoord& t : poi_tiles) {
    auto key = std::make_pair(t.x, t.y);
    if (tile_row.emplace(key, 0).second) tiles.push_back(t);
  }
  std::sort(tiles.begin(), tiles.end(), [](const TileCoord& a, const TileCoord& b) {
    return a.x != b.x ? a.x < b.x : a.y < b.y;
  });
  for (int r = 0; r < static_cast<int>(tiles.size()); ++r)
    tile_row[{tiles[r].x, tiles[r].y}] = r;

  const int L = static_cast<int>(tiles.size());
  const int N = static_cast<int>(poi_tiles.size());
  const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);

  std::vector<Eigen::Triplet<double>> trips;
  for (int j = 0; j < N; ++j) {
    const double px = poi_tiles[j].x + 0.5, py = poi_tiles[j].y + 0.5;
    for (int l = 0; l < L; ++l) {
      const double dx = px - (tiles[l].x + 0.5), dy = py - (tiles[l].y + 0.5);
      const double d = std::sqrt(dx * dx + dy * dy);
      const double z = d / bandwidth;
      const double v = inv_sqrt2pi * std::exp(-0.5 * z * z) / bandwidth;
      if (v >= kSparsityCutoff) trips.emplace_back(l, j, v);
    }
  }

  InfluenceMatrix out;
  out.bandwidth = bandwidth;
  out.tiles = std::move(tiles);
  out.Y.resize(L, N);
  out.Y.setFromTriplets(trips.begin(), trips.end());
  out.Y.makeCompressed();
  return out;
}

void write_influence_csv(const std::string& path, const InfluenceMatrix& infl) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (int j = 0; j < infl.Y.outerSize(); ++j)
    for (Eigen::SparseMatrix<double>::InnerIterator it(infl.Y, j); it; ++it)
      out << it.row() << "," << it.col() << "," << it.value() << "\n";
}

}  // namespace capcf
