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

#include <Eigen/Sparse>
#include <string>
#include <unordered_map>
#include <vector>

namespace capcf {

struct TileCoord {
  int x = 0;
  int y = 0;
  int level = 15;

  bool operator==(const TileCoord&) const = default;
};

/// Web-Mercator tile mapping at the given level of detail. Latitude is
/// clamped to [-85.05112878, 85.05112878]; tiles clamped to the grid.
TileCoord latlon_to_tile(double lat, double lon, int level = 15);

/// Fixed POI influence matrix Y (L' x N): rows are the distinct occupied
/// tiles, columns are POIs. y_{j,l} = (1/bw) * K(d(j,l)/bw) with K the
/// standard Gaussian and d the Euclidean distance between tile centers in
/// tile units. Entries below 1e-12 are structural zeros.
struct InfluenceMatrix {
  Eigen::SparseMatrix<double> Y;       // L' x N
  std::vector<TileCoord> tiles;        // row -> tile
  double bandwidth = 1.0;

  int geo_dim() const { return static_cast<int>(Y.rows()); }
};

InfluenceMatrix build_influence_matrix(const std::vector<TileCoord>& poi_tiles,
                                       double bandwidth);

/// Sparse triplet dump, "row,col,value" per line.
void write_influence_csv(const std::string& path, const InfluenceMatrix& infl);

}  // namespace capcf
