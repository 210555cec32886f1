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

#include <array>
#include <string>

#include "capcf/data.hpp"
#include "capcf/model.hpp"

namespace capcf {

using ConfigHash = std::array<unsigned char, 32>;

/// SHA-256 of the canonicalized config text.
ConfigHash sha256(const std::string& text);
std::string hash_hex(const ConfigHash& h);

/// Model checkpoint: magic + header (M, N, k, L', geo flag, config hash)
/// followed by row-major factor matrices as little-endian 64-bit floats.
void save_checkpoint(const std::string& path, const LatentModel& model,
                     const ConfigHash& config_hash);
LatentModel load_checkpoint(const std::string& path,
                            ConfigHash* config_hash = nullptr);

/// Plain "user<TAB>item<TAB>value" dataset dump and reload.
void write_ratings_tsv(const std::string& path, const RatingsDataset& data);
RatingsDataset read_ratings_tsv(const std::string& path, int num_users,
                                int num_items, FeedbackMode mode);

}  // namespace capcf
