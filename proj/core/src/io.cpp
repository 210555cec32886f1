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

#include "capcf/io.hpp"

#include <openssl/sha.h>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace capcf {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'C', 'A', 'P', 'C', 'F', '0', '0', '1'};

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("truncated checkpoint");
}

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  // Row-major on disk.
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) write_pod(out, m(r, c));
}

void read_matrix(std::istream& in, Eigen::MatrixXd& m) {
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) read_pod(in, m(r, c));
}

}  // namespace

ConfigHash sha256(const std::string& text) {
  ConfigHash h;
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(),
         h.data());
  return h;
}

std::string hash_hex(const ConfigHash& h) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (unsigned char b : h) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

void save_checkpoint(const std::string& path, const LatentModel& model,
                     const ConfigHash& config_hash) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t M = model.num_users(), N = model.num_items(),
                      k = model.rank(),
                      L = model.geo() ? model.geo_dim() : 0;
  const std::uint8_t geo = model.geo() ? 1 : 0;
  write_pod(out, M);
  write_pod(out, N);
  write_pod(out, k);
  write_pod(out, L);
  write_pod(out, geo);
  out.write(reinterpret_cast<const char*>(config_hash.data()),
            static_cast<std::streamsize>(config_hash.size()));
  write_matrix(out, model.U);
  write_matrix(out, model.V);
  if (model.geo()) {
    write_matrix(out, model.X);
    // Y stored dense row-major; it is input data but kept for
    // self-contained scoring.
    Eigen::MatrixXd ydense = Eigen::MatrixXd(model.Y);
    write_matrix(out, ydense);
  }
  if (!out) throw std::runtime_error("write failure on checkpoint " + path);
}

LatentModel load_checkpoint(const std::string& path, ConfigHash* config_hash) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad checkpoint magic in " + path);
  std::uint64_t M, N, k, L;
  std::uint8_t geo;
  read_pod(in, M);
  read_pod(in, N);
  read_pod(in, k);
  read_pod(in, L);
  read_pod(in, geo);
  ConfigHash h;
  in.read(reinterpret_cast<char*>(h.data()),
          static_cast<std::streamsize>(h.size()));
  if (!in) throw std::runtime_error("truncated checkpoint " + path);
  if (config_hash) *config_hash = h;

  LatentModel m;
  m.U.resize(static_cast<int>(k), static_cast<int>(M));
  m.V.resize(static_cast<int>(k), static_cast<int>(N));
  read_matrix(in, m.U);
  read_matrix(in, m.V);
  if (geo) {
    m.X.resize(static_cast<int>(L), static_cast<int>(M));
    read_matrix(in, m.X);
    Eigen::MatrixXd ydense(static_cast<int>(L), static_cast<int>(N));
    read_matrix(in, ydense);
    m.Y = ydense.sparseView();
  }
  return m;
}

void write_ratings_tsv(const std::string& path, const RatingsDataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.precision(17);
  for (const Rating& r : data.ratings())
    out << r.user << "\t" << r.item << "\t" << r.value << "\n";
}

RatingsDataset read_ratings_tsv(const std::string& path, int num_users,
                                int num_items, FeedbackMode mode) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<Rating> ratings;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream ss(line);
    Rating r;
    if (!(ss >> r.user >> r.item >> r.value))
      throw std::runtime_error(path + ":" + std::to_string(lineno) +
                               ": malformed rating line");
    ratings.push_back(r);
  }
  return RatingsDataset(num_users, num_items, std::move(ratings), mode);
}

}  // namespace capcf
