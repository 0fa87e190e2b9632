// Copyright 2026 The pgt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
#include "pgt/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "pgt/error.hpp"
#include "pgt/random.hpp"

namespace pgt {

void SamplerConfig::Validate() const {
  if (!(tau >= 0.0 && tau <= 1.0)) {
    throw Error(ErrorCode::kConfigInvalid, "tau must lie in [0, 1]");
  }
  if (n_total <= 0 || n_total % 2 != 0) {
    throw Error(ErrorCode::kConfigInvalid, "sample count must be positive and even");
  }
}

PixelPartition PartitionPixels(const BoxGrid& grid, double tau) {
  PixelPartition part;
  for (size_t i = 0; i < grid.size(); ++i) {
    (grid.at(i).confidence > tau ? part.high : part.low).push_back(grid.PixelAt(i));
  }
  return part;
}

namespace {

// Moves `count` uniformly chosen elements to the front of `pool` (partial
// Fisher-Yates) and returns them.
std::vector<GridPixel> Draw(std::vector<GridPixel>& pool, size_t count, Rng& rng) {
  count = std::min(count, pool.size());
  for (size_t i = 0; i < count; ++i) {
    const size_t j = i + UniformIndex(rng, pool.size() - i);
    std::swap(pool[i], pool[j]);
  }
  std::vector<GridPixel> out(pool.begin(), pool.begin() + count);
  pool.erase(pool.begin(), pool.begin() + count);
  return out;
}

}  // namespace

std::vector<GridPixel> SamplePixels(const BoxGrid& grid, const GridSpec& spec,
                                    const SamplerConfig& config) {
  config.Validate();
  grid.CheckShape(spec);
  PixelPartition part = PartitionPixels(grid, config.tau);
  Rng rng(config.seed);
  const size_t half = static_cast<size_t>(config.n_total / 2);

  std::vector<GridPixel> out = Draw(part.high, half, rng);
  std::vector<GridPixel> low = Draw(part.low, half, rng);
  out.insert(out.end(), low.begin(), low.end());
  // Top up from whichever set still has pixels left.
  const size_t want = static_cast<size_t>(config.n_total);
  if (out.size() < want) {
    auto more = Draw(part.high, want - out.size(), rng);
    out.insert(out.end(), more.begin(), more.end());
  }
  if (out.size() < want) {
    auto more = Draw(part.low, want - out.size(), rng);
    out.insert(out.end(), more.begin(), more.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

uint64_t FrameSeed(uint64_t seed, int frame) {
  // splitmix64 finaliser over the combined value.
  uint64_t z = seed + 0x9e3779b97f4a7c15ull * (static_cast<uint64_t>(frame) + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

size_t NeighbourIndex::KeyHash::operator()(const CellKey& k) const {
  uint64_t h = static_cast<uint64_t>(k[0]) * 0x9e3779b97f4a7c15ull;
  h ^= static_cast<uint64_t>(k[1]) * 0xc2b2ae3d27d4eb4full + (h << 6) + (h >> 2);
  h ^= static_cast<uint64_t>(k[2]) * 0x165667b19e3779f9ull + (h << 6) + (h >> 2);
  return static_cast<size_t>(h);
}

NeighbourIndex::CellKey NeighbourIndex::KeyOf(const Vec3& p) const {
  return {static_cast<int64_t>(std::floor(p.x() / cell_size_)),
          static_cast<int64_t>(std::floor(p.y() / cell_size_)),
          static_cast<int64_t>(std::floor(p.z() / cell_size_))};
}

NeighbourIndex::NeighbourIndex(const BoxGrid& grid, const GridSpec& spec)
    : rows_(grid.rows()), cols_(grid.cols()),
      cell_size_(spec.stride * std::max(spec.MetresPerRow(), spec.MetresPerCol())) {
  grid.CheckShape(spec);
  centres_.reserve(grid.size());
  pixels_.reserve(grid.size());
  key_min_ = {INT64_MAX, INT64_MAX, INT64_MAX};
  key_max_ = {INT64_MIN, INT64_MIN, INT64_MIN};
  for (size_t i = 0; i < grid.size(); ++i) {
    const GridPixel u = grid.PixelAt(i);
    const Vec3 c = DecodeBox(u, grid.at(i), spec).centre;
    if (!c.allFinite()) {
      throw Error(ErrorCode::kDegenerateInput, "box grid holds a non-finite centre");
    }
    centres_.push_back(c);
    pixels_.push_back(u);
    const CellKey key = KeyOf(c);
    for (int a = 0; a < 3; ++a) {
      key_min_[a] = std::min(key_min_[a], key[a]);
      key_max_[a] = std::max(key_max_[a], key[a]);
    }
    buckets_[key].push_back(static_cast<int>(i));
  }
}

std::vector<GridPixel> NeighbourIndex::Nearest(const GridPixel& u, int k) const {
  if (u.row < 0 || u.row >= rows_ || u.col < 0 || u.col >= cols_) {
    throw Error(ErrorCode::kPixelOutOfRange, "pixel outside the box grid");
  }
  const size_t self = static_cast<size_t>(u.row) * cols_ + u.col;
  const Vec3& q = centres_.at(self);
  const CellKey qk = KeyOf(q);

  using Candidate = std::tuple<double, int, int>;  // (dist^2, row, col)
  std::vector<Candidate> found;
  auto worse = [](const Candidate& a, const Candidate& b) { return a < b; };

  int64_t max_ring = 0;
  for (int a = 0; a < 3; ++a) {
    max_ring = std::max({max_ring, qk[a] - key_min_[a], key_max_[a] - qk[a]});
  }
  for (int64_t r = 0; r <= max_ring; ++r) {
    // Visit every occupied cell at Chebyshev distance exactly r.
    for (int64_t dx = -r; dx <= r; ++dx) {
      const int64_t x = qk[0] + dx;
      if (x < key_min_[0] || x > key_max_[0]) continue;
      for (int64_t dy = -r; dy <= r; ++dy) {
        const int64_t y = qk[1] + dy;
        if (y < key_min_[1] || y > key_max_[1]) continue;
        const bool on_shell_xy = std::abs(dx) == r || std::abs(dy) == r;
        for (int64_t dz = -r; dz <= r; ++dz) {
          if (!on_shell_xy && std::abs(dz) != r) {
            dz = r - 1;  // skip the interior, jump to the top face
            continue;
          }
          const int64_t z = qk[2] + dz;
          if (z < key_min_[2] || z > key_max_[2]) continue;
          const auto it = buckets_.find({x, y, z});
          if (it == buckets_.end()) continue;
          for (int idx : it->second) {
            if (static_cast<size_t>(idx) == self) continue;
            const double d2 = (centres_[idx] - q).squaredNorm();
            found.emplace_back(d2, pixels_[idx].row, pixels_[idx].col);
          }
        }
      }
    }
    if (static_cast<int>(found.size()) >= k) {
      std::partial_sort(found.begin(), found.begin() + k, found.end(), worse);
      found.resize(k);
      // Unvisited cells are at least r cell widths away from q.
      const double bound = static_cast<double>(r) * cell_size_;
      if (std::get<0>(found.back()) < bound * bound) break;
    }
  }
  std::sort(found.begin(), found.end(), worse);
  if (static_cast<int>(found.size()) > k) found.resize(k);
  std::vector<GridPixel> out;
  out.reserve(found.size());
  for (const auto& [d2, row, col] : found) out.push_back({row, col});
  return out;
}

double SmoothConfidence(const NeighbourIndex& index, const BoxGrid& grid,
                        const GridPixel& u, int neighbours) {
  if (!grid.Contains(u)) {
    throw Error(ErrorCode::kPixelOutOfRange, "pixel outside the box grid");
  }
  double sum = grid.at(u).confidence;
  const auto near = index.Nearest(u, neighbours);
  for (const auto& v : near) sum += grid.at(v).confidence;
  return sum / static_cast<double>(near.size() + 1);
}

double SmoothConfidence(const BoxGrid& grid, const GridSpec& spec, const GridPixel& u) {
  return SmoothConfidence(NeighbourIndex(grid, spec), grid, u);
}

}  // namespace pgt
