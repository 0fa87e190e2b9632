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
//
// Picks candidate pixels from a box grid and smooths their confidences over
// the nearest predicted boxes in 3D.
#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pgt/bev_grid.hpp"

namespace pgt {

struct SamplerConfig {
  double tau = 0.08;
  int n_total = 60;
  uint64_t seed = 0;

  /// Throws Error(kConfigInvalid).
  void Validate() const;
};

/// Pixels split by raw confidence: `high` holds confidence > tau. Both lists
/// are in row-major order.
struct PixelPartition {
  std::vector<GridPixel> high;
  std::vector<GridPixel> low;
};

PixelPartition PartitionPixels(const BoxGrid& grid, double tau);

/// Draws up to n_total / 2 pixels from each half of the partition without
/// replacement, topping up from the other half when one runs short. The
/// result is sorted row-major and has no duplicates.
std::vector<GridPixel> SamplePixels(const BoxGrid& grid, const GridSpec& spec,
                                    const SamplerConfig& config);

/// Seed for frame `frame` derived from a run seed, so that frames can be
/// sampled independently and in any order.
uint64_t FrameSeed(uint64_t seed, int frame);

/// Exact k-nearest-neighbour queries over the decoded centres of every box
/// in a grid, using a uniform spatial hash.
class NeighbourIndex {
 public:
  NeighbourIndex(const BoxGrid& grid, const GridSpec& spec);

  /// The k boxes nearest to the centre of `u`, excluding `u`, ordered by
  /// (squared distance, row, col).
  std::vector<GridPixel> Nearest(const GridPixel& u, int k) const;

  const Vec3& centre(size_t flat) const { return centres_[flat]; }

 private:
  using CellKey = std::array<int64_t, 3>;
  struct KeyHash {
    size_t operator()(const CellKey& k) const;
  };
  CellKey KeyOf(const Vec3& p) const;

  int rows_;
  int cols_;
  std::vector<Vec3> centres_;
  std::vector<GridPixel> pixels_;
  double cell_size_;
  std::unordered_map<CellKey, std::vector<int>, KeyHash> buckets_;
  CellKey key_min_, key_max_;
};

/// Mean of u's confidence and those of its 8 nearest boxes in 3D.
double SmoothConfidence(const NeighbourIndex& index, const BoxGrid& grid,
                        const GridPixel& u, int neighbours = 8);

/// Convenience overload that builds a temporary index.
double SmoothConfidence(const BoxGrid& grid, const GridSpec& spec, const GridPixel& u);

}  // namespace pgt
