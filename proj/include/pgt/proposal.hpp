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
// Sources of the dense box grid the sampler draws from: a grid produced by an
// external detector, or a density heuristic that needs no trained model.
#pragma once

#include <filesystem>

#include "pgt/bev_grid.hpp"

namespace pgt {

/// Loads an externally predicted grid. Throws kShapeMismatch when its shape
/// differs from (H/s, W/s), plus the usual I/O errors.
BoxGrid GridFromFile(const std::filesystem::path& path, const GridSpec& spec);

struct HeuristicConfig {
  // Points lower than z_min + ground_margin (LiDAR z) count as ground.
  double ground_margin = 0.3;
  double min_extent = 0.1;
};

/// Pools non-ground points per output cell. Each occupied cell gets the
/// centroid offset, the per-axis spread (clamped below by min_extent, in the
/// width/height/length order of BoxCode) and its point count divided by the
/// largest count in the grid. Empty cells keep the zero code.
///
/// The result does not depend on the order of the input points.
BoxGrid HeuristicGrid(const PointCloud& lidar_cloud, const GridSpec& spec,
                      const HeuristicConfig& config = {});

}  // namespace pgt
