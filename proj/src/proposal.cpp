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
#include "pgt/proposal.hpp"

#include <algorithm>

#include "pgt/dataset_io.hpp"

namespace pgt {

BoxGrid GridFromFile(const std::filesystem::path& path, const GridSpec& spec) {
  BoxGrid grid = ReadBoxGrid(path, spec);
  grid.CheckShape(spec);
  return grid;
}

BoxGrid HeuristicGrid(const PointCloud& cloud, const GridSpec& spec,
                      const HeuristicConfig& config) {
  BoxGrid grid(spec);
  const double ground_top = spec.z.min + config.ground_margin;

  // Bucket points by output cell, then sort each bucket so that the floating
  // point sums below see the same order whatever the input order was.
  std::vector<std::vector<Vec3>> cells(grid.size());
  for (const auto& pt : cloud.points) {
    const Vec3& p = pt.position;
    if (p.z() < ground_top) continue;
    const auto full = BevPixelOf(p, spec);
    if (!full) continue;
    const GridPixel u{full->row / spec.stride, full->col / spec.stride};
    cells[grid.Index(u)].push_back(p);
  }

  size_t max_count = 0;
  for (const auto& c : cells) max_count = std::max(max_count, c.size());
  if (max_count == 0) return grid;

  for (size_t i = 0; i < cells.size(); ++i) {
    auto& pts = cells[i];
    if (pts.empty()) continue;
    std::sort(pts.begin(), pts.end(), [](const Vec3& a, const Vec3& b) {
      return std::lexicographical_compare(a.data(), a.data() + 3, b.data(), b.data() + 3);
    });
    Vec3 sum = Vec3::Zero();
    Vec3 lo = pts.front(), hi = pts.front();
    for (const Vec3& p : pts) {
      sum += p;
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    const Vec3 spread = hi - lo;
    BoxCode& code = grid.at(i);
    code.delta = sum / static_cast<double>(pts.size()) - PillarCentre(grid.PixelAt(i), spec);
    // LiDAR y spans the box width, z its height and x its length.
    code.dims = Vec3(spread.y(), spread.z(), spread.x()).cwiseMax(config.min_extent);
    code.yaw = 0.0;
    code.confidence = static_cast<double>(pts.size()) / static_cast<double>(max_count);
  }
  return grid;
}

}  // namespace pgt
