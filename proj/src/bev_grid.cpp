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
#include "pgt/bev_grid.hpp"

#include <cmath>
#include <string>

#include "pgt/error.hpp"

namespace pgt {

namespace {

int CellIndex(double v, const Range& r, int cells) {
  const int i = static_cast<int>(std::floor((v - r.min) / r.Extent() * cells));
  // Guards against rounding pushing a value just below max into cell `cells`.
  return std::min(i, cells - 1);
}

}  // namespace

void GridSpec::Validate() const {
  if (!(x.max > x.min) || !(y.max > y.min) || !(z.max > z.min)) {
    throw Error(ErrorCode::kConfigInvalid, "grid ranges must be non-empty");
  }
  if (height <= 0 || width <= 0 || stride <= 0 || height % stride != 0 ||
      width % stride != 0) {
    throw Error(ErrorCode::kConfigInvalid,
                "grid size must be positive and divisible by the stride");
  }
}

std::optional<GridPixel> BevPixelOf(const Vec3& p, const GridSpec& spec) {
  if (!spec.Contains(p)) return std::nullopt;
  return GridPixel{CellIndex(p.x(), spec.x, spec.height),
                   CellIndex(p.y(), spec.y, spec.width)};
}

BevImage Rasterize(const PointCloud& cloud, const GridSpec& spec) {
  BevImage image(spec.height, spec.width);
  std::vector<int> counts(static_cast<size_t>(spec.height) * spec.width, 0);
  const double z_extent = spec.z.Extent();
  for (const auto& pt : cloud.points) {
    const auto pix = BevPixelOf(pt.position, spec);
    if (!pix) continue;
    const float height = static_cast<float>((pt.position.z() - spec.z.min) / z_extent);
    const float intensity = static_cast<float>(pt.intensity);
    float& h = image.at(pix->row, pix->col, 0);
    float& i = image.at(pix->row, pix->col, 1);
    h = std::max(h, height);
    i = std::max(i, intensity);
    ++counts[static_cast<size_t>(pix->row) * spec.width + pix->col];
  }
  const double norm = std::log1p(static_cast<double>(BevImage::kDensitySaturation));
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      const int n = counts[static_cast<size_t>(r) * spec.width + c];
      if (n == 0) continue;
      image.at(r, c, 2) =
          static_cast<float>(std::min(1.0, std::log1p(static_cast<double>(n)) / norm));
    }
  }
  return image;
}

void BoxGrid::CheckShape(const GridSpec& spec) const {
  if (rows_ != spec.OutputRows() || cols_ != spec.OutputCols()) {
    throw Error(ErrorCode::kShapeMismatch,
                "box grid is " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                    ", grid spec expects " + std::to_string(spec.OutputRows()) + "x" +
                    std::to_string(spec.OutputCols()));
  }
}

Vec3 PillarCentre(const GridPixel& u, const GridSpec& spec) {
  if (u.row < 0 || u.row >= spec.OutputRows() || u.col < 0 ||
      u.col >= spec.OutputCols()) {
    throw Error(ErrorCode::kOutOfGrid, "pixel (" + std::to_string(u.row) + ", " +
                                           std::to_string(u.col) + ") outside grid");
  }
  const double block_x = spec.MetresPerRow() * spec.stride;
  const double block_y = spec.MetresPerCol() * spec.stride;
  return {spec.x.min + (u.row + 0.5) * block_x, spec.y.min + (u.col + 0.5) * block_y,
          0.5 * (spec.z.min + spec.z.max)};
}

Obb3 DecodeBox(const GridPixel& u, const BoxCode& code, const GridSpec& spec) {
  Obb3 box;
  box.frame = Frame::kLidar;
  box.centre = PillarCentre(u, spec) + code.delta;
  box.dims = code.dims;
  box.yaw = code.yaw;
  return box;
}

std::pair<GridPixel, BoxCode> EncodeBox(const Obb3& box, const GridSpec& spec) {
  if (box.frame != Frame::kLidar || !spec.Contains(box.centre)) {
    throw Error(ErrorCode::kOutOfVolume, "box centre outside the grid volume");
  }
  const GridPixel full = *BevPixelOf(box.centre, spec);
  const GridPixel u{full.row / spec.stride, full.col / spec.stride};
  BoxCode code;
  code.delta = box.centre - PillarCentre(u, spec);
  code.dims = box.dims;
  code.yaw = box.yaw;
  return {u, code};
}

}  // namespace pgt
