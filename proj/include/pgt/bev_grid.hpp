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
// Pillar grid over the LiDAR volume. Image rows index LiDAR x (forward) and
// columns index LiDAR y, both increasing from the lower range bound. Cells are
// half-open: a point exactly on an upper bound belongs to no cell.
#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "pgt/geometry.hpp"

namespace pgt {

struct GridSpec {
  Range x{2.5, 40.0};
  Range y{-18.0, 18.0};
  Range z{-2.73, 1.27};
  int height = 608;  // rows
  int width = 608;   // columns
  int stride = 4;

  int OutputRows() const { return height / stride; }
  int OutputCols() const { return width / stride; }
  double MetresPerRow() const { return x.Extent() / height; }
  double MetresPerCol() const { return y.Extent() / width; }

  /// Throws Error(kConfigInvalid) for empty ranges or sizes not divisible by
  /// the stride.
  void Validate() const;

  bool Contains(const Vec3& lidar_point) const {
    return x.Contains(lidar_point.x()) && y.Contains(lidar_point.y()) &&
           z.Contains(lidar_point.z());
  }
};

/// A cell of either the full-resolution BEV image or the strided box grid.
struct GridPixel {
  int row = 0;
  int col = 0;

  friend bool operator==(const GridPixel&, const GridPixel&) = default;
  friend auto operator<=>(const GridPixel&, const GridPixel&) = default;
};

/// Full-resolution pixel containing a LiDAR point, if it is in the volume.
std::optional<GridPixel> BevPixelOf(const Vec3& lidar_point, const GridSpec& spec);

/// H x W x 3 image, channels (normalised max height, max intensity,
/// log-normalised density), row-major with channels innermost.
class BevImage {
 public:
  static constexpr int kChannels = 3;
  static constexpr int kDensitySaturation = 64;

  BevImage(int height, int width)
      : height_(height), width_(width),
        data_(static_cast<size_t>(height) * width * kChannels, 0.0f) {}

  int height() const { return height_; }
  int width() const { return width_; }
  float at(int row, int col, int channel) const {
    return data_[Index(row, col, channel)];
  }
  float& at(int row, int col, int channel) { return data_[Index(row, col, channel)]; }
  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  size_t Index(int row, int col, int channel) const {
    return (static_cast<size_t>(row) * width_ + col) * kChannels + channel;
  }

  int height_;
  int width_;
  std::vector<float> data_;
};

BevImage Rasterize(const PointCloud& lidar_cloud, const GridSpec& spec);

/// The per-pixel prediction: centre offset from the pillar centre, dims,
/// yaw and confidence.
struct BoxCode {
  Vec3 delta = Vec3::Zero();
  Vec3 dims = Vec3::Zero();
  double yaw = 0.0;
  double confidence = 0.0;

  static constexpr int kFields = 8;
};

/// Dense (H/s) x (W/s) grid of box codes.
class BoxGrid {
 public:
  BoxGrid() = default;
  explicit BoxGrid(const GridSpec& spec)
      : rows_(spec.OutputRows()), cols_(spec.OutputCols()),
        codes_(static_cast<size_t>(rows_) * cols_) {}
  BoxGrid(int rows, int cols)
      : rows_(rows), cols_(cols), codes_(static_cast<size_t>(rows) * cols) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return codes_.size(); }
  bool Contains(const GridPixel& u) const {
    return u.row >= 0 && u.row < rows_ && u.col >= 0 && u.col < cols_;
  }
  const BoxCode& at(const GridPixel& u) const { return codes_[Index(u)]; }
  BoxCode& at(const GridPixel& u) { return codes_[Index(u)]; }
  const BoxCode& at(size_t flat) const { return codes_[flat]; }
  BoxCode& at(size_t flat) { return codes_[flat]; }
  GridPixel PixelAt(size_t flat) const {
    return {static_cast<int>(flat / cols_), static_cast<int>(flat % cols_)};
  }
  size_t Index(const GridPixel& u) const {
    return static_cast<size_t>(u.row) * cols_ + u.col;
  }

  /// Throws Error(kShapeMismatch) unless the shape is exactly (H/s, W/s).
  void CheckShape(const GridSpec& spec) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<BoxCode> codes_;
};

/// Centre of the s x s pillar block of output pixel `u`, at mid-height.
/// Throws Error(kOutOfGrid).
Vec3 PillarCentre(const GridPixel& u, const GridSpec& spec);

/// Throws Error(kOutOfGrid).
Obb3 DecodeBox(const GridPixel& u, const BoxCode& code, const GridSpec& spec);

/// Inverse of DecodeBox for a LiDAR-frame box; confidence is left at 0.
/// Throws Error(kOutOfVolume) when the centre is outside the volume.
std::pair<GridPixel, BoxCode> EncodeBox(const Obb3& lidar_box, const GridSpec& spec);

}  // namespace pgt
