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
#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "pgt/geometry.hpp"

namespace pgt {

/// H' x W' depth in metres (camera z). Entries <= 0 are invalid.
class SparseDepthImage {
 public:
  SparseDepthImage() = default;
  SparseDepthImage(int height, int width)
      : height_(height), width_(width), data_(static_cast<size_t>(height) * width, 0.0f) {}

  int height() const { return height_; }
  int width() const { return width_; }
  bool InBounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  float at(int row, int col) const { return data_[Index(row, col)]; }
  float& at(int row, int col) { return data_[Index(row, col)]; }
  bool IsValid(int row, int col) const { return InBounds(row, col) && at(row, col) > 0.0f; }
  size_t ValidCount() const {
    size_t n = 0;
    for (float v : data_) n += v > 0.0f ? 1 : 0;
    return n;
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  size_t Index(int row, int col) const { return static_cast<size_t>(row) * width_ + col; }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// H' x W' x 2 pixel displacement (du, dv) to the next frame. NaN marks an
/// undefined entry.
class FlowImage {
 public:
  FlowImage() = default;
  FlowImage(int height, int width)
      : height_(height), width_(width),
        data_(static_cast<size_t>(height) * width * 2,
              std::numeric_limits<float>::quiet_NaN()) {}

  int height() const { return height_; }
  int width() const { return width_; }
  bool InBounds(int row, int col) const {
    return row >= 0 && row < height_ && col >= 0 && col < width_;
  }
  Vec2 at(int row, int col) const {
    const size_t i = Index(row, col);
    return {data_[i], data_[i + 1]};
  }
  void set(int row, int col, const Vec2& flow) {
    const size_t i = Index(row, col);
    data_[i] = static_cast<float>(flow.x());
    data_[i + 1] = static_cast<float>(flow.y());
  }
  bool IsDefined(int row, int col) const {
    if (!InBounds(row, col)) return false;
    const size_t i = Index(row, col);
    return std::isfinite(data_[i]) && std::isfinite(data_[i + 1]);
  }

  const std::vector<float>& data() const { return data_; }
  std::vector<float>& data() { return data_; }

 private:
  size_t Index(int row, int col) const {
    return (static_cast<size_t>(row) * width_ + col) * 2;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<float> data_;
};

/// Integer pixel (row, col) nearest to a continuous pixel position, using the
/// round-half-up rule everywhere in the project.
inline void NearestPixel(const Vec2& pixel, int* row, int* col) {
  *col = static_cast<int>(std::floor(pixel.x() + 0.5));
  *row = static_cast<int>(std::floor(pixel.y() + 0.5));
}

}  // namespace pgt
