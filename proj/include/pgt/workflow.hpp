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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pgt/config.hpp"
#include "pgt/dataset_io.hpp"
#include "pgt/pipeline.hpp"
#include "pgt/scene_sim.hpp"

namespace pgt {

/// KITTI type written for a class or anchor name: Car, Pedestrian, Cyclist;
/// anything else passes through.
std::string KittiType(const std::string& name);

/// KITTI record for a LiDAR-frame box: camera-frame box, projected 2D
/// rectangle (zero when a vertex is behind the camera) and observation angle.
KittiLabel LabelFromLidarBox(const Obb3& lidar_box, const std::string& type,
                             const Calibration& calib, std::optional<double> score);

/// Writes a simulated scene as a sequence directory: velodyne, depth, flow,
/// label_2, poses.txt and calib.txt. The last frame's flow is all undefined.
void WriteScene(const SimulatedScene& scene, const fs::path& dir);

struct FrameResult {
  int frame = 0;
  PseudoLabelSet labels;
};

/// Pseudo-labels for every frame t with t + K < frame count. Proposals come
/// from `proposals_dir`/NNNNNN.bin when given, otherwise from the heuristic.
/// Frames are spread over `jobs` threads; the result does not depend on it.
std::vector<FrameResult> GenerateSequence(const SequenceIndex& seq, const PipelineConfig& config,
                                          const std::optional<fs::path>& proposals_dir,
                                          int jobs);

/// Per-pixel scores, positives (LiDAR boxes) and negatives of one frame.
std::string DiagnosticsJson(const FrameResult& result, const std::vector<Anchor>& anchors);
/// Reads back the positives and negatives of a diagnostics file.
/// Throws Error(kMalformedFile).
void ReadDiagnostics(const fs::path& path, std::vector<PseudoLabel>* positives,
                     std::vector<NegativeLabel>* negatives);

/// label_2/NNNNNN.txt (score column = target confidence) and
/// diagnostics/NNNNNN.json for each frame.
void WriteGenerated(const std::vector<FrameResult>& results, const PipelineConfig& config,
                    const Calibration& calib, const fs::path& out_dir);

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<uint8_t> data;  // row-major RGB

  RgbImage(int w, int h) : width(w), height(h), data(static_cast<size_t>(w) * h * 3, 0) {}
  void Set(int row, int col, const std::array<uint8_t, 3>& rgb);
};

/// Top-down view of the BEV raster, far range at the top and the LiDAR's
/// left on the left. Occupied cells are shaded by height.
RgbImage RenderBev(const PointCloud& lidar_cloud, const GridSpec& spec);
/// Outline of a LiDAR-frame box footprint on a RenderBev image.
void DrawBox(RgbImage* image, const Obb3& lidar_box, const GridSpec& spec,
             const std::array<uint8_t, 3>& rgb);
/// Binary PPM (P6). Throws Error(kIoError).
void WritePpm(const fs::path& path, const RgbImage& image);

}  // namespace pgt
