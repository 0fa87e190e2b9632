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
// On-disk formats. A sequence directory looks like
//
//   <seq>/velodyne/NNNNNN.bin     KITTI velodyne: float32 x, y, z, intensity
//   <seq>/depth/NNNNNN.bin(.json) float32 H' x W' grid, <= 0 invalid
//   <seq>/flow/NNNNNN.bin(.json)  float32 H' x W' x 2 grid, NaN undefined
//   <seq>/poses.txt               one 3x4 camera(t) -> world matrix per line
//   <seq>/calib.txt               P2, Tr_velo_to_cam (+ optional R0_rect,
//                                 image_size)
//   <seq>/label_2/NNNNNN.txt      KITTI object labels (camera frame)
//
// Every binary payload is little-endian and comes with a JSON sidecar that
// records its shape (see GridHeader).
#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pgt/bev_grid.hpp"
#include "pgt/geometry.hpp"
#include "pgt/images.hpp"

namespace pgt {

namespace fs = std::filesystem;

/// Shape record stored next to every raw float32 grid as `<file>.json`.
struct GridHeader {
  std::string kind;  // "depth", "flow", "box_grid", "bev"
  int rows = 0;
  int cols = 0;
  int channels = 0;
};

/// Path of the JSON sidecar for a binary payload: "x.bin" -> "x.json".
fs::path SidecarPath(const fs::path& payload);

void WriteGridHeader(const fs::path& payload, const GridHeader& header);
/// Throws kIoError / kMalformedFile.
GridHeader ReadGridHeader(const fs::path& payload);

// ---- point clouds ----
/// Throws kIoError, kMalformedFile (size not a multiple of 16 or invalid
/// values).
PointCloud ReadCloud(const fs::path& path);
void WriteCloud(const fs::path& path, const PointCloud& cloud);

// ---- poses ----
/// One camera(t) -> world transform per line. Rotations drifting more than
/// 1e-6 from orthonormal are re-orthonormalised (a warning is appended to
/// `warnings`); drift beyond 1e-3 throws kMalformedLine.
std::vector<RigidTransform> ReadPoses(const fs::path& path,
                                      std::vector<std::string>* warnings = nullptr);
void WritePoses(const fs::path& path, const std::vector<RigidTransform>& poses);

// ---- calibration ----
struct Calibration {
  RigidTransform lidar_to_camera = DefaultLidarToCamera();
  CameraIntrinsics intrinsics;
};
/// Throws kIoError, kMalformedLine, kMalformedFile (missing keys).
Calibration ReadCalibration(const fs::path& path);
void WriteCalibration(const fs::path& path, const Calibration& calib);

// ---- labels ----
/// One KITTI label line. `box` is in the camera frame with the fixed mapping
/// (h, w, l) <-> (dims.y, dims.x, dims.z), location = bottom centre
/// (centre.y + h/2) and rotation_y = -yaw.
struct KittiLabel {
  std::string type;
  double truncation = 0.0;
  int occlusion = 0;
  double alpha = 0.0;
  Aabb2 bbox;
  Obb3 box;
  std::optional<double> score;
};

/// Parses one label line. Throws kMalformedLine.
KittiLabel ParseLabelLine(const std::string& line);
std::string FormatLabelLine(const KittiLabel& label);
/// Reads a label file, skipping DontCare entries. Throws kIoError /
/// kMalformedLine.
std::vector<KittiLabel> ReadLabels(const fs::path& path);
void WriteLabels(const fs::path& path, const std::vector<KittiLabel>& labels);

// ---- depth / flow / box grids ----
SparseDepthImage ReadDepth(const fs::path& path);
void WriteDepth(const fs::path& path, const SparseDepthImage& depth);
FlowImage ReadFlow(const fs::path& path);
void WriteFlow(const fs::path& path, const FlowImage& flow);
/// Per pixel: delta x/y/z, dims x/y/z, yaw, confidence. Throws kShapeMismatch
/// when the stored shape disagrees with `spec`.
BoxGrid ReadBoxGrid(const fs::path& path, const GridSpec& spec);
void WriteBoxGrid(const fs::path& path, const BoxGrid& grid);
/// BEV image as a raw H x W x 3 float32 grid plus sidecar.
void WriteBevImage(const fs::path& path, const BevImage& image);
BevImage ReadBevImage(const fs::path& path);

// ---- sequences ----
struct SequenceIndex {
  std::string id;
  fs::path root;
  int frame_count = 0;
  Calibration calib;
  bool has_depth = false;
  bool has_flow = false;
  bool has_poses = false;
  bool has_labels = false;

  static std::string FrameName(int frame);  // "000042"
  fs::path CloudPath(int frame) const;
  fs::path DepthPath(int frame) const;
  fs::path FlowPath(int frame) const;
  fs::path LabelPath(int frame) const;
  fs::path PosesPath() const { return root / "poses.txt"; }
  fs::path CalibPath() const { return root / "calib.txt"; }
};

/// Scans and validates a sequence directory: velodyne frames must be
/// contiguous from 0 and every present modality must cover every frame.
/// Throws kIoError / kMalformedFile.
SequenceIndex OpenSequence(const fs::path& root);

}  // namespace pgt
