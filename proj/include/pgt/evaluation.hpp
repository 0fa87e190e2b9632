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

#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pgt/geometry.hpp"

namespace pgt {

struct Detection {
  Obb3 box;  // LiDAR frame
  double confidence = 0.0;
};

struct LabelledBox {
  Obb3 box;
  std::string cls;  // "vehicle", "pedestrian" or "cyclist"
};

using BoxIou = std::function<double(const Obb3&, const Obb3&)>;

/// Tightest image rectangle around the 8 projected vertices, clipped to the
/// image. LiDAR-frame boxes are moved into the camera with `lidar_to_camera`;
/// camera-frame boxes are used as they are. Throws Error(kBehindCamera) if a
/// vertex has non-positive depth.
Aabb2 ProjectBox2d(const Obb3& box, const RigidTransform& lidar_to_camera,
                   const CameraIntrinsics& k);

/// Class-agnostic average precision with all-point interpolation.
/// Detections are taken in descending confidence (stable for ties) and each
/// claims the unmatched ground truth of highest IoU, if that IoU reaches
/// `threshold`. No ground truth gives 1 without detections and 0 with any.
double AveragePrecision(const std::vector<Detection>& detections, const std::vector<Obb3>& gts,
                        const BoxIou& iou, double threshold);

struct EvalFrame {
  std::vector<Detection> detections;
  std::vector<LabelledBox> gts;
};

/// The same, ranking detections of all frames together while matching each
/// one only inside its own frame.
double AveragePrecision(const std::vector<EvalFrame>& frames, const BoxIou& iou,
                        double threshold);

/// Fraction of ground-truth boxes per class that are the greatest-IoU
/// association of at least one detection, with IoU >= threshold. Classes
/// without ground truth are left out.
std::map<std::string, double> PerClassAccuracy(const std::vector<Detection>& detections,
                                               const std::vector<LabelledBox>& gts,
                                               const BoxIou& iou, double threshold);
/// Counts pooled over frames.
std::map<std::string, double> PerClassAccuracy(const std::vector<EvalFrame>& frames,
                                               const BoxIou& iou, double threshold);

/// Evaluation class of a KITTI object type, or nothing for types that are
/// not evaluated (Misc, DontCare, ...).
std::optional<std::string> EvaluationClass(const std::string& kitti_type);

enum class EvalMode { kBev, k2d };

/// "bev" or "2d". Throws Error(kConfigInvalid).
EvalMode ParseEvalMode(const std::string& name);
std::string EvalModeName(EvalMode mode);

/// lo, lo + step, ... up to hi (inclusive within 1e-9). Throws
/// Error(kConfigInvalid) for an empty or non-positive-step range.
std::vector<double> ThresholdRange(double lo, double hi, double step);

struct ThresholdMetrics {
  double threshold = 0.0;
  double map = 0.0;
  std::map<std::string, double> accuracy;
};

struct SequenceMetrics {
  EvalMode mode = EvalMode::kBev;
  int frames = 0;
  size_t detections = 0;
  size_t gts = 0;
  std::vector<ThresholdMetrics> rows;
};

/// Scores the KITTI label files of `det_dir` against those of `gt_dir`, frame
/// by frame (matched on file name). Detections need the score column. A
/// missing detection file means no detections; a detection file without
/// ground truth throws Error(kMissingFrameData). Boxes that cannot be
/// projected in 2D mode match nothing.
SequenceMetrics EvaluateSequence(const std::filesystem::path& det_dir,
                                 const std::filesystem::path& gt_dir,
                                 const std::filesystem::path& calib_path, EvalMode mode,
                                 const std::vector<double>& thresholds);

/// Fixed-width text table, one row per threshold.
std::string FormatMetricsTable(const SequenceMetrics& metrics);

}  // namespace pgt
