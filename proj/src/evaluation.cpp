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
#include "pgt/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "pgt/dataset_io.hpp"
#include "pgt/error.hpp"

namespace pgt {
namespace {

const std::vector<std::string>& ClassOrder() {
  static const std::vector<std::string> order = {"vehicle", "pedestrian", "cyclist"};
  return order;
}

// Index of the highest-IoU candidate with IoU >= threshold, first one on
// ties, or -1.
template <typename Pred>
int BestMatch(const Obb3& box, const std::vector<LabelledBox>& gts, const BoxIou& iou,
              double threshold, Pred allowed) {
  int best = -1;
  double best_iou = -1.0;
  for (size_t g = 0; g < gts.size(); ++g) {
    if (!allowed(g)) continue;
    const double v = iou(box, gts[g].box);
    if (v > best_iou) {
      best_iou = v;
      best = static_cast<int>(g);
    }
  }
  return best >= 0 && best_iou >= threshold ? best : -1;
}

std::vector<LabelledBox> Unlabelled(const std::vector<Obb3>& boxes) {
  std::vector<LabelledBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) out.push_back({b, ""});
  return out;
}

}  // namespace

Aabb2 ProjectBox2d(const Obb3& box, const RigidTransform& lidar_to_camera,
                   const CameraIntrinsics& k) {
  Aabb2 out;
  out.min = Vec2::Constant(std::numeric_limits<double>::infinity());
  out.max = Vec2::Constant(-std::numeric_limits<double>::infinity());
  for (const Vec3& corner : box.Corners()) {
    const Vec3 cam = box.frame == Frame::kLidar ? lidar_to_camera(corner) : corner;
    if (!(cam.z() > 0.0)) {
      throw Error(ErrorCode::kBehindCamera, "box vertex at camera depth " +
                                                std::to_string(cam.z()));
    }
    const Vec2 px = Project(cam, k);
    out.min = out.min.cwiseMin(px);
    out.max = out.max.cwiseMax(px);
  }
  const Vec2 lo(0.0, 0.0);
  const Vec2 hi(k.width, k.height);
  out.min = out.min.cwiseMax(lo).cwiseMin(hi);
  out.max = out.max.cwiseMax(lo).cwiseMin(hi);
  return out;
}

double AveragePrecision(const std::vector<Detection>& detections, const std::vector<Obb3>& gts,
                        const BoxIou& iou, double threshold) {
  return AveragePrecision(std::vector<EvalFrame>{{detections, Unlabelled(gts)}}, iou, threshold);
}

double AveragePrecision(const std::vector<EvalFrame>& frames, const BoxIou& iou,
                        double threshold) {
  struct Ranked {
    double confidence;
    size_t frame;
    size_t index;
  };
  std::vector<Ranked> ranked;
  size_t total_gts = 0;
  for (size_t f = 0; f < frames.size(); ++f) {
    total_gts += frames[f].gts.size();
    for (size_t i = 0; i < frames[f].detections.size(); ++i) {
      ranked.push_back({frames[f].detections[i].confidence, f, i});
    }
  }
  if (total_gts == 0) return ranked.empty() ? 1.0 : 0.0;
  std::stable_sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    return a.confidence > b.confidence;
  });

  std::vector<std::vector<char>> taken(frames.size());
  for (size_t f = 0; f < frames.size(); ++f) taken[f].assign(frames[f].gts.size(), 0);
  std::vector<double> precision;
  std::vector<double> recall;
  size_t tp = 0;
  for (size_t r = 0; r < ranked.size(); ++r) {
    const EvalFrame& frame = frames[ranked[r].frame];
    auto& used = taken[ranked[r].frame];
    const int g = BestMatch(frame.detections[ranked[r].index].box, frame.gts, iou, threshold,
                            [&](size_t i) { return !used[i]; });
    if (g >= 0) {
      used[g] = 1;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(total_gts));
  }
  for (size_t i = precision.size(); i-- > 1;) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double ap = 0.0;
  double prev_recall = 0.0;
  for (size_t i = 0; i < recall.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

std::map<std::string, double> PerClassAccuracy(const std::vector<Detection>& detections,
                                               const std::vector<LabelledBox>& gts,
                                               const BoxIou& iou, double threshold) {
  return PerClassAccuracy(std::vector<EvalFrame>{{detections, gts}}, iou, threshold);
}

std::map<std::string, double> PerClassAccuracy(const std::vector<EvalFrame>& frames,
                                               const BoxIou& iou, double threshold) {
  std::map<std::string, std::pair<size_t, size_t>> counts;  // detected, total
  for (const auto& frame : frames) {
    std::vector<char> detected(frame.gts.size(), 0);
    for (const auto& det : frame.detections) {
      const int g = BestMatch(det.box, frame.gts, iou, threshold, [](size_t) { return true; });
      if (g >= 0) detected[g] = 1;
    }
    for (size_t g = 0; g < frame.gts.size(); ++g) {
      auto& c = counts[frame.gts[g].cls];
      c.first += detected[g];
      c.second += 1;
    }
  }
  std::map<std::string, double> out;
  for (const auto& [cls, c] : counts) {
    out[cls] = static_cast<double>(c.first) / static_cast<double>(c.second);
  }
  return out;
}

std::optional<std::string> EvaluationClass(const std::string& kitti_type) {
  static const std::map<std::string, std::string> mapping = {
      {"Car", "vehicle"},          {"Van", "vehicle"},       {"Truck", "vehicle"},
      {"Tram", "vehicle"},         {"Pedestrian", "pedestrian"},
      {"Person_sitting", "pedestrian"}, {"Cyclist", "cyclist"},
  };
  auto it = mapping.find(kitti_type);
  if (it == mapping.end()) return std::nullopt;
  return it->second;
}

EvalMode ParseEvalMode(const std::string& name) {
  if (name == "bev") return EvalMode::kBev;
  if (name == "2d") return EvalMode::k2d;
  throw Error(ErrorCode::kConfigInvalid, "unknown evaluation mode '" + name + "'");
}

std::string EvalModeName(EvalMode mode) { return mode == EvalMode::kBev ? "bev" : "2d"; }

std::vector<double> ThresholdRange(double lo, double hi, double step) {
  if (!(step > 0.0) || !(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::kConfigInvalid, "threshold range needs lo <= hi and step > 0");
  }
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + 1e-9) break;
    out.push_back(std::round(v * 1e9) / 1e9);
  }
  return out;
}

SequenceMetrics EvaluateSequence(const std::filesystem::path& det_dir,
                                 const std::filesystem::path& gt_dir,
                                 const std::filesystem::path& calib_path, EvalMode mode,
                                 const std::vector<double>& thresholds) {
  namespace fs = std::filesystem;
  for (const auto& dir : {det_dir, gt_dir}) {
    if (!fs::is_directory(dir)) {
      throw Error(ErrorCode::kIoError, "not a directory: " + dir.string());
    }
  }
  const Calibration calib = ReadCalibration(calib_path);
  const RigidTransform camera_to_lidar = Invert(calib.lidar_to_camera);

  auto label_files = [](const fs::path& dir) {
    std::set<std::string> names;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".txt") {
        names.insert(entry.path().filename().string());
      }
    }
    return names;
  };
  const std::set<std::string> gt_names = label_files(gt_dir);
  for (const auto& name : label_files(det_dir)) {
    if (!gt_names.count(name)) {
      throw Error(ErrorCode::kMissingFrameData, "no ground truth for detections " + name);
    }
  }

  SequenceMetrics metrics;
  metrics.mode = mode;
  std::vector<EvalFrame> frames;
  for (const auto& name : gt_names) {
    EvalFrame frame;
    for (const auto& label : ReadLabels(gt_dir / name)) {
      const auto cls = EvaluationClass(label.type);
      if (!cls) continue;
      frame.gts.push_back({TransformBox(label.box, camera_to_lidar, Frame::kLidar), *cls});
    }
    const fs::path det_path = det_dir / name;
    if (fs::exists(det_path)) {
      for (const auto& label : ReadLabels(det_path)) {
        if (!label.score) {
          throw Error(ErrorCode::kMalformedLine,
                      det_path.string() + ": detection without a score column");
        }
        frame.detections.push_back(
            {TransformBox(label.box, camera_to_lidar, Frame::kLidar), *label.score});
      }
    }
    metrics.detections += frame.detections.size();
    metrics.gts += frame.gts.size();
    frames.push_back(std::move(frame));
  }
  metrics.frames = static_cast<int>(frames.size());

  BoxIou iou;
  if (mode == EvalMode::kBev) {
    iou = [](const Obb3& a, const Obb3& b) { return RotatedIouBev(a, b); };
  } else {
    iou = [&calib](const Obb3& a, const Obb3& b) {
      try {
        return Iou2d(ProjectBox2d(a, calib.lidar_to_camera, calib.intrinsics),
                     ProjectBox2d(b, calib.lidar_to_camera, calib.intrinsics));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kBehindCamera) throw;
        return 0.0;
      }
    };
  }
  for (double t : thresholds) {
    metrics.rows.push_back({t, AveragePrecision(frames, iou, t), PerClassAccuracy(frames, iou, t)});
  }
  return metrics;
}

std::string FormatMetricsTable(const SequenceMetrics& metrics) {
  std::ostringstream out;
  char buf[64];
  out << "mode " << EvalModeName(metrics.mode) << "  frames " << metrics.frames
      << "  detections " << metrics.detections << "  ground_truth " << metrics.gts << "\n";
  out << "  iou     mAP";
  for (const auto& cls : ClassOrder()) {
    std::snprintf(buf, sizeof(buf), "  %10s", cls.c_str());
    out << buf;
  }
  out << "\n";
  for (const auto& row : metrics.rows) {
    std::snprintf(buf, sizeof(buf), "%5.2f  %6.4f", row.threshold, row.map);
    out << buf;
    for (const auto& cls : ClassOrder()) {
      auto it = row.accuracy.find(cls);
      if (it == row.accuracy.end()) {
        std::snprintf(buf, sizeof(buf), "  %10s", "-");
      } else {
        std::snprintf(buf, sizeof(buf), "  %10.4f", it->second);
      }
      out << buf;
    }
    out << "\n";
  }
  return out.str();
}

}  // namespace pgt
