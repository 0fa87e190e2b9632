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
#include "pgt/workflow.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "pgt/error.hpp"
#include "pgt/evaluation.hpp"
#include "pgt/proposal.hpp"
#include "pgt/sampler.hpp"

namespace pgt {
namespace {

using Json = nlohmann::ordered_json;

double WrapPi(double a) {
  a = std::remainder(a, 2.0 * kPi);
  return a <= -kPi ? a + 2.0 * kPi : a;
}

Json Vec3Json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }
Json PixelJson(const GridPixel& u) { return Json::array({u.row, u.col}); }

// -inf (no usable crop) has no JSON spelling; it is written as null.
Json ScoreJson(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Vec3 ReadVec3(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected 3 numbers");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

GridPixel ReadPixel(const Json& j) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("expected [row, col]");
  return {j[0].get<int>(), j[1].get<int>()};
}

}  // namespace

std::string KittiType(const std::string& name) {
  if (name == "vehicle") return "Car";
  if (name == "pedestrian") return "Pedestrian";
  if (name == "cyclist") return "Cyclist";
  return name;
}

KittiLabel LabelFromLidarBox(const Obb3& lidar_box, const std::string& type,
                             const Calibration& calib, std::optional<double> score) {
  KittiLabel label;
  label.type = type;
  label.box = TransformBox(lidar_box, calib.lidar_to_camera, Frame::kCamera);
  try {
    label.bbox = ProjectBox2d(label.box, calib.lidar_to_camera, calib.intrinsics);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kBehindCamera) throw;
    label.bbox = Aabb2{};
  }
  // KITTI rotation_y is the negated yaw; alpha removes the viewing ray angle.
  label.alpha = WrapPi(-label.box.yaw - std::atan2(label.box.centre.x(), label.box.centre.z()));
  label.score = score;
  return label;
}

void WriteScene(const SimulatedScene& scene, const fs::path& dir) {
  SequenceIndex seq;
  seq.root = dir;
  for (const char* sub : {"velodyne", "depth", "flow", "label_2"}) {
    fs::create_directories(dir / sub);
  }
  const Calibration calib{scene.config.lidar_to_camera, scene.config.intrinsics};
  WriteCalibration(seq.CalibPath(), calib);
  std::vector<RigidTransform> poses;
  for (int t = 0; t < static_cast<int>(scene.frames.size()); ++t) {
    const SceneFrame& frame = scene.frames[t];
    WriteCloud(seq.CloudPath(t), frame.cloud);
    WriteDepth(seq.DepthPath(t), frame.depth);
    WriteFlow(seq.FlowPath(t), frame.flow);
    std::vector<KittiLabel> labels;
    for (const auto& g : frame.gt) {
      labels.push_back(LabelFromLidarBox(g.box, ObjectClassName(g.cls), calib, std::nullopt));
    }
    WriteLabels(seq.LabelPath(t), labels);
    poses.push_back(frame.pose);
  }
  WritePoses(seq.PosesPath(), poses);
}

std::vector<FrameResult> GenerateSequence(const SequenceIndex& seq, const PipelineConfig& config,
                                          const std::optional<fs::path>& proposals_dir,
                                          int jobs) {
  config.Validate();
  const int horizon = config.scorer.horizon;
  const int count = std::max(0, seq.frame_count - horizon);
  std::vector<FrameResult> results(count);
  std::vector<std::exception_ptr> errors(count);

  auto run = [&](int t) {
    const FrameWindow window = LoadWindow(seq, t, horizon);
    const BoxGrid grid =
        proposals_dir
            ? GridFromFile(*proposals_dir / (SequenceIndex::FrameName(t) + ".bin"), config.grid)
            : HeuristicGrid(window.cloud, config.grid, config.proposals);
    SamplerConfig sampler = config.sampler;
    sampler.seed = FrameSeed(config.sampler.seed, t);
    const auto pixels = SamplePixels(grid, config.grid, sampler);
    results[t].frame = t;
    results[t].labels = GeneratePseudoLabels(window, grid, config.grid, pixels, config.anchors,
                                             config.scorer, config.tracker);
  };

  if (jobs <= 0) jobs = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, std::max(count, 1));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int t = next++; t < count; t = next++) {
      try {
        run(t);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> threads;
  for (int i = 1; i < jobs; ++i) threads.emplace_back(worker);
  worker();
  for (auto& th : threads) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

std::string DiagnosticsJson(const FrameResult& result, const std::vector<Anchor>& anchors) {
  const PseudoLabelSet& set = result.labels;
  Json pixels = Json::array();
  for (const auto& r : set.reports) {
    Json scores = Json::object();
    for (size_t a = 0; a < r.anchors.size() && a < anchors.size(); ++a) {
      const AnchorScore& s = r.anchors[a];
      scores[anchors[a].name] = {{"crop_size", s.crop_size},
                                 {"moving", ScoreJson(std::isfinite(s.kappa) ? s.moving : kNoScore)},
                                 {"inconsistency",
                                  ScoreJson(std::isfinite(s.kappa) ? s.inconsistency : kNoScore)},
                                 {"kappa", ScoreJson(s.kappa)}};
    }
    pixels.push_back({{"pixel", PixelJson(r.pixel)},
                      {"proposal_centre", Vec3Json(r.proposal_centre)},
                      {"raw_confidence", r.raw_confidence},
                      {"smoothed_confidence", r.smoothed_confidence},
                      {"selected", r.selected >= 0 ? Json(anchors[r.selected].name) : Json(nullptr)},
                      {"anchors", scores}});
  }
  Json positives = Json::array();
  for (const auto& p : set.positives) {
    positives.push_back({{"pixel", PixelJson(p.pixel)},
                         {"anchor", p.anchor},
                         {"target", p.target},
                         {"box", {{"centre", Vec3Json(p.box.centre)},
                                  {"dims", Vec3Json(p.box.dims)},
                                  {"yaw", p.box.yaw}}}});
  }
  Json negatives = Json::array();
  for (const auto& n : set.negatives) {
    negatives.push_back({{"pixel", PixelJson(n.pixel)}, {"target", n.target}});
  }
  const Json j = {{"frame", result.frame},
                  {"sampled", set.reports.size()},
                  {"positives", positives},
                  {"negatives", negatives},
                  {"pixels", pixels}};
  return j.dump(1) + "\n";
}

void ReadDiagnostics(const fs::path& path, std::vector<PseudoLabel>* positives,
                     std::vector<NegativeLabel>* negatives) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  positives->clear();
  negatives->clear();
  try {
    const Json j = Json::parse(in);
    for (const auto& p : j.at("positives")) {
      PseudoLabel label;
      label.pixel = ReadPixel(p.at("pixel"));
      label.anchor = p.at("anchor").get<std::string>();
      label.target = p.at("target").get<double>();
      const Json& box = p.at("box");
      label.box.frame = Frame::kLidar;
      label.box.centre = ReadVec3(box.at("centre"));
      label.box.dims = ReadVec3(box.at("dims"));
      label.box.yaw = box.at("yaw").get<double>();
      positives->push_back(label);
    }
    for (const auto& n : j.at("negatives")) {
      negatives->push_back({ReadPixel(n.at("pixel")), n.at("target").get<double>()});
    }
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": " + e.what());
  }
}

void WriteGenerated(const std::vector<FrameResult>& results, const PipelineConfig& config,
                    const Calibration& calib, const fs::path& out_dir) {
  fs::create_directories(out_dir / "label_2");
  fs::create_directories(out_dir / "diagnostics");
  for (const auto& r : results) {
    const std::string name = SequenceIndex::FrameName(r.frame);
    std::vector<KittiLabel> labels;
    for (const auto& p : r.labels.positives) {
      labels.push_back(LabelFromLidarBox(p.box, KittiType(p.anchor), calib, p.target));
    }
    WriteLabels(out_dir / "label_2" / (name + ".txt"), labels);
    const fs::path diag = out_dir / "diagnostics" / (name + ".json");
    std::ofstream out(diag, std::ios::binary);
    out << DiagnosticsJson(r, config.anchors);
    if (!out) throw Error(ErrorCode::kIoError, "write failed for " + diag.string());
  }
}

void RgbImage::Set(int row, int col, const std::array<uint8_t, 3>& rgb) {
  if (row < 0 || row >= height || col < 0 || col >= width) return;
  const size_t i = (static_cast<size_t>(row) * width + col) * 3;
  data[i] = rgb[0];
  data[i + 1] = rgb[1];
  data[i + 2] = rgb[2];
}

RgbImage RenderBev(const PointCloud& lidar_cloud, const GridSpec& spec) {
  const BevImage bev = Rasterize(lidar_cloud, spec);
  RgbImage image(spec.width, spec.height);
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      if (bev.at(r, c, 2) <= 0.0f) continue;
      const auto v = static_cast<uint8_t>(60.0f + 195.0f * std::clamp(bev.at(r, c, 0), 0.0f, 1.0f));
      image.Set(spec.height - 1 - r, spec.width - 1 - c, {v, v, v});
    }
  }
  return image;
}

void DrawBox(RgbImage* image, const Obb3& lidar_box, const GridSpec& spec,
             const std::array<uint8_t, 3>& rgb) {
  // Footprint corners come as (-y, x); map them to continuous image
  // coordinates (row up = far, column left = LiDAR left).
  std::array<Vec2, 4> corners;
  const auto footprint = lidar_box.Footprint();
  for (int i = 0; i < 4; ++i) {
    const double x = footprint[i].y();
    const double y = -footprint[i].x();
    corners[i] = {spec.height - (x - spec.x.min) / spec.MetresPerRow(),
                  spec.width - (y - spec.y.min) / spec.MetresPerCol()};
  }
  for (int i = 0; i < 4; ++i) {
    const Vec2& a = corners[i];
    const Vec2& b = corners[(i + 1) % 4];
    const int steps = static_cast<int>(std::ceil(2.0 * (b - a).lpNorm<Eigen::Infinity>())) + 1;
    for (int s = 0; s <= steps; ++s) {
      const Vec2 p = a + (b - a) * (static_cast<double>(s) / steps);
      image->Set(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())), rgb);
    }
  }
}

void WritePpm(const fs::path& path, const RgbImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out << "P6\n" << image.width << " " << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.data.data()),
            static_cast<std::streamsize>(image.data.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace pgt
