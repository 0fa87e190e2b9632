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
#include "pgt/pipeline.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <tuple>

#include "pgt/dataset_io.hpp"
#include "pgt/error.hpp"
#include "pgt/sampler.hpp"
#include "pgt/scene_sim.hpp"

namespace pgt {

namespace {

// Relative eigenvalue floor below which the covariance counts as rank
// deficient.
constexpr double kRankTolerance = 1e-12;

bool SampleFlow(const FlowImage& flow, const Vec2& uv, Vec2* out) {
  const double fx = std::floor(uv.x()), fy = std::floor(uv.y());
  if (!std::isfinite(fx) || !std::isfinite(fy)) return false;
  const int c0 = static_cast<int>(fx), r0 = static_cast<int>(fy);
  const double ax = uv.x() - fx, ay = uv.y() - fy;
  const int rows[4] = {r0, r0, r0 + 1, r0 + 1};
  const int cols[4] = {c0, c0 + 1, c0, c0 + 1};
  const double weights[4] = {(1 - ax) * (1 - ay), ax * (1 - ay), (1 - ax) * ay, ax * ay};
  bool all = true;
  for (int i = 0; i < 4; ++i) all = all && flow.IsDefined(rows[i], cols[i]);
  if (all) {
    Vec2 f = Vec2::Zero();
    for (int i = 0; i < 4; ++i) f += weights[i] * flow.at(rows[i], cols[i]);
    *out = f;
    return true;
  }
  // Fall back to the closest defined neighbour; the loop order is already
  // row-major, so strict comparison keeps the (row, col) tie-break.
  int best = -1;
  double best_d2 = 0.0;
  for (int i = 0; i < 4; ++i) {
    if (!flow.IsDefined(rows[i], cols[i])) continue;
    const double d2 = Vec2(cols[i] - uv.x(), rows[i] - uv.y()).squaredNorm();
    if (best < 0 || d2 < best_d2) {
      best = i;
      best_d2 = d2;
    }
  }
  if (best < 0) return false;
  *out = flow.at(rows[best], cols[best]);
  return true;
}

bool NearestDepth(const SparseDepthImage& depth, const Vec2& uv, int radius, int* row,
                  int* col) {
  int r0, c0;
  NearestPixel(uv, &r0, &c0);
  bool found = false;
  double best_d2 = 0.0;
  for (int r = r0 - radius; r <= r0 + radius; ++r) {
    for (int c = c0 - radius; c <= c0 + radius; ++c) {
      if (!depth.IsValid(r, c)) continue;
      const double d2 = Vec2(c - uv.x(), r - uv.y()).squaredNorm();
      if (!found || d2 < best_d2) {
        found = true;
        best_d2 = d2;
        *row = r;
        *col = c;
      }
    }
  }
  return found;
}

}  // namespace

std::vector<Anchor> DefaultAnchors() {
  return {{"pedestrian", {0.45, 1.70, 0.27}},
          {"cyclist", {0.54, 1.90, 1.75}},
          {"vehicle", {1.88, 1.63, 4.58}}};
}

void ScorerConfig::Validate() const {
  if (horizon < 1) throw Error(ErrorCode::kConfigInvalid, "horizon K must be at least 1");
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) {
    throw Error(ErrorCode::kConfigInvalid, "lambda1 and lambda2 must be non-negative");
  }
  if (!std::isfinite(eta)) throw Error(ErrorCode::kConfigInvalid, "eta must be finite");
}

void TrackerConfig::Validate() const {
  if (search_radius < 0) {
    throw Error(ErrorCode::kConfigInvalid, "depth search radius must be non-negative");
  }
}

void FrameWindow::Check(int horizon) const {
  if (static_cast<int>(depths.size()) < horizon + 1 ||
      static_cast<int>(flows.size()) < horizon ||
      static_cast<int>(poses.size()) < horizon + 1) {
    throw Error(ErrorCode::kMissingFrameData,
                "frame " + std::to_string(frame) + " needs depth, flow and poses for " +
                    std::to_string(horizon) + " following frames");
  }
  for (int k = 0; k <= horizon; ++k) {
    if (depths[k].height() != intrinsics.height || depths[k].width() != intrinsics.width) {
      throw Error(ErrorCode::kMissingFrameData, "depth image size disagrees with the camera");
    }
    if (k < horizon &&
        (flows[k].height() != intrinsics.height || flows[k].width() != intrinsics.width)) {
      throw Error(ErrorCode::kMissingFrameData, "flow image size disagrees with the camera");
    }
  }
}

RigidTransform FrameWindow::ToReference(int k) const {
  return Compose(Invert(poses.at(0)), poses.at(k));
}

FrameWindow LoadWindow(const SequenceIndex& seq, int t, int horizon) {
  if (t < 0 || t + horizon >= seq.frame_count) {
    throw Error(ErrorCode::kMissingFrameData,
                "frame " + std::to_string(t) + " has fewer than " + std::to_string(horizon) +
                    " following frames");
  }
  if (!seq.has_depth || !seq.has_flow || !seq.has_poses) {
    throw Error(ErrorCode::kMissingFrameData,
                seq.root.string() + " lacks depth, flow or poses");
  }
  const auto poses = ReadPoses(seq.PosesPath());
  if (static_cast<int>(poses.size()) < seq.frame_count) {
    throw Error(ErrorCode::kMissingFrameData, "poses.txt has fewer lines than frames");
  }
  FrameWindow w;
  w.frame = t;
  w.cloud = ReadCloud(seq.CloudPath(t));
  w.lidar_to_camera = seq.calib.lidar_to_camera;
  w.intrinsics = seq.calib.intrinsics;
  for (int k = 0; k <= horizon; ++k) {
    w.depths.push_back(ReadDepth(seq.DepthPath(t + k)));
    w.poses.push_back(poses[t + k]);
    if (k < horizon) w.flows.push_back(ReadFlow(seq.FlowPath(t + k)));
  }
  w.Check(horizon);
  return w;
}

FrameWindow WindowFromScene(const SimulatedScene& scene, int t, int horizon) {
  if (t < 0 || t + horizon >= static_cast<int>(scene.frames.size())) {
    throw Error(ErrorCode::kMissingFrameData, "scene too short for the requested window");
  }
  FrameWindow w;
  w.frame = t;
  w.cloud = scene.frames[t].cloud;
  w.lidar_to_camera = scene.config.lidar_to_camera;
  w.intrinsics = scene.config.intrinsics;
  for (int k = 0; k <= horizon; ++k) {
    w.depths.push_back(scene.frames[t + k].depth);
    w.poses.push_back(scene.frames[t + k].pose);
    if (k < horizon) w.flows.push_back(scene.frames[t + k].flow);
  }
  return w;
}

std::vector<Vec3> CropCylinderCamera(const std::vector<Vec3>& points, const Vec3& c,
                                     const Anchor& anchor) {
  const double half_height = 0.5 * anchor.dims.y();
  const double radius = anchor.Radius();
  std::vector<Vec3> out;
  for (const Vec3& p : points) {
    if (std::abs(p.y() - c.y()) < half_height &&
        Vec2(p.x() - c.x(), p.z() - c.z()).norm() < radius) {
      out.push_back(p);
    }
  }
  return out;
}

std::vector<Vec3> CropCylinder(const PointCloud& cloud, const Vec3& lidar_centre,
                               const Anchor& anchor, const RigidTransform& lidar_to_camera) {
  std::vector<Vec3> camera;
  camera.reserve(cloud.points.size());
  for (const auto& p : cloud.points) camera.push_back(lidar_to_camera(p.position));
  return CropCylinderCamera(camera, lidar_to_camera(lidar_centre), anchor);
}

std::vector<Vec3> TrackedPointSets::Survivors(int k) const {
  std::vector<Vec3> out;
  for (size_t i = 0; i < sets.at(k).size(); ++i) {
    if (alive[k][i]) out.push_back(sets[k][i]);
  }
  return out;
}

TrackedPointSets TrackPoints(const std::vector<Vec3>& points, const FrameWindow& window,
                             int horizon, const TrackerConfig& config) {
  window.Check(horizon);
  const size_t n = points.size();
  TrackedPointSets tracked;
  tracked.sets.assign(horizon + 1, std::vector<Vec3>(n, Vec3::Zero()));
  tracked.alive.assign(horizon + 1, std::vector<uint8_t>(n, 0));
  std::vector<RigidTransform> to_ref;
  for (int k = 0; k <= horizon; ++k) to_ref.push_back(window.ToReference(k));

  for (size_t i = 0; i < n; ++i) {
    Vec3 chi = points[i];  // in camera(t + k)
    tracked.sets[0][i] = chi;
    tracked.alive[0][i] = 1;
    for (int k = 0; k < horizon; ++k) {
      if (!(chi.z() > 0.0)) break;
      Vec2 flow;
      const Vec2 uv = Project(chi, window.intrinsics);
      if (!SampleFlow(window.flows[k], uv, &flow)) break;
      int row = 0, col = 0;
      if (!NearestDepth(window.depths[k + 1], uv + flow, config.search_radius, &row, &col)) {
        break;
      }
      chi = Backproject(Vec2(col, row), window.depths[k + 1].at(row, col),
                        window.intrinsics);
      tracked.sets[k + 1][i] = to_ref[k + 1](chi);
      tracked.alive[k + 1][i] = 1;
    }
  }
  return tracked;
}

Vec3 PrincipalAxis(const std::vector<Vec3>& points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kDegenerateInput, "principal axis needs at least 3 points");
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  return solver.eigenvectors().col(2);
}

Obb3 FitObb(const std::vector<Vec3>& points) {
  if (points.size() < 3) {
    throw Error(ErrorCode::kDegenerateInput,
                "box fit needs at least 3 points, got " + std::to_string(points.size()));
  }
  Vec3 mean = Vec3::Zero();
  for (const Vec3& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const Vec3& p : points) cov += (p - mean) * (p - mean).transpose();
  cov /= static_cast<double>(points.size());
  Eigen::SelfAdjointEigenSolver<Mat3> solver(cov);
  const Vec3 values = solver.eigenvalues();  // ascending
  if (!(values(2) > 0.0) || values(1) <= kRankTolerance * values(2)) {
    throw Error(ErrorCode::kDegenerateInput, "points are collinear or coincident");
  }

  Vec2 heading(solver.eigenvectors()(0, 2), solver.eigenvectors()(2, 2));
  // A near-vertical principal axis (tall, thin objects) carries no heading;
  // use the dominant direction of the horizontal spread instead.
  if (heading.norm() < std::sqrt(0.5)) {
    Eigen::Matrix2d flat;
    flat << cov(0, 0), cov(0, 2), cov(2, 0), cov(2, 2);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> flat_solver(flat);
    heading = flat_solver.eigenvectors().col(1);
  }
  Obb3 box;
  box.frame = Frame::kCamera;
  box.centre = mean;
  // The principal axis becomes the box length (local z = (-sin r, cos r)).
  box.yaw = WrapHalfPi(std::atan2(heading.y(), heading.x()) + 0.5 * kPi);
  const Mat3 to_local = RotationAboutVertical(box.yaw).transpose();
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::infinity());
  Vec3 hi = -lo;
  for (const Vec3& p : points) {
    const Vec3 local = to_local * (p - mean);
    lo = lo.cwiseMin(local);
    hi = hi.cwiseMax(local);
  }
  box.dims = hi - lo;
  if (!(box.dims.minCoeff() > 0.0)) {
    throw Error(ErrorCode::kDegenerateInput, "points span a zero-width box");
  }
  return box;
}

double MovingScore(const std::vector<Obb3>& boxes) {
  double sum = 0.0;
  for (size_t k = 1; k < boxes.size(); ++k) sum += (boxes[k].centre - boxes[k - 1].centre).norm();
  return sum;
}

double InconsistencyScore(const std::vector<Obb3>& boxes) {
  double sum = 0.0;
  for (size_t k = 1; k < boxes.size(); ++k) sum += (boxes[k].dims - boxes[0].dims).norm();
  return sum;
}

double CombinedConfidence(double moving, double inconsistency, const ScorerConfig& config) {
  return config.lambda1 * moving - config.lambda2 * inconsistency;
}

std::optional<size_t> SelectAnchor(const std::vector<double>& scores,
                                   const std::vector<Anchor>& anchors, double eta) {
  if (scores.size() != anchors.size()) {
    throw Error(ErrorCode::kShapeMismatch, "one score per anchor expected");
  }
  std::optional<size_t> best;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!(scores[i] >= eta)) continue;
    if (!best || anchors[i].Volume() > anchors[*best].Volume()) best = i;
  }
  return best;
}

AnchorScore ScoreAnchor(const std::vector<Vec3>& points, const Vec3& centre,
                        const Anchor& anchor, const FrameWindow& window,
                        const ScorerConfig& scorer, const TrackerConfig& tracker) {
  AnchorScore score;
  const auto crop = CropCylinderCamera(points, centre, anchor);
  score.crop_size = static_cast<int>(crop.size());
  if (crop.size() < 3) return score;
  const auto tracked = TrackPoints(crop, window, scorer.horizon, tracker);
  std::vector<Obb3> boxes;
  for (int k = 0; k <= scorer.horizon; ++k) {
    try {
      boxes.push_back(FitObb(tracked.Survivors(k)));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kDegenerateInput) throw;
      return score;
    }
  }
  score.moving = MovingScore(boxes);
  score.inconsistency = InconsistencyScore(boxes);
  score.kappa = CombinedConfidence(score.moving, score.inconsistency, scorer);
  score.boxes = std::move(boxes);
  return score;
}

PseudoLabelSet GeneratePseudoLabels(const FrameWindow& window, const BoxGrid& grid,
                                    const GridSpec& spec,
                                    const std::vector<GridPixel>& pixels,
                                    const std::vector<Anchor>& anchors,
                                    const ScorerConfig& scorer,
                                    const TrackerConfig& tracker) {
  scorer.Validate();
  tracker.Validate();
  grid.CheckShape(spec);
  window.Check(scorer.horizon);

  std::vector<Vec3> camera_points;
  camera_points.reserve(window.cloud.points.size());
  for (const auto& p : window.cloud.points) {
    camera_points.push_back(window.lidar_to_camera(p.position));
  }
  const RigidTransform camera_to_lidar = Invert(window.lidar_to_camera);
  const NeighbourIndex neighbours(grid, spec);

  PseudoLabelSet out;
  for (const GridPixel& u : pixels) {
    if (!grid.Contains(u)) {
      throw Error(ErrorCode::kPixelOutOfRange, "sampled pixel outside the box grid");
    }
    PixelReport report;
    report.pixel = u;
    report.proposal_centre = DecodeBox(u, grid.at(u), spec).centre;
    report.raw_confidence = grid.at(u).confidence;
    report.smoothed_confidence = SmoothConfidence(neighbours, grid, u);
    const Vec3 centre = window.lidar_to_camera(report.proposal_centre);

    std::vector<double> kappas;
    for (const Anchor& a : anchors) {
      report.anchors.push_back(ScoreAnchor(camera_points, centre, a, window, scorer, tracker));
      kappas.push_back(report.anchors.back().kappa);
    }
    const auto chosen = SelectAnchor(kappas, anchors, scorer.eta);
    if (chosen) {
      report.selected = static_cast<int>(*chosen);
      const AnchorScore& s = report.anchors[*chosen];
      out.positives.push_back({u, TransformBox(s.boxes[0], camera_to_lidar, Frame::kLidar),
                               std::clamp(s.kappa, 0.0, 1.0), anchors[*chosen].name});
    } else {
      double best = 0.0;
      for (double k : kappas) best = std::max(best, k);
      out.negatives.push_back({u, std::clamp(best, 0.0, 1.0)});
    }
    out.reports.push_back(std::move(report));
  }
  return out;
}

}  // namespace pgt
