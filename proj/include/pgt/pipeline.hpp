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
// Pseudo ground truth for one frame t: crop points around each sampled
// proposal, follow them for K frames with flow and depth, fit a box to every
// tracked set and keep the anchor whose boxes move the most while keeping
// their size.
#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pgt/bev_grid.hpp"
#include "pgt/geometry.hpp"
#include "pgt/images.hpp"

namespace pgt {

struct SequenceIndex;
struct SimulatedScene;

/// Expected object size (width, height, length) in camera axes.
struct Anchor {
  std::string name;
  Vec3 dims = Vec3::Ones();

  double Volume() const { return dims.prod(); }
  /// Half the diagonal of the (width, length) footprint.
  double Radius() const { return 0.5 * Vec2(dims.x(), dims.z()).norm(); }
};

/// pedestrian, cyclist, vehicle.
std::vector<Anchor> DefaultAnchors();

struct ScorerConfig {
  double eta = 0.08;
  double lambda1 = 0.4;
  double lambda2 = 0.15;
  int horizon = 3;  // K

  /// Throws Error(kConfigInvalid).
  void Validate() const;
};

struct TrackerConfig {
  int search_radius = 7;  // pixels, square window

  void Validate() const;
};

/// Everything frame t needs from frames t..t+K. depths[k] and poses[k] belong
/// to frame t+k (k = 0..K); flows[k] maps frame t+k to t+k+1 (k = 0..K-1).
struct FrameWindow {
  int frame = 0;
  PointCloud cloud;  // LiDAR frame t
  std::vector<SparseDepthImage> depths;
  std::vector<FlowImage> flows;
  std::vector<RigidTransform> poses;  // camera(t+k) -> world
  RigidTransform lidar_to_camera = DefaultLidarToCamera();
  CameraIntrinsics intrinsics;

  /// Throws Error(kMissingFrameData) unless the window covers `horizon`
  /// frames ahead with consistent image sizes.
  void Check(int horizon) const;
  /// Camera(t+k) -> camera(t).
  RigidTransform ToReference(int k) const;
};

/// Reads frames t..t+horizon of a sequence. Throws kMissingFrameData when
/// the sequence is too short or lacks depth, flow or poses.
FrameWindow LoadWindow(const SequenceIndex& seq, int t, int horizon);
FrameWindow WindowFromScene(const SimulatedScene& scene, int t, int horizon);

/// Points of a LiDAR cloud inside the vertical cylinder of `anchor` centred
/// at `lidar_centre`, returned in the camera frame. Both the points and the
/// centre are moved to the camera frame before the strict-inequality test.
std::vector<Vec3> CropCylinder(const PointCloud& lidar_cloud, const Vec3& lidar_centre,
                               const Anchor& anchor, const RigidTransform& lidar_to_camera);
/// Same test on points already in the camera frame.
std::vector<Vec3> CropCylinderCamera(const std::vector<Vec3>& camera_points,
                                     const Vec3& camera_centre, const Anchor& anchor);

/// K+1 point sets in camera(t), all parallel to the input: sets[k][i] is the
/// position of input point i after k frames, meaningful where alive[k][i].
struct TrackedPointSets {
  std::vector<std::vector<Vec3>> sets;
  std::vector<std::vector<uint8_t>> alive;

  int horizon() const { return static_cast<int>(sets.size()) - 1; }
  std::vector<Vec3> Survivors(int k) const;
};

TrackedPointSets TrackPoints(const std::vector<Vec3>& camera_points, const FrameWindow& window,
                             int horizon, const TrackerConfig& config = {});

/// Unit eigenvector of the largest covariance eigenvalue. Throws
/// kDegenerateInput for fewer than 3 points.
Vec3 PrincipalAxis(const std::vector<Vec3>& points);

/// Box around camera-frame points: centre at the mean, yaw so that the
/// principal axis is the box length, dims from the min/max extents in the box
/// axes. Throws kDegenerateInput for fewer than 3 points or collinear input.
Obb3 FitObb(const std::vector<Vec3>& camera_points);

double MovingScore(const std::vector<Obb3>& boxes);
double InconsistencyScore(const std::vector<Obb3>& boxes);
double CombinedConfidence(double moving, double inconsistency, const ScorerConfig& config);

/// Index of the largest-volume anchor scoring at least eta (the first on
/// volume ties), or nullopt.
std::optional<size_t> SelectAnchor(const std::vector<double>& scores,
                                   const std::vector<Anchor>& anchors, double eta);

inline constexpr double kNoScore = -std::numeric_limits<double>::infinity();

struct AnchorScore {
  int crop_size = 0;
  double moving = 0.0;
  double inconsistency = 0.0;
  double kappa = kNoScore;   // kNoScore when the crop or a tracked set is unusable
  std::vector<Obb3> boxes;   // camera(t), one per k when scored
};

AnchorScore ScoreAnchor(const std::vector<Vec3>& camera_points, const Vec3& camera_centre,
                        const Anchor& anchor, const FrameWindow& window,
                        const ScorerConfig& scorer, const TrackerConfig& tracker);

struct PseudoLabel {
  GridPixel pixel;
  Obb3 box;  // LiDAR frame
  double target = 0.0;
  std::string anchor;
};

struct NegativeLabel {
  GridPixel pixel;
  double target = 0.0;
};

struct PixelReport {
  GridPixel pixel;
  Vec3 proposal_centre = Vec3::Zero();  // LiDAR frame
  double raw_confidence = 0.0;
  double smoothed_confidence = 0.0;
  std::vector<AnchorScore> anchors;
  int selected = -1;
};

struct PseudoLabelSet {
  std::vector<PseudoLabel> positives;
  std::vector<NegativeLabel> negatives;
  std::vector<PixelReport> reports;  // one per input pixel, same order
};

/// Runs the whole procedure for the given sampled pixels. Positives and
/// negatives come out in the order of `pixels`.
PseudoLabelSet GeneratePseudoLabels(const FrameWindow& window, const BoxGrid& grid,
                                    const GridSpec& spec,
                                    const std::vector<GridPixel>& pixels,
                                    const std::vector<Anchor>& anchors,
                                    const ScorerConfig& scorer,
                                    const TrackerConfig& tracker = {});

}  // namespace pgt
