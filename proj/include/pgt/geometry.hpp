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
// Frames, rigid transforms, pinhole projection and yaw-rotated box geometry.
//
// Conventions used throughout the project:
//   camera frame: x right, y down, z forward. Vertical axis is y and the
//                 birds-eye (BEV) plane is x-z.
//   LiDAR frame:  x forward, y left, z up. The canonical axis permutation
//                 CameraFromLidarAxes() maps LiDAR directions onto camera
//                 directions; boxes stored in the LiDAR frame keep their
//                 dims/yaw in camera convention through that permutation.
//   Box yaw r:    the box's local x axis points along (cos r, 0, sin r) in
//                 camera coordinates; local y is vertical. Yaw is stored in
//                 (-pi/2, pi/2] because boxes are symmetric under a half turn.
//   Pixels:       continuous (u = column, v = row); integer pixel (row, col)
//                 has its centre at (u = col, v = row).
#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <algorithm>
#include <array>
#include <vector>

namespace pgt {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = 3.14159265358979323846;

enum class Frame { kLidar, kCamera };

/// Half-open interval [min, max).
struct Range {
  double min = 0.0;
  double max = 0.0;

  double Extent() const { return max - min; }
  bool Contains(double v) const { return v >= min && v < max; }
};

/// Maps an angle onto (-pi/2, pi/2], identifying r with r + pi.
double WrapHalfPi(double angle);

/// Rotation about the vertical axis of the camera convention, turning +x
/// toward +z by `angle` radians.
Mat3 RotationAboutVertical(double angle);

/// Direction permutation LiDAR (x fwd, y left, z up) -> camera (x right,
/// y down, z fwd).
const Mat3& CameraFromLidarAxes();

class RigidTransform {
 public:
  RigidTransform();  // identity
  RigidTransform(const Mat3& rotation, const Vec3& translation);

  static RigidTransform Identity() { return RigidTransform(); }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 operator()(const Vec3& p) const { return rotation_ * p + translation_; }
  Vec3 RotateOnly(const Vec3& v) const { return rotation_ * v; }

  /// max |R^T R - I| and |det R - 1|, for validation.
  double OrthonormalityError() const;
  bool IsValid(double tolerance = 1e-9) const {
    return OrthonormalityError() <= tolerance;
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

/// compose(a, b)(p) == a(b(p)).
RigidTransform Compose(const RigidTransform& a, const RigidTransform& b);
RigidTransform Invert(const RigidTransform& t);

/// The default LiDAR -> camera calibration: pure axis permutation, shared
/// origin.
RigidTransform DefaultLidarToCamera();

struct CameraIntrinsics {
  double fx = 721.5377;
  double fy = 721.5377;
  double cx = 609.5593;
  double cy = 172.854;
  int width = 1242;
  int height = 375;

  /// Throws Error(kConfigInvalid) when focal lengths or principal point are
  /// out of range.
  void Validate() const;
};

/// Pinhole projection of a camera-space point. Throws kNonPositiveDepth.
Vec2 Project(const Vec3& p, const CameraIntrinsics& k);
/// Inverse of Project at a given depth (camera z). Throws kNonPositiveDepth.
Vec3 Backproject(const Vec2& pixel, double depth, const CameraIntrinsics& k);

struct CloudPoint {
  Vec3 position;
  double intensity = 0.0;
};

struct PointCloud {
  std::vector<CloudPoint> points;
  Frame frame = Frame::kLidar;
};

/// Applies `t` to every point and retags the cloud.
PointCloud TransformCloud(const PointCloud& cloud, const RigidTransform& t,
                          Frame target);

struct Obb3 {
  Vec3 centre = Vec3::Zero();
  Vec3 dims = Vec3::Ones();  // local x (width), y (height), z (length)
  double yaw = 0.0;
  Frame frame = Frame::kCamera;

  double Volume() const { return dims.prod(); }
  /// Local axes expressed in this box's frame, columns (x, y, z).
  Mat3 Axes() const;
  /// The 8 vertices, ordered by the sign pattern (+-x, +-y, +-z) with x the
  /// slowest varying sign.
  std::array<Vec3, 8> Corners() const;
  /// Footprint in the BEV plane, counter-clockwise.
  std::array<Vec2, 4> Footprint() const;
};

/// Projects a point of `frame` onto the BEV plane coordinates used for
/// footprints: camera (x, z); LiDAR (-y, x).
Vec2 BevPlaneCoords(const Vec3& p, Frame frame);

/// Re-expresses a box in another frame. Dims are kept; yaw is recomputed
/// from the transformed local-x direction.
Obb3 TransformBox(const Obb3& box, const RigidTransform& t, Frame target);

struct Aabb2 {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();

  double Area() const {
    return std::max(0.0, max.x() - min.x()) * std::max(0.0, max.y() - min.y());
  }
};

/// Intersection-over-union of the two yaw-rotated footprints. Both boxes must
/// share a frame.
double RotatedIouBev(const Obb3& a, const Obb3& b);
double Iou2d(const Aabb2& a, const Aabb2& b);

/// Area of the intersection of two convex counter-clockwise polygons, by
/// Sutherland-Hodgman clipping.
double ConvexIntersectionArea(const std::vector<Vec2>& subject,
                              const std::vector<Vec2>& clip);

}  // namespace pgt
