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
#include "pgt/geometry.hpp"

#include <cmath>
#include <stdexcept>

#include "pgt/error.hpp"

namespace pgt {

namespace {

constexpr double kDegenerateArea = 1e-12;

double Cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

double PolygonArea(const std::vector<Vec2>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) {
    twice += Cross(poly[i], poly[(i + 1) % poly.size()]);
  }
  return 0.5 * twice;
}

// Side of point p relative to the directed edge a->b; >= 0 means inside for a
// counter-clockwise clip polygon.
double EdgeSide(const Vec2& a, const Vec2& b, const Vec2& p) {
  return Cross(b - a, p - a);
}

Vec2 EdgeIntersection(const Vec2& a, const Vec2& b, const Vec2& p, const Vec2& q) {
  const double sp = EdgeSide(a, b, p);
  const double sq = EdgeSide(a, b, q);
  const double t = sp / (sp - sq);
  return p + t * (q - p);
}

}  // namespace

double WrapHalfPi(double angle) {
  double r = std::fmod(angle, kPi);  // (-pi, pi)
  if (r > kPi / 2) r -= kPi;
  if (r <= -kPi / 2) r += kPi;
  return r;
}

Mat3 RotationAboutVertical(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Mat3 r;
  r << c, 0, -s,
       0, 1, 0,
       s, 0, c;
  return r;
}

const Mat3& CameraFromLidarAxes() {
  static const Mat3 kAxes = [] {
    Mat3 m;
    m << 0, -1, 0,
         0, 0, -1,
         1, 0, 0;
    return m;
  }();
  return kAxes;
}

RigidTransform::RigidTransform()
    : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

RigidTransform::RigidTransform(const Mat3& rotation, const Vec3& translation)
    : rotation_(rotation), translation_(translation) {}

double RigidTransform::OrthonormalityError() const {
  const double ortho =
      (rotation_.transpose() * rotation_ - Mat3::Identity()).cwiseAbs().maxCoeff();
  return std::max(ortho, std::abs(rotation_.determinant() - 1.0));
}

RigidTransform Compose(const RigidTransform& a, const RigidTransform& b) {
  return RigidTransform(a.rotation() * b.rotation(),
                        a.rotation() * b.translation() + a.translation());
}

RigidTransform Invert(const RigidTransform& t) {
  const Mat3 rt = t.rotation().transpose();
  return RigidTransform(rt, -(rt * t.translation()));
}

RigidTransform DefaultLidarToCamera() {
  return RigidTransform(CameraFromLidarAxes(), Vec3::Zero());
}

void CameraIntrinsics::Validate() const {
  if (!(fx > 0) || !(fy > 0)) {
    throw Error(ErrorCode::kConfigInvalid, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(ErrorCode::kConfigInvalid, "image size must be positive");
  }
  if (!(cx >= 0 && cx < width) || !(cy >= 0 && cy < height)) {
    throw Error(ErrorCode::kConfigInvalid, "principal point outside the image");
  }
}

Vec2 Project(const Vec3& p, const CameraIntrinsics& k) {
  if (!(p.z() > 0)) {
    throw Error(ErrorCode::kNonPositiveDepth, "cannot project a point with z <= 0");
  }
  return {k.fx * p.x() / p.z() + k.cx, k.fy * p.y() / p.z() + k.cy};
}

Vec3 Backproject(const Vec2& pixel, double depth, const CameraIntrinsics& k) {
  if (!(depth > 0)) {
    throw Error(ErrorCode::kNonPositiveDepth, "cannot backproject with depth <= 0");
  }
  return {(pixel.x() - k.cx) * depth / k.fx, (pixel.y() - k.cy) * depth / k.fy, depth};
}

PointCloud TransformCloud(const PointCloud& cloud, const RigidTransform& t,
                          Frame target) {
  PointCloud out;
  out.frame = target;
  out.points.reserve(cloud.points.size());
  for (const auto& p : cloud.points) {
    out.points.push_back({t(p.position), p.intensity});
  }
  return out;
}

Mat3 Obb3::Axes() const {
  const Mat3 camera_axes = RotationAboutVertical(yaw);
  if (frame == Frame::kCamera) return camera_axes;
  return CameraFromLidarAxes().transpose() * camera_axes;
}

std::array<Vec3, 8> Obb3::Corners() const {
  const Mat3 axes = Axes();
  const Vec3 half = 0.5 * dims;
  std::array<Vec3, 8> out;
  int i = 0;
  for (int sx : {1, -1}) {
    for (int sy : {1, -1}) {
      for (int sz : {1, -1}) {
        out[i++] = centre + axes.col(0) * (sx * half.x()) +
                   axes.col(1) * (sy * half.y()) + axes.col(2) * (sz * half.z());
      }
    }
  }
  return out;
}

std::array<Vec2, 4> Obb3::Footprint() const {
  const Vec2 c = BevPlaneCoords(centre, frame);
  const Vec2 ex(std::cos(yaw), std::sin(yaw));
  const Vec2 ez(-std::sin(yaw), std::cos(yaw));
  const Vec2 hx = ex * (0.5 * dims.x());
  const Vec2 hz = ez * (0.5 * dims.z());
  return {c + hx - hz, c + hx + hz, c - hx + hz, c - hx - hz};
}

Vec2 BevPlaneCoords(const Vec3& p, Frame frame) {
  if (frame == Frame::kCamera) return {p.x(), p.z()};
  return {-p.y(), p.x()};
}

Obb3 TransformBox(const Obb3& box, const RigidTransform& t, Frame target) {
  Obb3 out = box;
  out.frame = target;
  out.centre = t(box.centre);
  Vec3 local_x = t.RotateOnly(box.Axes().col(0));
  if (target == Frame::kLidar) local_x = CameraFromLidarAxes() * local_x;
  out.yaw = WrapHalfPi(std::atan2(local_x.z(), local_x.x()));
  return out;
}

double ConvexIntersectionArea(const std::vector<Vec2>& subject,
                              const std::vector<Vec2>& clip) {
  std::vector<Vec2> output = subject;
  for (size_t e = 0; e < clip.size() && !output.empty(); ++e) {
    const Vec2& a = clip[e];
    const Vec2& b = clip[(e + 1) % clip.size()];
    std::vector<Vec2> input;
    input.swap(output);
    for (size_t i = 0; i < input.size(); ++i) {
      const Vec2& cur = input[i];
      const Vec2& prev = input[(i + input.size() - 1) % input.size()];
      const bool cur_in = EdgeSide(a, b, cur) >= 0;
      const bool prev_in = EdgeSide(a, b, prev) >= 0;
      if (cur_in) {
        if (!prev_in) output.push_back(EdgeIntersection(a, b, prev, cur));
        output.push_back(cur);
      } else if (prev_in) {
        output.push_back(EdgeIntersection(a, b, prev, cur));
      }
    }
  }
  const double area = PolygonArea(output);
  return area > kDegenerateArea ? area : 0.0;
}

double RotatedIouBev(const Obb3& a, const Obb3& b) {
  if (a.frame != b.frame) {
    throw std::invalid_argument("RotatedIouBev: boxes are in different frames");
  }
  const auto fa = a.Footprint();
  const auto fb = b.Footprint();
  const double inter = ConvexIntersectionArea({fa.begin(), fa.end()},
                                              {fb.begin(), fb.end()});
  if (inter <= 0.0) return 0.0;
  const double area_a = a.dims.x() * a.dims.z();
  const double area_b = b.dims.x() * b.dims.z();
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

double Iou2d(const Aabb2& a, const Aabb2& b) {
  Aabb2 inter;
  inter.min = a.min.cwiseMax(b.min);
  inter.max = a.max.cwiseMin(b.max);
  const double i = inter.Area();
  if (i <= 0.0) return 0.0;
  const double u = a.Area() + b.Area() - i;
  return u > 0.0 ? i / u : 0.0;
}

}  // namespace pgt
