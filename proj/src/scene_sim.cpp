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
#include "pgt/scene_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pgt/error.hpp"
#include "pgt/random.hpp"

namespace pgt {

namespace {

constexpr double kVehicleDensity = 150.0;
constexpr double kSmallClassDensity = 400.0;
constexpr double kDimsTolerance = 0.2;

// Faces of the shell, identified by their outward normal in body coordinates.
// The underside (+y, since y points down) is never sampled.
enum Face { kTop, kPosX, kNegX, kPosZ, kNegZ, kFaceCount };

Vec3 FaceNormal(int face) {
  switch (face) {
    case kTop: return {0, -1, 0};
    case kPosX: return {1, 0, 0};
    case kNegX: return {-1, 0, 0};
    case kPosZ: return {0, 0, 1};
    default: return {0, 0, -1};
  }
}

struct BodyPoint {
  Vec3 local;
  int face;
  double intensity;
};

double Quantize(double v) { return static_cast<double>(static_cast<float>(v)); }

// True when the open segment from `from` to `to` passes through the inside of
// `box` (slab test in the box frame). Touching the surface does not count.
bool SegmentCrossesBox(const Vec3& from, const Vec3& to, const Obb3& box) {
  const Mat3 to_local = RotationAboutVertical(box.yaw).transpose();
  const Vec3 a = to_local * (from - box.centre);
  const Vec3 d = to_local * (to - from);
  const Vec3 half = 0.5 * box.dims;
  double lo = 0.0, hi = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(d(i)) < 1e-15) {
      if (std::abs(a(i)) >= half(i)) return false;
      continue;
    }
    double t0 = (-half(i) - a(i)) / d(i);
    double t1 = (half(i) - a(i)) / d(i);
    if (t0 > t1) std::swap(t0, t1);
    lo = std::max(lo, t0);
    hi = std::min(hi, t1);
  }
  // Require a proper overlap that ends before the target point.
  return hi - lo > 1e-9 && lo < 1.0 - 1e-9;
}

std::vector<BodyPoint> SampleShell(const Vec3& dims, double density, double imin,
                                   double imax, Rng& rng) {
  const double w = dims.x(), h = dims.y(), l = dims.z();
  std::vector<BodyPoint> out;
  for (int face = 0; face < kFaceCount; ++face) {
    double area = 0.0;
    switch (face) {
      case kTop: area = w * l; break;
      case kPosX: case kNegX: area = h * l; break;
      default: area = w * h; break;
    }
    const auto count = static_cast<long>(std::lround(area * density));
    for (long i = 0; i < count; ++i) {
      const double a = UniformIn(rng, -0.5, 0.5);
      const double b = UniformIn(rng, -0.5, 0.5);
      Vec3 p;
      switch (face) {
        case kTop: p = {a * w, -0.5 * h, b * l}; break;
        case kPosX: p = {0.5 * w, a * h, b * l}; break;
        case kNegX: p = {-0.5 * w, a * h, b * l}; break;
        case kPosZ: p = {a * w, b * h, 0.5 * l}; break;
        default: p = {a * w, b * h, -0.5 * l}; break;
      }
      out.push_back({p, face, UniformIn(rng, imin, imax)});
    }
  }
  return out;
}

RigidTransform EgoPose(const EgoMotion& ego, int t) {
  Vec3 position = Vec3::Zero();
  double heading = 0.0;
  for (int i = 0; i < t; ++i) {
    position += RotationAboutVertical(heading) * Vec3(ego.lateral, 0.0, ego.forward);
    heading += ego.yaw_rate;
  }
  return RigidTransform(RotationAboutVertical(heading), position);
}

// Drops points that lost the depth test in their pixel, so that each camera
// ray carries at most one return. Points outside the image are kept.
void KeepPixelWinners(const SceneConfig& config, SceneFrame* frame, std::vector<int>* owners) {
  const auto& k = config.intrinsics;
  std::vector<int> remap(frame->cloud.points.size(), -1);
  std::vector<uint8_t> keep(frame->cloud.points.size(), 1);
  for (size_t i = 0; i < frame->cloud.points.size(); ++i) {
    const Vec3 cam = config.lidar_to_camera(frame->cloud.points[i].position);
    if (!(cam.z() > 0)) continue;
    int row, col;
    NearestPixel(Project(cam, k), &row, &col);
    if (!frame->depth.InBounds(row, col)) continue;
    keep[i] = (*owners)[static_cast<size_t>(row) * k.width + col] == static_cast<int>(i);
  }
  PointCloud cloud;
  cloud.frame = frame->cloud.frame;
  std::vector<PointSource> sources;
  for (size_t i = 0; i < keep.size(); ++i) {
    if (!keep[i]) continue;
    remap[i] = static_cast<int>(cloud.points.size());
    cloud.points.push_back(frame->cloud.points[i]);
    sources.push_back(frame->sources[i]);
  }
  for (int& o : *owners) {
    if (o >= 0) o = remap[o];
  }
  frame->cloud = std::move(cloud);
  frame->sources = std::move(sources);
}

}  // namespace

std::string ObjectClassName(ObjectClass c) {
  switch (c) {
    case ObjectClass::kPedestrian: return "Pedestrian";
    case ObjectClass::kCyclist: return "Cyclist";
    case ObjectClass::kVehicle: return "Car";
  }
  return "Unknown";
}

Vec3 NominalDims(ObjectClass c) {
  switch (c) {
    case ObjectClass::kPedestrian: return {0.45, 1.70, 0.27};
    case ObjectClass::kCyclist: return {0.54, 1.90, 1.75};
    case ObjectClass::kVehicle: return {1.88, 1.63, 4.58};
  }
  return Vec3::Ones();
}

void SceneConfig::Validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorCode::kConfigInvalid, why); };
  if (horizon < 1) fail("horizon must be >= 1");
  if (frames < horizon + 1) fail("scene needs at least horizon + 1 frames");
  intrinsics.Validate();
  if (!lidar_to_camera.IsValid(1e-9)) fail("lidar_to_camera is not a rigid transform");
  if (!(sensor_height > 0)) fail("sensor_height must be positive");
  if (!(ground_x.Extent() > 0) || !(ground_z.Extent() > 0)) fail("empty ground extent");
  if (ground_density < 0) fail("ground_density must be >= 0");
  if (!(intensity_min >= 0 && intensity_max <= 1 && intensity_min <= intensity_max)) {
    fail("intensity range must lie in [0, 1]");
  }
  for (size_t i = 0; i < objects.size(); ++i) {
    const auto& o = objects[i];
    const std::string tag = "object " + std::to_string(i) + ": ";
    if (!(o.dims.minCoeff() > 0)) fail(tag + "dims must be positive");
    const Vec3 nominal = NominalDims(o.cls);
    for (int a = 0; a < 3; ++a) {
      if (std::abs(o.dims[a] - nominal[a]) > kDimsTolerance * nominal[a] + 1e-12) {
        fail(tag + "dims outside +-20% of the " + ObjectClassName(o.cls) + " anchor");
      }
    }
    if (o.density < 0) fail(tag + "density must be >= 0");
    if (o.ground_offset < 0) fail(tag + "ground_offset must be >= 0");
  }
}

Obb3 SimulatedScene::WorldBox(int object, int t) const {
  const SimObject& o = config.objects.at(object);
  Obb3 box;
  box.frame = Frame::kCamera;  // the world uses camera-convention axes
  box.dims = o.dims;
  box.centre = {o.pose0.x + t * o.velocity.x(),
                config.sensor_height - o.ground_offset - 0.5 * o.dims.y(),
                o.pose0.z + t * o.velocity.y()};
  box.yaw = o.pose0.yaw + t * o.yaw_rate;  // unwrapped; Axes() only needs cos/sin
  return box;
}

Vec3 SimulatedScene::WorldPosition(const PointSource& source, int t) const {
  if (source.object < 0) return source.coords;
  const Obb3 box = WorldBox(source.object, t);
  return box.centre + RotationAboutVertical(box.yaw) * source.coords;
}

Vec3 SimulatedScene::CameraPosition(const PointSource& source, int t) const {
  return Invert(frames.at(t).pose)(WorldPosition(source, t));
}

SparseDepthImage RenderDepth(const PointCloud& cloud, const CameraIntrinsics& k,
                             const RigidTransform& lidar_to_camera,
                             std::vector<int>* owners) {
  SparseDepthImage depth(k.height, k.width);
  if (owners) owners->assign(static_cast<size_t>(k.height) * k.width, -1);
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const Vec3 cam = lidar_to_camera(cloud.points[i].position);
    if (!(cam.z() > 0)) continue;
    int row, col;
    NearestPixel(Project(cam, k), &row, &col);
    if (!depth.InBounds(row, col)) continue;
    const auto d = static_cast<float>(cam.z());
    if (!(d > 0.0f)) continue;
    float& slot = depth.at(row, col);
    if (slot <= 0.0f || d < slot) {
      slot = d;
      if (owners) (*owners)[static_cast<size_t>(row) * k.width + col] = static_cast<int>(i);
    }
  }
  return depth;
}

SimulatedScene MakeScene(const SceneConfig& config, uint64_t seed) {
  config.Validate();
  SimulatedScene scene;
  scene.config = config;
  Rng rng(seed);

  // Static ground points (world coordinates) followed by each object's fixed
  // body points.
  std::vector<PointSource> ground;
  std::vector<double> ground_intensity;
  const double ground_area = config.ground_x.Extent() * config.ground_z.Extent();
  const auto ground_count = static_cast<long>(std::lround(ground_area * config.ground_density));
  for (long i = 0; i < ground_count; ++i) {
    const double x = UniformIn(rng, config.ground_x.min, config.ground_x.max);
    const double z = UniformIn(rng, config.ground_z.min, config.ground_z.max);
    ground.push_back({-1, {x, config.sensor_height, z}});
    ground_intensity.push_back(UniformIn(rng, config.intensity_min, config.intensity_max));
  }
  std::vector<std::vector<BodyPoint>> bodies;
  for (const auto& o : config.objects) {
    double density = o.density;
    if (density == 0.0) {
      density = o.cls == ObjectClass::kVehicle ? kVehicleDensity : kSmallClassDensity;
    }
    bodies.push_back(
        SampleShell(o.dims, density, config.intensity_min, config.intensity_max, rng));
  }

  const RigidTransform camera_to_lidar = Invert(config.lidar_to_camera);
  const int n_objects = static_cast<int>(config.objects.size());
  std::vector<std::vector<int>> owners(config.frames);
  scene.frames.resize(config.frames);
  for (int t = 0; t < config.frames; ++t) {
    scene.frames[t].pose = EgoPose(config.ego, t);
  }

  for (int t = 0; t < config.frames; ++t) {
    SceneFrame& frame = scene.frames[t];
    const RigidTransform world_to_camera = Invert(frame.pose);
    const Vec3 sensor_world = frame.pose(config.lidar_to_camera.translation());
    frame.cloud.frame = Frame::kLidar;
    std::vector<Obb3> boxes;
    for (int obj = 0; obj < n_objects; ++obj) boxes.push_back(scene.WorldBox(obj, t));
    auto emit = [&](const PointSource& src, double intensity) {
      const Vec3 world = scene.WorldPosition(src, t);
      // Objects block the line of sight to whatever lies behind them.
      for (int obj = 0; obj < n_objects; ++obj) {
        if (obj != src.object && SegmentCrossesBox(sensor_world, world, boxes[obj])) return;
      }
      const Vec3 cam = world_to_camera(world);
      const Vec3 lidar = camera_to_lidar(cam);
      frame.cloud.points.push_back(
          {{Quantize(lidar.x()), Quantize(lidar.y()), Quantize(lidar.z())},
           Quantize(intensity)});
      frame.sources.push_back(src);
    };
    for (size_t i = 0; i < ground.size(); ++i) emit(ground[i], ground_intensity[i]);
    for (int obj = 0; obj < n_objects; ++obj) {
      const Obb3& wbox = boxes[obj];
      const Mat3 rot = RotationAboutVertical(wbox.yaw);
      bool face_visible[kFaceCount];
      for (int f = 0; f < kFaceCount; ++f) {
        const Vec3 n = rot * FaceNormal(f);
        const Vec3 face_centre =
            wbox.centre + rot * FaceNormal(f).cwiseProduct(0.5 * wbox.dims);
        face_visible[f] = config.visibility == Visibility::kAllFaces ||
                          n.dot(sensor_world - face_centre) > 0.0;
      }
      for (const auto& bp : bodies[obj]) {
        if (face_visible[bp.face]) emit({obj, bp.local}, bp.intensity);
      }
      GtObject gt;
      gt.object = obj;
      gt.cls = config.objects[obj].cls;
      gt.is_moving = config.objects[obj].IsMoving();
      const Obb3 cam_box = TransformBox(wbox, world_to_camera, Frame::kCamera);
      gt.box = TransformBox(cam_box, camera_to_lidar, Frame::kLidar);
      frame.gt.push_back(gt);
    }

    frame.depth =
        RenderDepth(frame.cloud, config.intrinsics, config.lidar_to_camera, &owners[t]);
    if (config.one_return_per_pixel) {
      KeepPixelWinners(config, &frame, &owners[t]);
    }
    frame.flow = FlowImage(config.intrinsics.height, config.intrinsics.width);
  }

  // Analytic flow: each valid pixel moves with the point that owns it.
  for (int t = 0; t + 1 < config.frames; ++t) {
    SceneFrame& frame = scene.frames[t];
    const int width = config.intrinsics.width;
    for (int row = 0; row < config.intrinsics.height; ++row) {
      for (int col = 0; col < width; ++col) {
        const int owner = owners[t][static_cast<size_t>(row) * width + col];
        if (owner < 0) continue;
        const PointSource& src = frame.sources[owner];
        const Vec3 now = scene.CameraPosition(src, t);
        const Vec3 next = scene.CameraPosition(src, t + 1);
        if (!(now.z() > 0) || !(next.z() > 0)) continue;
        frame.flow.set(row, col, Project(next, config.intrinsics) -
                                     Project(now, config.intrinsics));
      }
    }
  }
  return scene;
}

SceneConfig DefaultSceneConfig() {
  SceneConfig cfg;
  cfg.ego.forward = 0.3;
  auto heading = [](double yaw) { return Vec2(-std::sin(yaw), std::cos(yaw)); };
  auto add = [&](ObjectClass cls, Vec3 dims, double x, double z, double yaw,
                 double speed) {
    SimObject o;
    o.cls = cls;
    o.dims = dims;
    o.pose0 = {x, z, yaw};
    o.velocity = speed * heading(yaw);
    cfg.objects.push_back(o);
  };
  // Placed so that no two objects overlap in the camera view or come within
  // 6 m of each other during the first 10 frames.
  add(ObjectClass::kVehicle, {1.80, 1.55, 4.30}, 2.2, 31.3, 0.0, 0.6);
  add(ObjectClass::kVehicle, {1.85, 1.60, 4.50}, -11.9, 27.7, 0.3, 0.5);
  add(ObjectClass::kVehicle, {1.75, 1.50, 4.10}, -5.5, 33.1, 0.2, 0.5);
  add(ObjectClass::kPedestrian, {0.45, 1.70, 0.27}, 5.9, 10.9, -0.4, 0.15);
  add(ObjectClass::kPedestrian, {0.48, 1.75, 0.30}, -2.4, 26.8, 0.3, 0.15);
  add(ObjectClass::kCyclist, {0.55, 1.85, 1.70}, -0.2, 7.9, 0.0, 0.4);
  add(ObjectClass::kVehicle, {1.80, 1.55, 4.40}, 4.1, 18.6, 0.2, 0.0);
  add(ObjectClass::kPedestrian, {0.45, 1.70, 0.28}, -6.7, 22.1, -0.4, 0.0);
  return cfg;
}

}  // namespace pgt
