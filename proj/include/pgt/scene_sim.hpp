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
// Synthetic multi-frame driving scenes with exact ground truth: rigidly
// moving cuboid-shell objects over a flat sampled ground plane, seen by a
// LiDAR that shares its origin with the camera.
//
// The world frame is camera(0): x right, y down, z forward. The ground plane
// sits at world y = sensor_height.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgt/geometry.hpp"
#include "pgt/images.hpp"

namespace pgt {

enum class ObjectClass { kPedestrian, kCyclist, kVehicle };

std::string ObjectClassName(ObjectClass c);         // "Pedestrian", "Cyclist", "Car"
/// Nominal size of a class (width, height, length), equal to the default
/// anchors.
Vec3 NominalDims(ObjectClass c);

/// Planar pose in the world: position on the ground plane and heading.
struct PlanarPose {
  double x = 0.0;
  double z = 0.0;
  double yaw = 0.0;
};

struct SimObject {
  ObjectClass cls = ObjectClass::kVehicle;
  Vec3 dims = NominalDims(ObjectClass::kVehicle);
  PlanarPose pose0;
  double ground_offset = 0.0;  // bottom face height above the ground, metres
  Vec2 velocity = Vec2::Zero();  // (x, z) metres per frame
  double yaw_rate = 0.0;         // radians per frame
  double density = 0.0;          // points per m^2; 0 selects the class default

  bool IsMoving() const { return velocity.squaredNorm() > 0.0 || yaw_rate != 0.0; }
};

/// Which object faces produce returns.
enum class Visibility {
  kAllFaces,    // full 5-face shell every frame, hidden faces included
  kFrontFaces,  // faces whose outward normal points toward the sensor
};

struct EgoMotion {
  double forward = 0.0;   // metres per frame along the camera z axis
  double lateral = 0.0;   // metres per frame along the camera x axis
  double yaw_rate = 0.0;  // radians per frame
};

struct SceneConfig {
  int frames = 10;
  int horizon = 3;  // tracking horizon K the scene must support
  CameraIntrinsics intrinsics;
  RigidTransform lidar_to_camera = DefaultLidarToCamera();
  double sensor_height = 2.55;
  EgoMotion ego;
  // Ground plane extent in world x and z.
  Range ground_x{-20.0, 20.0};
  Range ground_z{0.0, 45.0};
  double ground_density = 4.0;
  std::vector<SimObject> objects;
  Visibility visibility = Visibility::kFrontFaces;
  // Keep only the nearest point per camera pixel, like a scanner whose rays
  // are coarser than the image grid. Points outside the image are unaffected.
  bool one_return_per_pixel = false;
  double intensity_min = 0.2;
  double intensity_max = 0.9;

  /// Throws Error(kConfigInvalid).
  void Validate() const;
};

/// Where a cloud point came from: a fixed point on an object body (local
/// coordinates) or a static world point on the ground (object == -1).
struct PointSource {
  int object = -1;
  Vec3 coords = Vec3::Zero();
};

struct GtObject {
  Obb3 box;  // LiDAR frame
  ObjectClass cls = ObjectClass::kVehicle;
  bool is_moving = false;
  int object = 0;
};

struct SceneFrame {
  PointCloud cloud;  // LiDAR frame
  std::vector<PointSource> sources;  // parallel to cloud.points
  SparseDepthImage depth;
  FlowImage flow;  // to the next frame; undefined everywhere on the last frame
  RigidTransform pose;  // camera(t) -> world
  std::vector<GtObject> gt;
};

struct SimulatedScene {
  SceneConfig config;
  std::vector<SceneFrame> frames;

  /// World position of a point source at frame t.
  Vec3 WorldPosition(const PointSource& source, int t) const;
  /// Camera(t) position of a point source at frame t.
  Vec3 CameraPosition(const PointSource& source, int t) const;
  /// The object's box in world coordinates (camera convention) at frame t.
  Obb3 WorldBox(int object, int t) const;
};

/// Deterministic for a given seed. Throws Error(kConfigInvalid).
SimulatedScene MakeScene(const SceneConfig& config, uint64_t seed);

/// Z-buffered projection of a LiDAR cloud: nearest depth wins per pixel;
/// untouched pixels stay invalid. `owners`, when given, receives the index of
/// the winning point per pixel (-1 where invalid).
SparseDepthImage RenderDepth(const PointCloud& lidar_cloud, const CameraIntrinsics& k,
                             const RigidTransform& lidar_to_camera,
                             std::vector<int>* owners = nullptr);

/// The benchmark layout: three moving vehicles, two moving pedestrians, one
/// moving cyclist, plus one static vehicle and one static pedestrian, with
/// slow forward ego motion.
SceneConfig DefaultSceneConfig();

}  // namespace pgt
