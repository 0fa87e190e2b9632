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
// Acceptance checks. Prints one PASS or FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   acceptance            run every criterion
//   acceptance 3 6        run only the listed ones

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Geometry>

#include "pgt/bev_grid.hpp"
#include "pgt/config.hpp"
#include "pgt/dataset_io.hpp"
#include "pgt/error.hpp"
#include "pgt/evaluation.hpp"
#include "pgt/geometry.hpp"
#include "pgt/loss.hpp"
#include "pgt/pipeline.hpp"
#include "pgt/proposal.hpp"
#include "pgt/random.hpp"
#include "pgt/sampler.hpp"
#include "pgt/scene_sim.hpp"
#include "pgt/workflow.hpp"

namespace pgt {
namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string Fmt(const char* format, ...) __attribute__((format(printf, 1, 2)));
std::string Fmt(const char* format, ...) {
  char buf[512];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

Vec3 RandomVec(Rng& rng, double lo, double hi) {
  return {UniformIn(rng, lo, hi), UniformIn(rng, lo, hi), UniformIn(rng, lo, hi)};
}

// Components rounded to the nearest float. The volatile store keeps GCC 11's
// SLP vectorizer from folding the float round trip away at -O3.
double ToFloat(double v) {
  volatile float f = static_cast<float>(v);
  return f;
}

Vec3 FloatVec(const Vec3& v) { return {ToFloat(v.x()), ToFloat(v.y()), ToFloat(v.z())}; }

double Sign(Rng& rng) { return (rng() & 1) ? 1.0 : -1.0; }

// ---------------------------------------------------------------- 1

double LineMoving(const std::vector<Obb3>& boxes) {
  double s = 0.0;
  for (size_t k = 0; k + 1 < boxes.size(); ++k) {
    const double dx = boxes[k + 1].centre.x() - boxes[k].centre.x();
    const double dy = boxes[k + 1].centre.y() - boxes[k].centre.y();
    const double dz = boxes[k + 1].centre.z() - boxes[k].centre.z();
    s += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return s;
}

double LineInconsistency(const std::vector<Obb3>& boxes) {
  double s = 0.0;
  for (size_t k = 1; k < boxes.size(); ++k) {
    const double dx = boxes[k].dims.x() - boxes[0].dims.x();
    const double dy = boxes[k].dims.y() - boxes[0].dims.y();
    const double dz = boxes[k].dims.z() - boxes[0].dims.z();
    s += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return s;
}

std::vector<Obb3> Sequence(const std::vector<Vec3>& centres, const std::vector<Vec3>& dims) {
  std::vector<Obb3> out;
  for (size_t i = 0; i < centres.size(); ++i) out.push_back({centres[i], dims[i], 0.0});
  return out;
}

Outcome FormulaFidelity() {
  Outcome o;
  const ScorerConfig cfg;
  if (cfg.lambda1 != 0.4 || cfg.lambda2 != 0.15) o.pass = false;

  // Displacements 5 and 12, dimension drifts 2 and 5.
  const auto a = Sequence({{0, 0, 0}, {3, 4, 0}, {3, 4, 12}}, {{1, 1, 1}, {1, 3, 1}, {4, 5, 1}});
  const double ma = MovingScore(a), ia = InconsistencyScore(a);
  const double ka = CombinedConfidence(ma, ia, cfg);
  if (ma != 17.0 || ia != 7.0 || ka != 0.4 * 17.0 - 0.15 * 7.0) o.pass = false;

  // A car sliding 0.5 m per frame with a dims drift of 0.1 and then 0.2.
  const auto b = Sequence({{0, 0, 10}, {0.5, 0, 10}, {1.0, 0, 10}, {1.5, 0, 10}},
                          {{1.8, 1.5, 4.2}, {1.8, 1.5, 4.3}, {1.8, 1.5, 4.2}, {1.8, 1.7, 4.2}});
  const double mb = MovingScore(b), ib = InconsistencyScore(b);
  if (std::abs(mb - 1.5) > 1e-12 || std::abs(ib - 0.3) > 1e-12 ||
      std::abs(CombinedConfidence(mb, ib, cfg) - 0.555) > 1e-12) {
    o.pass = false;
  }
  // A static box has zero motion and zero drift.
  const auto c = Sequence({{2, 1, 9}, {2, 1, 9}, {2, 1, 9}, {2, 1, 9}},
                          {{1, 1, 1}, {1, 1, 1}, {1, 1, 1}, {1, 1, 1}});
  if (MovingScore(c) != 0.0 || InconsistencyScore(c) != 0.0 ||
      CombinedConfidence(0.0, 0.0, cfg) != 0.0) {
    o.pass = false;
  }

  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 2 + static_cast<int>(UniformIndex(rng, 5));
    std::vector<Obb3> boxes(n);
    for (auto& box : boxes) {
      box.centre = RandomVec(rng, -30.0, 30.0);
      box.dims = RandomVec(rng, 0.3, 6.0);
      box.yaw = UniformIn(rng, -1.5, 1.5);
    }
    ScorerConfig rc;
    rc.lambda1 = UniformIn(rng, 0.0, 1.0);
    rc.lambda2 = UniformIn(rng, 0.0, 1.0);
    const double m = LineMoving(boxes), i = LineInconsistency(boxes);
    const double k = rc.lambda1 * m - rc.lambda2 * i;
    worst = std::max({worst, std::abs(MovingScore(boxes) - m),
                      std::abs(InconsistencyScore(boxes) - i),
                      std::abs(CombinedConfidence(MovingScore(boxes), InconsistencyScore(boxes), rc) - k)});
  }
  if (worst > 1e-12) o.pass = false;
  o.detail = Fmt("hand cases (17, 7, 5.75), (1.5, 0.3, 0.555), static 0; 20 random cases max |diff| %.1e",
                 worst);
  return o;
}

// ---------------------------------------------------------------- 2

bool InsideOracle(const Vec3& lidar_point, const Vec3& lidar_centre, const Anchor& anchor,
                  const RigidTransform& l2c, bool* on_boundary) {
  const Mat3& r = l2c.rotation();
  const Vec3& t = l2c.translation();
  Vec3 p, c;
  for (int i = 0; i < 3; ++i) {
    p[i] = r(i, 0) * lidar_point[0] + r(i, 1) * lidar_point[1] + r(i, 2) * lidar_point[2] + t[i];
    c[i] = r(i, 0) * lidar_centre[0] + r(i, 1) * lidar_centre[1] + r(i, 2) * lidar_centre[2] + t[i];
  }
  const double half_h = anchor.dims.y() / 2.0;
  const double radius = std::sqrt(anchor.dims.x() * anchor.dims.x() +
                                  anchor.dims.z() * anchor.dims.z()) / 2.0;
  const double dy = std::abs(p.y() - c.y());
  const double dx = p.x() - c.x(), dz = p.z() - c.z();
  const double rho = std::sqrt(dx * dx + dz * dz);
  *on_boundary = dy == half_h || rho == radius;
  return dy < half_h && rho < radius;
}

Outcome CropCorrectness() {
  Outcome o;
  Rng rng(202);
  const auto anchors = DefaultAnchors();
  const RigidTransform tilted(
      Eigen::AngleAxisd(0.013, Vec3::UnitY()).toRotationMatrix() * CameraFromLidarAxes(),
      Vec3(0.027, -0.076, -0.27));
  size_t mismatches = 0, kept = 0, boundary_points = 0;
  for (int cloud_id = 0; cloud_id < 1000; ++cloud_id) {
    const RigidTransform& l2c = cloud_id % 2 ? tilted : DefaultLidarToCamera();
    const RigidTransform c2l = Invert(l2c);
    const Vec3 centre(UniformIn(rng, 3.0, 40.0), UniformIn(rng, -15.0, 15.0),
                      UniformIn(rng, -2.0, 0.5));
    PointCloud cloud;
    const int n = 50 + static_cast<int>(UniformIndex(rng, 250));
    for (int i = 0; i < n; ++i) {
      cloud.points.push_back({centre + RandomVec(rng, -3.0, 3.0), 0.5});
    }
    // Points placed on the cylinder wall and caps, in the camera frame.
    const Vec3 cam_centre = l2c(centre);
    for (const Anchor& a : anchors) {
      const double half_h = 0.5 * a.dims.y();
      const double radius = a.Radius();
      for (int i = 0; i < 6; ++i) {
        Vec3 q = cam_centre;
        switch (i) {
          case 0: q.x() += radius; break;
          case 1: q.z() -= radius; break;
          case 2: q.y() += half_h; break;
          case 3: q.y() -= half_h; break;
          case 4: q.x() += 0.5 * radius; q.y() += half_h; break;
          default: q.x() -= radius; q.y() += 0.25 * half_h; break;
        }
        cloud.points.push_back({c2l(q), 0.5});
      }
    }
    for (const Anchor& a : anchors) {
      const auto got = CropCylinder(cloud, centre, a, l2c);
      std::vector<Vec3> want;
      for (const auto& p : cloud.points) {
        bool boundary = false;
        if (InsideOracle(p.position, centre, a, l2c, &boundary)) want.push_back(l2c(p.position));
        boundary_points += boundary;
      }
      kept += want.size();
      if (got.size() != want.size()) {
        ++mismatches;
        continue;
      }
      for (size_t i = 0; i < got.size(); ++i) {
        if (got[i] != want[i]) {
          ++mismatches;
          break;
        }
      }
    }
  }
  o.pass = mismatches == 0 && boundary_points > 0;
  o.detail = Fmt("1000 clouds x 3 anchors, %zu crops differ, %zu points kept, %zu exactly on the boundary",
                 mismatches, kept, boundary_points);
  return o;
}

// ---------------------------------------------------------------- 3

Outcome TrackingOracle() {
  Outcome o;
  const SimulatedScene scene = MakeScene(DefaultSceneConfig(), 7);
  const int horizon = 3;
  const RigidTransform& l2c = scene.config.lidar_to_camera;
  double worst = 0.0;
  int worst_t = 0, worst_k = 0;
  std::vector<double> per_k(horizon + 1, 0.0);
  std::vector<int> windows(horizon + 1, 0);
  // Mean error over points that are visible (own the depth pixel) at t+k.
  double visible_worst = 0.0;
  for (int t = 0; t + horizon < static_cast<int>(scene.frames.size()); ++t) {
    const SceneFrame& f = scene.frames[t];
    std::vector<Vec3> points;
    std::vector<PointSource> sources;
    for (size_t i = 0; i < f.cloud.points.size(); ++i) {
      if (f.sources[i].object < 0) continue;
      points.push_back(l2c(f.cloud.points[i].position));
      sources.push_back(f.sources[i]);
    }
    const FrameWindow window = WindowFromScene(scene, t, horizon);
    const TrackedPointSets tracked = TrackPoints(points, window, horizon);
    for (int k = 1; k <= horizon; ++k) {
      const RigidTransform to_t = window.ToReference(k);
      double sum = 0.0;
      int n = 0;
      for (size_t i = 0; i < points.size(); ++i) {
        if (!tracked.alive[k][i]) continue;
        sum += (tracked.sets[k][i] - to_t(scene.CameraPosition(sources[i], t + k))).norm();
        ++n;
      }
      const double mean = n ? sum / n : 0.0;
      per_k[k] += mean;
      ++windows[k];
      if (mean > worst) {
        worst = mean;
        worst_t = t;
        worst_k = k;
      }
    }
    // One-step error of points whose own return survives the next frame's
    // z-buffer, for the report.
    std::vector<int> owners;
    RenderDepth(scene.frames[t + 1].cloud, scene.config.intrinsics, l2c, &owners);
    std::set<std::pair<int, std::tuple<double, double, double>>> visible;
    for (int idx : owners) {
      if (idx < 0) continue;
      const PointSource& s = scene.frames[t + 1].sources[idx];
      if (s.object >= 0) visible.insert({s.object, {s.coords.x(), s.coords.y(), s.coords.z()}});
    }
    double vsum = 0.0;
    int vn = 0;
    const RigidTransform to_t = window.ToReference(1);
    for (size_t i = 0; i < points.size(); ++i) {
      const PointSource& s = sources[i];
      if (!tracked.alive[1][i] ||
          !visible.count({s.object, {s.coords.x(), s.coords.y(), s.coords.z()}})) {
        continue;
      }
      vsum += (tracked.sets[1][i] - to_t(scene.CameraPosition(s, t + 1))).norm();
      ++vn;
    }
    if (vn) visible_worst = std::max(visible_worst, vsum / vn);
  }
  o.pass = worst <= 0.05;
  o.detail = Fmt("mean per-point error, average over frames k=1..3: %.3f %.3f %.3f m; worst %.3f m "
                 "(t=%d, k=%d), limit 0.05; points visible at t+1: worst k=1 mean %.3f m",
                 per_k[1] / windows[1], per_k[2] / windows[2], per_k[3] / windows[3], worst,
                 worst_t, worst_k, visible_worst);
  return o;
}

// ---------------------------------------------------------------- 4

Vec3 PowerIteration(const std::vector<Vec3>& points) {
  Vec3 mean = Vec3::Zero();
  for (const auto& p : points) mean += p;
  mean /= static_cast<double>(points.size());
  Mat3 cov = Mat3::Zero();
  for (const auto& p : points) cov += (p - mean) * (p - mean).transpose();
  Vec3 v(0.577, 0.601, 0.553);
  for (int it = 0; it < 5000; ++it) {
    v = cov * v;
    v /= v.norm();
  }
  return v;
}

Outcome BoxFitting() {
  Outcome o;
  Rng rng(404);
  double yaw_err = 0.0, dims_err = 0.0, centre_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    Obb3 truth;
    truth.frame = Frame::kCamera;
    truth.centre = Vec3(UniformIn(rng, -10, 10), UniformIn(rng, 0, 2), UniformIn(rng, 5, 40));
    const double length = UniformIn(rng, 2.0, 6.0);
    truth.dims = Vec3(UniformIn(rng, 0.4, length - 0.3), UniformIn(rng, 0.4, length - 0.3), length);
    truth.yaw = WrapHalfPi(UniformIn(rng, -std::numbers::pi, std::numbers::pi));
    const auto corners = truth.Corners();
    const Obb3 fit = FitObb({corners.begin(), corners.end()});
    yaw_err = std::max(yaw_err, std::abs(std::remainder(fit.yaw - truth.yaw, std::numbers::pi)));
    dims_err = std::max(dims_err, (fit.dims - truth.dims).cwiseAbs().maxCoeff());
    centre_err = std::max(centre_err, (fit.centre - truth.centre).norm());
  }
  double axis_err = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Mat3 rot = Eigen::Quaterniond(UniformIn(rng, -1, 1), UniformIn(rng, -1, 1),
                                        UniformIn(rng, -1, 1), UniformIn(rng, -1, 1))
                         .normalized()
                         .toRotationMatrix();
    const Vec3 scale(UniformIn(rng, 2.0, 4.0), UniformIn(rng, 0.5, 1.0), UniformIn(rng, 0.05, 0.4));
    const Vec3 offset = RandomVec(rng, -20, 20);
    std::vector<Vec3> points;
    for (int i = 0; i < 200; ++i) {
      points.push_back(offset + rot * RandomVec(rng, -1, 1).cwiseProduct(scale));
    }
    const Vec3 a = PrincipalAxis(points);
    const Vec3 b = PowerIteration(points);
    axis_err = std::max(axis_err, std::min((a - b).norm(), (a + b).norm()));
  }
  o.pass = yaw_err <= 1e-6 && dims_err <= 1e-6 && axis_err <= 1e-6;
  o.detail = Fmt("100 cuboids: yaw err %.1e rad, dims err %.1e m, centre err %.1e m; "
                 "100 clusters: principal axis vs power iteration %.1e",
                 yaw_err, dims_err, centre_err, axis_err);
  return o;
}

// ---------------------------------------------------------------- 5

Outcome EndToEndRecall() {
  Outcome o;
  const auto start = std::chrono::steady_clock::now();
  const SimulatedScene scene = MakeScene(DefaultSceneConfig(), 7);
  const GridSpec spec;
  const ScorerConfig scorer;
  const auto anchors = DefaultAnchors();
  double largest_radius = 0.0;
  for (const auto& a : anchors) largest_radius = std::max(largest_radius, a.Radius());

  int moving_objects = 0, static_objects = 0;
  for (const auto& g : scene.frames[0].gt) (g.is_moving ? moving_objects : static_objects)++;
  std::map<int, double> best_iou;
  int static_pixels = 0, static_positive = 0, ground_pixels = 0, ground_positive = 0;
  const int frames = static_cast<int>(scene.frames.size());
  for (int t = 0; t + scorer.horizon < frames; ++t) {
    const SceneFrame& f = scene.frames[t];
    std::map<GridPixel, std::set<int>> owners;
    for (size_t i = 0; i < f.cloud.points.size(); ++i) {
      const auto p = BevPixelOf(f.cloud.points[i].position, spec);
      if (p) owners[{p->row / spec.stride, p->col / spec.stride}].insert(f.sources[i].object);
    }
    const FrameWindow window = WindowFromScene(scene, t, scorer.horizon);
    const BoxGrid grid = HeuristicGrid(window.cloud, spec);
    SamplerConfig sampler;
    sampler.seed = FrameSeed(0, t);
    const auto pixels = SamplePixels(grid, spec, sampler);
    const PseudoLabelSet labels = GeneratePseudoLabels(window, grid, spec, pixels, anchors, scorer);
    std::set<GridPixel> positive;
    for (const auto& l : labels.positives) {
      positive.insert(l.pixel);
      for (const auto& g : f.gt) {
        if (g.is_moving) best_iou[g.object] = std::max(best_iou[g.object], RotatedIouBev(l.box, g.box));
      }
    }
    for (const auto& u : pixels) {
      const auto it = owners.find(u);
      if (it == owners.end()) continue;
      bool pure_ground = it->second == std::set<int>{-1};
      if (pure_ground) {
        const Vec3 c = PillarCentre(u, spec);
        for (size_t i = 0; i < f.cloud.points.size() && pure_ground; ++i) {
          const Vec3& p = f.cloud.points[i].position;
          if (f.sources[i].object >= 0 && std::hypot(p.x() - c.x(), p.y() - c.y()) < largest_radius) {
            pure_ground = false;
          }
        }
      }
      bool has_static = false;
      for (int obj : it->second) has_static |= obj >= 0 && !f.gt[obj].is_moving;
      if (pure_ground) {
        ++ground_pixels;
        ground_positive += positive.count(u);
      }
      if (has_static) {
        ++static_pixels;
        static_positive += positive.count(u);
      }
    }
  }
  int found = 0;
  for (const auto& [obj, iou] : best_iou) found += iou >= 0.5;
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.pass = moving_objects == 6 && found >= 0.8 * moving_objects && static_positive == 0 &&
           ground_positive == 0 && secs < 60.0;
  o.detail = Fmt("%d/%d moving objects with a U+ label at BEV IoU >= 0.5; static-object pixels in U+: "
                 "%d/%d; pure-ground pixels in U+: %d/%d; %d static objects; %.1f s",
                 found, moving_objects, static_positive, static_pixels, ground_positive,
                 ground_pixels, static_objects, secs);
  return o;
}

// ---------------------------------------------------------------- 6

bool InConvex(const std::array<Vec2, 4>& poly, const Vec2& p) {
  for (int i = 0; i < 4; ++i) {
    const Vec2 e = poly[(i + 1) % 4] - poly[i];
    const Vec2 d = p - poly[i];
    if (e.x() * d.y() - e.y() * d.x() < 0.0) return false;
  }
  return true;
}

double MonteCarloIou(const Obb3& a, const Obb3& b, Rng& rng, int samples) {
  const auto fa = a.Footprint();
  const auto fb = b.Footprint();
  Vec2 lo = fa[0], hi = fa[0];
  for (const auto* poly : {&fa, &fb}) {
    for (const Vec2& v : *poly) {
      lo = lo.cwiseMin(v);
      hi = hi.cwiseMax(v);
    }
  }
  int in_a = 0, in_b = 0, both = 0;
  for (int i = 0; i < samples; ++i) {
    const Vec2 p(UniformIn(rng, lo.x(), hi.x()), UniformIn(rng, lo.y(), hi.y()));
    const bool ia = InConvex(fa, p), ib = InConvex(fb, p);
    in_a += ia;
    in_b += ib;
    both += ia && ib;
  }
  const int uni = in_a + in_b - both;
  return uni ? static_cast<double>(both) / uni : 0.0;
}

Outcome RotatedIou() {
  Outcome o;
  Rng rng(606);
  double mc_err = 0.0;
  for (int pair = 0; pair < 200; ++pair) {
    Obb3 a, b;
    a.frame = b.frame = pair % 2 ? Frame::kLidar : Frame::kCamera;
    a.centre = RandomVec(rng, -5, 5);
    a.dims = RandomVec(rng, 0.5, 5.0);
    a.yaw = UniformIn(rng, -1.57, 1.57);
    b.centre = a.centre + RandomVec(rng, -2.5, 2.5);
    b.dims = RandomVec(rng, 0.5, 5.0);
    b.yaw = UniformIn(rng, -1.57, 1.57);
    if (pair % 50 == 0) b = a;
    mc_err = std::max(mc_err, std::abs(RotatedIouBev(a, b) - MonteCarloIou(a, b, rng, 1000000)));
  }
  double aa_err = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    Obb3 a, b;
    a.centre = RandomVec(rng, -3, 3);
    b.centre = RandomVec(rng, -3, 3);
    a.dims = RandomVec(rng, 0.5, 4.0);
    b.dims = RandomVec(rng, 0.5, 4.0);
    // Camera footprint axes are x (width) and z (length).
    auto overlap = [](double c1, double h1, double c2, double h2) {
      return std::max(0.0, std::min(c1 + h1, c2 + h2) - std::max(c1 - h1, c2 - h2));
    };
    const double ix = overlap(a.centre.x(), a.dims.x() / 2, b.centre.x(), b.dims.x() / 2);
    const double iz = overlap(a.centre.z(), a.dims.z() / 2, b.centre.z(), b.dims.z() / 2);
    const double inter = ix * iz;
    const double want = inter / (a.dims.x() * a.dims.z() + b.dims.x() * b.dims.z() - inter);
    aa_err = std::max(aa_err, std::abs(RotatedIouBev(a, b) - want));
  }
  o.pass = mc_err <= 0.005 && aa_err <= 1e-9;
  o.detail = Fmt("200 pairs vs 1e6-sample Monte Carlo: max |diff| %.4f (limit 0.005); "
                 "1000 axis-aligned pairs: max |diff| %.1e (limit 1e-9)",
                 mc_err, aa_err);
  return o;
}

// ---------------------------------------------------------------- 7

double FieldOf(const BoxCode& c, int field) {
  if (field < 3) return c.delta[field];
  if (field < 6) return c.dims[field - 3];
  return field == 6 ? c.yaw : c.confidence;
}

double& FieldOf(BoxCode& c, int field) {
  if (field < 3) return c.delta[field];
  if (field < 6) return c.dims[field - 3];
  return field == 6 ? c.yaw : c.confidence;
}

// A residual magnitude away from the branch point at 1.
double Residual(Rng& rng, double hi) {
  const double m = (rng() & 1) ? UniformIn(rng, 0.05, 0.9) : UniformIn(rng, 1.1, hi);
  return Sign(rng) * m;
}

Outcome Loss() {
  Outcome o;
  const LossConfig cfg;
  double jump = 0.0;
  for (double eps : {1e-12, 1e-15}) {
    jump = std::max(jump, std::abs(BalancedL1(1.0 - eps) - BalancedL1(1.0 + eps)));
    jump = std::max(jump, std::abs(BalancedL1(-1.0 + eps) - BalancedL1(-1.0 - eps)));
  }
  const double b = cfg.b();
  const double inner_at_one = cfg.alpha / b * (b + 1.0) * std::log(b + 1.0) - cfg.alpha;
  jump = std::max(jump, std::abs(inner_at_one - (cfg.gamma + cfg.c())));

  const GridSpec spec;
  BoxGrid grid(spec);
  Rng rng(707);
  std::vector<PseudoLabel> exact_pos, pos;
  std::vector<NegativeLabel> exact_neg, neg;
  std::set<size_t> labelled;
  for (int i = 0; i < 16; ++i) {
    const GridPixel u{static_cast<int>(UniformIndex(rng, grid.rows())),
                      static_cast<int>(UniformIndex(rng, grid.cols()))};
    if (!labelled.insert(grid.Index(u)).second) continue;
    BoxCode& c = grid.at(u);
    c.delta = RandomVec(rng, -0.5, 0.5);
    c.dims = Vec3(1.8, 1.5, 4.2) + RandomVec(rng, -0.3, 0.3);
    c.yaw = UniformIn(rng, -1.2, 1.2);
    c.confidence = UniformIn(rng, 0.0, 1.0);
    if (i % 2) {
      const Obb3 box = DecodeBox(u, c, spec);
      exact_pos.push_back({u, box, c.confidence, "vehicle"});
      PseudoLabel l{u, box, UniformIn(rng, 0.0, 1.0), "vehicle"};
      for (int a = 0; a < 3; ++a) {
        l.box.centre[a] -= Residual(rng, 3.0);
        l.box.dims[a] -= Residual(rng, 2.0);
      }
      // Keep the wrapped yaw residual away from the kink at pi/2.
      l.box.yaw -= Residual(rng, 1.45);
      pos.push_back(l);
    } else {
      exact_neg.push_back({u, c.confidence});
      neg.push_back({u, UniformIn(rng, 0.0, 1.0)});
    }
  }
  const double perfect = FrameLoss(grid, exact_pos, exact_neg, spec).Total();

  const BoxGrid grad = FrameLossGradient(grid, pos, neg, spec);
  double worst_rel = 0.0, stray = 0.0;
  const double h = 1e-6;
  for (size_t i = 0; i < grad.size(); ++i) {
    for (int field = 0; field < BoxCode::kFields; ++field) {
      const double analytic = FieldOf(grad.at(i), field);
      if (!labelled.count(i)) {
        stray = std::max(stray, std::abs(analytic));
        continue;
      }
      BoxGrid plus = grid, minus = grid;
      FieldOf(plus.at(i), field) += h;
      FieldOf(minus.at(i), field) -= h;
      const double fd =
          (FrameLoss(plus, pos, neg, spec).Total() - FrameLoss(minus, pos, neg, spec).Total()) /
          (2.0 * h);
      worst_rel = std::max(worst_rel, std::abs(analytic - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  o.pass = jump <= 1e-9 && perfect == 0.0 && worst_rel <= 1e-4 && stray == 0.0;
  o.detail = Fmt("jump at |x|=1: %.1e; loss on perfect predictions: %g; gradient vs central "
                 "differences: max rel err %.1e over %zu labelled pixels",
                 jump, perfect, worst_rel, labelled.size());
  return o;
}

// ---------------------------------------------------------------- 8

// IoU looked up from a table; box i of either side carries its index in
// centre.x.
struct TableIou {
  std::vector<std::vector<double>> table;  // [detection][gt]
  double operator()(const Obb3& det, const Obb3& gt) const {
    return table[static_cast<size_t>(det.centre.x())][static_cast<size_t>(gt.centre.x())];
  }
};

// All-point interpolated AP from the PR points of every cut-off n, in exact
// rational arithmetic: precision tp/n, recall tp/G.
double EnumeratedAp(const std::vector<std::vector<double>>& iou, size_t gts, double threshold) {
  const size_t dets = iou.size();
  if (gts == 0) return dets == 0 ? 1.0 : 0.0;
  std::vector<size_t> tp_at(dets + 1, 0);
  for (size_t n = 1; n <= dets; ++n) {
    // Re-run the greedy assignment from scratch for the first n detections.
    std::vector<bool> used(gts, false);
    size_t tp = 0;
    for (size_t d = 0; d < n; ++d) {
      int best = -1;
      for (size_t g = 0; g < gts; ++g) {
        if (used[g]) continue;
        if (best < 0 || iou[d][g] > iou[d][best]) best = static_cast<int>(g);
      }
      if (best >= 0 && iou[d][best] >= threshold) {
        used[best] = true;
        ++tp;
      }
    }
    tp_at[n] = tp;
  }
  // Sum over recall levels r = j/G of max precision among cut-offs reaching r.
  long double ap = 0.0L;
  for (size_t j = 1; j <= gts; ++j) {
    long double best = 0.0L;
    for (size_t n = 1; n <= dets; ++n) {
      if (tp_at[n] >= j) best = std::max(best, static_cast<long double>(tp_at[n]) / n);
    }
    ap += best / gts;
  }
  return static_cast<double>(ap);
}

Outcome Metrics() {
  Outcome o;
  const std::vector<double> levels = {0.2, 0.5, 0.8};
  size_t instances = 0, mismatches = 0;
  double worst = 0.0;
  for (size_t dets = 0; dets <= 4; ++dets) {
    for (size_t gts = 0; gts <= 3; ++gts) {
      const size_t cells = dets * gts;
      size_t combos = 1;
      for (size_t i = 0; i < cells; ++i) combos *= levels.size();
      for (size_t code = 0; code < combos; ++code) {
        TableIou iou;
        iou.table.assign(dets, std::vector<double>(gts, 0.0));
        size_t rest = code;
        for (size_t d = 0; d < dets; ++d) {
          for (size_t g = 0; g < gts; ++g) {
            iou.table[d][g] = levels[rest % levels.size()];
            rest /= levels.size();
          }
        }
        std::vector<Detection> detections;
        for (size_t d = 0; d < dets; ++d) {
          detections.push_back({Obb3{Vec3(d, 0, 0), Vec3::Ones(), 0.0}, 1.0 - 0.1 * d});
        }
        std::vector<Obb3> truths;
        for (size_t g = 0; g < gts; ++g) truths.push_back(Obb3{Vec3(g, 0, 0), Vec3::Ones(), 0.0});
        for (double threshold : {0.5, 0.7}) {
          const double got = AveragePrecision(detections, truths, iou, threshold);
          const double want = EnumeratedAp(iou.table, gts, threshold);
          worst = std::max(worst, std::abs(got - want));
          mismatches += std::abs(got - want) > 1e-12;
          ++instances;
        }
      }
    }
  }

  Rng rng(808);
  int violations = 0;
  const BoxIou rotated = RotatedIouBev;
  for (int suite = 0; suite < 300; ++suite) {
    std::vector<Obb3> truths;
    std::vector<Detection> detections;
    const int n = 1 + static_cast<int>(UniformIndex(rng, 6));
    for (int i = 0; i < n; ++i) {
      Obb3 g{Vec3(UniformIn(rng, 5, 40), UniformIn(rng, -10, 10), -1.0), Vec3(1.8, 1.5, 4.2),
             UniformIn(rng, -1.5, 1.5), Frame::kLidar};
      truths.push_back(g);
      const int copies = static_cast<int>(UniformIndex(rng, 3));
      for (int c = 0; c < copies; ++c) {
        Obb3 d = g;
        d.centre += Vec3(UniformIn(rng, -1.5, 1.5), UniformIn(rng, -1.5, 1.5), 0.0);
        d.yaw += UniformIn(rng, -0.3, 0.3);
        detections.push_back({d, UniformUnit(rng)});
      }
    }
    for (int c = 0; c < 2; ++c) {
      detections.push_back({Obb3{Vec3(UniformIn(rng, 5, 40), UniformIn(rng, -10, 10), -1.0),
                                 Vec3(1.8, 1.5, 4.2), 0.0, Frame::kLidar},
                            UniformUnit(rng)});
    }
    double prev = 2.0;
    for (double thr = 0.05; thr <= 0.951; thr += 0.05) {
      const double ap = AveragePrecision(detections, truths, rotated, thr);
      violations += ap > prev + 1e-15;
      prev = ap;
    }
  }
  o.pass = mismatches == 0 && violations == 0;
  o.detail = Fmt("%zu exhaustive instances (<= 4 detections, <= 3 GT, IoU in {0.2, 0.5, 0.8}, "
                 "thresholds 0.5 and 0.7): %zu differ, max |diff| %.1e; 300 random suites: "
                 "%d monotonicity violations",
                 instances, mismatches, worst, violations);
  return o;
}

// ---------------------------------------------------------------- 9

Outcome Sampling() {
  Outcome o;
  const SamplerConfig defaults;
  bool ok = defaults.tau == 0.08 && defaults.n_total == 60;
  const GridSpec spec;
  Rng rng(909);
  int grids = 0;
  for (size_t high_count : {0ul, 1ul, 5ul, 29ul, 30ul, 31ul, 400ul, 23100ul, 23104ul}) {
    BoxGrid grid(spec);
    std::vector<size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    for (size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[UniformIndex(rng, i)]);
    for (size_t i = 0; i < order.size(); ++i) {
      // Exactly tau counts as low.
      grid.at(order[i]).confidence = i < high_count ? UniformIn(rng, 0.0801, 1.0)
                                                     : (i % 7 ? UniformIn(rng, 0.0, 0.08) : 0.08);
      grid.at(order[i]).dims = Vec3::Ones();
    }
    const size_t low_count = grid.size() - high_count;
    const auto part = PartitionPixels(grid, 0.08);
    ok &= part.high.size() == high_count && part.low.size() == low_count;
    for (const auto& u : part.high) ok &= grid.at(u).confidence > 0.08;
    for (const auto& u : part.low) ok &= grid.at(u).confidence <= 0.08;

    SamplerConfig cfg;
    cfg.seed = rng();
    const auto a = SamplePixels(grid, spec, cfg);
    const auto b = SamplePixels(grid, spec, cfg);
    SamplerConfig other = cfg;
    other.seed = cfg.seed + 1;
    const auto c = SamplePixels(grid, spec, other);
    const size_t want_high = std::min(high_count, std::max<size_t>(30, 60 - std::min<size_t>(60, low_count)));
    size_t got_high = 0;
    for (const auto& u : a) got_high += grid.at(u).confidence > 0.08;
    ok &= a.size() == 60 && a == b && a != c;
    ok &= std::set<GridPixel>(a.begin(), a.end()).size() == 60 && std::is_sorted(a.begin(), a.end());
    ok &= got_high == want_high;
    ++grids;
  }

  GridSpec small;
  small.height = small.width = 80;
  small.x = {0.0, 8.0};
  small.y = {-4.0, 4.0};
  double smooth_err = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    BoxGrid g(small);
    for (size_t i = 0; i < g.size(); ++i) {
      g.at(i).delta = Vec3(UniformIn(rng, -0.6, 0.6), UniformIn(rng, -0.6, 0.6),
                           UniformIn(rng, -0.3, 0.3));
      if (trial == 0 && i % 3 == 0) g.at(i).delta = Vec3::Zero();  // distance ties
      g.at(i).dims = Vec3::Ones();
      g.at(i).confidence = UniformUnit(rng);
    }
    std::vector<Vec3> centres(g.size());
    for (size_t i = 0; i < g.size(); ++i) centres[i] = DecodeBox(g.PixelAt(i), g.at(i), small).centre;
    const NeighbourIndex index(g, small);
    for (size_t i = 0; i < g.size(); ++i) {
      std::vector<std::tuple<double, int, int>> order;
      for (size_t j = 0; j < g.size(); ++j) {
        if (j == i) continue;
        const GridPixel v = g.PixelAt(j);
        order.emplace_back((centres[j] - centres[i]).squaredNorm(), v.row, v.col);
      }
      std::sort(order.begin(), order.end());
      double sum = g.at(i).confidence;
      for (int n = 0; n < 8; ++n) {
        sum += g.at(GridPixel{std::get<1>(order[n]), std::get<2>(order[n])}).confidence;
      }
      smooth_err = std::max(smooth_err, std::abs(SmoothConfidence(index, g, g.PixelAt(i)) - sum / 9.0));
    }
  }
  o.pass = ok && smooth_err <= 1e-12;
  o.detail = Fmt("%d synthetic grids: counts, Hi/Lo partition, seed determinism %s; smoothing vs "
                 "exhaustive 8-NN on 5 grids of 20x20: max |diff| %.1e",
                 grids, ok ? "ok" : "WRONG", smooth_err);
  return o;
}

// ---------------------------------------------------------------- 10

bool SameFloats(const std::vector<float>& a, const std::vector<float>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}

Outcome Io() {
  Outcome o;
  const fs::path dir = fs::temp_directory_path() / "pgt_acceptance_io";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Rng rng(1010);
  std::vector<std::string> failed;
  auto check = [&](bool ok, const char* what) {
    if (!ok) failed.push_back(what);
  };

  PointCloud cloud;
  for (int i = 0; i < 1000; ++i) {
    const Vec3 p = FloatVec(RandomVec(rng, -80, 80));
    cloud.points.push_back({p, ToFloat(UniformUnit(rng))});
  }
  WriteCloud(dir / "c.bin", cloud);
  const PointCloud cloud_back = ReadCloud(dir / "c.bin");
  bool same = cloud_back.points.size() == cloud.points.size();
  for (size_t i = 0; same && i < cloud.points.size(); ++i) {
    same = cloud_back.points[i].position == cloud.points[i].position &&
           cloud_back.points[i].intensity == cloud.points[i].intensity;
  }
  check(same, "cloud");

  SparseDepthImage depth(37, 53);
  FlowImage flow(37, 53);
  for (int r = 0; r < 37; ++r) {
    for (int c = 0; c < 53; ++c) {
      if (UniformUnit(rng) < 0.4) {
        depth.at(r, c) = static_cast<float>(UniformIn(rng, 1, 80));
        flow.set(r, c, Vec2(UniformIn(rng, -20, 20), UniformIn(rng, -20, 20)));
      }
    }
  }
  WriteDepth(dir / "d.bin", depth);
  WriteFlow(dir / "f.bin", flow);
  check(SameFloats(ReadDepth(dir / "d.bin").data(), depth.data()), "depth");
  check(SameFloats(ReadFlow(dir / "f.bin").data(), flow.data()), "flow");

  const GridSpec spec;
  BoxGrid grid(spec);
  for (size_t i = 0; i < grid.size(); ++i) {
    BoxCode& b = grid.at(i);
    b.delta = FloatVec(RandomVec(rng, -1, 1));
    b.dims = FloatVec(RandomVec(rng, 0.3, 5));
    b.yaw = ToFloat(UniformIn(rng, -1.5, 1.5));
    b.confidence = ToFloat(UniformUnit(rng));
  }
  WriteBoxGrid(dir / "g.bin", grid);
  const BoxGrid grid_back = ReadBoxGrid(dir / "g.bin", spec);
  same = true;
  for (size_t i = 0; same && i < grid.size(); ++i) {
    const BoxCode &x = grid.at(i), &y = grid_back.at(i);
    same = x.delta == y.delta && x.dims == y.dims && x.yaw == y.yaw && x.confidence == y.confidence;
  }
  check(same, "box grid");

  const BevImage bev = Rasterize(cloud, spec);
  WriteBevImage(dir / "b.bin", bev);
  check(SameFloats(ReadBevImage(dir / "b.bin").data(), bev.data()), "bev");

  std::vector<RigidTransform> poses;
  for (int i = 0; i < 20; ++i) {
    const Mat3 r = Eigen::AngleAxisd(UniformIn(rng, -3, 3), RandomVec(rng, -1, 1).normalized())
                       .toRotationMatrix();
    poses.emplace_back(r, RandomVec(rng, -500, 500));
  }
  WritePoses(dir / "poses.txt", poses);
  const auto poses_back = ReadPoses(dir / "poses.txt");
  same = poses_back.size() == poses.size();
  for (size_t i = 0; same && i < poses.size(); ++i) {
    same = poses_back[i].rotation() == poses[i].rotation() &&
           poses_back[i].translation() == poses[i].translation();
  }
  check(same, "poses");

  Calibration calib;
  calib.intrinsics.fx = 721.5377;
  calib.intrinsics.fy = 721.5377;
  calib.intrinsics.cx = 609.5593;
  calib.intrinsics.cy = 172.854;
  calib.lidar_to_camera = RigidTransform(
      Eigen::AngleAxisd(0.0123, Vec3(0.1, 1, 0.05).normalized()).toRotationMatrix() *
          CameraFromLidarAxes(),
      Vec3(-0.0041, -0.0763, -0.2718));
  WriteCalibration(dir / "calib.txt", calib);
  const Calibration calib_back = ReadCalibration(dir / "calib.txt");
  check(calib_back.intrinsics.fx == calib.intrinsics.fx &&
            calib_back.intrinsics.fy == calib.intrinsics.fy &&
            calib_back.intrinsics.cx == calib.intrinsics.cx &&
            calib_back.intrinsics.cy == calib.intrinsics.cy &&
            calib_back.intrinsics.width == calib.intrinsics.width &&
            calib_back.intrinsics.height == calib.intrinsics.height &&
            calib_back.lidar_to_camera.rotation() == calib.lidar_to_camera.rotation() &&
            calib_back.lidar_to_camera.translation() == calib.lidar_to_camera.translation(),
        "calibration");

  std::vector<KittiLabel> labels;
  for (int i = 0; i < 300; ++i) {
    KittiLabel l;
    l.type = i % 3 == 0 ? "Car" : (i % 3 == 1 ? "Pedestrian" : "Cyclist");
    l.truncation = UniformUnit(rng);
    l.occlusion = i % 4;
    l.alpha = UniformIn(rng, -3, 3);
    l.bbox.min = Vec2(UniformIn(rng, 0, 1000), UniformIn(rng, 0, 300));
    l.bbox.max = l.bbox.min + Vec2(UniformIn(rng, 5, 200), UniformIn(rng, 5, 70));
    l.box.frame = Frame::kCamera;
    l.box.dims = RandomVec(rng, 0.3, 6);
    l.box.centre = Vec3(UniformIn(rng, -20, 20), UniformIn(rng, -1, 3), UniformIn(rng, 2, 80));
    l.box.yaw = WrapHalfPi(UniformIn(rng, -3.1, 3.1));
    if (i % 2) l.score = UniformUnit(rng);
    labels.push_back(l);
  }
  WriteLabels(dir / "labels.txt", labels);
  const auto labels_back = ReadLabels(dir / "labels.txt");
  double label_err = labels_back.size() == labels.size() ? 0.0 : 1.0;
  for (size_t i = 0; label_err < 1.0 && i < labels.size(); ++i) {
    const KittiLabel &x = labels[i], &y = labels_back[i];
    label_err = std::max({label_err, (x.box.dims - y.box.dims).cwiseAbs().maxCoeff(),
                          (x.box.centre - y.box.centre).cwiseAbs().maxCoeff(),
                          std::abs(std::remainder(x.box.yaw - y.box.yaw, 2 * std::numbers::pi))});
    if (x.type != y.type || x.occlusion != y.occlusion || x.score.has_value() != y.score.has_value()) {
      label_err = 1.0;
    }
  }
  check(label_err <= 1e-6, "labels");

  // Boxes through the LiDAR-to-label conversion used by the generator. The
  // camera keeps the LiDAR's vertical axis, so an upright box stays upright.
  Calibration upright = calib;
  upright.lidar_to_camera = RigidTransform(
      RotationAboutVertical(0.0123) * CameraFromLidarAxes(), Vec3(-0.0041, -0.0763, -0.2718));
  double convert_err = 0.0;
  for (int i = 0; i < 300; ++i) {
    Obb3 box{Vec3(UniformIn(rng, 5, 60), UniformIn(rng, -15, 15), UniformIn(rng, -2, 0)),
             RandomVec(rng, 0.4, 5), WrapHalfPi(UniformIn(rng, -3.1, 3.1)), Frame::kLidar};
    const KittiLabel l = LabelFromLidarBox(box, "Car", upright, 0.5);
    const KittiLabel back = ParseLabelLine(FormatLabelLine(l));
    const Obb3 again = TransformBox(back.box, Invert(upright.lidar_to_camera), Frame::kLidar);
    convert_err = std::max({convert_err, (again.centre - box.centre).cwiseAbs().maxCoeff(),
                            (again.dims - box.dims).cwiseAbs().maxCoeff(),
                            std::abs(std::remainder(again.yaw - box.yaw, std::numbers::pi))});
  }
  check(convert_err <= 1e-6, "LiDAR box to label");

  PipelineConfig config;
  config.sampler.seed = 77;
  config.scorer.eta = 0.0625;
  config.scene.frames = 12;
  SaveConfig(dir / "config.json", config);
  check(ConfigToJson(LoadConfig(dir / "config.json")) == ConfigToJson(config), "config");

  fs::remove_all(dir);
  o.pass = failed.empty();
  std::string which;
  for (const auto& f : failed) which += " " + f;
  o.detail = Fmt("cloud, depth, flow, box grid, bev, poses, calibration, config bit-exact; labels "
                 "max err %.1e, LiDAR box conversion max err %.1e%s%s",
                 label_err, convert_err, failed.empty() ? "" : "; failed:", which.c_str());
  return o;
}

}  // namespace
}  // namespace pgt

int main(int argc, char** argv) {
  using Check = std::pair<const char*, std::function<pgt::Outcome()>>;
  const std::vector<Check> checks = {
      {"formula fidelity", pgt::FormulaFidelity},
      {"crop correctness", pgt::CropCorrectness},
      {"tracking oracle", pgt::TrackingOracle},
      {"box fitting", pgt::BoxFitting},
      {"end-to-end synthetic recall", pgt::EndToEndRecall},
      {"rotated IoU", pgt::RotatedIou},
      {"loss", pgt::Loss},
      {"metrics", pgt::Metrics},
      {"sampling", pgt::Sampling},
      {"I/O", pgt::Io},
  };
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (size_t i = 0; i < checks.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    pgt::Outcome outcome;
    try {
      outcome = checks[i].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    failures += !outcome.pass;
    std::printf("%s %2d %s: %s\n", outcome.pass ? "PASS" : "FAIL", id, checks[i].first,
                outcome.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
