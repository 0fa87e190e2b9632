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

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pgt/config.hpp"
#include "pgt/dataset_io.hpp"
#include "pgt/error.hpp"
#include "pgt/evaluation.hpp"
#include "pgt/geometry.hpp"
#include "pgt/loss.hpp"
#include "pgt/pipeline.hpp"
#include "pgt/scene_sim.hpp"
#include "pgt/workflow.hpp"

namespace py = pybind11;

namespace {

using Points = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<pgt::Vec3> ToPoints(const Points& array) {
  if (array.ndim() != 2 || array.shape(1) != 3) {
    throw pgt::Error(pgt::ErrorCode::kShapeMismatch, "expected an (N, 3) array");
  }
  auto a = array.unchecked<2>();
  std::vector<pgt::Vec3> out;
  out.reserve(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out.emplace_back(a(i, 0), a(i, 1), a(i, 2));
  return out;
}

py::array_t<float> CloudArray(const pgt::PointCloud& cloud) {
  py::array_t<float> out({static_cast<py::ssize_t>(cloud.points.size()), py::ssize_t{4}});
  auto a = out.mutable_unchecked<2>();
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    a(i, 0) = static_cast<float>(p.position.x());
    a(i, 1) = static_cast<float>(p.position.y());
    a(i, 2) = static_cast<float>(p.position.z());
    a(i, 3) = static_cast<float>(p.intensity);
  }
  return out;
}

pgt::PointCloud CloudFromArray(const Points& array) {
  if (array.ndim() != 2 || array.shape(1) != 4) {
    throw pgt::Error(pgt::ErrorCode::kShapeMismatch, "expected an (N, 4) array");
  }
  auto a = array.unchecked<2>();
  pgt::PointCloud cloud;
  for (py::ssize_t i = 0; i < a.shape(0); ++i) {
    cloud.points.push_back({pgt::Vec3(a(i, 0), a(i, 1), a(i, 2)), a(i, 3)});
  }
  return cloud;
}

}  // namespace

PYBIND11_MODULE(_pgt, m) {
  m.doc() = "Pseudo-ground-truth generation for mobile objects in LiDAR sequences.";

  // Kept alive for the lifetime of the interpreter.
  static py::handle error_type =
      py::exception<pgt::Error>(m, "PgtError", PyExc_RuntimeError).release();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const pgt::Error& e) {
      py::object instance = py::reinterpret_borrow<py::object>(error_type)(e.what());
      instance.attr("code") = std::string(pgt::ErrorCodeName(e.code()));
      PyErr_SetObject(error_type.ptr(), instance.ptr());
    }
  });

  py::enum_<pgt::Frame>(m, "Frame")
      .value("LIDAR", pgt::Frame::kLidar)
      .value("CAMERA", pgt::Frame::kCamera);

  py::class_<pgt::Obb3>(m, "Box")
      .def(py::init([](const pgt::Vec3& centre, const pgt::Vec3& dims, double yaw,
                       pgt::Frame frame) { return pgt::Obb3{centre, dims, yaw, frame}; }),
           py::arg("centre"), py::arg("dims"), py::arg("yaw") = 0.0,
           py::arg("frame") = pgt::Frame::kLidar)
      .def_readwrite("centre", &pgt::Obb3::centre)
      .def_readwrite("dims", &pgt::Obb3::dims, "(width, height, length)")
      .def_readwrite("yaw", &pgt::Obb3::yaw)
      .def_readwrite("frame", &pgt::Obb3::frame)
      .def("volume", &pgt::Obb3::Volume)
      .def("corners", [](const pgt::Obb3& b) {
        const auto c = b.Corners();
        return std::vector<pgt::Vec3>(c.begin(), c.end());
      })
      .def("__repr__", [](const pgt::Obb3& b) {
        return "Box(centre=(" + std::to_string(b.centre.x()) + ", " +
               std::to_string(b.centre.y()) + ", " + std::to_string(b.centre.z()) +
               "), dims=(" + std::to_string(b.dims.x()) + ", " + std::to_string(b.dims.y()) +
               ", " + std::to_string(b.dims.z()) + "), yaw=" + std::to_string(b.yaw) + ")";
      });

  m.def("rotated_iou_bev", &pgt::RotatedIouBev, py::arg("a"), py::arg("b"));
  m.def("wrap_half_pi", &pgt::WrapHalfPi, py::arg("angle"));
  m.def("fit_obb", [](const Points& points) { return pgt::FitObb(ToPoints(points)); },
        py::arg("points"), "Box around (N, 3) camera-frame points.");
  m.def("principal_axis", [](const Points& points) { return pgt::PrincipalAxis(ToPoints(points)); },
        py::arg("points"));
  m.def("moving_score", &pgt::MovingScore, py::arg("boxes"));
  m.def("inconsistency_score", &pgt::InconsistencyScore, py::arg("boxes"));
  m.def("combined_confidence",
        [](double moving, double inconsistency, double lambda1, double lambda2) {
          pgt::ScorerConfig cfg;
          cfg.lambda1 = lambda1;
          cfg.lambda2 = lambda2;
          return pgt::CombinedConfidence(moving, inconsistency, cfg);
        },
        py::arg("moving"), py::arg("inconsistency"), py::arg("lambda1") = 0.4,
        py::arg("lambda2") = 0.15);

  m.def("balanced_l1",
        [](double x, double alpha, double gamma) {
          return pgt::BalancedL1(x, pgt::LossConfig{alpha, gamma});
        },
        py::arg("x"), py::arg("alpha") = 0.5, py::arg("gamma") = 1.5);
  m.def("balanced_l1_derivative",
        [](double x, double alpha, double gamma) {
          return pgt::BalancedL1Derivative(x, pgt::LossConfig{alpha, gamma});
        },
        py::arg("x"), py::arg("alpha") = 0.5, py::arg("gamma") = 1.5);

  m.def("average_precision",
        [](const std::vector<std::pair<pgt::Obb3, double>>& detections,
           const std::vector<pgt::Obb3>& gts, double threshold) {
          std::vector<pgt::Detection> dets;
          for (const auto& [box, score] : detections) dets.push_back({box, score});
          return pgt::AveragePrecision(dets, gts, pgt::RotatedIouBev, threshold);
        },
        py::arg("detections"), py::arg("gts"), py::arg("threshold"),
        "BEV average precision; detections are (box, confidence) pairs.");

  m.def("read_cloud", [](const std::filesystem::path& p) { return CloudArray(pgt::ReadCloud(p)); },
        py::arg("path"), "(N, 4) float32 array of x, y, z, intensity.");
  m.def("write_cloud",
        [](const std::filesystem::path& p, const Points& a) { pgt::WriteCloud(p, CloudFromArray(a)); },
        py::arg("path"), py::arg("points"));

  m.def("default_config", [] { return pgt::ConfigToJson(pgt::PipelineConfig{}); },
        "Default configuration as JSON text.");
  m.def("simulate",
        [](const std::filesystem::path& out, uint64_t seed, const std::string& config_json) {
          const pgt::PipelineConfig cfg =
              config_json.empty() ? pgt::PipelineConfig{} : pgt::ConfigFromJson(config_json);
          py::gil_scoped_release release;
          pgt::WriteScene(pgt::MakeScene(cfg.scene, seed), out);
        },
        py::arg("out"), py::arg("seed") = 7, py::arg("config_json") = "",
        "Writes a synthetic sequence directory.");
  m.def("generate",
        [](const std::filesystem::path& sequence, const std::filesystem::path& out,
           std::optional<uint64_t> seed, int jobs, const std::string& config_json) {
          pgt::PipelineConfig cfg =
              config_json.empty() ? pgt::PipelineConfig{} : pgt::ConfigFromJson(config_json);
          if (seed) cfg.sampler.seed = *seed;
          py::gil_scoped_release release;
          const auto seq = pgt::OpenSequence(sequence);
          const auto results = pgt::GenerateSequence(seq, cfg, std::nullopt, jobs);
          pgt::WriteGenerated(results, cfg, seq.calib, out);
          size_t positives = 0, negatives = 0;
          for (const auto& r : results) {
            positives += r.labels.positives.size();
            negatives += r.labels.negatives.size();
          }
          return std::make_tuple(results.size(), positives, negatives);
        },
        py::arg("sequence"), py::arg("out"), py::arg("seed") = std::nullopt, py::arg("jobs") = 1,
        py::arg("config_json") = "",
        "Pseudo-labels for a sequence with heuristic proposals. Returns (frames, U+, U-).");
}
