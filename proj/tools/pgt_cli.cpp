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
// Command-line front end: simulate, generate, evaluate, evaluate-loss,
// render, rasterize and config.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pgt/config.hpp"
#include "pgt/dataset_io.hpp"
#include "pgt/error.hpp"
#include "pgt/evaluation.hpp"
#include "pgt/loss.hpp"
#include "pgt/proposal.hpp"
#include "pgt/sampler.hpp"
#include "pgt/workflow.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitInternal = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

pgt::PipelineConfig LoadOrDefault(const std::string& path) {
  return path.empty() ? pgt::PipelineConfig{} : pgt::LoadConfig(path);
}

void RequireDistinct(const fs::path& input, const fs::path& output) {
  std::error_code ec;
  if (fs::exists(output) && fs::equivalent(input, output, ec)) {
    throw UsageError("output directory must differ from the input " + input.string());
  }
}

std::string Fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

// "lo:hi:step" or a single value.
std::vector<double> ParseIou(const std::string& text) {
  std::vector<double> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) {
    try {
      size_t used = 0;
      parts.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad --iou value '" + text + "'");
    }
  }
  if (parts.size() == 1) return pgt::ThresholdRange(parts[0], parts[0], 1.0);
  if (parts.size() == 3) return pgt::ThresholdRange(parts[0], parts[1], parts[2]);
  throw UsageError("--iou expects lo:hi:step or a single value");
}

struct SimulateArgs {
  std::string config;
  std::string out;
  uint64_t seed = 0;
};

int Simulate(const SimulateArgs& a) {
  const auto config = LoadOrDefault(a.config);
  const auto scene = pgt::MakeScene(config.scene, a.seed);
  pgt::WriteScene(scene, a.out);
  int moving = 0;
  for (const auto& o : config.scene.objects) moving += o.IsMoving() ? 1 : 0;
  std::cout << "simulated " << scene.frames.size() << " frames, " << config.scene.objects.size()
            << " objects (" << moving << " moving) -> " << a.out << "\n";
  return 0;
}

struct GenerateArgs {
  std::string sequence;
  std::string out;
  std::string proposals = "heuristic";
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<double> tau;
  std::optional<double> eta;
  std::optional<int> horizon;
  int jobs = 0;
};

int Generate(const GenerateArgs& a) {
  auto config = LoadOrDefault(a.config);
  if (a.seed) config.sampler.seed = *a.seed;
  if (a.tau) config.sampler.tau = *a.tau;
  if (a.eta) config.scorer.eta = *a.eta;
  if (a.horizon) config.scorer.horizon = *a.horizon;
  config.Validate();
  RequireDistinct(a.sequence, a.out);
  const auto seq = pgt::OpenSequence(a.sequence);
  std::optional<fs::path> proposals;
  if (a.proposals.rfind("file:", 0) == 0) {
    proposals = fs::path(a.proposals.substr(5));
  } else if (a.proposals != "heuristic") {
    throw UsageError("--proposals expects 'heuristic' or 'file:<dir>'");
  }
  const auto results = pgt::GenerateSequence(seq, config, proposals, a.jobs);
  pgt::WriteGenerated(results, config, seq.calib, a.out);

  size_t positives = 0;
  size_t negatives = 0;
  double kappa_sum = 0.0;
  for (const auto& r : results) {
    positives += r.labels.positives.size();
    negatives += r.labels.negatives.size();
    for (const auto& p : r.labels.positives) kappa_sum += p.target;
  }
  const double mean = positives ? kappa_sum / static_cast<double>(positives) : 0.0;
  std::cout << "frames " << results.size() << "  U+ " << positives << "  U- " << negatives
            << "  mean_kappa " << Fixed(mean) << "\n";
  return 0;
}

struct EvaluateArgs {
  std::string dets;
  std::string gt;
  std::string calib;
  std::string mode = "bev";
  std::string iou = "0.1:0.7:0.1";
  std::string json;
};

int Evaluate(const EvaluateArgs& a) {
  const auto mode = pgt::ParseEvalMode(a.mode);
  const auto thresholds = ParseIou(a.iou);
  fs::path calib = a.calib;
  if (calib.empty()) calib = fs::path(a.gt).parent_path() / "calib.txt";
  const auto metrics = pgt::EvaluateSequence(a.dets, a.gt, calib, mode, thresholds);
  std::cout << pgt::FormatMetricsTable(metrics);
  if (!a.json.empty()) {
    nlohmann::ordered_json j;
    j["mode"] = pgt::EvalModeName(metrics.mode);
    j["frames"] = metrics.frames;
    j["detections"] = metrics.detections;
    j["ground_truth"] = metrics.gts;
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : metrics.rows) {
      j["rows"].push_back({{"iou", row.threshold}, {"map", row.map}, {"accuracy", row.accuracy}});
    }
    std::ofstream out(a.json, std::ios::binary);
    out << j.dump(2) << "\n";
    if (!out) throw pgt::Error(pgt::ErrorCode::kIoError, "write failed for " + a.json);
  }
  return 0;
}

struct LossArgs {
  std::string pseudo;
  std::string predictions = "heuristic";
  std::string sequence;
  std::string config;
};

int EvaluateLoss(const LossArgs& a) {
  const auto config = LoadOrDefault(a.config);
  const fs::path diag_dir = fs::path(a.pseudo) / "diagnostics";
  if (!fs::is_directory(diag_dir)) {
    throw pgt::Error(pgt::ErrorCode::kIoError, diag_dir.string() + " is not a directory");
  }
  std::optional<pgt::SequenceIndex> seq;
  if (a.predictions == "heuristic") {
    if (a.sequence.empty()) throw UsageError("--predictions heuristic needs --sequence");
    seq = pgt::OpenSequence(a.sequence);
  }
  std::set<fs::path> files;
  for (const auto& e : fs::directory_iterator(diag_dir)) {
    if (e.path().extension() == ".json") files.insert(e.path());
  }
  pgt::LossBreakdown total;
  for (const auto& file : files) {
    const std::string stem = file.stem().string();
    std::vector<pgt::PseudoLabel> positives;
    std::vector<pgt::NegativeLabel> negatives;
    pgt::ReadDiagnostics(file, &positives, &negatives);
    pgt::BoxGrid grid;
    if (seq) {
      int frame = -1;
      try {
        frame = std::stoi(stem);
      } catch (const std::exception&) {
        throw pgt::Error(pgt::ErrorCode::kMalformedFile, "non-numeric frame " + file.string());
      }
      if (frame < 0 || frame >= seq->frame_count) {
        throw pgt::Error(pgt::ErrorCode::kMissingFrameData, "no frame " + stem + " in sequence");
      }
      grid = pgt::HeuristicGrid(pgt::ReadCloud(seq->CloudPath(frame)), config.grid,
                                config.proposals);
    } else {
      grid = pgt::GridFromFile(fs::path(a.predictions) / (stem + ".bin"), config.grid);
    }
    const auto loss = pgt::FrameLoss(grid, positives, negatives, config.grid, config.loss);
    std::cout << "frame " << stem << "  total " << Fixed(loss.Total(), 6) << "  centre "
              << Fixed(loss.centre, 6) << "  dims " << Fixed(loss.dims, 6) << "  yaw "
              << Fixed(loss.yaw, 6) << "  conf_pos " << Fixed(loss.positive_confidence, 6)
              << "  conf_neg " << Fixed(loss.negative_confidence, 6) << "  U+ "
              << loss.positives << "  U- " << loss.negatives << "\n";
    total.centre += loss.centre;
    total.dims += loss.dims;
    total.yaw += loss.yaw;
    total.positive_confidence += loss.positive_confidence;
    total.negative_confidence += loss.negative_confidence;
    total.positives += loss.positives;
    total.negatives += loss.negatives;
  }
  std::cout << "all    total " << Fixed(total.Total(), 6) << "  centre " << Fixed(total.centre, 6)
            << "  dims " << Fixed(total.dims, 6) << "  yaw " << Fixed(total.yaw, 6)
            << "  conf_pos " << Fixed(total.positive_confidence, 6) << "  conf_neg "
            << Fixed(total.negative_confidence, 6) << "  U+ " << total.positives << "  U- "
            << total.negatives << "\n";
  return 0;
}

struct RenderArgs {
  std::string sequence;
  int frame = 0;
  std::vector<std::string> overlays;
  std::string pseudo;
  std::string config;
  std::string out;
};

int Render(const RenderArgs& a) {
  const auto config = LoadOrDefault(a.config);
  const auto seq = pgt::OpenSequence(a.sequence);
  if (a.frame < 0 || a.frame >= seq.frame_count) {
    throw pgt::Error(pgt::ErrorCode::kMissingFrameData,
                     "frame " + std::to_string(a.frame) + " not in sequence");
  }
  const auto cloud = pgt::ReadCloud(seq.CloudPath(a.frame));
  auto image = pgt::RenderBev(cloud, config.grid);
  const pgt::RigidTransform camera_to_lidar = pgt::Invert(seq.calib.lidar_to_camera);
  for (const auto& overlay : a.overlays) {
    if (overlay == "proposals") {
      const auto grid = pgt::HeuristicGrid(cloud, config.grid, config.proposals);
      for (const auto& u : pgt::PartitionPixels(grid, config.sampler.tau).high) {
        pgt::DrawBox(&image, pgt::DecodeBox(u, grid.at(u), config.grid), config.grid,
                     {70, 130, 255});
      }
    } else if (overlay == "gt") {
      if (!seq.has_labels) {
        throw pgt::Error(pgt::ErrorCode::kMissingFrameData, "sequence has no label_2");
      }
      for (const auto& label : pgt::ReadLabels(seq.LabelPath(a.frame))) {
        pgt::DrawBox(&image, pgt::TransformBox(label.box, camera_to_lidar, pgt::Frame::kLidar),
                     config.grid, {60, 220, 60});
      }
    } else if (overlay == "pseudo") {
      if (a.pseudo.empty()) throw UsageError("the pseudo overlay needs --pseudo");
      std::vector<pgt::PseudoLabel> positives;
      std::vector<pgt::NegativeLabel> negatives;
      pgt::ReadDiagnostics(fs::path(a.pseudo) / "diagnostics" /
                               (pgt::SequenceIndex::FrameName(a.frame) + ".json"),
                           &positives, &negatives);
      for (const auto& p : positives) pgt::DrawBox(&image, p.box, config.grid, {240, 60, 60});
    } else {
      throw UsageError("unknown overlay '" + overlay + "'");
    }
  }
  pgt::WritePpm(a.out, image);
  std::cout << "wrote " << image.width << "x" << image.height << " image -> " << a.out << "\n";
  return 0;
}

int Rasterize(const std::string& cloud_path, const std::string& out, const std::string& cfg) {
  const auto config = LoadOrDefault(cfg);
  const auto cloud = pgt::ReadCloud(cloud_path);
  pgt::WriteBevImage(out, pgt::Rasterize(cloud, config.grid));
  std::cout << "rasterized " << cloud.points.size() << " points -> " << out << "\n";
  return 0;
}

int Config(const std::string& out, const std::string& check) {
  if (!check.empty()) {
    pgt::LoadConfig(check);
    std::cout << check << ": ok\n";
    return 0;
  }
  const std::string text = pgt::ConfigToJson(pgt::PipelineConfig{});
  if (out.empty()) {
    std::cout << text;
  } else {
    pgt::SaveConfig(out, pgt::PipelineConfig{});
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pseudo-ground-truth generation for mobile object discovery from LiDAR."};
  app.require_subcommand(1);
  app.set_version_flag("--version", "pgt 0.1.0");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Write a synthetic sequence");
  simulate->add_option("--out", sim.out, "Output sequence directory")->required();
  simulate->add_option("--seed", sim.seed, "Scene seed")->capture_default_str();
  simulate->add_option("--config", sim.config, "Config file (scene section)");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate pseudo-labels for a sequence");
  generate->add_option("--sequence", gen.sequence, "Input sequence directory")->required();
  generate->add_option("--out", gen.out, "Output directory")->required();
  generate->add_option("--proposals", gen.proposals,
                       "'heuristic' or file:<dir> holding NNNNNN.bin box grids")
      ->capture_default_str();
  generate->add_option("--config", gen.config, "Config file");
  generate->add_option("--seed", gen.seed, "Sampler seed (overrides config)");
  generate->add_option("--tau", gen.tau, "Hi/Lo confidence split (overrides config)");
  generate->add_option("--eta", gen.eta, "Anchor acceptance threshold (overrides config)");
  generate->add_option("--horizon", gen.horizon, "Tracking horizon K (overrides config)");
  generate->add_option("--jobs", gen.jobs, "Worker threads, 0 = all cores")
      ->capture_default_str();

  EvaluateArgs ev;
  auto* evaluate = app.add_subcommand("evaluate", "Score detections against ground truth");
  evaluate->add_option("--dets", ev.dets, "Directory of KITTI label files with scores")
      ->required();
  evaluate->add_option("--gt", ev.gt, "Directory of ground-truth KITTI label files")->required();
  evaluate->add_option("--calib", ev.calib, "Calibration file (default: <gt>/../calib.txt)");
  evaluate->add_option("--mode", ev.mode, "bev or 2d")->capture_default_str();
  evaluate->add_option("--iou", ev.iou, "IoU thresholds lo:hi:step")->capture_default_str();
  evaluate->add_option("--json", ev.json, "Also write the metrics as JSON");

  LossArgs la;
  auto* loss = app.add_subcommand("evaluate-loss", "Per-frame training loss of predictions");
  loss->add_option("--pseudo", la.pseudo, "Output directory of generate")->required();
  loss->add_option("--predictions", la.predictions,
                   "'heuristic' or file:<dir> holding NNNNNN.bin box grids")
      ->capture_default_str();
  loss->add_option("--sequence", la.sequence, "Sequence directory (heuristic predictions)");
  loss->add_option("--config", la.config, "Config file");

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Draw a BEV image with box overlays");
  render->add_option("--sequence", ra.sequence, "Sequence directory")->required();
  render->add_option("--frame", ra.frame, "Frame index")->capture_default_str();
  render->add_option("--overlay", ra.overlays, "gt, pseudo and/or proposals")->delimiter(',');
  render->add_option("--pseudo", ra.pseudo, "Output directory of generate");
  render->add_option("--config", ra.config, "Config file");
  render->add_option("--out", ra.out, "Output .ppm file")->required();

  std::string cloud_path;
  std::string raster_out;
  std::string raster_cfg;
  auto* rasterize = app.add_subcommand("rasterize", "Write the BEV raster of one cloud");
  rasterize->add_option("--cloud", cloud_path, "Velodyne .bin file")->required();
  rasterize->add_option("--out", raster_out, "Output .bin (plus .json sidecar)")->required();
  rasterize->add_option("--config", raster_cfg, "Config file (grid section)");

  std::string config_out;
  std::string config_check;
  auto* config = app.add_subcommand("config", "Print the default config or check a file");
  config->add_option("--out", config_out, "Write the defaults here instead of stdout");
  config->add_option("--check", config_check, "Validate this config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (*simulate) return Simulate(sim);
    if (*generate) return Generate(gen);
    if (*evaluate) return Evaluate(ev);
    if (*loss) return EvaluateLoss(la);
    if (*render) return Render(ra);
    if (*rasterize) return Rasterize(cloud_path, raster_out, raster_cfg);
    if (*config) return Config(config_out, config_check);
  } catch (const UsageError& e) {
    std::cerr << "pgt: " << e.what() << "\n";
    return kExitUsage;
  } catch (const pgt::Error& e) {
    std::cerr << "pgt: " << e.what() << "\n";
    return e.code() == pgt::ErrorCode::kConfigInvalid ? kExitUsage : kExitData;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "pgt: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "pgt: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
