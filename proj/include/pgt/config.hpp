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
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "pgt/bev_grid.hpp"
#include "pgt/loss.hpp"
#include "pgt/pipeline.hpp"
#include "pgt/proposal.hpp"
#include "pgt/sampler.hpp"
#include "pgt/scene_sim.hpp"

namespace pgt {

/// Every tunable constant of the tools in one place. A config file may set any
/// subset; the rest keep these defaults.
struct PipelineConfig {
  GridSpec grid;
  SamplerConfig sampler;
  ScorerConfig scorer;
  TrackerConfig tracker;
  std::vector<Anchor> anchors = DefaultAnchors();
  LossConfig loss;
  HeuristicConfig proposals;
  SceneConfig scene = DefaultSceneConfig();

  /// Throws Error(kConfigInvalid).
  void Validate() const;
};

/// JSON text of the whole configuration, keys in a fixed order.
std::string ConfigToJson(const PipelineConfig& config);
/// Overlays `text` on the defaults. Unknown keys, wrong types and values that
/// fail validation throw Error(kConfigInvalid).
PipelineConfig ConfigFromJson(const std::string& text);

/// Throws Error(kIoError) or Error(kConfigInvalid).
PipelineConfig LoadConfig(const std::filesystem::path& path);
void SaveConfig(const std::filesystem::path& path, const PipelineConfig& config);

}  // namespace pgt
