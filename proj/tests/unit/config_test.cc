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
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "pgt/config.hpp"
#include "pgt/error.hpp"

namespace pgt {
namespace {

ErrorCode CodeOf(const std::string& text) {
  try {
    ConfigFromJson(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kIoError;
}

TEST(ConfigTest, DefaultsRoundTrip) {
  const PipelineConfig defaults;
  EXPECT_NO_THROW(defaults.Validate());
  const std::string text = ConfigToJson(defaults);
  EXPECT_EQ(ConfigToJson(ConfigFromJson(text)), text);
  EXPECT_EQ(ConfigToJson(ConfigFromJson("{}")), text);
}

TEST(ConfigTest, PartialOverlay) {
  const PipelineConfig c = ConfigFromJson(R"({
    "sampler": {"tau": 0.1, "seed": 9},
    "scorer": {"horizon": 2},
    "anchors": [{"name": "box", "dims": [1, 2, 3]}],
    "scene": {"frames": 6, "visibility": "all_faces"}
  })");
  EXPECT_EQ(c.sampler.tau, 0.1);
  EXPECT_EQ(c.sampler.seed, 9u);
  EXPECT_EQ(c.sampler.n_total, 60);
  EXPECT_EQ(c.scorer.horizon, 2);
  EXPECT_EQ(c.scorer.eta, 0.08);
  ASSERT_EQ(c.anchors.size(), 1u);
  EXPECT_EQ(c.anchors[0].dims, Vec3(1, 2, 3));
  EXPECT_EQ(c.scene.frames, 6);
  EXPECT_EQ(c.scene.visibility, Visibility::kAllFaces);
  EXPECT_EQ(c.scene.objects.size(), DefaultSceneConfig().objects.size());
  EXPECT_EQ(c.grid.height, 608);
}

TEST(ConfigTest, Rejections) {
  EXPECT_EQ(CodeOf("not json"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf("[]"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"samplr": {}})"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"sampler": {"tau": "high"}})"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"sampler": {"n_total": 61}})"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"grid": {"stride": 5}})"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"anchors": [{"name": "x", "dims": [1, 0, 1]}]})"),
            ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"loss": {"alpha": 0}})"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"scene": {"visibility": "some"}})"), ErrorCode::kConfigInvalid);
  EXPECT_EQ(CodeOf(R"({"scene": {"objects": [{"class": "boat"}]}})"), ErrorCode::kConfigInvalid);
}

TEST(ConfigTest, FileRoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "pgt_config_test";
  std::filesystem::create_directories(dir);
  PipelineConfig c;
  c.scorer.eta = 0.1;
  c.tracker.search_radius = 5;
  SaveConfig(dir / "c.json", c);
  const PipelineConfig back = LoadConfig(dir / "c.json");
  EXPECT_EQ(back.scorer.eta, 0.1);
  EXPECT_EQ(back.tracker.search_radius, 5);
  EXPECT_EQ(ConfigToJson(back), ConfigToJson(c));
  try {
    LoadConfig(dir / "missing.json");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIoError);
  }
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pgt
