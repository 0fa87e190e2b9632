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
#include "pgt/config.hpp"

#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pgt/error.hpp"

namespace pgt {
namespace {

using Json = nlohmann::ordered_json;

[[noreturn]] void Invalid(const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, what);
}

// Rejects keys outside `allowed` so that typos do not silently fall back to
// defaults.
void CheckKeys(const Json& j, const std::string& where,
               std::initializer_list<const char*> allowed) {
  if (!j.is_object()) Invalid(where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) Invalid("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void Get(const Json& j, const char* key, const std::string& where, T* out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    if constexpr (std::is_same_v<T, double>) {
      if (!it->is_number()) throw std::invalid_argument("number");
    } else if constexpr (std::is_same_v<T, int> || std::is_same_v<T, uint64_t>) {
      if (!it->is_number_integer()) throw std::invalid_argument("integer");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!it->is_boolean()) throw std::invalid_argument("boolean");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!it->is_string()) throw std::invalid_argument("string");
    }
    *out = it->get<T>();
  } catch (const std::exception& e) {
    Invalid(where + "." + key + " must be a " + e.what());
  }
}

std::vector<double> Numbers(const Json& j, const std::string& where, size_t n) {
  if (!j.is_array() || j.size() != n) {
    Invalid(where + " must be an array of " + std::to_string(n) + " numbers");
  }
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) Invalid(where + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

void GetRange(const Json& j, const char* key, const std::string& where, Range* out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  const auto v = Numbers(*it, where + "." + key, 2);
  *out = {v[0], v[1]};
}

void GetVec3(const Json& j, const char* key, const std::string& where, Vec3* out) {
  auto it = j.find(key);
  if (it == j.end()) return;
  const auto v = Numbers(*it, where + "." + key, 3);
  *out = {v[0], v[1], v[2]};
}

Json RangeJson(const Range& r) { return Json::array({r.min, r.max}); }
Json Vec3Json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

std::string ClassKey(ObjectClass c) {
  switch (c) {
    case ObjectClass::kPedestrian: return "pedestrian";
    case ObjectClass::kCyclist: return "cyclist";
    case ObjectClass::kVehicle: return "vehicle";
  }
  return "vehicle";
}

ObjectClass ClassFromKey(const std::string& key) {
  if (key == "pedestrian") return ObjectClass::kPedestrian;
  if (key == "cyclist") return ObjectClass::kCyclist;
  if (key == "vehicle") return ObjectClass::kVehicle;
  Invalid("unknown object class '" + key + "'");
}

Json SceneJson(const SceneConfig& s) {
  Json objects = Json::array();
  for (const auto& o : s.objects) {
    objects.push_back({{"class", ClassKey(o.cls)},
                       {"dims", Vec3Json(o.dims)},
                       {"pose", Json::array({o.pose0.x, o.pose0.z, o.pose0.yaw})},
                       {"ground_offset", o.ground_offset},
                       {"velocity", Json::array({o.velocity.x(), o.velocity.y()})},
                       {"yaw_rate", o.yaw_rate},
                       {"density", o.density}});
  }
  const auto& k = s.intrinsics;
  return {{"frames", s.frames},
          {"horizon", s.horizon},
          {"intrinsics",
           {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy},
            {"width", k.width}, {"height", k.height}}},
          {"sensor_height", s.sensor_height},
          {"ego", {{"forward", s.ego.forward}, {"lateral", s.ego.lateral},
                   {"yaw_rate", s.ego.yaw_rate}}},
          {"ground_x", RangeJson(s.ground_x)},
          {"ground_z", RangeJson(s.ground_z)},
          {"ground_density", s.ground_density},
          {"visibility", s.visibility == Visibility::kFrontFaces ? "front_faces" : "all_faces"},
          {"one_return_per_pixel", s.one_return_per_pixel},
          {"intensity", Json::array({s.intensity_min, s.intensity_max})},
          {"objects", objects}};
}

void ReadScene(const Json& j, SceneConfig* s) {
  const std::string w = "scene";
  CheckKeys(j, w, {"frames", "horizon", "intrinsics", "sensor_height", "ego", "ground_x",
                   "ground_z", "ground_density", "visibility", "one_return_per_pixel",
                   "intensity", "objects"});
  Get(j, "frames", w, &s->frames);
  Get(j, "horizon", w, &s->horizon);
  if (auto it = j.find("intrinsics"); it != j.end()) {
    const std::string wi = w + ".intrinsics";
    CheckKeys(*it, wi, {"fx", "fy", "cx", "cy", "width", "height"});
    auto& k = s->intrinsics;
    Get(*it, "fx", wi, &k.fx);
    Get(*it, "fy", wi, &k.fy);
    Get(*it, "cx", wi, &k.cx);
    Get(*it, "cy", wi, &k.cy);
    Get(*it, "width", wi, &k.width);
    Get(*it, "height", wi, &k.height);
  }
  Get(j, "sensor_height", w, &s->sensor_height);
  if (auto it = j.find("ego"); it != j.end()) {
    CheckKeys(*it, w + ".ego", {"forward", "lateral", "yaw_rate"});
    Get(*it, "forward", w + ".ego", &s->ego.forward);
    Get(*it, "lateral", w + ".ego", &s->ego.lateral);
    Get(*it, "yaw_rate", w + ".ego", &s->ego.yaw_rate);
  }
  GetRange(j, "ground_x", w, &s->ground_x);
  GetRange(j, "ground_z", w, &s->ground_z);
  Get(j, "ground_density", w, &s->ground_density);
  std::string visibility;
  Get(j, "visibility", w, &visibility);
  if (visibility == "front_faces") {
    s->visibility = Visibility::kFrontFaces;
  } else if (visibility == "all_faces") {
    s->visibility = Visibility::kAllFaces;
  } else if (!visibility.empty()) {
    Invalid("scene.visibility must be front_faces or all_faces");
  }
  Get(j, "one_return_per_pixel", w, &s->one_return_per_pixel);
  if (auto it = j.find("intensity"); it != j.end()) {
    const auto v = Numbers(*it, w + ".intensity", 2);
    s->intensity_min = v[0];
    s->intensity_max = v[1];
  }
  if (auto it = j.find("objects"); it != j.end()) {
    if (!it->is_array()) Invalid("scene.objects must be an array");
    s->objects.clear();
    for (size_t i = 0; i < it->size(); ++i) {
      const Json& o = (*it)[i];
      const std::string wo = w + ".objects[" + std::to_string(i) + "]";
      CheckKeys(o, wo, {"class", "dims", "pose", "ground_offset", "velocity", "yaw_rate",
                        "density"});
      SimObject obj;
      std::string cls = "vehicle";
      Get(o, "class", wo, &cls);
      obj.cls = ClassFromKey(cls);
      obj.dims = NominalDims(obj.cls);
      GetVec3(o, "dims", wo, &obj.dims);
      if (auto p = o.find("pose"); p != o.end()) {
        const auto v = Numbers(*p, wo + ".pose", 3);
        obj.pose0 = {v[0], v[1], v[2]};
      }
      Get(o, "ground_offset", wo, &obj.ground_offset);
      if (auto v = o.find("velocity"); v != o.end()) {
        const auto n = Numbers(*v, wo + ".velocity", 2);
        obj.velocity = {n[0], n[1]};
      }
      Get(o, "yaw_rate", wo, &obj.yaw_rate);
      Get(o, "density", wo, &obj.density);
      s->objects.push_back(obj);
    }
  }
}

}  // namespace

void PipelineConfig::Validate() const {
  grid.Validate();
  sampler.Validate();
  scorer.Validate();
  tracker.Validate();
  loss.Validate();
  scene.Validate();
  if (anchors.empty()) Invalid("at least one anchor is required");
  std::set<std::string> names;
  for (const auto& a : anchors) {
    if (a.name.empty()) Invalid("anchor names must not be empty");
    if (!names.insert(a.name).second) Invalid("duplicate anchor '" + a.name + "'");
    if (!(a.dims.minCoeff() > 0.0) || !a.dims.allFinite()) {
      Invalid("anchor '" + a.name + "' needs positive dims");
    }
  }
  if (!(proposals.ground_margin >= 0.0) || !(proposals.min_extent > 0.0)) {
    Invalid("proposals need ground_margin >= 0 and min_extent > 0");
  }
}

std::string ConfigToJson(const PipelineConfig& c) {
  Json anchors = Json::array();
  for (const auto& a : c.anchors) anchors.push_back({{"name", a.name}, {"dims", Vec3Json(a.dims)}});
  const Json j = {
      {"grid", {{"x", RangeJson(c.grid.x)}, {"y", RangeJson(c.grid.y)},
                {"z", RangeJson(c.grid.z)}, {"height", c.grid.height},
                {"width", c.grid.width}, {"stride", c.grid.stride}}},
      {"sampler", {{"tau", c.sampler.tau}, {"n_total", c.sampler.n_total},
                   {"seed", c.sampler.seed}}},
      {"scorer", {{"eta", c.scorer.eta}, {"lambda1", c.scorer.lambda1},
                  {"lambda2", c.scorer.lambda2}, {"horizon", c.scorer.horizon}}},
      {"tracker", {{"search_radius", c.tracker.search_radius}}},
      {"anchors", anchors},
      {"loss", {{"alpha", c.loss.alpha}, {"gamma", c.loss.gamma}}},
      {"proposals", {{"ground_margin", c.proposals.ground_margin},
                     {"min_extent", c.proposals.min_extent}}},
      {"scene", SceneJson(c.scene)},
  };
  return j.dump(2) + "\n";
}

PipelineConfig ConfigFromJson(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    Invalid(std::string("config is not valid JSON: ") + e.what());
  }
  CheckKeys(j, "config",
            {"grid", "sampler", "scorer", "tracker", "anchors", "loss", "proposals", "scene"});
  PipelineConfig c;
  if (auto it = j.find("grid"); it != j.end()) {
    CheckKeys(*it, "grid", {"x", "y", "z", "height", "width", "stride"});
    GetRange(*it, "x", "grid", &c.grid.x);
    GetRange(*it, "y", "grid", &c.grid.y);
    GetRange(*it, "z", "grid", &c.grid.z);
    Get(*it, "height", "grid", &c.grid.height);
    Get(*it, "width", "grid", &c.grid.width);
    Get(*it, "stride", "grid", &c.grid.stride);
  }
  if (auto it = j.find("sampler"); it != j.end()) {
    CheckKeys(*it, "sampler", {"tau", "n_total", "seed"});
    Get(*it, "tau", "sampler", &c.sampler.tau);
    Get(*it, "n_total", "sampler", &c.sampler.n_total);
    Get(*it, "seed", "sampler", &c.sampler.seed);
  }
  if (auto it = j.find("scorer"); it != j.end()) {
    CheckKeys(*it, "scorer", {"eta", "lambda1", "lambda2", "horizon"});
    Get(*it, "eta", "scorer", &c.scorer.eta);
    Get(*it, "lambda1", "scorer", &c.scorer.lambda1);
    Get(*it, "lambda2", "scorer", &c.scorer.lambda2);
    Get(*it, "horizon", "scorer", &c.scorer.horizon);
  }
  if (auto it = j.find("tracker"); it != j.end()) {
    CheckKeys(*it, "tracker", {"search_radius"});
    Get(*it, "search_radius", "tracker", &c.tracker.search_radius);
  }
  if (auto it = j.find("anchors"); it != j.end()) {
    if (!it->is_array()) Invalid("anchors must be an array");
    c.anchors.clear();
    for (size_t i = 0; i < it->size(); ++i) {
      const std::string w = "anchors[" + std::to_string(i) + "]";
      CheckKeys((*it)[i], w, {"name", "dims"});
      Anchor a;
      Get((*it)[i], "name", w, &a.name);
      GetVec3((*it)[i], "dims", w, &a.dims);
      c.anchors.push_back(a);
    }
  }
  if (auto it = j.find("loss"); it != j.end()) {
    CheckKeys(*it, "loss", {"alpha", "gamma"});
    Get(*it, "alpha", "loss", &c.loss.alpha);
    Get(*it, "gamma", "loss", &c.loss.gamma);
  }
  if (auto it = j.find("proposals"); it != j.end()) {
    CheckKeys(*it, "proposals", {"ground_margin", "min_extent"});
    Get(*it, "ground_margin", "proposals", &c.proposals.ground_margin);
    Get(*it, "min_extent", "proposals", &c.proposals.min_extent);
  }
  if (auto it = j.find("scene"); it != j.end()) ReadScene(*it, &c.scene);
  c.Validate();
  return c;
}

PipelineConfig LoadConfig(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return ConfigFromJson(text.str());
}

void SaveConfig(const std::filesystem::path& path, const PipelineConfig& config) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write config " + path.string());
  out << ConfigToJson(config);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace pgt
