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
#include "pgt/dataset_io.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pgt/error.hpp"

namespace pgt {

namespace {

using json = nlohmann::json;

constexpr double kPoseRepairTolerance = 1e-6;
constexpr double kPoseRejectTolerance = 1e-3;

std::string ReadBytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorCode::kIoError, "failed reading " + path.string());
  return bytes;
}

void WriteBytes(const fs::path& path, const std::string& bytes) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "failed writing " + path.string());
}

void AppendFloat(std::string& out, float v) {
  const auto bits = std::bit_cast<uint32_t>(v);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

float FloatAt(const std::string& bytes, size_t index) {
  uint32_t bits = 0;
  for (int i = 0; i < 4; ++i) {
    bits |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[index * 4 + i])) << (8 * i);
  }
  return std::bit_cast<float>(bits);
}

std::string EncodeFloats(const std::vector<float>& values) {
  std::string out;
  out.reserve(values.size() * 4);
  for (float v : values) AppendFloat(out, v);
  return out;
}

std::vector<float> DecodeFloats(const std::string& bytes) {
  std::vector<float> out(bytes.size() / 4);
  for (size_t i = 0; i < out.size(); ++i) out[i] = FloatAt(bytes, i);
  return out;
}

std::string FormatDouble(double v) {
  std::array<char, 32> buf;
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

bool ParseDouble(std::string_view token, double* out) {
  // from_chars rejects a leading '+', which some writers emit.
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto res = std::from_chars(token.data(), token.data() + token.size(), *out);
  return res.ec == std::errc() && res.ptr == token.data() + token.size();
}

std::vector<std::string> SplitWhitespace(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::vector<double> ParseNumbers(const std::vector<std::string>& tokens, size_t first,
                                 const std::string& context) {
  std::vector<double> out;
  for (size_t i = first; i < tokens.size(); ++i) {
    double v;
    if (!ParseDouble(tokens[i], &v) || !std::isfinite(v)) {
      throw Error(ErrorCode::kMalformedLine, context + ": bad number '" + tokens[i] + "'");
    }
    out.push_back(v);
  }
  return out;
}

Mat3 NearestRotation(const Mat3& m) {
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3 v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0) u.col(2) *= -1.0;
  return u * v.transpose();
}

RigidTransform TransformFrom12(const std::vector<double>& v) {
  Mat3 r;
  r << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
  return RigidTransform(r, Vec3(v[3], v[7], v[11]));
}

std::string Format12(const RigidTransform& t) {
  std::string line;
  for (int row = 0; row < 3; ++row) {
    for (int col = 0; col < 4; ++col) {
      if (!line.empty()) line += ' ';
      line += FormatDouble(col < 3 ? t.rotation()(row, col) : t.translation()(row));
    }
  }
  return line;
}

// Reads a float32 payload, checking it against its sidecar.
std::vector<float> ReadGridPayload(const fs::path& path, const std::string& kind,
                                   int channels, GridHeader* header_out) {
  const GridHeader header = ReadGridHeader(path);
  if (header.kind != kind) {
    throw Error(ErrorCode::kMalformedFile,
                path.string() + ": sidecar kind '" + header.kind + "', expected '" + kind + "'");
  }
  if (header.channels != channels) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": unexpected channel count");
  }
  const std::string bytes = ReadBytes(path);
  const size_t expected =
      static_cast<size_t>(header.rows) * header.cols * header.channels * sizeof(float);
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kMalformedFile,
                path.string() + ": payload has " + std::to_string(bytes.size()) +
                    " bytes, sidecar implies " + std::to_string(expected));
  }
  *header_out = header;
  return DecodeFloats(bytes);
}

}  // namespace

fs::path SidecarPath(const fs::path& payload) {
  fs::path p = payload;
  return p.replace_extension(".json");
}

void WriteGridHeader(const fs::path& payload, const GridHeader& header) {
  json j;
  j["kind"] = header.kind;
  j["rows"] = header.rows;
  j["cols"] = header.cols;
  j["channels"] = header.channels;
  j["dtype"] = "float32";
  j["byte_order"] = "little";
  j["layout"] = "row-major, channels innermost";
  if (header.kind == "depth") j["invalid"] = "<= 0";
  if (header.kind == "flow") j["invalid"] = "NaN";
  WriteBytes(SidecarPath(payload), j.dump(2) + "\n");
}

GridHeader ReadGridHeader(const fs::path& payload) {
  const fs::path side = SidecarPath(payload);
  const std::string text = ReadBytes(side);
  try {
    const json j = json::parse(text);
    GridHeader h;
    h.kind = j.at("kind").get<std::string>();
    h.rows = j.at("rows").get<int>();
    h.cols = j.at("cols").get<int>();
    h.channels = j.at("channels").get<int>();
    if (j.value("dtype", "float32") != "float32" ||
        j.value("byte_order", "little") != "little") {
      throw Error(ErrorCode::kMalformedFile, side.string() + ": unsupported dtype");
    }
    if (h.rows < 0 || h.cols < 0 || h.channels <= 0) {
      throw Error(ErrorCode::kMalformedFile, side.string() + ": invalid shape");
    }
    return h;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kMalformedFile, side.string() + ": " + e.what());
  }
}

PointCloud ReadCloud(const fs::path& path) {
  const std::string bytes = ReadBytes(path);
  if (bytes.size() % 16 != 0) {
    throw Error(ErrorCode::kMalformedFile,
                path.string() + ": size " + std::to_string(bytes.size()) +
                    " is not a multiple of 16");
  }
  PointCloud cloud;
  cloud.frame = Frame::kLidar;
  const size_t n = bytes.size() / 16;
  cloud.points.reserve(n);
  for (size_t i = 0; i < n; ++i) {
    const float x = FloatAt(bytes, 4 * i), y = FloatAt(bytes, 4 * i + 1),
                z = FloatAt(bytes, 4 * i + 2), in = FloatAt(bytes, 4 * i + 3);
    if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z) || !(in >= 0.0f) ||
        !(in <= 1.0f)) {
      throw Error(ErrorCode::kMalformedFile,
                  path.string() + ": point " + std::to_string(i) + " is not finite or has "
                  "intensity outside [0, 1]");
    }
    cloud.points.push_back({Vec3(x, y, z), in});
  }
  return cloud;
}

void WriteCloud(const fs::path& path, const PointCloud& cloud) {
  std::string out;
  out.reserve(cloud.points.size() * 16);
  for (const auto& p : cloud.points) {
    AppendFloat(out, static_cast<float>(p.position.x()));
    AppendFloat(out, static_cast<float>(p.position.y()));
    AppendFloat(out, static_cast<float>(p.position.z()));
    AppendFloat(out, static_cast<float>(p.intensity));
  }
  WriteBytes(path, out);
}

std::vector<RigidTransform> ReadPoses(const fs::path& path,
                                      std::vector<std::string>* warnings) {
  std::istringstream in(ReadBytes(path));
  std::vector<RigidTransform> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tokens = SplitWhitespace(line);
    if (tokens.empty()) continue;
    const std::string ctx = path.string() + ":" + std::to_string(line_no);
    if (tokens.size() != 12) {
      throw Error(ErrorCode::kMalformedLine,
                  ctx + ": expected 12 values, got " + std::to_string(tokens.size()));
    }
    RigidTransform t = TransformFrom12(ParseNumbers(tokens, 0, ctx));
    const double drift = t.OrthonormalityError();
    if (drift > kPoseRejectTolerance) {
      throw Error(ErrorCode::kMalformedLine, ctx + ": rotation is not orthonormal");
    }
    if (drift > kPoseRepairTolerance) {
      t = RigidTransform(NearestRotation(t.rotation()), t.translation());
      if (warnings) {
        warnings->push_back(ctx + ": rotation drift " + FormatDouble(drift) +
                            " re-orthonormalised");
      }
    }
    poses.push_back(t);
  }
  return poses;
}

void WritePoses(const fs::path& path, const std::vector<RigidTransform>& poses) {
  std::string out;
  for (const auto& p : poses) out += Format12(p) + "\n";
  WriteBytes(path, out);
}

Calibration ReadCalibration(const fs::path& path) {
  std::istringstream in(ReadBytes(path));
  std::map<std::string, std::vector<double>> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = SplitWhitespace(line);
    if (tokens.empty()) continue;
    std::string key = tokens[0];
    if (key.back() == ':') key.pop_back();
    entries[key] = ParseNumbers(tokens, 1, path.string() + ":" + std::to_string(line_no));
  }
  auto find = [&](std::initializer_list<const char*> keys, size_t count) -> const std::vector<double>* {
    for (const char* k : keys) {
      auto it = entries.find(k);
      if (it == entries.end()) continue;
      if (it->second.size() != count) {
        throw Error(ErrorCode::kMalformedLine,
                    path.string() + ": " + k + " needs " + std::to_string(count) + " values");
      }
      return &it->second;
    }
    return nullptr;
  };
  Calibration calib;
  const auto* p2 = find({"P2"}, 12);
  const auto* tr = find({"Tr_velo_to_cam", "Tr_velo_cam"}, 12);
  if (!p2 || !tr) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": needs P2 and Tr_velo_to_cam");
  }
  calib.intrinsics.fx = (*p2)[0];
  calib.intrinsics.cx = (*p2)[2];
  calib.intrinsics.fy = (*p2)[5];
  calib.intrinsics.cy = (*p2)[6];
  if (const auto* size = find({"image_size"}, 2)) {
    calib.intrinsics.width = static_cast<int>((*size)[0]);
    calib.intrinsics.height = static_cast<int>((*size)[1]);
  }
  RigidTransform velo = TransformFrom12(*tr);
  if (const auto* r0 = find({"R0_rect", "R_rect"}, 9)) {
    Mat3 r;
    r << (*r0)[0], (*r0)[1], (*r0)[2], (*r0)[3], (*r0)[4], (*r0)[5], (*r0)[6], (*r0)[7],
        (*r0)[8];
    velo = Compose(RigidTransform(r, Vec3::Zero()), velo);
  }
  if (velo.OrthonormalityError() > kPoseRejectTolerance) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": Tr_velo_to_cam is not rigid");
  }
  if (velo.OrthonormalityError() > 1e-12) {
    velo = RigidTransform(NearestRotation(velo.rotation()), velo.translation());
  }
  calib.lidar_to_camera = velo;
  try {
    calib.intrinsics.Validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kMalformedFile, path.string() + ": " + e.what());
  }
  return calib;
}

void WriteCalibration(const fs::path& path, const Calibration& calib) {
  const auto& k = calib.intrinsics;
  std::string out = "P2:";
  for (double v : {k.fx, 0.0, k.cx, 0.0, 0.0, k.fy, k.cy, 0.0, 0.0, 0.0, 1.0, 0.0}) {
    out += " " + FormatDouble(v);
  }
  out += "\nTr_velo_to_cam: " + Format12(calib.lidar_to_camera) + "\n";
  out += "image_size: " + std::to_string(k.width) + " " + std::to_string(k.height) + "\n";
  WriteBytes(path, out);
}

KittiLabel ParseLabelLine(const std::string& line) {
  const auto tokens = SplitWhitespace(line);
  if (tokens.size() != 15 && tokens.size() != 16) {
    throw Error(ErrorCode::kMalformedLine,
                "label line needs 15 or 16 fields, got " + std::to_string(tokens.size()));
  }
  const auto v = ParseNumbers(tokens, 1, "label '" + tokens[0] + "'");
  KittiLabel label;
  label.type = tokens[0];
  label.truncation = v[0];
  label.occlusion = static_cast<int>(v[1]);
  label.alpha = v[2];
  label.bbox.min = {v[3], v[4]};
  label.bbox.max = {v[5], v[6]};
  const double h = v[7], w = v[8], l = v[9];
  label.box.frame = Frame::kCamera;
  label.box.dims = {w, h, l};
  label.box.centre = {v[10], v[11] - 0.5 * h, v[12]};
  label.box.yaw = WrapHalfPi(-v[13]);
  if (tokens.size() == 16) label.score = v[14];
  return label;
}

std::string FormatLabelLine(const KittiLabel& label) {
  const Obb3& b = label.box;
  std::vector<double> fields = {label.truncation, static_cast<double>(label.occlusion),
                                label.alpha, label.bbox.min.x(), label.bbox.min.y(),
                                label.bbox.max.x(), label.bbox.max.y(), b.dims.y(),
                                b.dims.x(), b.dims.z(), b.centre.x(),
                                b.centre.y() + 0.5 * b.dims.y(), b.centre.z(),
                                b.yaw == 0.0 ? 0.0 : -b.yaw};
  if (label.score) fields.push_back(*label.score);
  std::string out = label.type;
  for (double f : fields) out += " " + FormatDouble(f);
  return out;
}

std::vector<KittiLabel> ReadLabels(const fs::path& path) {
  std::istringstream in(ReadBytes(path));
  std::vector<KittiLabel> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (SplitWhitespace(line).empty()) continue;
    try {
      KittiLabel label = ParseLabelLine(line);
      if (label.type == "DontCare") continue;
      labels.push_back(std::move(label));
    } catch (const Error& e) {
      throw Error(ErrorCode::kMalformedLine,
                  path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return labels;
}

void WriteLabels(const fs::path& path, const std::vector<KittiLabel>& labels) {
  std::string out;
  for (const auto& l : labels) out += FormatLabelLine(l) + "\n";
  WriteBytes(path, out);
}

SparseDepthImage ReadDepth(const fs::path& path) {
  GridHeader h;
  auto values = ReadGridPayload(path, "depth", 1, &h);
  SparseDepthImage depth(h.rows, h.cols);
  depth.data() = std::move(values);
  return depth;
}

void WriteDepth(const fs::path& path, const SparseDepthImage& depth) {
  WriteBytes(path, EncodeFloats(depth.data()));
  WriteGridHeader(path, {"depth", depth.height(), depth.width(), 1});
}

FlowImage ReadFlow(const fs::path& path) {
  GridHeader h;
  auto values = ReadGridPayload(path, "flow", 2, &h);
  FlowImage flow(h.rows, h.cols);
  flow.data() = std::move(values);
  return flow;
}

void WriteFlow(const fs::path& path, const FlowImage& flow) {
  WriteBytes(path, EncodeFloats(flow.data()));
  WriteGridHeader(path, {"flow", flow.height(), flow.width(), 2});
}

BoxGrid ReadBoxGrid(const fs::path& path, const GridSpec& spec) {
  const GridHeader header = ReadGridHeader(path);
  if (header.kind == "box_grid" &&
      (header.rows != spec.OutputRows() || header.cols != spec.OutputCols())) {
    throw Error(ErrorCode::kShapeMismatch,
                path.string() + ": grid is " + std::to_string(header.rows) + "x" +
                    std::to_string(header.cols) + ", spec expects " +
                    std::to_string(spec.OutputRows()) + "x" +
                    std::to_string(spec.OutputCols()));
  }
  GridHeader h;
  const auto values = ReadGridPayload(path, "box_grid", BoxCode::kFields, &h);
  BoxGrid grid(h.rows, h.cols);
  for (size_t i = 0; i < grid.size(); ++i) {
    const float* f = values.data() + i * BoxCode::kFields;
    BoxCode& c = grid.at(i);
    c.delta = {f[0], f[1], f[2]};
    c.dims = {f[3], f[4], f[5]};
    c.yaw = f[6];
    c.confidence = f[7];
  }
  return grid;
}

void WriteBoxGrid(const fs::path& path, const BoxGrid& grid) {
  std::vector<float> values;
  values.reserve(grid.size() * BoxCode::kFields);
  for (size_t i = 0; i < grid.size(); ++i) {
    const BoxCode& c = grid.at(i);
    for (double v : {c.delta.x(), c.delta.y(), c.delta.z(), c.dims.x(), c.dims.y(),
                     c.dims.z(), c.yaw, c.confidence}) {
      values.push_back(static_cast<float>(v));
    }
  }
  WriteBytes(path, EncodeFloats(values));
  WriteGridHeader(path, {"box_grid", grid.rows(), grid.cols(), BoxCode::kFields});
}

void WriteBevImage(const fs::path& path, const BevImage& image) {
  WriteBytes(path, EncodeFloats(image.data()));
  WriteGridHeader(path, {"bev", image.height(), image.width(), BevImage::kChannels});
}

BevImage ReadBevImage(const fs::path& path) {
  GridHeader h;
  auto values = ReadGridPayload(path, "bev", BevImage::kChannels, &h);
  BevImage image(h.rows, h.cols);
  image.data() = std::move(values);
  return image;
}

std::string SequenceIndex::FrameName(int frame) {
  std::string s = std::to_string(frame);
  return std::string(s.size() < 6 ? 6 - s.size() : 0, '0') + s;
}

fs::path SequenceIndex::CloudPath(int f) const { return root / "velodyne" / (FrameName(f) + ".bin"); }
fs::path SequenceIndex::DepthPath(int f) const { return root / "depth" / (FrameName(f) + ".bin"); }
fs::path SequenceIndex::FlowPath(int f) const { return root / "flow" / (FrameName(f) + ".bin"); }
fs::path SequenceIndex::LabelPath(int f) const { return root / "label_2" / (FrameName(f) + ".txt"); }

SequenceIndex OpenSequence(const fs::path& root) {
  if (!fs::is_directory(root)) {
    throw Error(ErrorCode::kIoError, root.string() + " is not a directory");
  }
  SequenceIndex seq;
  seq.root = root;
  seq.id = fs::absolute(root).lexically_normal().filename().string();
  if (seq.id.empty()) seq.id = fs::absolute(root).parent_path().filename().string();
  const fs::path velo = root / "velodyne";
  if (!fs::is_directory(velo)) {
    throw Error(ErrorCode::kIoError, velo.string() + " is missing");
  }
  std::vector<int> frames;
  for (const auto& entry : fs::directory_iterator(velo)) {
    if (entry.path().extension() != ".bin") continue;
    const std::string stem = entry.path().stem().string();
    int index = 0;
    const auto res = std::from_chars(stem.data(), stem.data() + stem.size(), index);
    if (res.ec != std::errc() || res.ptr != stem.data() + stem.size() || index < 0) {
      throw Error(ErrorCode::kMalformedFile, entry.path().string() + ": non-numeric frame name");
    }
    frames.push_back(index);
  }
  std::sort(frames.begin(), frames.end());
  for (size_t i = 0; i < frames.size(); ++i) {
    if (frames[i] != static_cast<int>(i)) {
      throw Error(ErrorCode::kMalformedFile,
                  root.string() + ": frames are not contiguous from 0 (missing " +
                      SequenceIndex::FrameName(static_cast<int>(i)) + ")");
    }
  }
  seq.frame_count = static_cast<int>(frames.size());
  seq.calib = ReadCalibration(seq.CalibPath());

  auto require_all = [&](const char* dir, auto path_of, bool sidecar) {
    if (!fs::is_directory(root / dir)) return false;
    for (int f = 0; f < seq.frame_count; ++f) {
      const fs::path p = path_of(f);
      if (!fs::exists(p) || (sidecar && !fs::exists(SidecarPath(p)))) {
        throw Error(ErrorCode::kIoError, p.string() + " is missing");
      }
    }
    return true;
  };
  seq.has_depth = require_all("depth", [&](int f) { return seq.DepthPath(f); }, true);
  seq.has_flow = require_all("flow", [&](int f) { return seq.FlowPath(f); }, true);
  seq.has_labels = require_all("label_2", [&](int f) { return seq.LabelPath(f); }, false);
  seq.has_poses = fs::exists(seq.PosesPath());
  return seq;
}

}  // namespace pgt
