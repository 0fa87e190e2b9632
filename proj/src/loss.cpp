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
#include "pgt/loss.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pgt/error.hpp"

namespace pgt {
namespace {

double Sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

void CheckPixel(const BoxGrid& grid, const GridPixel& u) {
  if (!grid.Contains(u)) {
    throw Error(ErrorCode::kPixelOutOfRange,
                "label pixel (" + std::to_string(u.row) + ", " + std::to_string(u.col) +
                    ") outside the prediction grid");
  }
}

// Accumulation follows pixel order so the sum does not depend on how the
// labels were produced.
template <typename Label>
std::vector<size_t> PixelOrder(const std::vector<Label>& labels) {
  std::vector<size_t> order(labels.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return labels[a].pixel < labels[b].pixel;
  });
  return order;
}

struct Residuals {
  Vec3 centre;
  Vec3 dims;
  double yaw;
  double confidence;
};

Residuals PositiveResiduals(const BoxGrid& predicted, const PseudoLabel& label,
                            const GridSpec& spec) {
  const BoxCode& code = predicted.at(label.pixel);
  const Obb3 box = DecodeBox(label.pixel, code, spec);
  return {box.centre - label.box.centre, box.dims - label.box.dims,
          WrapHalfPi(box.yaw - label.box.yaw), code.confidence - label.target};
}

void Validate(const BoxGrid& predicted, const std::vector<PseudoLabel>& positives,
              const std::vector<NegativeLabel>& negatives, const GridSpec& spec,
              const LossConfig& config) {
  config.Validate();
  predicted.CheckShape(spec);
  for (const auto& p : positives) CheckPixel(predicted, p.pixel);
  for (const auto& n : negatives) CheckPixel(predicted, n.pixel);
}

}  // namespace

double LossConfig::b() const { return std::exp(gamma / alpha) - 1.0; }

double LossConfig::c() const {
  const double bb = b();
  return alpha / bb * (bb + 1.0) * std::log(bb + 1.0) - alpha - gamma;
}

void LossConfig::Validate() const {
  if (!(alpha > 0.0) || !(gamma > 0.0) || !std::isfinite(alpha) || !std::isfinite(gamma)) {
    throw Error(ErrorCode::kConfigInvalid, "balanced L1 alpha and gamma must be positive");
  }
}

double BalancedL1(double x, const LossConfig& config) {
  const double ax = std::abs(x);
  if (ax < 1.0) {
    const double bb = config.b();
    return config.alpha / bb * (bb * ax + 1.0) * std::log(bb * ax + 1.0) - config.alpha * ax;
  }
  return config.gamma * ax + config.c();
}

double BalancedL1Derivative(double x, const LossConfig& config) {
  const double ax = std::abs(x);
  if (ax < 1.0) return config.alpha * std::log(config.b() * ax + 1.0) * Sign(x);
  return config.gamma * Sign(x);
}

double BalancedL1(const Vec3& v, const LossConfig& config) {
  return BalancedL1(v.x(), config) + BalancedL1(v.y(), config) + BalancedL1(v.z(), config);
}

LossBreakdown FrameLoss(const BoxGrid& predicted, const std::vector<PseudoLabel>& positives,
                        const std::vector<NegativeLabel>& negatives, const GridSpec& spec,
                        const LossConfig& config) {
  Validate(predicted, positives, negatives, spec, config);
  LossBreakdown out;
  for (size_t i : PixelOrder(positives)) {
    const Residuals r = PositiveResiduals(predicted, positives[i], spec);
    out.centre += BalancedL1(r.centre, config);
    out.dims += BalancedL1(r.dims, config);
    out.yaw += BalancedL1(r.yaw, config);
    out.positive_confidence += r.confidence * r.confidence;
  }
  for (size_t i : PixelOrder(negatives)) {
    const double r = predicted.at(negatives[i].pixel).confidence - negatives[i].target;
    out.negative_confidence += r * r;
  }
  out.positives = positives.size();
  out.negatives = negatives.size();
  return out;
}

BoxGrid FrameLossGradient(const BoxGrid& predicted, const std::vector<PseudoLabel>& positives,
                          const std::vector<NegativeLabel>& negatives, const GridSpec& spec,
                          const LossConfig& config) {
  Validate(predicted, positives, negatives, spec, config);
  BoxGrid grad(predicted.rows(), predicted.cols());
  for (size_t i : PixelOrder(positives)) {
    const Residuals r = PositiveResiduals(predicted, positives[i], spec);
    BoxCode& g = grad.at(positives[i].pixel);
    for (int a = 0; a < 3; ++a) {
      g.delta[a] += BalancedL1Derivative(r.centre[a], config);
      g.dims[a] += BalancedL1Derivative(r.dims[a], config);
    }
    g.yaw += BalancedL1Derivative(r.yaw, config);
    g.confidence += 2.0 * r.confidence;
  }
  for (size_t i : PixelOrder(negatives)) {
    const double r = predicted.at(negatives[i].pixel).confidence - negatives[i].target;
    grad.at(negatives[i].pixel).confidence += 2.0 * r;
  }
  return grad;
}

}  // namespace pgt
