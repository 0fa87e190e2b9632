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

#include <vector>

#include "pgt/bev_grid.hpp"
#include "pgt/geometry.hpp"
#include "pgt/pipeline.hpp"

namespace pgt {

/// Balanced L1 parameters. b and the branch constant follow from alpha and
/// gamma so the two pieces meet at |x| = 1 with matching slope.
struct LossConfig {
  double alpha = 0.5;
  double gamma = 1.5;

  double b() const;
  double c() const;

  /// Throws Error(kConfigInvalid) unless alpha and gamma are positive.
  void Validate() const;
};

double BalancedL1(double x, const LossConfig& config = {});
double BalancedL1Derivative(double x, const LossConfig& config = {});
/// Sum over the components.
double BalancedL1(const Vec3& v, const LossConfig& config = {});

struct LossBreakdown {
  double centre = 0.0;
  double dims = 0.0;
  double yaw = 0.0;
  double positive_confidence = 0.0;
  double negative_confidence = 0.0;
  size_t positives = 0;
  size_t negatives = 0;

  double Total() const {
    return centre + dims + yaw + positive_confidence + negative_confidence;
  }
};

/// Loss of one frame's predictions against its pseudo-labels. Positives are
/// compared on decoded centre, dims, yaw and confidence; negatives on
/// confidence only. Throws Error(kPixelOutOfRange) for a label outside the
/// grid and Error(kShapeMismatch) if the grid does not match `spec`.
LossBreakdown FrameLoss(const BoxGrid& predicted, const std::vector<PseudoLabel>& positives,
                        const std::vector<NegativeLabel>& negatives, const GridSpec& spec,
                        const LossConfig& config = {});

/// d(total loss) / d(each predicted field), laid out like the prediction grid.
/// A pixel labelled more than once accumulates every contribution.
BoxGrid FrameLossGradient(const BoxGrid& predicted, const std::vector<PseudoLabel>& positives,
                          const std::vector<NegativeLabel>& negatives, const GridSpec& spec,
                          const LossConfig& config = {});

}  // namespace pgt
