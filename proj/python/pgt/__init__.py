# Copyright 2026 The pgt Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Python bindings of the pgt pseudo-ground-truth library."""

from pgt._pgt import (
    Box,
    Frame,
    PgtError,
    average_precision,
    balanced_l1,
    balanced_l1_derivative,
    combined_confidence,
    default_config,
    fit_obb,
    generate,
    inconsistency_score,
    moving_score,
    principal_axis,
    read_cloud,
    rotated_iou_bev,
    simulate,
    wrap_half_pi,
    write_cloud,
)

__all__ = [
    "Box",
    "Frame",
    "PgtError",
    "average_precision",
    "balanced_l1",
    "balanced_l1_derivative",
    "combined_confidence",
    "default_config",
    "fit_obb",
    "generate",
    "inconsistency_score",
    "moving_score",
    "principal_axis",
    "read_cloud",
    "rotated_iou_bev",
    "simulate",
    "wrap_half_pi",
    "write_cloud",
]
__version__ = "0.1.0"
