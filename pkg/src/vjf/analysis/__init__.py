# Copyright 2026 The vjf Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

from vjf.analysis.alignment import AffineMap, affine_align  # noqa: F401
from vjf.analysis.metrics import (  # noqa: F401
    LjungBoxResult,
    TimingReport,
    ljung_box,
    per_bin_log_likelihood,
    plateau_reached,
    posterior_density,
    prediction_rmse,
    timing_regression,
)
from vjf.analysis.phase_portrait import (  # noqa: F401
    FixedPoint,
    PhasePortrait,
    Stability,
    classify_stability,
    find_fixed_points,
    phase_portrait,
    velocity_grid,
)
