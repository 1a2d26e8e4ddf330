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

from vjf.numerics.adam import AdamState, adam_update, clip_by_global_norm  # noqa: F401
from vjf.numerics.diag_gaussian import (  # noqa: F401
    DiagGaussian,
    gaussian_entropy,
    reparam_sample,
)
from vjf.numerics.finite_difference import finite_diff_gradient  # noqa: F401
from vjf.numerics.tape import GradientTape, Variable, value_of  # noqa: F401
