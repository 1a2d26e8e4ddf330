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

from vjf.generative.dynamics import (  # noqa: F401
    DynamicsParams,
    drift,
    dynamics_jacobian,
    expected_transition_loglik,
    init_dynamics,
    rbf_features,
    with_centers,
)
from vjf.generative.observation import (  # noqa: F401
    ObservationKind,
    ObservationModel,
    ObservationParams,
    expected_observation,
    linear_predictor,
    observation_loglik,
    sample_observation,
)
