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

from vjf.simulators.observations import (  # noqa: F401
    DEFAULT_MAX_RATE,
    calibrate_spike_bias,
    generate_observations,
    random_observation_params,
)
from vjf.simulators.simulation import (  # noqa: F401
    simulate,
    simulate_bistable,
    simulate_fhn,
    simulate_lorenz,
    simulate_ring,
    simulate_switching_lds,
)
from vjf.simulators.spec import SimSpec  # noqa: F401
from vjf.simulators.systems import DynamicalSystem  # noqa: F401
from vjf.simulators.trajectory import (  # noqa: F401
    Trajectory,
    read_binary_trajectory,
    read_manifest,
    read_trajectories,
    write_binary_trajectory,
    write_trajectories,
)
