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

from __future__ import annotations

from typing import Dict, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from vjf.simulators.systems import DynamicalSystem


class SimSpec(BaseModel):
    """
    What to simulate. Unset optional fields take the system's defaults.

    Args:
        system (str): Registered system name: `ring`, `fhn`, `lorenz`, `switching-lds` or
            `bistable`.
        parameters (Dict[str, float]): Overrides of the system parameters.
        noise_std (float, optional): Standard deviation of the per-step state noise.
        n_sequences (int): Number of independent sequences. Default is 1.
        n_steps (int): Recorded steps per sequence, after any transient. Default is 1000.
        dt (float, optional): Integration step.
        transient (int, optional): Steps integrated and discarded before recording.
        initial_state (List[float], optional): Common start for every sequence. When set, no
            start is drawn.
        seed (int): Root seed of the per-sequence random streams. Default is 0.

    Examples:
        >>> SimSpec(system="ring", n_sequences=100, n_steps=1000)
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    system: str
    parameters: Dict[str, float] = Field(default_factory=dict)
    noise_std: Optional[float] = Field(default=None, ge=0.0)
    n_sequences: int = Field(default=1, ge=1)
    n_steps: int = Field(default=1000, ge=1)
    dt: Optional[float] = Field(default=None, gt=0.0)
    transient: Optional[int] = Field(default=None, ge=0)
    initial_state: Optional[List[float]] = None
    seed: int = 0

    @field_validator("system")
    @classmethod
    def _known_system(cls, value: str) -> str:
        if value not in DynamicalSystem.names():
            raise ValueError(f"unknown system {value}, expected one of {DynamicalSystem.names()}")
        return value

    def build_system(self) -> DynamicalSystem:
        return DynamicalSystem.create(self.system, self.parameters)

    def resolved(self) -> SimSpec:
        """A copy with every optional setting filled from the system defaults."""
        system = DynamicalSystem._systems[self.system]
        return self.model_copy(
            update={
                "noise_std": system.default_noise_std if self.noise_std is None else self.noise_std,
                "dt": system.default_dt if self.dt is None else self.dt,
                "transient": system.default_transient if self.transient is None else self.transient,
            }
        )
