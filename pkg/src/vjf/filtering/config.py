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

from typing import List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

_COMPONENTS = ("dynamics", "observation", "recognition")


class TrainConfig(BaseModel):
    """
    Settings of the online joint update.

    Attributes:
        penalty_gamma (float): Weight γ of the `½γσ²` prior penalty on the state noise.
        learning_rate (float): Adam step size.
        beta1 (float): Adam first moment decay.
        beta2 (float): Adam second moment decay.
        epsilon_hat (float): Adam denominator offset.
        grad_clip (float, optional): Global gradient norm threshold. `None` or infinity
            disables clipping.
        updates_per_step (int): Optimizer updates per arriving observation.
        seed (int): Root seed of the per-sequence noise streams.
        frozen (List[str]): Parameter blocks held fixed, named `<component>.<field>`.
        warm_start_passes (int): Offline passes over a prefix before the online pass.
        warm_start_steps (int, optional): Length of the warm start prefix. `None` uses the
            whole sequences.
        reseed_after (int, optional): Re-seed the basis centers from the posterior means seen
            after this many steps.
        record_wall_time (bool): Whether diagnostics carry measured wall time. When off, wall
            time is reported as zero so runs are reproducible byte for byte.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    penalty_gamma: float = Field(1.0, ge=0)
    learning_rate: float = Field(1e-3, ge=0)
    beta1: float = Field(0.9, gt=0, lt=1)
    beta2: float = Field(0.999, gt=0, lt=1)
    epsilon_hat: float = Field(1e-8, gt=0)
    grad_clip: Optional[float] = Field(10.0, gt=0)
    updates_per_step: int = Field(1, ge=1)
    seed: int = 0
    frozen: List[str] = Field(default_factory=list)
    warm_start_passes: int = Field(0, ge=0)
    warm_start_steps: Optional[int] = Field(None, ge=1)
    reseed_after: Optional[int] = Field(None, ge=1)
    record_wall_time: bool = True

    @field_validator("frozen")
    @classmethod
    def _check_block_names(cls, names: List[str]) -> List[str]:
        for name in names:
            component, _, field = name.partition(".")
            if component not in _COMPONENTS or not field:
                raise ValueError(f"{name} is not a parameter block name <component>.<field>")
        return names

    @property
    def clip_threshold(self) -> float:
        return float("inf") if self.grad_clip is None else self.grad_clip

    @property
    def adam_hyperparameters(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "epsilon_hat": self.epsilon_hat,
        }
