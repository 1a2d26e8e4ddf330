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

from dataclasses import dataclass, fields, replace
from typing import Dict, Mapping, Tuple

import numpy as np

from vjf.errors import ShapeError
from vjf.generative.dynamics import DynamicsParams
from vjf.generative.observation import ObservationKind, ObservationParams
from vjf.numerics.tape import GradientTape, Variable, value_of
from vjf.recognition.network import RecognitionParams

_COMPONENTS = ("dynamics", "observation", "recognition")


@dataclass(frozen=True)
class ModelBundle:
    """
    Every learnable parameter of the model: dynamics, observation map and recognition network.

    Parameter blocks are addressed as `<component>.<field>`, for example `dynamics.weights` or
    `observation.loading`. The same names key gradients, optimizer states, checkpoints and the
    `frozen` list of `TrainConfig`.

    Args:
        dynamics (DynamicsParams): Latent dynamics.
        observation (ObservationParams): Observation map.
        recognition (RecognitionParams): Recognition network.

    Raises:
        ShapeError: If the component dimensions disagree.
    """

    dynamics: DynamicsParams
    observation: ObservationParams
    recognition: RecognitionParams

    def __post_init__(self):
        m = self.dynamics.latent_dim
        if self.observation.latent_dim != m or self.recognition.latent_dim != m:
            raise ShapeError(
                f"latent dimensions disagree: dynamics {m}, observation "
                f"{self.observation.latent_dim}, recognition {self.recognition.latent_dim}"
            )
        expected = self.observed_dim + self.input_dim + 2 * m
        if self.recognition.input_size != expected:
            raise ShapeError(
                f"recognition input size {self.recognition.input_size} does not match "
                f"n + p + 2m = {expected}"
            )

    @property
    def observed_dim(self) -> int:
        return self.observation.observed_dim

    @property
    def latent_dim(self) -> int:
        return self.dynamics.latent_dim

    @property
    def input_dim(self) -> int:
        return self.dynamics.input_dim

    @property
    def hidden_units(self) -> int:
        return self.recognition.hidden_units

    @property
    def basis_count(self) -> int:
        return self.dynamics.basis_count

    @property
    def kind(self) -> ObservationKind:
        return self.observation.kind

    @property
    def dimensions(self) -> Dict[str, int]:
        return {
            "n": self.observed_dim,
            "m": self.latent_dim,
            "p": self.input_dim,
            "q": self.hidden_units,
            "r": self.basis_count,
        }

    def parameters(self) -> Dict[str, np.ndarray]:
        """
        Returns every parameter block as a numpy array keyed by `<component>.<field>`.

        The Gaussian observation noise appears only for the Gaussian kind.
        """
        blocks = {}
        for component in _COMPONENTS:
            params = getattr(self, component)
            for field in fields(params):
                value = getattr(params, field.name)
                if value is None or not _is_array_field(field.name):
                    continue
                blocks[f"{component}.{field.name}"] = np.array(value_of(value))
        return blocks

    def replace_parameters(self, blocks: Mapping[str, object]) -> ModelBundle:
        """
        Returns a bundle with the given blocks substituted.

        Args:
            blocks (Mapping[str, object]): New values keyed by block name. Values may be numpy
                arrays or traced variables.

        Returns:
            ModelBundle: The new bundle. Unnamed blocks are shared with this one.

        Raises:
            KeyError: If a block name is unknown.
        """
        updates: Dict[str, Dict[str, object]] = {component: {} for component in _COMPONENTS}
        known = self.block_names()
        for name, value in blocks.items():
            if name not in known:
                raise KeyError(f"unknown parameter block {name}")
            component, field = name.split(".", 1)
            updates[component][field] = value
        return ModelBundle(
            **{
                component: replace(getattr(self, component), **updates[component])
                if updates[component]
                else getattr(self, component)
                for component in _COMPONENTS
            }
        )

    def block_names(self) -> Tuple[str, ...]:
        return tuple(self.parameters().keys())

    def traced(self, tape: GradientTape) -> Tuple[ModelBundle, Dict[str, Variable]]:
        """
        Watches every parameter block on `tape`.

        Returns:
            Tuple[ModelBundle, Dict[str, Variable]]: A bundle holding the traced blocks and the
            traced blocks keyed by name.
        """
        sources = {name: tape.watch(value, name) for name, value in self.parameters().items()}
        return self.replace_parameters(sources), sources


def _is_array_field(name: str) -> bool:
    return name not in ("kind", "activation")
