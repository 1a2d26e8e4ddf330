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

"""
Model checkpoints as a single JSON document.

Layout::

    {
      "format": "vjf-checkpoint",
      "version": 1,
      "dimensions": {"n": 50, "m": 2, "p": 1, "q": 100, "r": 20},
      "kind": "poisson-canonical",
      "activation": "tanh",
      "arrays": {
        "dynamics.weights": {"shape": [2, 20], "data": ["0x0.0p+0", ...]},
        ...
      }
    }

Arrays are stored row-major with every 64-bit value written by `float.hex`, so a save and load
round trip is bit-exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from vjf.errors import ConfigurationError
from vjf.filtering.bundle import ModelBundle
from vjf.generative.dynamics import DynamicsParams
from vjf.generative.observation import ObservationKind, ObservationParams
from vjf.recognition.network import RecognitionActivation, RecognitionParams

CHECKPOINT_FORMAT = "vjf-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointArray(BaseModel):
    model_config = ConfigDict(extra="forbid")

    shape: List[int]
    data: List[str]

    @model_validator(mode="after")
    def _size_matches_shape(self) -> CheckpointArray:
        if int(np.prod(self.shape)) != len(self.data):
            raise ValueError(f"shape {self.shape} does not hold {len(self.data)} values")
        for value in self.data:
            try:
                float.fromhex(value)
            except ValueError:
                raise ValueError(f"{value} is not a hexadecimal float")
        return self

    @staticmethod
    def from_array(array: np.ndarray) -> CheckpointArray:
        array = np.asarray(array, dtype=np.float64)
        return CheckpointArray(
            shape=list(array.shape), data=[float(v).hex() for v in array.reshape(-1)]
        )

    def to_array(self) -> np.ndarray:
        values = np.array([float.fromhex(v) for v in self.data], dtype=np.float64)
        return values.reshape(self.shape)


class CheckpointDocument(BaseModel):
    """Schema of a saved `ModelBundle`."""

    model_config = ConfigDict(extra="forbid")

    format: str = Field(CHECKPOINT_FORMAT, pattern=f"^{CHECKPOINT_FORMAT}$")
    version: int = CHECKPOINT_VERSION
    dimensions: Dict[str, int]
    kind: ObservationKind
    activation: RecognitionActivation
    arrays: Dict[str, CheckpointArray]


def bundle_to_document(bundle: ModelBundle) -> CheckpointDocument:
    return CheckpointDocument(
        dimensions=bundle.dimensions,
        kind=bundle.kind,
        activation=bundle.recognition.activation,
        arrays={
            name: CheckpointArray.from_array(value)
            for name, value in bundle.parameters().items()
        },
    )


def bundle_from_document(document: CheckpointDocument) -> ModelBundle:
    """
    Rebuilds a bundle from a checkpoint document.

    Raises:
        ConfigurationError: If arrays are missing or disagree with the declared dimensions.
    """
    if document.version != CHECKPOINT_VERSION:
        raise ConfigurationError(
            f"unsupported checkpoint version {document.version}", key_path="version"
        )
    arrays = {name: array.to_array() for name, array in document.arrays.items()}

    def take(component: str, names: List[str]) -> Dict[str, np.ndarray]:
        try:
            return {name: arrays.pop(f"{component}.{name}") for name in names}
        except KeyError as error:
            raise ConfigurationError(
                f"checkpoint is missing array {error.args[0]}", key_path="arrays"
            )

    try:
        dynamics = DynamicsParams(
            **take(
                "dynamics",
                ["weights", "centers", "log_inverse_widths", "input_map", "log_state_noise_var"],
            )
        )
        observation_arrays = take("observation", ["loading", "bias"])
        if document.kind == ObservationKind.GAUSSIAN:
            observation_arrays.update(take("observation", ["log_obs_noise_var"]))
        observation = ObservationParams(kind=document.kind, **observation_arrays)
        recognition = RecognitionParams(
            activation=document.activation,
            **take(
                "recognition", ["hidden_weights", "hidden_bias", "output_weights", "output_bias"]
            ),
        )
        bundle = ModelBundle(dynamics, observation, recognition)
    except ValueError as error:
        raise ConfigurationError(f"inconsistent checkpoint: {error}", key_path="arrays")
    if arrays:
        raise ConfigurationError(f"unknown checkpoint arrays {sorted(arrays)}", key_path="arrays")
    if bundle.dimensions != document.dimensions:
        raise ConfigurationError(
            f"checkpoint arrays have dimensions {bundle.dimensions}, "
            f"document declares {document.dimensions}",
            key_path="dimensions",
        )
    return bundle


def save_checkpoint(bundle: ModelBundle, path: Union[str, Path]) -> None:
    """Writes `bundle` as a checkpoint document to `path`."""
    Path(path).write_text(bundle_to_document(bundle).model_dump_json(indent=2))


def load_checkpoint(path: Union[str, Path]) -> ModelBundle:
    """
    Reads a checkpoint written by `save_checkpoint`.

    Raises:
        ConfigurationError: If the file is unreadable, or the document is malformed or
            inconsistent.
    """
    try:
        text = Path(path).read_text()
    except (OSError, UnicodeDecodeError) as error:
        raise ConfigurationError(
            f"cannot read checkpoint {path}: {error}", key_path="checkpoint"
        ) from error
    try:
        document = CheckpointDocument.model_validate_json(text)
    except ValidationError as error:
        location = error.errors()[0]["loc"] if error.errors() else ()
        raise ConfigurationError(
            f"invalid checkpoint {path}: {error}",
            key_path=".".join(str(part) for part in location) or None,
        )
    return bundle_from_document(document)
