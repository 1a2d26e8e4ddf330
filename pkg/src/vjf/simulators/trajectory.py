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
Simulated sequences and their on-disk formats.

A trajectory directory holds one CSV per sequence, `trajectory_0000.csv`, ..., with header
`t,x_1..x_m,y_1..y_n,u_1..u_p` and values written with 17 significant digits, plus a
`manifest.json` that records the dimensions, the step size and whatever the writer needs
for an exact replay.

The compact binary format stores one sequence per file: a 64-byte little-endian header
(magic `VJFTRAJ\\0`, version, T, m, n, p, dt, zero padding) followed by the T rows of
`[x, y, u]` as little-endian float64.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Union

import numpy as np

from vjf.errors import ConfigurationError, ShapeError

MANIFEST_NAME = "manifest.json"
BINARY_MAGIC = b"VJFTRAJ\0"
BINARY_VERSION = 1
_BINARY_HEADER = struct.Struct("<8sIQIIId")
_BINARY_HEADER_SIZE = 64


@dataclass(frozen=True)
class Trajectory:
    """
    One simulated or recorded sequence.

    Args:
        latents (np.ndarray): States, shape (T, m).
        inputs (np.ndarray): Inputs, shape (T, p). Row t is the input applied between steps
            t and t + 1.
        dt (float): Step size.
        observations (np.ndarray, optional): Observations, shape (T, n).

    Raises:
        ShapeError: If the fields disagree on T.
    """

    latents: np.ndarray
    inputs: np.ndarray
    dt: float
    observations: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.latents.ndim != 2 or self.inputs.ndim != 2:
            raise ShapeError("latents and inputs must be (T, m) and (T, p) arrays")
        lengths = {len(self.latents), len(self.inputs)}
        if self.observations is not None:
            if self.observations.ndim != 2:
                raise ShapeError("observations must be a (T, n) array")
            lengths.add(len(self.observations))
        if len(lengths) != 1:
            raise ShapeError(f"trajectory fields disagree on length: {sorted(lengths)}")

    @property
    def n_steps(self) -> int:
        return len(self.latents)

    @property
    def latent_dim(self) -> int:
        return self.latents.shape[1]

    @property
    def input_dim(self) -> int:
        return self.inputs.shape[1]

    @property
    def observed_dim(self) -> int:
        return 0 if self.observations is None else self.observations.shape[1]

    def with_observations(self, observations: np.ndarray) -> Trajectory:
        return Trajectory(self.latents, self.inputs, self.dt, np.asarray(observations))

    def table(self) -> np.ndarray:
        """Rows `[x, y, u]`, shape (T, m + n + p)."""
        parts = [self.latents]
        if self.observations is not None:
            parts.append(self.observations)
        parts.append(self.inputs)
        return np.hstack(parts)


def _header(m: int, n: int, p: int) -> List[str]:
    return (
        ["t"]
        + [f"x_{i + 1}" for i in range(m)]
        + [f"y_{i + 1}" for i in range(n)]
        + [f"u_{i + 1}" for i in range(p)]
    )


def _file_name(index: int) -> str:
    return f"trajectory_{index:04d}.csv"


def write_trajectories(
    trajectories: Sequence[Trajectory],
    directory: Union[str, Path],
    manifest: Optional[Mapping[str, Any]] = None,
) -> Path:
    """
    Writes one CSV per trajectory and a manifest into `directory`.

    Args:
        trajectories (Sequence[Trajectory]): Sequences sharing m, n and p.
        directory (Union[str, Path]): Output directory, created if missing.
        manifest (Mapping[str, Any], optional): Extra manifest entries such as the simulation
            spec and seed.

    Returns:
        Path: Path of the manifest.

    Raises:
        ShapeError: If the trajectories have different dimensions.
    """
    if not trajectories:
        raise ShapeError("no trajectories to write")
    dims = {(t.latent_dim, t.observed_dim, t.input_dim) for t in trajectories}
    if len(dims) != 1:
        raise ShapeError(f"trajectories have different dimensions: {sorted(dims)}")
    (m, n, p), = dims
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    files = []
    for index, trajectory in enumerate(trajectories):
        steps = np.arange(trajectory.n_steps, dtype=float)[:, None]
        np.savetxt(
            directory / _file_name(index),
            np.hstack([steps, trajectory.table()]),
            fmt="%.17g",
            delimiter=",",
            header=",".join(_header(m, n, p)),
            comments="",
        )
        files.append(_file_name(index))
    document: Dict[str, Any] = dict(manifest or {})
    document.update(
        {
            "dimensions": {"m": m, "n": n, "p": p},
            "dt": trajectories[0].dt,
            "files": files,
        }
    )
    path = directory / MANIFEST_NAME
    path.write_text(json.dumps(document, indent=2, sort_keys=True))
    return path


def read_manifest(directory: Union[str, Path]) -> Dict[str, Any]:
    """
    Reads `manifest.json` from a trajectory directory.

    Raises:
        ConfigurationError: If the manifest is missing, unreadable or not a JSON object with
            `dimensions`, `dt` and `files`.
    """
    path = Path(directory) / MANIFEST_NAME
    if not path.exists():
        raise ConfigurationError(f"no {MANIFEST_NAME} in {directory}", key_path="data")
    try:
        manifest = json.loads(path.read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as error:
        raise ConfigurationError(f"cannot read {path}: {error}", key_path="data") from error
    if not isinstance(manifest, dict) or not {"dimensions", "dt", "files"} <= set(manifest):
        raise ConfigurationError(
            f"{path} must be an object with dimensions, dt and files", key_path="data"
        )
    return manifest


def read_trajectories(directory: Union[str, Path]) -> List[Trajectory]:
    """
    Reads the trajectories written by `write_trajectories`.

    Raises:
        ConfigurationError: If the manifest is missing or malformed, or a file is unreadable,
            malformed or disagrees with it.
    """
    directory = Path(directory)
    manifest = read_manifest(directory)
    try:
        m, n, p = (int(manifest["dimensions"][key]) for key in ("m", "n", "p"))
        dt = float(manifest["dt"])
    except (KeyError, TypeError, ValueError) as error:
        raise ConfigurationError(
            f"manifest in {directory} has malformed dimensions or dt: {error}", key_path="data"
        ) from error
    expected = _header(m, n, p)
    trajectories = []
    for name in manifest["files"]:
        try:
            with open(directory / name) as handle:
                header = handle.readline().strip().split(",")
        except OSError as error:
            raise ConfigurationError(f"cannot read {name}: {error}", key_path="data") from error
        if header != expected:
            raise ConfigurationError(
                f"{name} has header {header}, manifest implies {expected}", key_path="data"
            )
        try:
            table = np.loadtxt(directory / name, delimiter=",", skiprows=1, ndmin=2)
        except ValueError as error:
            raise ConfigurationError(f"{name} is malformed: {error}", key_path="data") from error
        if table.shape[1] != len(expected):
            raise ConfigurationError(
                f"{name} has {table.shape[1]} columns, manifest implies {len(expected)}",
                key_path="data",
            )
        trajectories.append(
            Trajectory(
                latents=table[:, 1 : 1 + m],
                observations=table[:, 1 + m : 1 + m + n] if n else None,
                inputs=table[:, 1 + m + n :],
                dt=dt,
            )
        )
    return trajectories


def write_binary_trajectory(trajectory: Trajectory, path: Union[str, Path]) -> None:
    """Writes one trajectory in the compact binary format."""
    header = _BINARY_HEADER.pack(
        BINARY_MAGIC,
        BINARY_VERSION,
        trajectory.n_steps,
        trajectory.latent_dim,
        trajectory.observed_dim,
        trajectory.input_dim,
        float(trajectory.dt),
    )
    body = np.ascontiguousarray(trajectory.table(), dtype="<f8").tobytes()
    Path(path).write_bytes(header.ljust(_BINARY_HEADER_SIZE, b"\0") + body)


def read_binary_trajectory(path: Union[str, Path]) -> Trajectory:
    """
    Reads a file written by `write_binary_trajectory`.

    Raises:
        ConfigurationError: If the magic, version or size do not match.
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as error:
        raise ConfigurationError(f"cannot read {path}: {error}", key_path="data") from error
    if len(raw) < _BINARY_HEADER_SIZE:
        raise ConfigurationError(f"{path} is too short for a trajectory header")
    magic, version, n_steps, m, n, p, dt = _BINARY_HEADER.unpack_from(raw)
    if magic != BINARY_MAGIC or version != BINARY_VERSION:
        raise ConfigurationError(f"{path} is not a version {BINARY_VERSION} trajectory file")
    width = m + n + p
    if len(raw) != _BINARY_HEADER_SIZE + 8 * n_steps * width:
        raise ConfigurationError(f"{path} has {len(raw)} bytes, header implies a different size")
    table = np.frombuffer(raw, dtype="<f8", offset=_BINARY_HEADER_SIZE).reshape(n_steps, width)
    table = table.astype(float)
    return Trajectory(
        latents=table[:, :m],
        observations=table[:, m : m + n] if n else None,
        inputs=table[:, m + n :],
        dt=dt,
    )
