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
Run configuration of the `vjf` command line.

A configuration is assembled from four layers, later layers winning:

1. the preset for the simulated system (`desk` or `full` scale),
2. the JSON configuration document,
3. `--set dotted.key=value` overrides, values parsed as JSON where possible,
4. the dedicated flags `--seed`, `--preset` and `--output-dir`.

The output directory falls back to `VJF_OUTPUT_DIR` and then to `vjf-output`.
"""

from __future__ import annotations

import hashlib
import json
import os
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from boltons.dictutils import FrozenDict
from boltons.iterutils import default_enter, get_path, remap
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from vjf.errors import ConfigurationError
from vjf.filtering.config import TrainConfig
from vjf.generative.observation import ObservationKind
from vjf.recognition.network import RecognitionActivation
from vjf.simulators.observations import DEFAULT_MAX_RATE
from vjf.simulators.spec import SimSpec
from vjf.simulators.systems import DynamicalSystem
from vjf.simulators.trajectory import read_manifest

OUTPUT_DIR_VARIABLE = "VJF_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = "vjf-output"
DEFAULT_PRESET = "desk"


class Command(str, Enum):
    SIMULATE = "simulate"
    FILTER = "filter"
    PREDICT = "predict"
    PORTRAIT = "portrait"
    EVAL = "eval"
    BENCH = "bench"


def _frozen(**entries) -> FrozenDict:
    return FrozenDict(entries)


PRESETS = FrozenDict(
    {
        "desk": _frozen(
            **{
                "ring": _frozen(
                    simulation=_frozen(n_sequences=20, n_steps=500),
                    model=_frozen(n=50, m=2, q=100, r=20),
                    train=_frozen(warm_start_passes=4, learning_rate=3e-3),
                ),
                "fhn": _frozen(
                    simulation=_frozen(n_sequences=20, n_steps=1000),
                    model=_frozen(n=50, m=2, q=100, r=20),
                    predict=_frozen(horizon=1000, holdout=100, n_trials=200),
                ),
                "lorenz": _frozen(
                    simulation=_frozen(n_sequences=50, n_steps=3000),
                    model=_frozen(n=50, m=3, q=100, r=20, kind="gaussian"),
                    predict=_frozen(horizon=2000, holdout=2000, n_trials=20, reset_every=500),
                ),
                "switching-lds": _frozen(
                    simulation=_frozen(n_sequences=1, n_steps=6000),
                    model=_frozen(n=20, m=2, q=50, r=20, kind="gaussian"),
                ),
                "bistable": _frozen(
                    simulation=_frozen(n_sequences=20, n_steps=500),
                    model=_frozen(n=50, m=2, q=100, r=20),
                ),
            }
        ),
        "full": _frozen(
            **{
                "ring": _frozen(
                    simulation=_frozen(n_sequences=100, n_steps=1000),
                    model=_frozen(n=200, m=2, q=100, r=20),
                ),
                "fhn": _frozen(
                    simulation=_frozen(n_sequences=100, n_steps=1000),
                    model=_frozen(n=200, m=2, q=100, r=20),
                    predict=_frozen(horizon=1000, holdout=100, n_trials=200),
                ),
                "lorenz": _frozen(
                    simulation=_frozen(n_sequences=216, n_steps=3000),
                    model=_frozen(n=200, m=3, q=100, r=20, kind="gaussian"),
                    predict=_frozen(horizon=2000, holdout=2000, n_trials=100, reset_every=500),
                ),
            }
        ),
    }
)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class ModelSection(_Section):
    """
    Model dimensions and initialization.

    `n`, `m` and `p` left unset are taken from the data manifest or the simulated system.
    """

    n: Optional[int] = Field(None, gt=0)
    m: Optional[int] = Field(None, gt=0)
    p: Optional[int] = Field(None, ge=0)
    q: int = Field(100, gt=0)
    r: int = Field(20, gt=0)
    kind: ObservationKind = ObservationKind.POISSON
    activation: RecognitionActivation = RecognitionActivation.TANH
    center_box: Tuple[float, float] = (-2.0, 2.0)
    obs_noise_std: float = Field(0.1, ge=0)
    loading_norm: Optional[float] = Field(None, gt=0)
    max_rate: float = Field(DEFAULT_MAX_RATE, gt=0)
    fa_init: bool = True

    @field_validator("center_box")
    @classmethod
    def _ordered_box(cls, box: Tuple[float, float]) -> Tuple[float, float]:
        if not box[0] < box[1]:
            raise ValueError(f"center_box {box} must be (low, high) with low < high")
        return box


class PredictSection(_Section):
    """
    Prediction settings.

    The last `holdout` steps of the first sequence are withheld from filtering and scored
    against the rollout. With `reset_every`, the rollout restarts from the true state at that
    interval and spans the holdout.
    """

    horizon: int = Field(100, gt=0)
    holdout: int = Field(100, gt=0)
    n_trials: int = Field(20, gt=0)
    reset_every: Optional[int] = Field(None, gt=0)


class PortraitSection(_Section):
    resolution: int = Field(20, gt=1)
    box: Optional[List[Tuple[float, float]]] = None
    tol: float = Field(1e-6, gt=0)
    max_iter: int = Field(100, gt=0)
    max_posterior_seeds: int = Field(100, ge=0)
    discrete: bool = False
    align: bool = True


class DekfSection(_Section):
    param_walk_var: float = Field(1e-5, ge=0)
    param_init_var: float = Field(0.1, ge=0)
    process_noise_var: float = Field(1e-4, gt=0)


class BenchSection(_Section):
    n_steps: int = Field(5000, ge=4)
    spike_probability: float = Field(0.04, gt=0, lt=1)
    confidence: float = Field(0.95, gt=0, lt=1)


class RunConfig(_Section):
    """
    Everything one `vjf` invocation needs.

    Attributes:
        command (Command): Subcommand to run.
        preset (str, optional): Preset scale, `desk` or `full`.
        simulation (SimSpec, optional): Data to simulate. Ignored when `data` is set, except
            by `simulate`.
        data (Path, optional): Directory of trajectories written by `simulate`.
        checkpoint (Path, optional): Model checkpoint to use instead of filtering.
        model (ModelSection): Model dimensions and initialization.
        train (TrainConfig): Training settings.
        predict (PredictSection): Prediction settings.
        portrait (PortraitSection): Phase portrait settings.
        dekf (DekfSection): Dual EKF baseline settings.
        bench (BenchSection): Timing benchmark settings.
        output_dir (Path): Directory receiving the artifacts.
        seed (int): Root seed of every random stream of the run.
        binary (bool): Whether `simulate` also writes binary trajectories.
    """

    command: Command
    preset: Optional[str] = DEFAULT_PRESET
    simulation: Optional[SimSpec] = None
    data: Optional[Path] = None
    checkpoint: Optional[Path] = None
    model: ModelSection = Field(default_factory=ModelSection)
    train: TrainConfig = Field(default_factory=TrainConfig)
    predict: PredictSection = Field(default_factory=PredictSection)
    portrait: PortraitSection = Field(default_factory=PortraitSection)
    dekf: DekfSection = Field(default_factory=DekfSection)
    bench: BenchSection = Field(default_factory=BenchSection)
    output_dir: Path = Path(DEFAULT_OUTPUT_DIR)
    seed: int = 0
    binary: bool = False

    @field_validator("preset")
    @classmethod
    def _known_preset(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in PRESETS:
            raise ValueError(f"unknown preset {value}, expected one of {sorted(PRESETS)}")
        return value

    @field_validator("data", "checkpoint")
    @classmethod
    def _path_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"{value} does not exist")
        return value


def _thaw(value: Any) -> Any:
    """Deep copy of nested mappings as plain dicts."""

    def enter(path, key, item):
        if isinstance(item, Mapping):
            return {}, iter(item.items())
        return default_enter(path, key, item)

    if not isinstance(value, (Mapping, list, tuple)):
        return value
    return remap(value, enter=enter)


def _merge(base: Dict[str, Any], update: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in update.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = _thaw(value)
    return merged


def parse_override(override: str) -> Tuple[List[str], Any]:
    """
    Splits a `dotted.key=value` override. The value is parsed as JSON, or kept as a string
    when it is not valid JSON.

    Raises:
        ConfigurationError: If there is no `=` or the key is empty.
    """
    key, separator, text = override.partition("=")
    if not separator or not key.strip():
        raise ConfigurationError(f"override {override!r} is not of the form key=value")
    try:
        value = json.loads(text)
    except json.JSONDecodeError:
        value = text
    return key.strip().split("."), value


def _set_path(document: Dict[str, Any], path: List[str], value: Any) -> None:
    parent = document
    for depth, key in enumerate(path[:-1]):
        parent = parent.setdefault(key, {})
        if not isinstance(parent, dict):
            raise ConfigurationError(
                "cannot set a key below a value", key_path=".".join(path[: depth + 1])
            )
    parent[path[-1]] = value


def _preset_layer(layered: Mapping[str, Any]) -> Dict[str, Any]:
    preset = layered.get("preset", DEFAULT_PRESET)
    system = get_path(layered, ("simulation", "system"), default=None)
    if preset is None or preset not in PRESETS:
        return {}
    return _thaw(PRESETS[preset].get(system, {}))


def _validation_key_path(error: ValidationError) -> Optional[str]:
    errors = error.errors()
    if not errors:
        return None
    return ".".join(str(part) for part in errors[0]["loc"]) or None


def parse_config(
    document: Optional[Mapping[str, Any]] = None,
    overrides: Sequence[str] = (),
    command: Optional[str] = None,
    seed: Optional[int] = None,
    preset: Optional[str] = None,
    output_dir: Optional[str] = None,
    env: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """
    Builds a validated run configuration.

    Args:
        document (Mapping[str, Any], optional): Parsed configuration document.
        overrides (Sequence[str]): `dotted.key=value` overrides.
        command (str, optional): Subcommand, overriding `command` in the document.
        seed (int, optional): Root seed, overriding the document.
        preset (str, optional): Preset scale, overriding the document.
        output_dir (str, optional): Output directory, overriding the document.
        env (Mapping[str, str], optional): Environment. Default is `os.environ`.

    Returns:
        RunConfig: The configuration with the simulation resolved against its system and the
        model dimensions filled in.

    Raises:
        ConfigurationError: If a key is unknown, a value is invalid or the dimensions
            disagree. `key_path` names the offending key, for example `model.n`.

    Examples:
        >>> config = parse_config({"simulation": {"system": "ring"}}, command="filter")
        >>> config.simulation.dt, config.model.r, config.model.q
        (0.1, 20, 100)
    """
    env = os.environ if env is None else env
    layered = _thaw(document or {})
    for override in overrides:
        path, value = parse_override(override)
        _set_path(layered, path, value)
    for key, value in (("command", command), ("seed", seed), ("preset", preset)):
        if value is not None:
            layered[key] = value
    if output_dir is not None:
        layered["output_dir"] = output_dir
    elif "output_dir" not in layered:
        layered["output_dir"] = env.get(OUTPUT_DIR_VARIABLE, DEFAULT_OUTPUT_DIR)

    raw = _merge(_preset_layer(layered), layered)
    root_seed = raw.setdefault("seed", 0)
    if isinstance(raw.get("simulation"), dict):
        raw["simulation"].setdefault("seed", root_seed)
    if isinstance(raw.setdefault("train", {}), dict):
        raw["train"].setdefault("seed", root_seed)

    try:
        config = RunConfig.model_validate(raw)
    except ValidationError as error:
        raise ConfigurationError(
            f"invalid configuration: {error}", key_path=_validation_key_path(error)
        )
    return _resolve(config)


def _resolve(config: RunConfig) -> RunConfig:
    simulation = config.simulation.resolved() if config.simulation else None
    model = config.model
    known: Dict[str, int] = {}
    if config.data is not None:
        known = dict(read_manifest(config.data)["dimensions"])
    elif simulation is not None:
        system = DynamicalSystem.create(simulation.system, simulation.parameters)
        known = {"m": system.latent_dim, "p": system.input_dim}

    if "p" in known and model.p is not None and model.p != known["p"]:
        raise ConfigurationError(
            f"model input dimension {model.p} does not match the data input dimension "
            f"{known['p']}",
            key_path="model.p",
        )
    if config.data is not None and model.n is not None and model.n != known["n"]:
        raise ConfigurationError(
            f"model observation dimension {model.n} does not match the data dimension "
            f"{known['n']}",
            key_path="model.n",
        )
    updates = {
        "n": model.n if model.n is not None else known.get("n"),
        "m": model.m if model.m is not None else known.get("m", 2),
        "p": model.p if model.p is not None else known.get("p", 0),
    }
    if updates["n"] is None and config.command != Command.PORTRAIT:
        raise ConfigurationError("the observation dimension is required", key_path="model.n")
    return config.model_copy(
        update={"simulation": simulation, "model": model.model_copy(update=updates)}
    )


def config_hash(config: RunConfig) -> str:
    """SHA-256 of the canonical configuration, ignoring the output directory."""
    canonical = json.dumps(
        config.model_dump(mode="json", exclude={"output_dir"}), sort_keys=True
    )
    return hashlib.sha256(canonical.encode()).hexdigest()


def read_config_document(path: str) -> Dict[str, Any]:
    """
    Reads a JSON configuration document.

    Raises:
        ConfigurationError: If the file is missing, is not JSON or is not an object.
    """
    try:
        document = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigurationError(f"configuration file {path} does not exist", key_path="config")
    except json.JSONDecodeError as error:
        raise ConfigurationError(f"configuration file {path} is not JSON: {error}")
    if not isinstance(document, dict):
        raise ConfigurationError(f"configuration file {path} must hold a JSON object")
    return document
