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
The `vjf` subcommands.

Every run writes its artifacts into `RunConfig.output_dir` together with
`run_manifest.json`, which records the code version, the seed, the configuration and its
hash, and the artifact names. A failed run writes `error.json` instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from logging import Logger, getLogger
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from vjf._sdk import __version__
from vjf.analysis.alignment import AffineMap, affine_align
from vjf.analysis.metrics import (
    per_bin_log_likelihood,
    plateau_reached,
    prediction_rmse,
    timing_regression,
)
from vjf.analysis.phase_portrait import phase_portrait
from vjf.baselines.dual_ekf import init_dekf, run_dekf
from vjf.cli.config import Command, RunConfig, config_hash
from vjf.errors import ConfigurationError, DomainError, NumericalError, ShapeError
from vjf.filtering.bundle import ModelBundle
from vjf.filtering.checkpoint import load_checkpoint, save_checkpoint
from vjf.filtering.initialization import init_bundle
from vjf.filtering.objective import FilterState
from vjf.filtering.online import FilterResult, filter_online, filter_step, init_optimizer
from vjf.filtering.prediction import (
    infer_posteriors,
    one_step_prediction,
    predict_rollout,
    predict_with_resets,
)
from vjf.generative.observation import ObservationKind, ObservationParams
from vjf.numerics.diag_gaussian import DiagGaussian
from vjf.simulators.observations import generate_observations, random_observation_params
from vjf.simulators.simulation import simulate
from vjf.simulators.trajectory import (
    Trajectory,
    read_manifest,
    read_trajectories,
    write_binary_trajectory,
    write_trajectories,
)

RUN_MANIFEST_NAME = "run_manifest.json"
ERROR_NAME = "error.json"
DATA_DIR_NAME = "data"
REFERENCE_MS_PER_STEP = 1.1

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIGURATION = 2
EXIT_NUMERICAL = 3

# Stream roles of SeedSequence(config.seed).spawn(); the order is fixed.
_STREAMS = ("observation_params", "observation_sampling", "model_init", "prediction", "portrait")
_OBSERVATION_BLOCKS = ("observation.loading", "observation.bias", "observation.log_obs_noise_var")
_FMT = "%.17g"


def _streams(config: RunConfig) -> Dict[str, np.random.Generator]:
    seeds = np.random.SeedSequence(config.seed).spawn(len(_STREAMS))
    return {role: np.random.default_rng(seed) for role, seed in zip(_STREAMS, seeds)}


@dataclass
class Dataset:
    """
    Observed sequences with their ground truth.

    Args:
        trajectories (List[Trajectory]): Sequences with observations. Latents hold the truth.
        observation (ObservationParams, optional): The observation map that generated the data,
            when known.
    """

    trajectories: List[Trajectory]
    observation: Optional[ObservationParams] = None

    @property
    def sequences(self) -> List[Tuple[np.ndarray, Optional[np.ndarray]]]:
        return [
            (t.observations, t.inputs if t.input_dim else None) for t in self.trajectories
        ]


def observation_to_dict(params: ObservationParams) -> Dict[str, Any]:
    return {
        "kind": params.kind.value,
        "loading": np.asarray(params.loading).tolist(),
        "bias": np.asarray(params.bias).tolist(),
        "log_obs_noise_var": (
            None if params.log_obs_noise_var is None else float(params.log_obs_noise_var)
        ),
    }


def observation_from_dict(document: Dict[str, Any]) -> ObservationParams:
    noise = document.get("log_obs_noise_var")
    return ObservationParams(
        np.array(document["loading"], dtype=float),
        np.array(document["bias"], dtype=float),
        document["kind"],
        None if noise is None else np.array(noise, dtype=float),
    )


def simulate_dataset(
    config: RunConfig, streams: Dict[str, np.random.Generator], logger: Logger
) -> Dataset:
    """
    Simulates the configured system and samples observations through a random loading.

    Raises:
        ConfigurationError: If there is no simulation section.
    """
    if config.simulation is None:
        raise ConfigurationError("a simulation section is required", key_path="simulation")
    trajectories = simulate(config.simulation, logger=logger)
    params = random_observation_params(
        config.model.n,
        trajectories[0].latent_dim,
        streams["observation_params"],
        config.model.kind,
        config.model.obs_noise_std,
        config.model.loading_norm,
    )
    observed, params = generate_observations(
        trajectories, params, streams["observation_sampling"], config.model.max_rate
    )
    return Dataset(observed, params)


def load_dataset(
    config: RunConfig, streams: Dict[str, np.random.Generator], logger: Logger
) -> Dataset:
    """Reads `config.data`, or simulates when no data directory is given."""
    if config.data is None:
        return simulate_dataset(config, streams, logger)
    trajectories = read_trajectories(config.data)
    if any(t.observations is None for t in trajectories):
        raise ConfigurationError(f"{config.data} holds no observations", key_path="data")
    manifest = read_manifest(config.data)
    observation = manifest.get("observation")
    logger.info(f"Read {len(trajectories)} trajectories from {config.data}")
    return Dataset(trajectories, observation_from_dict(observation) if observation else None)


def _initial_bundle(
    config: RunConfig, dataset: Dataset, rng: np.random.Generator, logger: Logger
) -> ModelBundle:
    model = config.model
    sample = None
    if model.fa_init:
        sample = np.concatenate([t.observations for t in dataset.trajectories])
    return init_bundle(
        model.n,
        model.m,
        model.p,
        model.q,
        model.r,
        rng,
        model.kind,
        model.activation,
        model.center_box,
        sample,
        logger,
    )


def _alignment(
    means: List[np.ndarray], truths: List[np.ndarray], logger: Logger
) -> Optional[AffineMap]:
    inferred = np.concatenate(means)
    reference = np.concatenate(truths)
    if inferred.shape != reference.shape:
        return None
    try:
        return affine_align(inferred, reference)
    except DomainError as error:
        logger.warning(f"Skipping alignment to the ground truth: {error}")
        return None


def _write_table(path: Path, header: List[str], rows: np.ndarray) -> Path:
    np.savetxt(path, rows, fmt=_FMT, delimiter=",", header=",".join(header), comments="")
    return path


def _write_json(path: Path, document: Any) -> Path:
    path.write_text(json.dumps(document, indent=2, sort_keys=True))
    return path


def _latent_columns(prefix: str, m: int) -> List[str]:
    return [f"{prefix}_{i + 1}" for i in range(m)]


def run_simulate(config: RunConfig, logger: Logger) -> List[Path]:
    """Writes simulated trajectories and their manifest into `<output_dir>/data`."""
    streams = _streams(config)
    dataset = simulate_dataset(config, streams, logger)
    directory = config.output_dir / DATA_DIR_NAME
    manifest = write_trajectories(
        dataset.trajectories,
        directory,
        {
            "simulation": config.simulation.model_dump(mode="json"),
            "observation": observation_to_dict(dataset.observation),
            "seed": config.seed,
            "config_hash": config_hash(config),
            "version": __version__,
        },
    )
    artifacts = [manifest] + [directory / name for name in read_manifest(directory)["files"]]
    if config.binary:
        for index, trajectory in enumerate(dataset.trajectories):
            path = directory / f"trajectory_{index:04d}.bin"
            write_binary_trajectory(trajectory, path)
            artifacts.append(path)
    logger.info(f"Wrote {len(dataset.trajectories)} trajectories to {directory}")
    return artifacts


def _write_diagnostics(path: Path, result: FilterResult) -> Path:
    rows = np.array(
        [
            [t, d.reconstruction_ll, d.dynamics_ll, d.entropy, d.objective, d.wall_time * 1e3]
            for t, d in enumerate(result.diagnostics)
        ]
    )
    header = ["t", "recon_ll", "dyn_ll", "entropy", "elbo", "wall_ms"]
    return _write_table(path, header, rows)


def _write_posteriors(path: Path, result: FilterResult) -> Path:
    m = result.bundle.latent_dim
    rows = np.concatenate(
        [
            np.column_stack([np.full(len(mean), index), np.arange(len(mean)), mean, variance])
            for index, (mean, variance) in enumerate(zip(result.means, result.variances))
        ]
    )
    header = ["sequence", "t"] + _latent_columns("mu", m) + _latent_columns("s", m)
    return _write_table(path, header, rows)


def _plateaus(result: FilterResult) -> Dict[str, Optional[bool]]:
    series = {
        "recon_ll": [d.reconstruction_ll for d in result.diagnostics],
        "dyn_ll": [d.dynamics_ll for d in result.diagnostics],
        "entropy": [d.entropy for d in result.diagnostics],
    }
    plateaus: Dict[str, Optional[bool]] = {}
    for name, values in series.items():
        try:
            plateaus[name] = plateau_reached(values)
        except DomainError:
            plateaus[name] = None
    return plateaus


def run_filter(config: RunConfig, logger: Logger) -> List[Path]:
    """
    Learns the model online and writes the checkpoint, per-step diagnostics, posterior means
    and a summary with plateau tests. When the truth has matching dimension the summary also
    holds the alignment of the learned model's posterior means, recomputed over every
    sequence with the final parameters, and the RMSE of the online means.
    """
    streams = _streams(config)
    dataset = load_dataset(config, streams, logger)
    bundle = _initial_bundle(config, dataset, streams["model_init"], logger)
    result = filter_online(dataset.sequences, bundle, config.train, logger=logger)

    out = config.output_dir
    checkpoint = out / "checkpoint.json"
    save_checkpoint(result.bundle, checkpoint)
    summary: Dict[str, Any] = {
        "steps": len(result.diagnostics),
        "final_elbo": result.diagnostics[-1].objective,
        "plateau": _plateaus(result),
        "rejected_updates": sum(d.update_rejected for d in result.diagnostics),
        "per_bin_log_likelihood": float(
            np.mean(
                [
                    per_bin_log_likelihood(t.observations, mean, result.bundle.observation)
                    for t, mean in zip(dataset.trajectories, result.means)
                ]
            )
        ),
    }
    truths = [t.latents for t in dataset.trajectories]
    refiltered = [
        infer_posteriors(observations, inputs, result.bundle)[0]
        for observations, inputs in dataset.sequences
    ]
    alignment = _alignment(refiltered, truths, logger)
    online = _alignment(result.means, truths, logger)
    if alignment is not None:
        truth = np.concatenate(truths)
        aligned = alignment.apply(np.concatenate(refiltered))
        summary["alignment"] = {
            "residual_rms": alignment.residual_rms,
            "condition_number": alignment.condition_number,
            "posterior_rmse": float(np.sqrt(np.mean((aligned - truth) ** 2))),
        }
        if online is not None:
            aligned_online = online.apply(np.concatenate(result.means))
            summary["alignment"]["online_posterior_rmse"] = float(
                np.sqrt(np.mean((aligned_online - truth) ** 2))
            )
    return [
        checkpoint,
        _write_diagnostics(out / "diagnostics.csv", result),
        _write_posteriors(out / "posterior_means.csv", result),
        _write_json(out / "summary.json", summary),
    ]


def _split_for_prediction(
    config: RunConfig, dataset: Dataset
) -> Tuple[List[Tuple[np.ndarray, Optional[np.ndarray]]], int]:
    sequences = dataset.sequences
    length = len(sequences[0][0])
    holdout = config.predict.holdout
    if holdout >= length:
        raise ConfigurationError(
            f"holdout {holdout} leaves nothing to filter in a sequence of {length} steps",
            key_path="predict.holdout",
        )
    observations, inputs = sequences[0]
    prefix = length - holdout
    sequences[0] = (observations[:prefix], None if inputs is None else inputs[:prefix])
    return sequences, prefix


def _prefix_posteriors(
    config: RunConfig,
    dataset: Dataset,
    streams: Dict[str, np.random.Generator],
    logger: Logger,
) -> Tuple[ModelBundle, FilterState, np.ndarray, int]:
    """The model, the posterior at the end of the filtered prefix and the prefix means."""
    sequences, prefix = _split_for_prediction(config, dataset)
    if config.checkpoint is not None:
        bundle = load_checkpoint(config.checkpoint)
        means, variances = infer_posteriors(sequences[0][0], sequences[0][1], bundle)
        state = FilterState(DiagGaussian(means[-1], variances[-1]), prefix)
        return bundle, state, means, prefix
    bundle = _initial_bundle(config, dataset, streams["model_init"], logger)
    result = filter_online(sequences, bundle, config.train, logger=logger)
    return result.bundle, result.final_states[0], result.means[0], prefix


def run_predict(config: RunConfig, logger: Logger) -> List[Path]:
    """
    Rolls the learned model forward from the end of the filtered prefix of the first
    sequence and scores it against the withheld steps.
    """
    streams = _streams(config)
    dataset = load_dataset(config, streams, logger)
    bundle, state, means, prefix = _prefix_posteriors(config, dataset, streams, logger)
    truth = dataset.trajectories[0].latents
    inputs = dataset.trajectories[0].inputs if bundle.input_dim else None
    alignment = _alignment([means], [truth[:prefix]], logger)
    settings = config.predict

    if settings.reset_every is not None:
        if alignment is None:
            raise ConfigurationError(
                "prediction with resets needs ground truth of the model's latent dimension",
                key_path="predict.reset_every",
            )
        predicted = predict_with_resets(
            truth[prefix:],
            bundle,
            settings.reset_every,
            settings.n_trials,
            alignment,
            streams["prediction"],
            None if inputs is None else inputs[prefix:],
        )
    else:
        rollout_inputs = None
        if inputs is not None:
            rollout_inputs = np.zeros((settings.horizon, bundle.input_dim))
            known = inputs[prefix - 1 : prefix - 1 + settings.horizon]
            rollout_inputs[: len(known)] = known
        rollout = predict_rollout(
            state,
            bundle,
            settings.horizon,
            settings.n_trials,
            streams["prediction"],
            rollout_inputs,
            sample_observations=False,
        )
        predicted = rollout.latents
        if alignment is not None:
            predicted = alignment.apply(predicted)

    out = config.output_dir
    n_trials, horizon, m = predicted.shape
    rows = np.column_stack(
        [
            np.repeat(np.arange(n_trials), horizon),
            np.tile(np.arange(1, horizon + 1), n_trials),
            predicted.reshape(-1, m),
        ]
    )
    artifacts = [_write_table(out / "rollout.csv", ["trial", "k"] + _latent_columns("x", m), rows)]
    if alignment is not None:
        scored = min(horizon, len(truth) - prefix)
        mean, stderr = prediction_rmse(predicted[:, :scored], truth[prefix : prefix + scored])
        table = np.column_stack([np.arange(1, scored + 1), mean, stderr])
        artifacts.append(_write_table(out / "rmse.csv", ["k", "rmse", "stderr"], table))
        artifacts.append(
            _write_json(
                out / "prediction_summary.json",
                {
                    "scored_steps": scored,
                    "truth_std": np.std(truth, axis=0).tolist(),
                    "final_rmse": float(mean[-1]),
                },
            )
        )
    return artifacts


def _portrait_box(config: RunConfig, means: Optional[np.ndarray], m: int):
    if config.portrait.box is not None:
        if len(config.portrait.box) != m:
            raise ConfigurationError(
                f"box has {len(config.portrait.box)} intervals for {m} latent dimensions",
                key_path="portrait.box",
            )
        return [tuple(bounds) for bounds in config.portrait.box]
    if means is None:
        return [tuple(config.model.center_box)] * m
    low, high = means.min(axis=0), means.max(axis=0)
    padding = np.maximum(0.1 * (high - low), 0.5)
    return [(float(lo), float(hi)) for lo, hi in zip(low - padding, high + padding)]


def _portrait_model(
    config: RunConfig, streams: Dict[str, np.random.Generator], logger: Logger
) -> Tuple[ModelBundle, Optional[Dataset], Optional[List[np.ndarray]]]:
    has_data = config.data is not None or config.simulation is not None
    dataset = load_dataset(config, streams, logger) if has_data else None
    if config.checkpoint is not None:
        bundle = load_checkpoint(config.checkpoint)
        if dataset is None:
            return bundle, None, None
        means = [
            infer_posteriors(observations, inputs, bundle)[0]
            for observations, inputs in dataset.sequences
        ]
        return bundle, dataset, means
    if dataset is None:
        raise ConfigurationError(
            "portrait needs a checkpoint or data to learn from", key_path="checkpoint"
        )
    bundle = _initial_bundle(config, dataset, streams["model_init"], logger)
    result = filter_online(dataset.sequences, bundle, config.train, logger=logger)
    return result.bundle, dataset, result.means


def run_portrait(config: RunConfig, logger: Logger) -> List[Path]:
    """
    Writes the velocity lattice and fixed points of the learned dynamics, and their aligned
    version when the truth is available.
    """
    streams = _streams(config)
    bundle, dataset, means = _portrait_model(config, streams, logger)
    stacked = None if means is None else np.concatenate(means)
    settings = config.portrait
    portrait = phase_portrait(
        bundle.dynamics,
        _portrait_box(config, stacked, bundle.latent_dim),
        settings.resolution,
        posterior_means=stacked,
        max_posterior_seeds=settings.max_posterior_seeds,
        tol=settings.tol,
        max_iter=settings.max_iter,
        discrete=settings.discrete,
        rng=streams["portrait"],
        logger=logger,
    )
    artifacts = list(portrait.write(config.output_dir))
    if settings.align and dataset is not None:
        alignment = _alignment(means, [t.latents for t in dataset.trajectories], logger)
        if alignment is not None:
            aligned = portrait.aligned(alignment)
            artifacts.extend(aligned.write(config.output_dir, prefix="portrait_aligned"))
    return artifacts


def _vjf_errors(
    config: RunConfig,
    dataset: Dataset,
    streams: Dict[str, np.random.Generator],
    logger: Logger,
) -> np.ndarray:
    """One-step prediction RMSE of the filter with the observation map fixed at the truth."""
    observations, inputs = dataset.sequences[0]
    bundle = _initial_bundle(config, dataset, streams["model_init"], logger)
    bundle = replace(bundle, observation=dataset.observation)
    frozen = sorted(set(config.train.frozen) | set(_OBSERVATION_BLOCKS))
    train = config.train.model_copy(update={"frozen": frozen})
    optimizer = init_optimizer(bundle, train)
    rng = np.random.default_rng(np.random.SeedSequence(train.seed).spawn(1)[0])
    state = FilterState.initial(bundle.latent_dim)
    errors = np.zeros(len(observations))
    for t, y in enumerate(observations):
        u_prev = None
        if inputs is not None:
            u_prev = inputs[t - 1] if t > 0 else np.zeros(bundle.input_dim)
        predicted = one_step_prediction(state, u_prev, bundle)
        errors[t] = np.sqrt(np.mean((predicted - y) ** 2))
        state, bundle, optimizer, _ = filter_step(
            y, u_prev, state, bundle, optimizer, train, rng, logger
        )
    return errors


def run_eval(config: RunConfig, logger: Logger) -> List[Path]:
    """
    Compares the one-step prediction error of the filter and the dual EKF on the first
    sequence, both given the true Gaussian observation map.
    """
    streams = _streams(config)
    dataset = load_dataset(config, streams, logger)
    if dataset.observation is None:
        raise ConfigurationError(
            "eval needs the true observation map in the data manifest", key_path="data"
        )
    if dataset.observation.kind != ObservationKind.GAUSSIAN:
        raise ConfigurationError("eval needs gaussian observations", key_path="model.kind")
    if dataset.observation.latent_dim != config.model.m:
        raise ConfigurationError(
            f"eval needs m={dataset.observation.latent_dim} to use the true observation map",
            key_path="model.m",
        )
    vjf_errors = _vjf_errors(config, dataset, streams, logger)
    observations = dataset.sequences[0][0]
    dekf = init_dekf(
        config.model.m,
        param_walk_var=config.dekf.param_walk_var,
        param_init_var=config.dekf.param_init_var,
        process_noise_var=config.dekf.process_noise_var,
    )
    _, predictions, _ = run_dekf(observations, dekf, dataset.observation, logger)
    dekf_errors = np.sqrt(np.mean((predictions - observations) ** 2, axis=1))

    out = config.output_dir
    table = np.column_stack([np.arange(len(observations)), vjf_errors, dekf_errors])
    summary = {
        "median_vjf_error": float(np.median(vjf_errors)),
        "median_dekf_error": float(np.median(dekf_errors)),
        "steps": len(observations),
    }
    return [
        _write_table(out / "eval.csv", ["t", "vjf_error", "dekf_error"], table),
        _write_json(out / "eval_summary.json", summary),
    ]


def run_bench(config: RunConfig, logger: Logger) -> List[Path]:
    """
    Times the filter on a stream of random spikes and regresses step time on step index.
    """
    streams = _streams(config)
    model, settings = config.model, config.bench
    rng = streams["observation_sampling"]
    spikes = (rng.random((settings.n_steps, model.n)) < settings.spike_probability).astype(float)
    inputs = np.zeros((settings.n_steps, model.p)) if model.p else None
    bundle = init_bundle(
        model.n, model.m, model.p, model.q, model.r, streams["model_init"], model.kind
    )
    train = config.train.model_copy(update={"record_wall_time": True})
    result = filter_online([(spikes, inputs)], bundle, train, logger=logger)
    report = timing_regression([d.wall_time for d in result.diagnostics], settings.confidence)
    document = report.to_dict()
    document.update(
        {
            "dimensions": bundle.dimensions,
            "n_steps": settings.n_steps,
            "reference_ms_per_step": REFERENCE_MS_PER_STEP,
        }
    )
    logger.info(f"Median step time {document['median_ms']:.3f} ms over {settings.n_steps} steps")
    return [_write_json(config.output_dir / "bench.json", document)]


_COMMANDS: Dict[Command, Callable[[RunConfig, Logger], List[Path]]] = {
    Command.SIMULATE: run_simulate,
    Command.FILTER: run_filter,
    Command.PREDICT: run_predict,
    Command.PORTRAIT: run_portrait,
    Command.EVAL: run_eval,
    Command.BENCH: run_bench,
}


def error_document(error: Exception) -> Dict[str, Any]:
    """The machine-readable description of a failed run."""
    document = {"error": type(error).__name__, "message": str(error)}
    if isinstance(error, ConfigurationError):
        document["key_path"] = error.key_path
    elif isinstance(error, NumericalError):
        document["component"] = error.component
    return document


def write_error(output_dir: Path, error: Exception) -> Path:
    output_dir.mkdir(parents=True, exist_ok=True)
    return _write_json(output_dir / ERROR_NAME, error_document(error))


def run(config: RunConfig, logger: Logger = getLogger(__name__)) -> int:
    """
    Runs the configured subcommand.

    Args:
        config (RunConfig): Validated configuration from `parse_config`.
        logger (Logger): Logger for progress messages. Default is the module logger.

    Returns:
        int: Exit status: 0 on success, 2 for a configuration error, 3 for a numerical,
        domain or shape error and 1 for any other failure. On failure `error.json` is written
        to the output directory.
    """
    config.output_dir.mkdir(parents=True, exist_ok=True)
    try:
        artifacts = _COMMANDS[config.command](config, logger)
    except ConfigurationError as error:
        logger.error(f"Configuration error: {error}")
        write_error(config.output_dir, error)
        return EXIT_CONFIGURATION
    except (NumericalError, DomainError, ShapeError) as error:
        logger.error(f"{type(error).__name__}: {error}")
        write_error(config.output_dir, error)
        return EXIT_NUMERICAL
    except Exception as error:
        logger.exception(f"{config.command.value} failed")
        write_error(config.output_dir, error)
        return EXIT_FAILURE
    _write_json(
        config.output_dir / RUN_MANIFEST_NAME,
        {
            "version": __version__,
            "command": config.command.value,
            "seed": config.seed,
            "config_hash": config_hash(config),
            "config": config.model_dump(mode="json", exclude={"output_dir"}),
            "artifacts": sorted(
                str(path.relative_to(config.output_dir)) for path in artifacts
            ),
        },
    )
    logger.info(f"{config.command.value} wrote {len(artifacts)} artifacts to {config.output_dir}")
    return EXIT_OK
