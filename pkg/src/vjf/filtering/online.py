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
Online joint filtering: posterior recursion and parameter learning in one pass over the data.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from logging import Logger, getLogger
from time import perf_counter
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from vjf.errors import ConfigurationError, NumericalError
from vjf.filtering.bundle import ModelBundle
from vjf.filtering.config import TrainConfig
from vjf.filtering.initialization import normalize_loading
from vjf.filtering.objective import FilterState, StepDiagnostics, grad_step_loss
from vjf.generative.dynamics import with_centers
from vjf.numerics.adam import AdamState, adam_update, clip_by_global_norm

OptimizerBank = Dict[str, AdamState]
ObservedSequence = Tuple[np.ndarray, Optional[np.ndarray]]

_LOADING = "observation.loading"
_CENTER_BLOCKS = ("dynamics.centers", "dynamics.log_inverse_widths")


@dataclass
class FilterResult:
    """
    Outcome of `filter_online`.

    Args:
        means (List[np.ndarray]): Posterior means per sequence, each of shape (T_i, m).
        variances (List[np.ndarray]): Posterior variances per sequence, each of shape (T_i, m).
        final_states (List[FilterState]): Last state of every sequence.
        bundle (ModelBundle): Parameters after the final update.
        optimizer (OptimizerBank): Adam states after the final update.
        diagnostics (List[StepDiagnostics]): One entry per time index, averaged over the
            sequences live at that index.
    """

    means: List[np.ndarray]
    variances: List[np.ndarray]
    final_states: List[FilterState]
    bundle: ModelBundle
    optimizer: OptimizerBank
    diagnostics: List[StepDiagnostics] = field(default_factory=list)


def init_optimizer(bundle: ModelBundle, config: TrainConfig) -> OptimizerBank:
    """
    Creates a fresh Adam state for every parameter block not listed in `config.frozen`.

    Raises:
        ConfigurationError: If `config.frozen` names a block the bundle does not have.
    """
    blocks = bundle.parameters()
    unknown = sorted(set(config.frozen) - set(blocks))
    if unknown:
        raise ConfigurationError(f"unknown frozen parameter blocks {unknown}", key_path="frozen")
    return {
        name: AdamState.fresh(value.shape, **config.adam_hyperparameters)
        for name, value in blocks.items()
        if name not in config.frozen
    }


def apply_gradients(
    bundle: ModelBundle,
    optimizer: OptimizerBank,
    gradients: Dict[str, np.ndarray],
    config: TrainConfig,
    logger: Logger = getLogger(__name__),
) -> Tuple[ModelBundle, OptimizerBank, bool]:
    """
    Clips the gradients of the trainable blocks and applies one Adam update to each.

    The loading matrix is column-normalized after the update whenever it is trainable. A
    non-finite gradient rejects the whole update.

    Returns:
        Tuple[ModelBundle, OptimizerBank, bool]: The updated bundle and optimizer bank, and
        whether the update was rejected.
    """
    trainable = {name: gradients[name] for name in optimizer}
    clipped, norm = clip_by_global_norm(trainable, config.clip_threshold)
    if not np.isfinite(norm):
        logger.warning(f"Rejected parameter update with gradient norm {norm}")
        return bundle, optimizer, True
    if norm > config.clip_threshold:
        logger.debug(f"Clipped gradient norm {norm:.4g} to {config.clip_threshold}")

    blocks = bundle.parameters()
    updated, new_optimizer = {}, {}
    try:
        for name, state in optimizer.items():
            updated[name], new_optimizer[name] = adam_update(blocks[name], clipped[name], state)
    except NumericalError as error:
        logger.warning(f"Rejected parameter update: {error}")
        return bundle, optimizer, True
    if _LOADING in updated:
        updated[_LOADING] = normalize_loading(updated[_LOADING])
    return bundle.replace_parameters(updated), new_optimizer, False


def _lockstep_update(
    batch: Sequence[Tuple[np.ndarray, Optional[np.ndarray], FilterState, np.random.Generator]],
    bundle: ModelBundle,
    optimizer: OptimizerBank,
    config: TrainConfig,
    logger: Logger,
) -> Tuple[List[FilterState], ModelBundle, OptimizerBank, StepDiagnostics]:
    start = perf_counter()
    rejected = False
    for _ in range(config.updates_per_step):
        gradient_sum: Dict[str, np.ndarray] = {}
        states, diagnostics = [], []
        for y, u_prev, state, rng in batch:
            gradients, _, state_new, diagnostic = grad_step_loss(
                y, u_prev, state, bundle, config, rng
            )
            for name, gradient in gradients.items():
                gradient_sum[name] = gradient_sum.get(name, 0.0) + gradient
            states.append(state_new)
            diagnostics.append(diagnostic)
        mean_gradients = {name: value / len(batch) for name, value in gradient_sum.items()}
        bundle, optimizer, step_rejected = apply_gradients(
            bundle, optimizer, mean_gradients, config, logger
        )
        rejected = rejected or step_rejected
    wall_time = perf_counter() - start if config.record_wall_time else 0.0
    summary = StepDiagnostics.mean(diagnostics)
    summary = StepDiagnostics(
        reconstruction_ll=summary.reconstruction_ll,
        dynamics_ll=summary.dynamics_ll,
        entropy=summary.entropy,
        penalty=summary.penalty,
        objective=summary.objective,
        wall_time=wall_time,
        update_rejected=rejected,
    )
    return states, bundle, optimizer, summary


def filter_step(
    y: np.ndarray,
    u_prev: Optional[np.ndarray],
    state: FilterState,
    bundle: ModelBundle,
    optimizer: OptimizerBank,
    config: TrainConfig,
    rng: np.random.Generator,
    logger: Logger = getLogger(__name__),
) -> Tuple[FilterState, ModelBundle, OptimizerBank, StepDiagnostics]:
    """
    Consumes one observation: updates the posterior and takes `config.updates_per_step`
    optimizer steps on the parameters.

    Args:
        y (np.ndarray): Observation at step t.
        u_prev (np.ndarray, optional): Input at step t - 1.
        state (FilterState): State after step t - 1.
        bundle (ModelBundle): Current parameters.
        optimizer (OptimizerBank): Adam states from `init_optimizer`.
        config (TrainConfig): Training settings.
        rng (np.random.Generator): Noise source of this sequence.
        logger (Logger): Logger for rejected updates and clipping. Default is the module logger.

    Returns:
        Tuple[FilterState, ModelBundle, OptimizerBank, StepDiagnostics]: New state, parameters,
        optimizer bank and diagnostics with the measured wall time.

    Raises:
        NumericalError: If the objective is not finite. The parameters are left unchanged.
    """
    states, bundle, optimizer, diagnostics = _lockstep_update(
        [(y, u_prev, state, rng)], bundle, optimizer, config, logger
    )
    return states[0], bundle, optimizer, diagnostics


def reseed_centers(
    bundle: ModelBundle, means: np.ndarray, rng: np.random.Generator
) -> ModelBundle:
    """
    Moves the basis centers onto posterior means visited so far.

    Centers are a random subset of `means`, drawn with replacement only when there are fewer
    means than basis functions. Inverse widths are re-derived from the new spacing. The basis
    weights are kept.

    Args:
        bundle (ModelBundle): Current parameters.
        means (np.ndarray): Posterior means of shape (K, m).
        rng (np.random.Generator): Random source for the subset.

    Returns:
        ModelBundle: The bundle with moved centers.
    """
    means = np.asarray(means, dtype=float)
    r = bundle.basis_count
    chosen = rng.choice(len(means), size=r, replace=len(means) < r)
    return ModelBundle(
        with_centers(bundle.dynamics, means[chosen]), bundle.observation, bundle.recognition
    )


def _check_sequences(
    sequences: Sequence[ObservedSequence], bundle: ModelBundle
) -> List[ObservedSequence]:
    if not sequences:
        raise ConfigurationError("at least one sequence is required", key_path="sequences")
    checked = []
    for index, (observations, inputs) in enumerate(sequences):
        observations = np.asarray(observations, dtype=float)
        if (
            observations.ndim != 2
            or len(observations) == 0
            or observations.shape[1] != bundle.observed_dim
        ):
            raise ConfigurationError(
                f"sequence {index} observations have shape {observations.shape}, expected "
                f"(T, {bundle.observed_dim})",
                key_path=f"sequences[{index}].Y",
            )
        if inputs is None:
            if bundle.input_dim:
                raise ConfigurationError(
                    f"sequence {index} has no inputs but the model expects p={bundle.input_dim}",
                    key_path=f"sequences[{index}].U",
                )
        else:
            inputs = np.asarray(inputs, dtype=float)
            if inputs.shape != (len(observations), bundle.input_dim):
                raise ConfigurationError(
                    f"sequence {index} inputs have shape {inputs.shape}, expected "
                    f"({len(observations)}, {bundle.input_dim})",
                    key_path=f"sequences[{index}].U",
                )
        checked.append((observations, inputs))
    return checked


def _previous_input(inputs: Optional[np.ndarray], t: int, input_dim: int) -> Optional[np.ndarray]:
    if inputs is None:
        return None
    return inputs[t - 1] if t > 0 else np.zeros(input_dim)


def _filter_pass(
    sequences: List[ObservedSequence],
    bundle: ModelBundle,
    optimizer: OptimizerBank,
    config: TrainConfig,
    rngs: List[np.random.Generator],
    reseed_rng: Optional[np.random.Generator],
    on_step: Optional[Callable[[int, StepDiagnostics], None]],
    logger: Logger,
):
    lengths = [len(observations) for observations, _ in sequences]
    states = [FilterState.initial(bundle.latent_dim) for _ in sequences]
    means = [np.zeros((length, bundle.latent_dim)) for length in lengths]
    variances = [np.zeros((length, bundle.latent_dim)) for length in lengths]
    diagnostics: List[StepDiagnostics] = []
    for t in range(max(lengths)):
        live = [i for i, length in enumerate(lengths) if length > t]
        batch = [
            (
                sequences[i][0][t],
                _previous_input(sequences[i][1], t, bundle.input_dim),
                states[i],
                rngs[i],
            )
            for i in live
        ]
        new_states, bundle, optimizer, diagnostic = _lockstep_update(
            batch, bundle, optimizer, config, logger
        )
        for i, state in zip(live, new_states):
            states[i] = state
            means[i][t] = state.posterior.mean
            variances[i][t] = state.posterior.variance
        diagnostics.append(diagnostic)
        if on_step is not None:
            on_step(t, diagnostic)
        if reseed_rng is not None and t + 1 == config.reseed_after:
            visited = np.concatenate([mean[: t + 1] for mean in means])
            bundle = reseed_centers(bundle, visited, reseed_rng)
            for name in _CENTER_BLOCKS:
                if name in optimizer:
                    optimizer[name] = AdamState.fresh(
                        optimizer[name].first_moment.shape, **config.adam_hyperparameters
                    )
            logger.info(f"Re-seeded basis centers from {len(visited)} posterior means")
        if t % 1000 == 0:
            logger.debug(f"Step {t}: objective {diagnostic.objective:.6g}, live {len(live)}")
    return FilterResult(means, variances, states, bundle, optimizer, diagnostics)


def filter_online(
    sequences: Sequence[ObservedSequence],
    bundle: ModelBundle,
    config: TrainConfig,
    rngs: Optional[Sequence[np.random.Generator]] = None,
    on_step: Optional[Callable[[int, StepDiagnostics], None]] = None,
    logger: Logger = getLogger(__name__),
) -> FilterResult:
    """
    Filters several sequences in lockstep while learning one shared set of parameters.

    At every time index each sequence still running contributes a gradient and the parameter
    update uses their mean. Sequences that end early drop out. Every sequence starts from
    `μ_0 = 0`, `s_0 = 1`, and the input paired with observation t is `U[t - 1]` (zero at t = 0).

    With `config.warm_start_passes` set, that many offline passes over the first
    `config.warm_start_steps` steps run first. Their posteriors are discarded but the learned
    parameters and optimizer state carry over into the online pass.

    Args:
        sequences (Sequence[Tuple[np.ndarray, Optional[np.ndarray]]]): `(Y, U)` pairs with
            `Y` of shape (T_i, n) and `U` of shape (T_i, p) or `None` when p = 0.
        bundle (ModelBundle): Initial parameters.
        config (TrainConfig): Training settings.
        rngs (Sequence[np.random.Generator], optional): One noise source per sequence. Default
            spawns them from `config.seed`.
        on_step (Callable[[int, StepDiagnostics], None], optional): Called after every time
            index of the online pass.
        logger (Logger): Logger for progress and numerical events. Default is the module logger.

    Returns:
        FilterResult: Posterior histories, final parameters and diagnostics.

    Raises:
        ConfigurationError: If a sequence does not match the model dimensions, or `rngs` does
            not hold one generator per sequence.
        NumericalError: If the objective is not finite.
    """
    sequences = _check_sequences(sequences, bundle)
    seeds = np.random.SeedSequence(config.seed).spawn(len(sequences) + 1)
    if rngs is None:
        rngs = [np.random.default_rng(seed) for seed in seeds[:-1]]
    elif len(rngs) != len(sequences):
        raise ConfigurationError(
            f"got {len(rngs)} generators for {len(sequences)} sequences", key_path="rngs"
        )
    rngs = list(rngs)
    optimizer = init_optimizer(bundle, config)

    for warm_pass in range(config.warm_start_passes):
        steps = config.warm_start_steps
        prefix = [
            (observations[:steps], None if inputs is None else inputs[:steps])
            for observations, inputs in sequences
        ]
        warm = _filter_pass(prefix, bundle, optimizer, config, rngs, None, None, logger)
        bundle, optimizer = warm.bundle, warm.optimizer
        logger.info(
            f"Warm start pass {warm_pass + 1}/{config.warm_start_passes}: final objective "
            f"{warm.diagnostics[-1].objective:.6g}"
        )

    reseed_rng = np.random.default_rng(seeds[-1]) if config.reseed_after else None
    result = _filter_pass(sequences, bundle, optimizer, config, rngs, reseed_rng, on_step, logger)
    logger.info(
        f"Filtered {len(sequences)} sequences over {len(result.diagnostics)} steps, final "
        f"objective {result.diagnostics[-1].objective:.6g}"
    )
    return result
