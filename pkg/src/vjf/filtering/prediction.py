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

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from vjf.analysis.alignment import AffineMap
from vjf.errors import DomainError, ShapeError
from vjf.filtering.bundle import ModelBundle
from vjf.filtering.objective import FilterState
from vjf.generative.dynamics import drift
from vjf.generative.observation import expected_observation, sample_observation
from vjf.numerics.diag_gaussian import DiagGaussian
from vjf.recognition.network import recognize


@dataclass
class Rollout:
    """
    Monte Carlo rollouts of the learned model.

    Args:
        latents (np.ndarray): Sampled latent paths, shape (n_trials, T, m).
        observations (np.ndarray, optional): Observations sampled along each path, shape
            (n_trials, T, n).
    """

    latents: np.ndarray
    observations: Optional[np.ndarray]


def infer_posteriors(
    observations: np.ndarray, inputs: Optional[np.ndarray], bundle: ModelBundle
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Runs the recognition recursion over a sequence with the parameters held fixed.

    Args:
        observations (np.ndarray): Observations of shape (T, n).
        inputs (np.ndarray, optional): Inputs of shape (T, p), `None` when p = 0.
        bundle (ModelBundle): Model parameters.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Posterior means and variances, each of shape (T, m).
    """
    observations = np.asarray(observations, dtype=float)
    length, m = len(observations), bundle.latent_dim
    means, variances = np.zeros((length, m)), np.zeros((length, m))
    posterior = DiagGaussian.standard(m)
    for t in range(length):
        u_prev = None
        if inputs is not None:
            u_prev = inputs[t - 1] if t > 0 else np.zeros(bundle.input_dim)
        posterior = recognize(observations[t], u_prev, posterior, bundle.recognition)
        means[t], variances[t] = posterior.mean, posterior.variance
    return means, variances


def one_step_prediction(
    state: FilterState, u: Optional[np.ndarray], bundle: ModelBundle
) -> np.ndarray:
    """
    Forecasts the next observation from the posterior mean.

    The latent is propagated deterministically, `μ + g(μ) + B u`, and mapped through the
    observation model: `C(μ + g(μ) + B u) + b` for Gaussian observations, the rate for Poisson.
    """
    mean = np.asarray(state.posterior.mean, dtype=float)
    predicted = mean + drift(mean, u, bundle.dynamics)
    return expected_observation(predicted, bundle.observation)


def _rollout(
    starts: np.ndarray,
    horizon: int,
    bundle: ModelBundle,
    rng: np.random.Generator,
    inputs: Optional[np.ndarray],
) -> np.ndarray:
    n_trials, m = starts.shape
    noise_std = np.sqrt(bundle.dynamics.state_noise_var)
    latents = np.zeros((n_trials, horizon, m))
    current = starts
    for k in range(horizon):
        u = None if inputs is None else np.broadcast_to(inputs[k], (n_trials, bundle.input_dim))
        current = current + drift(current, u, bundle.dynamics)
        current = current + noise_std * rng.standard_normal((n_trials, m))
        latents[:, k] = current
    return latents


def _check_rollout(horizon: int, n_trials: int, inputs, bundle: ModelBundle):
    if horizon < 1 or n_trials < 1:
        raise DomainError(f"horizon {horizon} and n_trials {n_trials} must be at least 1")
    if inputs is not None:
        inputs = np.asarray(inputs, dtype=float)
        if inputs.ndim != 2 or inputs.shape[1] != bundle.input_dim or len(inputs) < horizon:
            raise ShapeError(
                f"inputs have shape {inputs.shape}, expected ({horizon}, {bundle.input_dim})"
            )
    return inputs


def predict_rollout(
    state: FilterState,
    bundle: ModelBundle,
    horizon: int,
    n_trials: int,
    rng: np.random.Generator,
    inputs: Optional[np.ndarray] = None,
    sample_observations: bool = True,
) -> Rollout:
    """
    Samples futures of the learned model without looking at further data.

    Each trial draws a start from the posterior of `state`, then iterates
    `x_{k+1} = x_k + g(x_k) + B u_k + σ ε` with fresh noise and samples an observation for
    every step. Row k of the result is the k + 1-th step after `state`.

    Args:
        state (FilterState): Posterior at the start of the prediction.
        bundle (ModelBundle): Model parameters.
        horizon (int): Number of steps T to predict, at least 1.
        n_trials (int): Number of sampled paths, at least 1.
        rng (np.random.Generator): Random source. Starts are drawn first, then the state
            noise step by step, then the observations.
        inputs (np.ndarray, optional): Inputs `u_k` of shape (T, p). Default is zero input.
        sample_observations (bool): Whether to sample observations. When off,
            `Rollout.observations` is `None`. Default is `True`.

    Returns:
        Rollout: Latent and observation paths.

    Raises:
        DomainError: If `horizon` or `n_trials` is below 1.
        ShapeError: If `inputs` is malformed.
    """
    inputs = _check_rollout(horizon, n_trials, inputs, bundle)
    mean = np.asarray(state.posterior.mean, dtype=float)
    std = np.sqrt(np.asarray(state.posterior.variance, dtype=float))
    starts = mean + std * rng.standard_normal((n_trials, bundle.latent_dim))
    latents = _rollout(starts, horizon, bundle, rng, inputs)
    if not sample_observations:
        return Rollout(latents, None)
    return Rollout(latents, sample_observation(latents, bundle.observation, rng))


def predict_with_resets(
    truth: np.ndarray,
    bundle: ModelBundle,
    reset_every: int,
    n_trials: int,
    alignment: AffineMap,
    rng: np.random.Generator,
    inputs: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Predicts a long stretch while restarting from the true state at regular intervals.

    At every index `k` divisible by `reset_every` all trials are placed at the true state,
    carried into model coordinates by the inverse of `alignment`. The model then runs freely
    until the next reset. Predictions are returned in the coordinates of `truth`.

    Args:
        truth (np.ndarray): True latent path of shape (T, m), in reference coordinates.
        bundle (ModelBundle): Model parameters.
        reset_every (int): Reset interval in steps, at least 1.
        n_trials (int): Number of sampled paths.
        alignment (AffineMap): Map from model coordinates to reference coordinates.
        rng (np.random.Generator): Random source.
        inputs (np.ndarray, optional): Inputs of shape (T, p). Default is zero input.

    Returns:
        np.ndarray: Predicted paths of shape (n_trials, T, m). Reset indices hold the truth.
    """
    truth = np.asarray(truth, dtype=float)
    if reset_every < 1:
        raise DomainError("reset_every must be at least 1")
    length = len(truth)
    inputs = _check_rollout(length, n_trials, inputs, bundle)
    predicted = np.zeros((n_trials, length, truth.shape[1]))
    for start in range(0, length, reset_every):
        stop = min(start + reset_every, length)
        predicted[:, start] = truth[start]
        if stop - start < 2:
            continue
        origin = np.tile(alignment.inverse(truth[start]), (n_trials, 1))
        segment_inputs = None if inputs is None else inputs[start : stop - 1]
        latents = _rollout(origin, stop - start - 1, bundle, rng, segment_inputs)
        predicted[:, start + 1 : stop] = alignment.apply(latents)
    return predicted
