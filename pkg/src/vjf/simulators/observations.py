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

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from vjf.errors import DomainError, ShapeError
from vjf.generative.observation import (
    ObservationKind,
    ObservationParams,
    sample_observation,
)
from vjf.simulators.trajectory import Trajectory

DEFAULT_MAX_RATE = 0.04

Latents = Union[np.ndarray, Sequence[np.ndarray]]


def _pooled(latents: Latents) -> np.ndarray:
    if isinstance(latents, np.ndarray):
        return np.atleast_2d(latents)
    return np.vstack([np.atleast_2d(x) for x in latents])


def random_observation_params(
    n: int,
    m: int,
    rng: np.random.Generator,
    kind: ObservationKind = ObservationKind.POISSON,
    obs_noise_std: float = 0.1,
    loading_norm: Optional[float] = None,
) -> ObservationParams:
    """
    Ground-truth observation map with standard normal loadings rescaled to a common column
    norm.

    The default column norm is `√n` for Poisson maps, so entries have unit mean square, and 1
    for Gaussian maps.

    Args:
        n (int): Observed dimension.
        m (int): Latent dimension.
        rng (np.random.Generator): Random source.
        kind (ObservationKind): Likelihood family. Default is Poisson.
        obs_noise_std (float): Gaussian observation noise. Ignored for Poisson. Default is 0.1.
        loading_norm (float, optional): Euclidean norm of every loading column. Default
            depends on `kind` as above.

    Raises:
        DomainError: If a dimension is below 1, the noise is negative or the column norm is
            not positive.
    """
    if n < 1 or m < 1:
        raise DomainError(f"observation dimensions must be positive, got n={n}, m={m}")
    if obs_noise_std < 0:
        raise DomainError(f"obs_noise_std must be non-negative, got {obs_noise_std}")
    kind = ObservationKind(kind)
    if loading_norm is None:
        loading_norm = np.sqrt(n) if kind == ObservationKind.POISSON else 1.0
    if not loading_norm > 0:
        raise DomainError(f"loading_norm must be positive, got {loading_norm}")
    loading = rng.standard_normal((n, m))
    loading *= loading_norm / np.linalg.norm(loading, axis=0)
    if kind == ObservationKind.GAUSSIAN:
        # A zero noise level is kept as the smallest positive variance.
        variance = max(obs_noise_std**2, np.finfo(float).tiny)
        return ObservationParams(loading, np.zeros(n), kind, np.array(np.log(variance)))
    return ObservationParams(loading, np.zeros(n), kind)


def calibrate_spike_bias(
    latents: Latents, params: ObservationParams, max_rate: float = DEFAULT_MAX_RATE
) -> ObservationParams:
    """
    Sets each channel's bias so its rate `exp(c_i·x + b_i)` averages `max_rate` over the
    latents.

    A bin then holds a spike with probability `1 - exp(-λ) < λ`, so the mean spike count per
    bin stays below `max_rate`.

    Args:
        latents (Latents): Latent states, one (T, m) array or a sequence of them.
        params (ObservationParams): Poisson observation parameters. The bias is replaced.
        max_rate (float): Target mean rate per bin. Default is 0.04.

    Returns:
        ObservationParams: Copy of `params` with the calibrated bias.

    Raises:
        DomainError: If `max_rate` is not positive or the parameters are not Poisson.
    """
    if not max_rate > 0:
        raise DomainError(f"rate target must be positive, got {max_rate}")
    if params.kind != ObservationKind.POISSON:
        raise DomainError("only spiking observations have a rate to calibrate")
    pooled = _pooled(latents)
    drive = pooled @ np.asarray(params.loading).T
    log_mean_rate = logsumexp(drive, axis=0) - np.log(len(pooled))
    bias = np.log(max_rate) - log_mean_rate
    return ObservationParams(np.asarray(params.loading), bias, params.kind)


def generate_observations(
    trajectories: Sequence[Trajectory],
    params: ObservationParams,
    rng: np.random.Generator,
    max_rate: Optional[float] = DEFAULT_MAX_RATE,
) -> Tuple[List[Trajectory], ObservationParams]:
    """
    Samples observations for every trajectory.

    For spikes the bias is first calibrated across all trajectories with
    `calibrate_spike_bias`, unless `max_rate` is `None`.

    Args:
        trajectories (Sequence[Trajectory]): Latent sequences.
        params (ObservationParams): Observation map with loading of shape (n, m).
        rng (np.random.Generator): Random source, consumed sequence by sequence.
        max_rate (float, optional): Spike rate target per bin. Default is 0.04.

    Returns:
        Tuple[List[Trajectory], ObservationParams]: The trajectories with observations, and
        the observation parameters actually used.

    Raises:
        ShapeError: If the loading does not match the latent dimension.
        DomainError: If the rate target is not positive.
    """
    if not trajectories:
        return [], params
    latent_dim = trajectories[0].latent_dim
    if np.shape(params.loading)[1] != latent_dim:
        raise ShapeError(
            f"loading has shape {np.shape(params.loading)}, latents have {latent_dim} columns"
        )
    if params.kind == ObservationKind.POISSON and max_rate is not None:
        params = calibrate_spike_bias([t.latents for t in trajectories], params, max_rate)
    observed = [
        t.with_observations(sample_observation(t.latents, params, rng)) for t in trajectories
    ]
    return observed, params
