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
Dual extended Kalman filter for a linear-Gaussian system with an unknown transition matrix.

The model is `x_t = A x_{t-1} + w_t`, `y_t = C x_t + b + v_t` with `w ~ N(0, q I)` and
`v ~ N(0, R)`. One Kalman filter tracks the state given the current estimate Â; a second
one tracks `θ = vec(Â)` (columns stacked) as a random walk `θ_t = θ_{t-1} + η_t` with
`η ~ N(0, ρ I)`. The parameter filter linearizes the observation through
`∂(Â x)/∂θ = xᵀ ⊗ I`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from logging import Logger, getLogger
from typing import Optional, Tuple

import numpy as np
from scipy import linalg

from vjf.errors import DomainError, ShapeError
from vjf.generative.observation import ObservationKind, ObservationParams

DEFAULT_PARAM_WALK_VAR = 1e-5
DEFAULT_PARAM_INIT_VAR = 0.1
DEFAULT_PROCESS_NOISE_VAR = 1e-4
SPD_JITTER = 1e-9


@dataclass(frozen=True)
class DekfState:
    """
    Joint estimate of the state and the transition matrix.

    Args:
        mean (np.ndarray): State estimate, shape (m,).
        covariance (np.ndarray): State covariance, shape (m, m).
        theta (np.ndarray): Column-stacked transition matrix estimate, shape (m²,).
        theta_covariance (np.ndarray): Parameter covariance, shape (m², m²).
        param_walk_var (float): Random-walk variance ρ of the parameters. Zero disables the
            parameter filter and keeps Â at its initial value.
        process_noise_var (float): State noise variance q.
        step_index (int): Observations consumed.
    """

    mean: np.ndarray
    covariance: np.ndarray
    theta: np.ndarray
    theta_covariance: np.ndarray
    param_walk_var: float = DEFAULT_PARAM_WALK_VAR
    process_noise_var: float = DEFAULT_PROCESS_NOISE_VAR
    step_index: int = 0

    def __post_init__(self):
        m = len(self.mean)
        if self.covariance.shape != (m, m) or self.theta.shape != (m * m,):
            raise ShapeError(
                f"state of dimension {m} needs an ({m}, {m}) covariance and {m * m} parameters"
            )
        if self.theta_covariance.shape != (m * m, m * m):
            raise ShapeError(f"parameter covariance must have shape ({m * m}, {m * m})")
        if self.param_walk_var < 0 or self.process_noise_var < 0:
            raise DomainError("noise variances must be non-negative")

    @property
    def latent_dim(self) -> int:
        return len(self.mean)

    @property
    def transition_matrix(self) -> np.ndarray:
        """Â, recovered from the column-stacked θ."""
        m = self.latent_dim
        return self.theta.reshape(m, m, order="F")


def init_dekf(
    m: int,
    transition: Optional[np.ndarray] = None,
    param_walk_var: float = DEFAULT_PARAM_WALK_VAR,
    param_init_var: float = DEFAULT_PARAM_INIT_VAR,
    process_noise_var: float = DEFAULT_PROCESS_NOISE_VAR,
    initial_mean: Optional[np.ndarray] = None,
    initial_var: float = 1.0,
) -> DekfState:
    """
    Creates the initial dual EKF state.

    Args:
        m (int): Latent dimension.
        transition (np.ndarray, optional): Initial Â, shape (m, m). Default is the identity.
        param_walk_var (float): Parameter random-walk variance. Default is 1e-5.
        param_init_var (float): Initial parameter variance. Default is 0.1.
        process_noise_var (float): State noise variance. Default is 1e-4.
        initial_mean (np.ndarray, optional): Initial state estimate. Default is zero.
        initial_var (float): Initial state variance. Default is 1.

    Returns:
        DekfState: The initial state.
    """
    if m < 1:
        raise DomainError(f"latent dimension must be positive, got {m}")
    if param_init_var < 0:
        raise DomainError(f"param_init_var must be non-negative, got {param_init_var}")
    if initial_var <= 0:
        raise DomainError(f"initial_var must be positive, got {initial_var}")
    transition = np.eye(m) if transition is None else np.asarray(transition, dtype=float)
    if transition.shape != (m, m):
        raise ShapeError(f"transition has shape {transition.shape}, expected ({m}, {m})")
    return DekfState(
        mean=np.zeros(m) if initial_mean is None else np.asarray(initial_mean, dtype=float),
        covariance=initial_var * np.eye(m),
        theta=transition.reshape(-1, order="F"),
        theta_covariance=param_init_var * np.eye(m * m),
        param_walk_var=param_walk_var,
        process_noise_var=process_noise_var,
    )


def _ensure_spd(matrix: np.ndarray, name: str, logger: Logger) -> np.ndarray:
    matrix = 0.5 * (matrix + matrix.T)
    jitter = SPD_JITTER
    for _ in range(10):
        try:
            np.linalg.cholesky(matrix)
            return matrix
        except np.linalg.LinAlgError:
            logger.warning(
                f"{name} lost positive definiteness; adding {jitter:.1e} to the diagonal"
            )
            matrix = matrix + jitter * np.eye(len(matrix))
            jitter *= 10.0
    return matrix


def _joseph(
    covariance: np.ndarray, gain: np.ndarray, jacobian: np.ndarray, noise: np.ndarray
) -> np.ndarray:
    correction = np.eye(len(covariance)) - gain @ jacobian
    return correction @ covariance @ correction.T + gain @ noise @ gain.T


def dekf_step(
    y: np.ndarray,
    state: DekfState,
    observation: ObservationParams,
    logger: Logger = getLogger(__name__),
) -> Tuple[DekfState, np.ndarray, np.ndarray]:
    """
    Consumes one observation with both filters.

    The state filter predicts with the current Â and updates on `y`. The parameter filter
    then updates θ from the same innovation, treating the state prediction uncertainty as
    part of the measurement noise. Covariances use the Joseph form, are symmetrized and, if
    needed, repaired with diagonal jitter.

    Args:
        y (np.ndarray): Observation at this step, shape (n,).
        state (DekfState): Estimate after the previous step.
        observation (ObservationParams): Fixed Gaussian observation parameters.
        logger (Logger): Logger for covariance repairs. Default is the module logger.

    Returns:
        Tuple[DekfState, np.ndarray, np.ndarray]: The new estimate, the one-step prediction
        `C Â x + b` made before seeing `y`, and the innovation `y` minus that prediction.

    Raises:
        DomainError: If the observation model is not Gaussian.
        ShapeError: If `y` does not match the observation dimension.
    """
    if observation.kind != ObservationKind.GAUSSIAN:
        raise DomainError("the dual EKF needs a gaussian observation model")
    loading = np.asarray(observation.loading, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.shape != (loading.shape[0],) or loading.shape[1] != state.latent_dim:
        raise ShapeError(
            f"observation of shape {y.shape} and loading {loading.shape} do not match a "
            f"{state.latent_dim}-dimensional state"
        )
    m = state.latent_dim
    transition = state.transition_matrix
    observation_noise = observation.obs_noise_var * np.eye(len(y))

    predicted_mean = transition @ state.mean
    predicted_covariance = (
        transition @ state.covariance @ transition.T + state.process_noise_var * np.eye(m)
    )
    prediction = loading @ predicted_mean + np.asarray(observation.bias, dtype=float)
    innovation = y - prediction

    innovation_covariance = loading @ predicted_covariance @ loading.T + observation_noise
    gain = linalg.solve(
        innovation_covariance, loading @ predicted_covariance, assume_a="pos"
    ).T
    mean = predicted_mean + gain @ innovation
    covariance = _ensure_spd(
        _joseph(predicted_covariance, gain, loading, observation_noise), "state covariance", logger
    )

    theta, theta_covariance = state.theta, state.theta_covariance
    if state.param_walk_var > 0:
        theta_covariance = theta_covariance + state.param_walk_var * np.eye(m * m)
        jacobian = loading @ np.kron(state.mean[None, :], np.eye(m))
        parameter_covariance = (
            jacobian @ theta_covariance @ jacobian.T + innovation_covariance
        )
        parameter_gain = linalg.solve(
            parameter_covariance, jacobian @ theta_covariance, assume_a="pos"
        ).T
        theta = theta + parameter_gain @ innovation
        theta_covariance = _ensure_spd(
            _joseph(theta_covariance, parameter_gain, jacobian, innovation_covariance),
            "parameter covariance",
            logger,
        )

    new_state = replace(
        state,
        mean=mean,
        covariance=covariance,
        theta=theta,
        theta_covariance=theta_covariance,
        step_index=state.step_index + 1,
    )
    return new_state, prediction, innovation


def run_dekf(
    observations: np.ndarray,
    state: DekfState,
    observation: ObservationParams,
    logger: Logger = getLogger(__name__),
) -> Tuple[DekfState, np.ndarray, np.ndarray]:
    """
    Runs `dekf_step` over a sequence.

    Returns:
        Tuple[DekfState, np.ndarray, np.ndarray]: The final estimate, and the one-step
        predictions and innovations, each of shape (T, n).
    """
    observations = np.asarray(observations, dtype=float)
    predictions = np.zeros_like(observations)
    innovations = np.zeros_like(observations)
    for t, y in enumerate(observations):
        state, predictions[t], innovations[t] = dekf_step(y, state, observation, logger)
    logger.info(
        f"Dual EKF over {len(observations)} steps (param_walk_var={state.param_walk_var}, "
        f"process_noise_var={state.process_noise_var})"
    )
    return state, predictions, innovations
