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
Latent dynamics as a radial basis function network.

The deterministic increment of the latent state is `g(x) + B u` with
`g(x) = W φ(x)` and `φ_i(x) = exp(-½ γ_i ‖x - c_i‖²)`. Functions accept a single latent vector
or, for plain numpy inputs, a batch of shape (..., m).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from vjf.errors import DomainError, ShapeError
from vjf.numerics import tape
from vjf.numerics.diag_gaussian import DiagGaussian
from vjf.numerics.tape import ArrayLike, value_of

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass(frozen=True)
class DynamicsParams:
    """
    Parameters of the latent transition `x' = x + W φ(x) + B u + ε`, `ε ~ N(0, σ² I)`.

    Fields may hold numpy arrays or traced `Variable` objects.

    Args:
        weights (ArrayLike): Basis weights W, shape (m, r).
        centers (ArrayLike): Basis centers, shape (r, m).
        log_inverse_widths (ArrayLike): log γ_i, shape (r,).
        input_map (ArrayLike): Input map B, shape (m, p).
        log_state_noise_var (ArrayLike): log σ², a 0-d value.

    Raises:
        ShapeError: If the shapes are not consistent with (m, r, p).
    """

    weights: ArrayLike
    centers: ArrayLike
    log_inverse_widths: ArrayLike
    input_map: ArrayLike
    log_state_noise_var: ArrayLike

    def __post_init__(self):
        weights = value_of(self.weights)
        if weights.ndim != 2:
            raise ShapeError(f"weights must be a matrix, got shape {weights.shape}")
        m, r = weights.shape
        expected = {
            "centers": (r, m),
            "log_inverse_widths": (r,),
            "log_state_noise_var": (),
        }
        for name, shape in expected.items():
            actual = value_of(getattr(self, name)).shape
            if actual != shape:
                raise ShapeError(f"{name} has shape {actual}, expected {shape}")
        input_map = value_of(self.input_map)
        if input_map.ndim != 2 or input_map.shape[0] != m:
            raise ShapeError(f"input_map has shape {input_map.shape}, expected ({m}, p)")

    @property
    def latent_dim(self) -> int:
        return value_of(self.weights).shape[0]

    @property
    def basis_count(self) -> int:
        return value_of(self.weights).shape[1]

    @property
    def input_dim(self) -> int:
        return value_of(self.input_map).shape[1]

    @property
    def state_noise_var(self) -> float:
        return float(np.exp(value_of(self.log_state_noise_var)))

    @property
    def inverse_widths(self) -> np.ndarray:
        return np.exp(value_of(self.log_inverse_widths))


def init_dynamics(
    m: int,
    r: int,
    p: int,
    rng: np.random.Generator,
    box: Tuple[float, float] = (-2.0, 2.0),
    state_noise_var: float = 1.0,
) -> DynamicsParams:
    """
    Initializes a dynamics network with zero weights and zero input map.

    Centers are drawn uniformly in `box` along every latent dimension. Inverse widths are set so
    that a basis function drops to 0.5 at the median nearest-neighbour distance between centers.

    Args:
        m (int): Latent dimension, at least 1.
        r (int): Number of basis functions, at least 1.
        p (int): Input dimension, at least 0.
        rng (np.random.Generator): Random source for the centers.
        box (Tuple[float, float]): Lower and upper bound of the center box. Default is (-2, 2).
        state_noise_var (float): Initial σ². Default is 1.

    Returns:
        DynamicsParams: The initialized parameters.

    Raises:
        DomainError: If a dimension is out of range, the box is empty or σ² is not positive.
    """
    if m < 1 or r < 1 or p < 0:
        raise DomainError(f"invalid dynamics dimensions m={m}, r={r}, p={p}")
    low, high = box
    if not low < high:
        raise DomainError(f"center box lower bound {low} must be below upper bound {high}")
    if state_noise_var <= 0:
        raise DomainError("state_noise_var must be positive")
    centers = rng.uniform(low, high, size=(r, m))
    return DynamicsParams(
        weights=np.zeros((m, r)),
        centers=centers,
        log_inverse_widths=np.full(r, np.log(_half_overlap_inverse_width(centers, high - low))),
        input_map=np.zeros((m, p)),
        log_state_noise_var=np.array(np.log(state_noise_var)),
    )


def _half_overlap_inverse_width(centers: np.ndarray, fallback_spacing: float) -> float:
    if len(centers) > 1:
        distances = cdist(centers, centers)
        np.fill_diagonal(distances, np.inf)
        spacing = float(np.median(distances.min(axis=1)))
    else:
        spacing = fallback_spacing
    if spacing <= 0:
        spacing = fallback_spacing
    return 2.0 * np.log(2.0) / spacing ** 2


def with_centers(params: DynamicsParams, centers: np.ndarray) -> DynamicsParams:
    """Returns `params` with new centers and inverse widths re-derived from their spacing."""
    centers = np.asarray(centers, dtype=float)
    spread = float(np.ptp(centers)) if centers.size else 0.0
    width = _half_overlap_inverse_width(centers, spread if spread > 0 else 1.0)
    return replace(
        params,
        centers=centers,
        log_inverse_widths=np.full(len(centers), np.log(width)),
    )


def _check_latent(x: np.ndarray, params: DynamicsParams) -> None:
    if x.ndim == 0 or x.shape[-1] != params.latent_dim:
        raise ShapeError(
            f"latent vector has shape {x.shape}, expected trailing dimension {params.latent_dim}"
        )


def rbf_features(x: ArrayLike, params: DynamicsParams):
    """
    Evaluates the radial basis functions at `x`.

    Args:
        x (ArrayLike): Latent vector of length m, or a plain array of shape (..., m).
        params (DynamicsParams): Dynamics parameters.

    Returns:
        Features of shape (r,) or (..., r), each in (0, 1].

    Raises:
        ShapeError: If `x` does not have trailing dimension m.

    Examples:
        >>> params = DynamicsParams(
        ...     np.zeros((2, 1)), np.zeros((1, 2)), np.zeros(1), np.zeros((2, 0)), np.array(0.0)
        ... )
        >>> rbf_features(np.array([1.0, 1.0]), params)
        array([0.36787944])
    """
    x_value = value_of(x)
    _check_latent(x_value, params)
    if x_value.ndim == 1:
        difference = x - params.centers
    else:
        difference = x_value[..., None, :] - params.centers
    squared_distance = tape.sum(tape.square(difference), axis=-1)
    return tape.exp(tape.exp(params.log_inverse_widths) * squared_distance * -0.5)


def drift(x: ArrayLike, u: Optional[ArrayLike], params: DynamicsParams):
    """
    The deterministic increment `W φ(x) + B u`.

    Args:
        x (ArrayLike): Latent vector of length m, or a plain array of shape (..., m).
        u (ArrayLike, optional): Input of length p (or shape (..., p)). `None` means zero input.
        params (DynamicsParams): Dynamics parameters.

    Returns:
        Velocity of the same shape as `x`.

    Raises:
        ShapeError: If `x` or `u` have the wrong trailing dimension.
    """
    velocity = tape.matmul(rbf_features(x, params), tape.transpose(params.weights))
    if u is None:
        return velocity
    u_value = value_of(u)
    if u_value.ndim == 0 or u_value.shape[-1] != params.input_dim:
        raise ShapeError(
            f"input has shape {u_value.shape}, expected trailing dimension {params.input_dim}"
        )
    if params.input_dim == 0:
        return velocity
    return velocity + tape.matmul(u, tape.transpose(params.input_map))


def dynamics_jacobian(x: np.ndarray, params: DynamicsParams) -> np.ndarray:
    """
    Analytic Jacobian ∂g/∂x of the basis part of the drift, input term excluded.

    Args:
        x (np.ndarray): Latent vector of length m.
        params (DynamicsParams): Dynamics parameters.

    Returns:
        np.ndarray: The m×m Jacobian.

    Raises:
        ShapeError: If `x` is not a vector of length m.
    """
    x = np.asarray(value_of(x), dtype=float)
    if x.ndim != 1:
        raise ShapeError(f"dynamics_jacobian takes a single latent vector, got shape {x.shape}")
    _check_latent(x, params)
    centers = value_of(params.centers)
    features = value_of(rbf_features(x, params))
    feature_gradients = -(params.inverse_widths * features)[:, None] * (x - centers)
    return value_of(params.weights) @ feature_gradients


def expected_transition_loglik(
    q: DiagGaussian, x_prev_sample: ArrayLike, u: Optional[ArrayLike], params: DynamicsParams
):
    """
    Closed form of `E_q[log N(x; a, σ² I)]` with `a = x_prev + drift(x_prev, u)`.

    Args:
        q (DiagGaussian): Posterior over the current latent state.
        x_prev_sample (ArrayLike): Sample of the previous latent state.
        u (ArrayLike, optional): Input driving the transition.
        params (DynamicsParams): Dynamics parameters.

    Returns:
        The expected log-density, `-(m/2) log(2πσ²) - (‖μ - a‖² + Σ s) / (2σ²)`.
    """
    m = params.latent_dim
    predicted = x_prev_sample + drift(x_prev_sample, u, params)
    residual = q.mean - predicted
    spread = tape.sum(tape.square(residual)) + tape.sum(q.variance)
    inverse_variance = tape.exp(params.log_state_noise_var * -1.0)
    return (params.log_state_noise_var + _LOG_2PI) * (-0.5 * m) - spread * inverse_variance * 0.5
