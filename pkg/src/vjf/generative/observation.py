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
Observation models: a linear map of the latent state followed by a likelihood.

The linear predictor is `η = C x + b`. Each likelihood is an `ObservationModel` registered on
the base class under its `ObservationKind`.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Optional, Type

import numpy as np
from scipy.special import gammaln

from vjf.errors import DomainError, ShapeError
from vjf.numerics import tape
from vjf.numerics.tape import ArrayLike, value_of

_LOG_2PI = np.log(2.0 * np.pi)


class ObservationKind(str, Enum):
    """Likelihood family of the observations."""

    POISSON = "poisson-canonical"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class ObservationParams:
    """
    Parameters of the observation map.

    Args:
        loading (ArrayLike): Loading matrix C, shape (n, m).
        bias (ArrayLike): Bias b, shape (n,).
        kind (ObservationKind): Likelihood family. Strings are converted.
        log_obs_noise_var (ArrayLike, optional): Log observation noise variance, a 0-d value.
            Required for the Gaussian kind, must be `None` otherwise.

    Raises:
        ShapeError: If the shapes are inconsistent.
        ValueError: If `kind` is unknown or the noise variance does not match the kind.
    """

    loading: ArrayLike
    bias: ArrayLike
    kind: ObservationKind = ObservationKind.POISSON
    log_obs_noise_var: Optional[ArrayLike] = None

    def __post_init__(self):
        object.__setattr__(self, "kind", ObservationKind(self.kind))
        loading = value_of(self.loading)
        if loading.ndim != 2:
            raise ShapeError(f"loading must be a matrix, got shape {loading.shape}")
        if value_of(self.bias).shape != (loading.shape[0],):
            raise ShapeError(
                f"bias has shape {value_of(self.bias).shape}, expected ({loading.shape[0]},)"
            )
        has_noise = self.log_obs_noise_var is not None
        if has_noise != (self.kind == ObservationKind.GAUSSIAN):
            raise ValueError("log_obs_noise_var must be given exactly for the gaussian kind")
        if has_noise and value_of(self.log_obs_noise_var).shape != ():
            raise ShapeError("log_obs_noise_var must be a scalar")

    @property
    def observed_dim(self) -> int:
        return value_of(self.loading).shape[0]

    @property
    def latent_dim(self) -> int:
        return value_of(self.loading).shape[1]

    @property
    def obs_noise_var(self) -> Optional[float]:
        if self.log_obs_noise_var is None:
            return None
        return float(np.exp(value_of(self.log_obs_noise_var)))


def linear_predictor(x: ArrayLike, params: ObservationParams):
    """
    Computes `η = C x + b` for a latent vector or a batch of shape (..., m).

    Raises:
        ShapeError: If `x` does not have trailing dimension m.
    """
    x_value = value_of(x)
    if x_value.ndim == 0 or x_value.shape[-1] != params.latent_dim:
        raise ShapeError(
            f"latent has shape {x_value.shape}, expected trailing dimension {params.latent_dim}"
        )
    return tape.matmul(x, tape.transpose(params.loading)) + params.bias


class ObservationModel(ABC):
    """
    A likelihood over observations given the linear predictor.

    Concrete models register with `ObservationModel.register_observation_model()` and are looked
    up by kind with `ObservationModel.for_kind()`.
    """

    kind: ObservationKind
    _models: Dict[ObservationKind, Type[ObservationModel]] = {}

    @staticmethod
    @abstractmethod
    def log_likelihood(
        y: np.ndarray, predictor: ArrayLike, params: ObservationParams, include_constant: bool
    ):
        """Summed log-likelihood of `y` given the linear predictor."""

    @staticmethod
    @abstractmethod
    def sample(predictor: np.ndarray, params: ObservationParams, rng: np.random.Generator):
        """Draws observations given the linear predictor."""

    @staticmethod
    @abstractmethod
    def mean(predictor: np.ndarray) -> np.ndarray:
        """Expected observation given the linear predictor."""

    @classmethod
    def register_observation_model(cls, model: Type[ObservationModel]) -> None:
        """
        Registers an observation model for its kind.

        Args:
            model (Type[ObservationModel]): Model class with a `kind` attribute.
        """
        cls._models[ObservationKind(model.kind)] = model
        setattr(cls, model.__name__, model)

    @classmethod
    def for_kind(cls, kind: ObservationKind) -> Type[ObservationModel]:
        try:
            return cls._models[ObservationKind(kind)]
        except KeyError:
            raise NotImplementedError(f"no observation model registered for kind {kind}")


class PoissonCanonical(ObservationModel):
    """Poisson counts with rate `λ = exp(η)`; sampling thins to at most one event per bin."""

    kind = ObservationKind.POISSON

    @staticmethod
    def log_likelihood(y, predictor, params, include_constant):
        if np.any(y < 0):
            raise DomainError("poisson observations must be non-negative counts")
        if np.any(y != np.round(y)):
            raise DomainError("poisson observations must be integer counts")
        value = tape.sum(predictor * y - tape.exp(predictor))
        if include_constant:
            value = value - float(np.sum(gammaln(y + 1.0)))
        return value

    @staticmethod
    def sample(predictor, params, rng):
        spike_probability = -np.expm1(-np.exp(predictor))
        return (rng.random(np.shape(predictor)) < spike_probability).astype(float)

    @staticmethod
    def mean(predictor):
        return np.exp(predictor)


class Gaussian(ObservationModel):
    """Independent Gaussian noise with shared variance around `η`."""

    kind = ObservationKind.GAUSSIAN

    @staticmethod
    def log_likelihood(y, predictor, params, include_constant):
        log_variance = params.log_obs_noise_var
        count = np.size(y)
        squared_error = tape.sum(tape.square(predictor - y))
        precision = tape.exp(log_variance * -1.0)
        return (log_variance + _LOG_2PI) * (-0.5 * count) - squared_error * precision * 0.5

    @staticmethod
    def sample(predictor, params, rng):
        return predictor + np.sqrt(params.obs_noise_var) * rng.standard_normal(np.shape(predictor))

    @staticmethod
    def mean(predictor):
        return np.asarray(predictor)


ObservationModel.register_observation_model(PoissonCanonical)
ObservationModel.register_observation_model(Gaussian)


def _check_observation(y: np.ndarray, params: ObservationParams) -> None:
    if y.ndim == 0 or y.shape[-1] != params.observed_dim:
        raise ShapeError(
            f"observation has shape {y.shape}, expected trailing dimension {params.observed_dim}"
        )


def observation_loglik(
    y: np.ndarray, x: ArrayLike, params: ObservationParams, include_constant: bool = True
):
    """
    Log-likelihood `log p(y | x)`, summed over channels (and over rows for a batch).

    Args:
        y (np.ndarray): Observation vector of length n, or an array of shape (..., n).
        x (ArrayLike): Latent state(s) matching `y` row for row.
        params (ObservationParams): Observation parameters.
        include_constant (bool): Whether to include `log(y!)` for Poisson counts. Training drops
            it since it does not depend on the parameters. Default is `True`.

    Returns:
        The log-likelihood, traced if `x` or `params` are.

    Raises:
        ShapeError: If `y` or `x` have the wrong trailing dimension.
        DomainError: If Poisson counts are negative or not integers.

    Examples:
        >>> params = ObservationParams(np.zeros((1, 2)), np.zeros(1))
        >>> float(observation_loglik(np.array([1.0]), np.zeros(2), params))
        -1.0
    """
    y = np.asarray(y, dtype=float)
    _check_observation(y, params)
    model = ObservationModel.for_kind(params.kind)
    return model.log_likelihood(y, linear_predictor(x, params), params, include_constant)


def sample_observation(
    x: np.ndarray, params: ObservationParams, rng: np.random.Generator
) -> np.ndarray:
    """
    Samples observations for a latent state or a batch of states.

    Gaussian observations are `C x + b` plus noise. Poisson observations are binary spikes with
    `P(spike) = 1 - exp(-λ)`, so a bin holds one event at most.

    Args:
        x (np.ndarray): Latent vector of length m, or an array of shape (..., m).
        params (ObservationParams): Observation parameters.
        rng (np.random.Generator): Random source.

    Returns:
        np.ndarray: Observations of shape (..., n).
    """
    predictor = value_of(linear_predictor(value_of(x), params))
    return ObservationModel.for_kind(params.kind).sample(predictor, params, rng)


def expected_observation(x: np.ndarray, params: ObservationParams) -> np.ndarray:
    """The mean observation `f(C x + b)`: rates for Poisson, `C x + b` for Gaussian."""
    predictor = value_of(linear_predictor(value_of(x), params))
    return ObservationModel.for_kind(params.kind).mean(predictor)
