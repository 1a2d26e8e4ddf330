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

import numpy as np

from vjf.errors import DomainError, ShapeError
from vjf.numerics import tape
from vjf.numerics.tape import ArrayLike, value_of

_LOG_2PI_E = np.log(2.0 * np.pi * np.e)


@dataclass(frozen=True)
class DiagGaussian:
    """
    A multivariate normal distribution with diagonal covariance.

    Args:
        mean (ArrayLike): Mean vector of length m.
        variance (ArrayLike): Strictly positive variance vector of length m.

    Raises:
        ShapeError: If `mean` and `variance` differ in shape.
        DomainError: If any variance is not strictly positive.
    """

    mean: ArrayLike
    variance: ArrayLike

    def __post_init__(self):
        mean, variance = value_of(self.mean), value_of(self.variance)
        if mean.shape != variance.shape:
            raise ShapeError(
                f"mean shape {mean.shape} does not match variance shape {variance.shape}"
            )
        if not np.all(variance > 0):
            raise DomainError("variance must be strictly positive")

    @property
    def dimension(self) -> int:
        return value_of(self.mean).shape[-1]

    def detached(self) -> DiagGaussian:
        """Returns a copy holding plain numpy values, cut from any gradient tape."""
        return DiagGaussian(np.array(value_of(self.mean)), np.array(value_of(self.variance)))

    @staticmethod
    def standard(dimension: int) -> DiagGaussian:
        return DiagGaussian(np.zeros(dimension), np.ones(dimension))


def gaussian_entropy(variance: ArrayLike):
    """
    Differential entropy in nats of a diagonal Gaussian, `½ Σ_j log(2πe·variance[j])`.

    Args:
        variance (ArrayLike): Variances, traced or plain.

    Returns:
        The entropy as a scalar of the same kind as `variance`.

    Raises:
        DomainError: If any variance is not strictly positive.

    Examples:
        >>> gaussian_entropy(np.ones(2))
        2.8378770664093453
    """
    if not np.all(value_of(variance) > 0):
        raise DomainError("entropy requires strictly positive variances")
    return tape.sum(tape.log(variance) + _LOG_2PI_E) * 0.5


def reparam_sample(q: DiagGaussian, noise: np.ndarray):
    """
    Draws `mean + sqrt(variance) * noise`, differentiable in the parameters of `q`.

    Raises:
        ShapeError: If `noise` does not match the shape of `q`.
    """
    noise = np.asarray(noise, dtype=float)
    if noise.shape != value_of(q.mean).shape:
        raise ShapeError(
            f"noise shape {noise.shape} does not match posterior shape {value_of(q.mean).shape}"
        )
    return q.mean + tape.sqrt(q.variance) * noise
