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
from enum import Enum
from typing import Optional

import numpy as np

from vjf.errors import DomainError, NumericalError, ShapeError
from vjf.numerics import tape
from vjf.numerics.diag_gaussian import DiagGaussian
from vjf.numerics.tape import ArrayLike, value_of

VARIANCE_FLOOR = 1e-8
VARIANCE_CEILING = 1e6


class RecognitionActivation(str, Enum):
    """Hidden-layer nonlinearity of the recognition network."""

    TANH = "tanh"
    RELU = "relu"


_ACTIVATIONS = {
    RecognitionActivation.TANH: tape.tanh,
    RecognitionActivation.RELU: tape.relu,
}


@dataclass(frozen=True)
class RecognitionParams:
    """
    Weights of a one-hidden-layer perceptron mapping `(y_t, u_{t-1}, μ_{t-1}, log s_{t-1})` to
    `(μ_t, log s_t)`.

    Args:
        hidden_weights (ArrayLike): Shape (q, n + p + 2m).
        hidden_bias (ArrayLike): Shape (q,).
        output_weights (ArrayLike): Shape (2m, q). The first m rows produce the mean.
        output_bias (ArrayLike): Shape (2m,).
        activation (RecognitionActivation): Hidden nonlinearity. Default is tanh.

    Raises:
        ShapeError: If the shapes are inconsistent.
    """

    hidden_weights: ArrayLike
    hidden_bias: ArrayLike
    output_weights: ArrayLike
    output_bias: ArrayLike
    activation: RecognitionActivation = RecognitionActivation.TANH

    def __post_init__(self):
        object.__setattr__(self, "activation", RecognitionActivation(self.activation))
        hidden = value_of(self.hidden_weights)
        output = value_of(self.output_weights)
        if hidden.ndim != 2 or output.ndim != 2:
            raise ShapeError("recognition weights must be matrices")
        q = hidden.shape[0]
        if output.shape[1] != q or output.shape[0] % 2:
            raise ShapeError(f"output_weights has shape {output.shape}, expected (2m, {q})")
        if value_of(self.hidden_bias).shape != (q,):
            raise ShapeError(f"hidden_bias must have shape ({q},)")
        if value_of(self.output_bias).shape != (output.shape[0],):
            raise ShapeError(f"output_bias must have shape ({output.shape[0]},)")

    @property
    def latent_dim(self) -> int:
        return value_of(self.output_weights).shape[0] // 2

    @property
    def hidden_units(self) -> int:
        return value_of(self.hidden_weights).shape[0]

    @property
    def input_size(self) -> int:
        return value_of(self.hidden_weights).shape[1]


def init_recognition(
    n: int,
    m: int,
    p: int,
    q: int,
    rng: np.random.Generator,
    activation: RecognitionActivation = RecognitionActivation.TANH,
) -> RecognitionParams:
    """
    Draws recognition weights with scale `1/√fan_in` and zero biases.

    Args:
        n (int): Observation dimension.
        m (int): Latent dimension.
        p (int): Input dimension. Zero is allowed for autonomous systems.
        q (int): Hidden units.
        rng (np.random.Generator): Random source.
        activation (RecognitionActivation): Hidden nonlinearity. Default is tanh.

    Returns:
        RecognitionParams: The initialized network.

    Raises:
        DomainError: If n, m or q is below 1, or p is negative.
    """
    if min(n, m, q) < 1 or p < 0:
        raise DomainError(f"invalid recognition dimensions n={n}, m={m}, p={p}, q={q}")
    fan_in = n + p + 2 * m
    return RecognitionParams(
        hidden_weights=rng.normal(scale=1.0 / np.sqrt(fan_in), size=(q, fan_in)),
        hidden_bias=np.zeros(q),
        output_weights=rng.normal(scale=1.0 / np.sqrt(q), size=(2 * m, q)),
        output_bias=np.zeros(2 * m),
        activation=activation,
    )


def recognize(
    y: np.ndarray,
    u_prev: Optional[ArrayLike],
    q_prev: DiagGaussian,
    params: RecognitionParams,
) -> DiagGaussian:
    """
    Maps the new observation and the previous posterior to the next posterior.

    The previous variance enters as its logarithm. The variance head returns a log-variance,
    clamped above at `log(1e6)` before exponentiation and floored at `1e-8` after it.

    Args:
        y (np.ndarray): Observation at step t, length n.
        u_prev (ArrayLike, optional): Input at step t - 1, length p. `None` for p = 0.
        q_prev (DiagGaussian): Posterior at step t - 1.
        params (RecognitionParams): Network weights.

    Returns:
        DiagGaussian: Posterior at step t, traced if any argument is.

    Raises:
        ShapeError: If the concatenated input does not match the network.
        NumericalError: If an input is not finite.
    """
    parts = [y, np.zeros(0) if u_prev is None else u_prev, q_prev.mean, tape.log(q_prev.variance)]
    features = tape.concatenate(parts)
    if value_of(features).shape != (params.input_size,):
        raise ShapeError(
            f"recognition input has length {value_of(features).size}, "
            f"network expects {params.input_size}"
        )
    if q_prev.dimension != params.latent_dim:
        raise ShapeError(
            f"previous posterior has dimension {q_prev.dimension}, "
            f"network produces {params.latent_dim}"
        )
    if not np.all(np.isfinite(value_of(features))):
        raise NumericalError("recognition input is not finite", component="recognition")
    activate = _ACTIVATIONS[params.activation]
    hidden = activate(tape.matmul(params.hidden_weights, features) + params.hidden_bias)
    output = tape.matmul(params.output_weights, hidden) + params.output_bias
    m = params.latent_dim
    log_variance = tape.minimum(output[m:], np.log(VARIANCE_CEILING))
    return DiagGaussian(output[:m], tape.maximum(tape.exp(log_variance), VARIANCE_FLOOR))
