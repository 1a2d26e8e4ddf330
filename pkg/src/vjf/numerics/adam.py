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

from dataclasses import dataclass, replace
from typing import Dict, Mapping, Tuple

import numpy as np

from vjf.errors import DomainError, NumericalError, ShapeError


@dataclass(frozen=True)
class AdamState:
    """
    Optimizer state for one parameter block.

    Args:
        first_moment (np.ndarray): Running mean of gradients, shaped like the parameter.
        second_moment (np.ndarray): Running mean of squared gradients.
        step_count (int): Number of updates applied so far.
        learning_rate (float): Step size. Default is 1e-3.
        beta1 (float): First moment decay in (0, 1). Default is 0.9.
        beta2 (float): Second moment decay in (0, 1). Default is 0.999.
        epsilon_hat (float): Denominator offset. Default is 1e-8.
    """

    first_moment: np.ndarray
    second_moment: np.ndarray
    step_count: int = 0
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon_hat: float = 1e-8

    def __post_init__(self):
        if np.shape(self.first_moment) != np.shape(self.second_moment):
            raise ShapeError("first and second moments must have the same shape")
        if self.step_count < 0:
            raise DomainError("step_count must be non-negative")
        if self.learning_rate < 0:
            raise DomainError("learning_rate must be non-negative")
        for name in ("beta1", "beta2"):
            if not 0 < getattr(self, name) < 1:
                raise DomainError(f"{name} must lie in (0, 1)")
        if self.epsilon_hat <= 0:
            raise DomainError("epsilon_hat must be positive")

    @staticmethod
    def fresh(shape, **hyperparameters) -> AdamState:
        """Returns a zero-moment state for a parameter of the given shape."""
        return AdamState(np.zeros(shape), np.zeros(shape), **hyperparameters)


def adam_update(
    params: np.ndarray, grads: np.ndarray, state: AdamState
) -> Tuple[np.ndarray, AdamState]:
    """
    Applies one bias-corrected Adam descent step.

    Coordinates whose gradient is exactly zero keep their value, so a zero gradient leaves the
    parameters unchanged whatever the accumulated moments are.

    Args:
        params (np.ndarray): Current parameter values.
        grads (np.ndarray): Gradient of the loss, shaped like `params`.
        state (AdamState): Optimizer state for this parameter block.

    Returns:
        Tuple[np.ndarray, AdamState]: The updated parameters and state.

    Raises:
        ShapeError: If `params`, `grads` and the moments differ in shape.
        NumericalError: If `grads` holds a non-finite value. No update is applied.

    Examples:
        >>> state = AdamState.fresh(1, learning_rate=0.1)
        >>> adam_update(np.array([1.0]), np.array([2.0]), state)[0]
        array([0.9])
    """
    params = np.asarray(params, dtype=float)
    grads = np.asarray(grads, dtype=float)
    if params.shape != grads.shape or params.shape != np.shape(state.first_moment):
        raise ShapeError(
            f"parameter shape {params.shape}, gradient shape {grads.shape} and moment shape "
            f"{np.shape(state.first_moment)} must agree"
        )
    if not np.all(np.isfinite(grads)):
        raise NumericalError("non-finite gradient rejected", component="gradient")

    step = state.step_count + 1
    first = state.beta1 * state.first_moment + (1.0 - state.beta1) * grads
    second = state.beta2 * state.second_moment + (1.0 - state.beta2) * grads * grads
    first_hat = first / (1.0 - state.beta1 ** step)
    second_hat = second / (1.0 - state.beta2 ** step)
    delta = state.learning_rate * first_hat / (np.sqrt(second_hat) + state.epsilon_hat)
    updated = np.where(grads != 0.0, params - delta, params)
    return updated, replace(state, first_moment=first, second_moment=second, step_count=step)


def clip_by_global_norm(
    grads: Mapping[str, np.ndarray], max_norm: float
) -> Tuple[Dict[str, np.ndarray], float]:
    """
    Rescales a gradient structure so its joint Euclidean norm is at most `max_norm`.

    Args:
        grads (Mapping[str, np.ndarray]): Gradients per parameter block.
        max_norm (float): Threshold. `float("inf")` disables clipping.

    Returns:
        Tuple[Dict[str, np.ndarray], float]: The clipped gradients and the norm before clipping.

    Raises:
        DomainError: If `max_norm` is not positive.
    """
    if not max_norm > 0:
        raise DomainError("max_norm must be positive")
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if not np.isfinite(max_norm) or norm <= max_norm or not np.isfinite(norm):
        return dict(grads), norm
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}, norm
