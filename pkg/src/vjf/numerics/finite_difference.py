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

from typing import Callable

import numpy as np

from vjf.errors import DomainError, NumericalError


def finite_diff_gradient(
    f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5
) -> np.ndarray:
    """
    Central finite-difference gradient of a scalar function.

    Args:
        f (Callable[[np.ndarray], float]): Scalar function of an array.
        x (np.ndarray): Point at which to differentiate. Any shape.
        h (float): Step size. Default is 1e-5.

    Returns:
        np.ndarray: `(f(x + h e_j) - f(x - h e_j)) / 2h` per coordinate, shaped like `x`.

    Raises:
        DomainError: If `h` is not positive.
        NumericalError: If an evaluation of `f` is not finite.

    Examples:
        >>> finite_diff_gradient(lambda v: float(v @ v), np.array([1.0, 2.0]))
        array([2., 4.])
    """
    if not h > 0:
        raise DomainError("step size h must be positive")
    x = np.array(x, dtype=float)
    gradient = np.zeros_like(x)
    flat_x, flat_gradient = x.reshape(-1), gradient.reshape(-1)
    for j in range(flat_x.size):
        original = flat_x[j]
        flat_x[j] = original + h
        upper = float(f(x))
        flat_x[j] = original - h
        lower = float(f(x))
        flat_x[j] = original
        if not (np.isfinite(upper) and np.isfinite(lower)):
            raise NumericalError(
                f"function is not finite near coordinate {j}", component="finite_difference"
            )
        flat_gradient[j] = (upper - lower) / (2.0 * h)
    return gradient
