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
from scipy import linalg

from vjf.errors import DomainError, ShapeError

_RANK_TOLERANCE = 1e-10


@dataclass(frozen=True)
class AffineMap:
    """
    The map `x ↦ A x + c` orienting inferred latents onto reference coordinates.

    Args:
        linear (np.ndarray): A, shape (m, m).
        offset (np.ndarray): c, shape (m,).
        condition_number (float): Condition number of A.
        residual_rms (float): Root mean square residual of the fit, over all coordinates.
    """

    linear: np.ndarray
    offset: np.ndarray
    condition_number: float = 1.0
    residual_rms: float = 0.0

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Maps points of shape (..., m) into reference coordinates."""
        return np.asarray(points) @ self.linear.T + self.offset

    def inverse(self, points: np.ndarray) -> np.ndarray:
        """Maps reference points of shape (..., m) back into inferred coordinates."""
        return (np.asarray(points) - self.offset) @ linalg.inv(self.linear).T

    def conjugate_jacobian(self, jacobian: np.ndarray) -> np.ndarray:
        """
        Expresses a Jacobian of the inferred dynamics in reference coordinates, `A J A⁻¹`.

        Eigenvalues, and therefore stability classes, are unchanged.
        """
        return self.linear @ jacobian @ linalg.inv(self.linear)

    @staticmethod
    def identity(dimension: int) -> AffineMap:
        return AffineMap(np.eye(dimension), np.zeros(dimension))


def affine_align(inferred: np.ndarray, reference: np.ndarray) -> AffineMap:
    """
    Least-squares affine map from inferred to reference points paired by index.

    Minimizes `Σ_t ‖A inferred_t + c - reference_t‖²`.

    Args:
        inferred (np.ndarray): Points of shape (T, m).
        reference (np.ndarray): Points of shape (T, m).

    Returns:
        AffineMap: The fitted map with its condition number and residual.

    Raises:
        ShapeError: If the point sets differ in shape.
        DomainError: If T ≤ m + 1, the design matrix is rank deficient or the fitted linear map
            is singular. The message reports the condition number or the smallest singular
            value.

    Examples:
        >>> points = np.random.default_rng(0).normal(size=(10, 2))
        >>> fitted = affine_align(points, 2 * points + 1)
        >>> np.allclose(fitted.linear, 2 * np.eye(2)), np.allclose(fitted.offset, 1)
        (True, True)
    """
    inferred = np.asarray(inferred, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if inferred.shape != reference.shape or inferred.ndim != 2:
        raise ShapeError(
            f"inferred shape {inferred.shape} and reference shape {reference.shape} must be "
            "equal (T, m)"
        )
    length, m = inferred.shape
    if length <= m + 1:
        raise DomainError(f"affine alignment needs more than {m + 1} points, got {length}")
    design = np.hstack([inferred, np.ones((length, 1))])
    singular_values = linalg.svdvals(design)
    condition = (
        float(singular_values[0] / singular_values[-1]) if singular_values[-1] > 0 else np.inf
    )
    if singular_values[-1] <= _RANK_TOLERANCE * singular_values[0]:
        raise DomainError(
            f"alignment design is rank deficient (condition number {condition:.3g})"
        )
    coefficients, _, _, _ = linalg.lstsq(design, reference)
    linear, offset = coefficients[:m].T, coefficients[m]
    map_singular_values = linalg.svdvals(linear)
    if map_singular_values[-1] <= _RANK_TOLERANCE * max(map_singular_values[0], 1.0):
        raise DomainError(
            "fitted alignment map is singular (smallest singular value "
            f"{map_singular_values[-1]:.3g})"
        )
    residual = design @ coefficients - reference
    return AffineMap(
        linear=linear,
        offset=offset,
        condition_number=float(np.linalg.cond(linear)),
        residual_rms=float(np.sqrt(np.mean(residual ** 2))),
    )
