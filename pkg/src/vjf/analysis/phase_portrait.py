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
Phase portraits of learned dynamics: velocity fields and classified fixed points.

Stability follows the continuous-time view of the velocity field: a fixed point is stable when
every eigenvalue of ∂g/∂x has negative real part. The discrete criterion on `I + ∂g/∂x` is
available with `discrete=True`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from logging import Logger, getLogger
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import networkx as nx
import numpy as np
from scipy import linalg

from vjf.analysis.alignment import AffineMap
from vjf.errors import DomainError, ShapeError
from vjf.generative.dynamics import DynamicsParams, drift, dynamics_jacobian

Box = Sequence[Tuple[float, float]]

_EIGENVALUE_TOLERANCE = 1e-9
_MAX_BACKTRACKS = 30


class Stability(str, Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    SADDLE = "saddle"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class FixedPoint:
    """
    A point where the velocity vanishes.

    Args:
        location (np.ndarray): Position, shape (m,).
        residual (float): `‖g(location)‖`.
        stability (Stability): Class from the Jacobian eigenvalues.
        eigenvalues (np.ndarray): Eigenvalues of the Jacobian at `location`.
    """

    location: np.ndarray
    residual: float
    stability: Stability
    eigenvalues: np.ndarray

    def to_dict(self) -> dict:
        return {
            "location": [float(v) for v in self.location],
            "residual": float(self.residual),
            "class": self.stability.value,
            "eigenvalues": [[float(v.real), float(v.imag)] for v in self.eigenvalues],
        }


@dataclass
class PhasePortrait:
    """
    Velocity field on a lattice plus the fixed points found.

    Args:
        points (np.ndarray): Lattice points, shape (K, m).
        velocities (np.ndarray): Velocities at the lattice points, shape (K, m).
        fixed_points (List[FixedPoint]): Fixed points sorted by location.
        box (List[Tuple[float, float]]): Bounds of the lattice per dimension.
    """

    points: np.ndarray
    velocities: np.ndarray
    fixed_points: List[FixedPoint] = field(default_factory=list)
    box: List[Tuple[float, float]] = field(default_factory=list)

    def write(self, directory: Union[str, Path], prefix: str = "portrait") -> Tuple[Path, Path]:
        """
        Writes `<prefix>_grid.csv` with columns `x_1..x_m, v_1..v_m` and
        `<prefix>_fixed_points.json` holding `{location, residual, class, eigenvalues}` per
        fixed point, eigenvalues as `[real, imaginary]` pairs.

        Returns:
            Tuple[Path, Path]: The grid and fixed point paths.
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        m = self.points.shape[1]
        header = ",".join([f"x_{i + 1}" for i in range(m)] + [f"v_{i + 1}" for i in range(m)])
        grid_path = directory / f"{prefix}_grid.csv"
        np.savetxt(
            grid_path,
            np.hstack([self.points, self.velocities]),
            delimiter=",",
            header=header,
            comments="",
            fmt="%.17g",
        )
        fixed_point_path = directory / f"{prefix}_fixed_points.json"
        fixed_point_path.write_text(
            json.dumps([point.to_dict() for point in self.fixed_points], indent=2)
        )
        return grid_path, fixed_point_path

    def aligned(self, alignment: AffineMap) -> PhasePortrait:
        """Expresses the portrait in the reference coordinates of `alignment`."""
        return PhasePortrait(
            points=alignment.apply(self.points),
            velocities=self.velocities @ alignment.linear.T,
            fixed_points=[
                FixedPoint(
                    alignment.apply(point.location),
                    point.residual,
                    point.stability,
                    point.eigenvalues,
                )
                for point in self.fixed_points
            ],
            box=list(self.box),
        )


def _lattice(box: Box, resolution: Union[int, Sequence[int]]) -> np.ndarray:
    box = [tuple(bounds) for bounds in box]
    resolutions = [resolution] * len(box) if np.isscalar(resolution) else list(resolution)
    if len(resolutions) != len(box):
        raise ShapeError("resolution must give one count per box dimension")
    axes = []
    for (low, high), count in zip(box, resolutions):
        if not low < high:
            raise DomainError(f"box lower bound {low} must be below upper bound {high}")
        if count < 2:
            raise DomainError(f"grid resolution must be at least 2, got {count}")
        axes.append(np.linspace(low, high, int(count)))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([axis.reshape(-1) for axis in mesh], axis=1)


def velocity_grid(
    dynamics: DynamicsParams, box: Box, resolution: Union[int, Sequence[int]]
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluates the input-free velocity `g(x)` on a regular lattice.

    Args:
        dynamics (DynamicsParams): Dynamics parameters.
        box (Sequence[Tuple[float, float]]): `(low, high)` per latent dimension.
        resolution (Union[int, Sequence[int]]): Points per dimension, at least 2.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Lattice points and velocities, each of shape (K, m),
        with the last dimension varying fastest.

    Raises:
        ShapeError: If `box` does not have one entry per latent dimension.
        DomainError: If a bound pair is empty or a resolution is below 2.
    """
    if len(box) != dynamics.latent_dim:
        raise ShapeError(f"box has {len(box)} dimensions, dynamics has {dynamics.latent_dim}")
    points = _lattice(box, resolution)
    return points, drift(points, None, dynamics)


def classify_stability(
    jacobian: np.ndarray, discrete: bool = False
) -> Tuple[Stability, np.ndarray]:
    """
    Classifies a fixed point from the Jacobian of the velocity field.

    Args:
        jacobian (np.ndarray): ∂g/∂x at the fixed point.
        discrete (bool): Classify the map `x ↦ x + g(x)` by eigenvalue moduli of `I + ∂g/∂x`
            instead of the real parts of the eigenvalues of ∂g/∂x. Default is `False`.

    Returns:
        Tuple[Stability, np.ndarray]: The class and the eigenvalues of `jacobian`.
    """
    eigenvalues = linalg.eigvals(jacobian)
    if discrete:
        margins = np.abs(1.0 + eigenvalues) - 1.0
    else:
        margins = eigenvalues.real
    contracting = margins < -_EIGENVALUE_TOLERANCE
    expanding = margins > _EIGENVALUE_TOLERANCE
    if np.all(contracting):
        stability = Stability.STABLE
    elif np.all(expanding):
        stability = Stability.UNSTABLE
    elif np.any(contracting) and np.any(expanding) and np.all(contracting | expanding):
        stability = Stability.SADDLE
    else:
        stability = Stability.MARGINAL
    return stability, eigenvalues


def _residual(x: np.ndarray, dynamics: DynamicsParams) -> float:
    return float(np.linalg.norm(drift(x, None, dynamics)))


def _line_search(x, direction, residual, dynamics) -> Tuple[np.ndarray, float, bool]:
    step = 1.0
    for _ in range(_MAX_BACKTRACKS):
        candidate = x + step * direction
        candidate_residual = _residual(candidate, dynamics)
        if np.isfinite(candidate_residual) and candidate_residual < residual:
            return candidate, candidate_residual, True
        step *= 0.5
    return x, residual, False


def _solve_from(
    seed: np.ndarray, dynamics: DynamicsParams, tol: float, max_iter: int
) -> Optional[np.ndarray]:
    x = np.array(seed, dtype=float)
    residual = _residual(x, dynamics)
    for _ in range(max_iter):
        if residual < tol:
            return x
        velocity = drift(x, None, dynamics)
        jacobian = dynamics_jacobian(x, dynamics)
        improved = False
        try:
            newton = -linalg.solve(jacobian, velocity)
            if np.all(np.isfinite(newton)):
                x, residual, improved = _line_search(x, newton, residual, dynamics)
        except (linalg.LinAlgError, ValueError):
            pass
        if not improved:
            descent = -jacobian.T @ velocity
            if not np.any(descent):
                return None
            x, residual, improved = _line_search(x, descent, residual, dynamics)
        if not improved:
            return x if residual < tol else None
    return x if residual < tol else None


def find_fixed_points(
    dynamics: DynamicsParams,
    seeds: np.ndarray,
    tol: float = 1e-6,
    max_iter: int = 100,
    discrete: bool = False,
    logger: Logger = getLogger(__name__),
) -> List[FixedPoint]:
    """
    Finds points where the input-free velocity vanishes by multi-start root finding.

    From every seed, Newton steps with backtracking are taken; where the Newton step fails to
    reduce `‖g‖`, a descent step on `½‖g‖²` is taken instead. Converged points closer than
    `10·tol` are merged, keeping the one with the smallest residual, so the result does not
    depend on the order of the seeds.

    Args:
        dynamics (DynamicsParams): Dynamics parameters.
        seeds (np.ndarray): Start points of shape (K, m).
        tol (float): Convergence threshold on `‖g‖`. Default is 1e-6.
        max_iter (int): Iterations per seed. Default is 100.
        discrete (bool): Use the discrete stability criterion. Default is `False`.
        logger (Logger): Logger for the search summary. Default is the module logger.

    Returns:
        List[FixedPoint]: Fixed points sorted by location. Empty when no seed converges.

    Raises:
        DomainError: If `tol` is not positive.
        ShapeError: If `seeds` is not of shape (K, m).
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))
    if seeds.shape[1] != dynamics.latent_dim:
        raise ShapeError(f"seeds have shape {seeds.shape}, expected (K, {dynamics.latent_dim})")

    converged = []
    for seed in seeds:
        root = _solve_from(seed, dynamics, tol, max_iter)
        if root is not None:
            converged.append((_residual(root, dynamics), tuple(root)))

    graph = nx.Graph()
    graph.add_nodes_from(range(len(converged)))
    locations = np.array([location for _, location in converged]).reshape(-1, dynamics.latent_dim)
    for i in range(len(converged)):
        distances = np.linalg.norm(locations[i + 1 :] - locations[i], axis=1)
        graph.add_edges_from((i, i + 1 + j) for j in np.flatnonzero(distances < 10 * tol))

    fixed_points = []
    for component in nx.connected_components(graph):
        residual, location = min(converged[i] for i in component)
        location = np.array(location)
        stability, eigenvalues = classify_stability(
            dynamics_jacobian(location, dynamics), discrete
        )
        fixed_points.append(FixedPoint(location, residual, stability, eigenvalues))
    fixed_points.sort(key=lambda point: tuple(point.location))
    logger.info(
        f"Found {len(fixed_points)} fixed points from {len(seeds)} seeds "
        f"({len(converged)} converged)"
    )
    return fixed_points


def phase_portrait(
    dynamics: DynamicsParams,
    box: Box,
    resolution: Union[int, Sequence[int]] = 20,
    posterior_means: Optional[np.ndarray] = None,
    max_posterior_seeds: int = 100,
    tol: float = 1e-6,
    max_iter: int = 100,
    discrete: bool = False,
    rng: Optional[np.random.Generator] = None,
    logger: Logger = getLogger(__name__),
) -> PhasePortrait:
    """
    Builds a phase portrait: the velocity lattice plus fixed points.

    Root finding is seeded from every lattice point and from up to `max_posterior_seeds`
    posterior means drawn without replacement.

    Args:
        dynamics (DynamicsParams): Dynamics parameters.
        box (Sequence[Tuple[float, float]]): `(low, high)` per latent dimension.
        resolution (Union[int, Sequence[int]]): Lattice points per dimension. Default is 20.
        posterior_means (np.ndarray, optional): Posterior means of shape (K, m) used as extra
            seeds.
        max_posterior_seeds (int): Cap on the posterior mean seeds. Default is 100.
        tol (float): Fixed point tolerance. Default is 1e-6.
        max_iter (int): Root finding iterations per seed. Default is 100.
        discrete (bool): Use the discrete stability criterion. Default is `False`.
        rng (np.random.Generator, optional): Random source of the subsample. Default is a
            generator seeded with 0.
        logger (Logger): Logger passed to `find_fixed_points`.

    Returns:
        PhasePortrait: The portrait.
    """
    points, velocities = velocity_grid(dynamics, box, resolution)
    seeds = points
    if posterior_means is not None and len(posterior_means):
        means = np.asarray(posterior_means, dtype=float).reshape(-1, dynamics.latent_dim)
        rng = rng or np.random.default_rng(0)
        if len(means) > max_posterior_seeds:
            means = means[np.sort(rng.choice(len(means), max_posterior_seeds, replace=False))]
        seeds = np.vstack([points, means])
    fixed_points = find_fixed_points(dynamics, seeds, tol, max_iter, discrete, logger)
    return PhasePortrait(points, velocities, fixed_points, [tuple(bounds) for bounds in box])
