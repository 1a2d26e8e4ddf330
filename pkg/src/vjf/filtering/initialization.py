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

import warnings
from logging import Logger, getLogger
from typing import Optional, Tuple

import numpy as np
from sklearn.decomposition import FactorAnalysis

from vjf.errors import DomainError
from vjf.filtering.bundle import ModelBundle
from vjf.generative.dynamics import init_dynamics
from vjf.generative.observation import ObservationKind, ObservationParams
from vjf.recognition.network import RecognitionActivation, init_recognition

_MIN_RATE = 1e-4
_DEGENERATE_VARIANCE = 1e-12


def normalize_loading(loading: np.ndarray) -> np.ndarray:
    """
    Scales every column of the loading matrix to unit Euclidean norm.

    Raises:
        DomainError: If a column is zero.
    """
    loading = np.asarray(loading, dtype=float)
    norms = np.linalg.norm(loading, axis=0)
    if np.any(norms == 0):
        raise DomainError(f"loading has zero columns at {np.flatnonzero(norms == 0).tolist()}")
    return loading / norms


def _random_orthonormal(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, m)))
    return q * np.sign(np.diag(r))


def _complete_rank(loading: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n, m = loading.shape
    norms = np.linalg.norm(loading, axis=0)
    scale = norms.max() if norms.max() > 0 else 1.0
    completed = loading.copy()
    for column in np.flatnonzero(norms < 1e-8 * scale):
        basis, _ = np.linalg.qr(np.delete(completed, column, axis=1))
        candidate = rng.standard_normal(n)
        candidate -= basis @ (basis.T @ candidate)
        completed[:, column] = candidate / np.linalg.norm(candidate) * scale
    return completed


def init_loading_fa(
    observations: np.ndarray,
    m: int,
    kind: ObservationKind = ObservationKind.POISSON,
    rng: Optional[np.random.Generator] = None,
    logger: Logger = getLogger(__name__),
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Initializes the loading matrix and bias from a sample of observations by factor analysis.

    The bias is the channel mean, or the log of the mean rate for Poisson observations. The
    loading is the matrix of the m leading factor directions with unit-norm columns. When the
    sample has no variance the loading falls back to random orthonormal columns; factors that
    come out degenerate are replaced by random directions orthogonal to the others.

    Args:
        observations (np.ndarray): Sample of shape (T, n) with T ≥ 10·m.
        m (int): Latent dimension, at most n.
        kind (ObservationKind): Observation kind. Default is Poisson.
        rng (np.random.Generator, optional): Random source of the fallbacks. Default is a
            generator seeded with 0.
        logger (Logger): Logger for the fallback warning. Default is the module logger.

    Returns:
        Tuple[np.ndarray, np.ndarray]: Loading C of shape (n, m) and bias b of shape (n,).

    Raises:
        DomainError: If the sample is too short or m exceeds n.
    """
    observations = np.asarray(observations, dtype=float)
    rng = rng or np.random.default_rng(0)
    length, n = observations.shape
    if m < 1 or m > n:
        raise DomainError(f"latent dimension {m} must lie between 1 and {n}")
    if length < 10 * m:
        raise DomainError(f"factor analysis needs at least {10 * m} time bins, got {length}")

    mean = observations.mean(axis=0)
    if ObservationKind(kind) == ObservationKind.POISSON:
        bias = np.log(np.maximum(mean, _MIN_RATE))
    else:
        bias = mean

    if observations.var(axis=0).sum() < _DEGENERATE_VARIANCE:
        logger.warning("Observations have no variance; using random orthonormal loading")
        return _random_orthonormal(n, m, rng), bias

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        analysis = FactorAnalysis(n_components=m, svd_method="lapack").fit(observations)
    loading = analysis.components_.T
    if not np.all(np.isfinite(loading)):
        logger.warning("Factor analysis did not converge; using random orthonormal loading")
        return _random_orthonormal(n, m, rng), bias
    if np.linalg.matrix_rank(loading) < m:
        logger.warning("Factor analysis loading is rank deficient; completing with random columns")
        loading = _complete_rank(loading, rng)
    return normalize_loading(loading), bias


def init_bundle(
    n: int,
    m: int,
    p: int,
    q: int,
    r: int,
    rng: np.random.Generator,
    kind: ObservationKind = ObservationKind.POISSON,
    activation: RecognitionActivation = RecognitionActivation.TANH,
    center_box: Tuple[float, float] = (-2.0, 2.0),
    observations: Optional[np.ndarray] = None,
    logger: Logger = getLogger(__name__),
) -> ModelBundle:
    """
    Builds an initial model.

    The loading comes from factor analysis of `observations` when given, random orthonormal
    columns otherwise. The Gaussian observation noise starts at the mean channel variance of
    the sample, or 1 without a sample.

    Args:
        n (int): Observation dimension.
        m (int): Latent dimension.
        p (int): Input dimension.
        q (int): Recognition hidden units.
        r (int): Basis functions.
        rng (np.random.Generator): Random source.
        kind (ObservationKind): Observation kind. Default is Poisson.
        activation (RecognitionActivation): Recognition nonlinearity. Default is tanh.
        center_box (Tuple[float, float]): Box of the initial basis centers. Default is (-2, 2).
        observations (np.ndarray, optional): Sample of shape (T, n) for factor analysis.
        logger (Logger): Logger passed to `init_loading_fa`.

    Returns:
        ModelBundle: The initial model.
    """
    kind = ObservationKind(kind)
    dynamics = init_dynamics(m, r, p, rng, box=center_box)
    recognition = init_recognition(n, m, p, q, rng, activation)
    noise_var = 1.0
    if observations is not None:
        loading, bias = init_loading_fa(observations, m, kind, rng, logger)
        noise_var = max(float(np.mean(np.var(observations, axis=0))), 1e-6)
    else:
        loading = _random_orthonormal(n, m, rng)
        bias = np.full(n, np.log(0.04)) if kind == ObservationKind.POISSON else np.zeros(n)
    observation = ObservationParams(
        loading,
        bias,
        kind,
        np.array(np.log(noise_var)) if kind == ObservationKind.GAUSSIAN else None,
    )
    return ModelBundle(dynamics, observation, recognition)
