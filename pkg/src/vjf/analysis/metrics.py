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
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from vjf.errors import DomainError, ShapeError
from vjf.generative.observation import ObservationParams, observation_loglik


def prediction_rmse(predicted: np.ndarray, truth: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Root mean square prediction error per horizon, averaged over trials.

    Args:
        predicted (np.ndarray): Predicted paths of shape (n_trials, T, d).
        truth (np.ndarray): True path of shape (T, d).

    Returns:
        Tuple[np.ndarray, np.ndarray]: Mean RMSE and its standard error over trials, each of
        shape (T,). The standard error of a single trial is zero.

    Raises:
        ShapeError: If the shapes disagree.
    """
    predicted = np.asarray(predicted, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if predicted.ndim != 3 or predicted.shape[1:] != truth.shape:
        raise ShapeError(
            f"predicted shape {predicted.shape} does not match (n_trials, *{truth.shape})"
        )
    errors = np.sqrt(np.mean((predicted - truth) ** 2, axis=2))
    mean = errors.mean(axis=0)
    if len(errors) < 2:
        return mean, np.zeros_like(mean)
    return mean, errors.std(axis=0, ddof=1) / np.sqrt(len(errors))


def posterior_density(
    means: np.ndarray,
    box: Sequence[Tuple[float, float]],
    resolution: int = 20,
    dims: Tuple[int, int] = (0, 1),
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Two-dimensional histogram of posterior means, normalized to sum to one.

    Args:
        means (np.ndarray): Posterior means of shape (K, m).
        box (Sequence[Tuple[float, float]]): Bounds for the two selected dimensions.
        resolution (int): Bins per dimension. Default is 20.
        dims (Tuple[int, int]): Latent dimensions to histogram. Default is (0, 1).

    Returns:
        Tuple[np.ndarray, np.ndarray, np.ndarray]: Normalized counts of shape
        (resolution, resolution) and the bin edges of both dimensions.

    Raises:
        DomainError: If there are no means inside the box.
        ShapeError: If `means` is not a matrix with the selected dimensions.
    """
    means = np.asarray(means, dtype=float)
    if means.size == 0:
        raise DomainError("posterior density needs at least one point")
    if means.ndim != 2 or max(dims) >= means.shape[1] or len(box) != 2:
        raise ShapeError(f"cannot histogram dimensions {dims} of means with shape {means.shape}")
    counts, x_edges, y_edges = np.histogram2d(
        means[:, dims[0]], means[:, dims[1]], bins=resolution, range=[list(b) for b in box]
    )
    total = counts.sum()
    if total == 0:
        raise DomainError("no posterior means fall inside the box")
    return counts / total, x_edges, y_edges


def per_bin_log_likelihood(
    observations: np.ndarray, means: np.ndarray, observation: ObservationParams
) -> float:
    """
    Log-likelihood of the observations at the posterior means, per channel and time bin.

    `log(y!)` is included so values compare with log-likelihoods reported elsewhere.
    """
    observations = np.asarray(observations, dtype=float)
    total = observation_loglik(observations, means, observation, include_constant=True)
    return float(total) / observations.size


def plateau_reached(
    series: Sequence[float], window_fraction: float = 0.1, threshold: float = 0.05
) -> bool:
    """
    Tests whether a training curve has flattened.

    The mean over the last `window_fraction` of the series must differ from the mean over the
    window before it by less than `threshold` times the range the series traversed.

    Raises:
        DomainError: If the series is too short for two windows.
    """
    series = np.asarray(series, dtype=float)
    window = int(len(series) * window_fraction)
    if window < 1:
        raise DomainError(f"series of length {len(series)} is too short for a plateau test")
    last = series[-window:].mean()
    previous = series[-2 * window : -window].mean()
    traversed = series.max() - series.min()
    return bool(abs(last - previous) <= threshold * traversed)


@dataclass(frozen=True)
class TimingReport:
    """
    Regression of per-step wall time on step index.

    Attributes:
        slope (float): Least-squares slope in seconds per step.
        intercept (float): Intercept in seconds.
        slope_ci (Tuple[float, float]): 95% confidence interval of the slope.
        median (float): Median step time in seconds.
        second_half_ratio (float): Median of the second half over median of the first half.
        second_half_max_ratio (float): Maximum of the second half over median of the first half.
    """

    slope: float
    intercept: float
    slope_ci: Tuple[float, float]
    median: float
    second_half_ratio: float
    second_half_max_ratio: float

    @property
    def constant_time(self) -> bool:
        """Whether the slope is not significantly positive at the 95% level."""
        return self.slope_ci[0] <= 0.0

    def to_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "slope_ci": list(self.slope_ci),
            "median_ms": self.median * 1e3,
            "second_half_ratio": self.second_half_ratio,
            "second_half_max_ratio": self.second_half_max_ratio,
            "constant_time": self.constant_time,
        }


def timing_regression(wall_times: Sequence[float], confidence: float = 0.95) -> TimingReport:
    """
    Fits per-step wall time against step index.

    Raises:
        DomainError: If fewer than four times are given.
    """
    wall_times = np.asarray(wall_times, dtype=float)
    if len(wall_times) < 4:
        raise DomainError("timing regression needs at least four steps")
    fit = stats.linregress(np.arange(len(wall_times)), wall_times)
    margin = stats.t.ppf(0.5 + confidence / 2, len(wall_times) - 2) * fit.stderr
    half = len(wall_times) // 2
    first_median = float(np.median(wall_times[:half]))
    second = wall_times[half:]
    return TimingReport(
        slope=float(fit.slope),
        intercept=float(fit.intercept),
        slope_ci=(float(fit.slope - margin), float(fit.slope + margin)),
        median=float(np.median(wall_times)),
        second_half_ratio=float(np.median(second) / first_median) if first_median else np.inf,
        second_half_max_ratio=float(second.max() / first_median) if first_median else np.inf,
    )


@dataclass(frozen=True)
class LjungBoxResult:
    statistic: float
    p_value: float
    lags: int

    def white(self, level: float = 0.05) -> bool:
        """Whether whiteness is not rejected at `level`."""
        return self.p_value > level


def ljung_box(residuals: Sequence[float], lags: Optional[int] = None) -> LjungBoxResult:
    """
    Ljung-Box test for autocorrelation in a residual series.

    Args:
        residuals (Sequence[float]): One-dimensional residual series of length T.
        lags (int, optional): Number of autocorrelation lags h. Default is `min(10, T // 5)`.

    Returns:
        LjungBoxResult: `Q = T(T+2) Σ_k ρ_k² / (T-k)` and its χ²(h) tail probability.

    Raises:
        ShapeError: If `residuals` is not one-dimensional.
        DomainError: If the series is constant or too short for the lags.
    """
    residuals = np.asarray(residuals, dtype=float)
    if residuals.ndim != 1:
        raise ShapeError("ljung_box takes a one-dimensional series")
    length = len(residuals)
    lags = lags if lags is not None else min(10, length // 5)
    if lags < 1 or lags >= length:
        raise DomainError(f"cannot test {lags} lags on a series of length {length}")
    centered = residuals - residuals.mean()
    denominator = centered @ centered
    if denominator == 0:
        raise DomainError("residual series is constant")
    autocorrelations = np.array(
        [centered[k:] @ centered[:-k] / denominator for k in range(1, lags + 1)]
    )
    statistic = length * (length + 2) * np.sum(
        autocorrelations ** 2 / (length - np.arange(1, lags + 1))
    )
    return LjungBoxResult(float(statistic), float(stats.chi2.sf(statistic, lags)), lags)
