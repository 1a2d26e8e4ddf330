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

import numpy as np
import pytest
from scipy.stats import norm

from vjf.errors import DomainError, ShapeError
from vjf.generative import (
    ObservationKind,
    ObservationModel,
    ObservationParams,
    expected_observation,
    linear_predictor,
    observation_loglik,
    sample_observation,
)
from vjf.numerics import GradientTape, finite_diff_gradient


@pytest.fixture
def poisson():
    rng = np.random.default_rng(0)
    return ObservationParams(rng.normal(size=(4, 2)), rng.normal(size=4))


@pytest.fixture
def gaussian():
    rng = np.random.default_rng(1)
    return ObservationParams(
        rng.normal(size=(3, 2)), rng.normal(size=3), "gaussian", np.array(np.log(0.5))
    )


def test_kind_from_string(gaussian):
    assert gaussian.kind is ObservationKind.GAUSSIAN
    assert gaussian.obs_noise_var == pytest.approx(0.5)


def test_registry():
    assert ObservationModel.for_kind("poisson-canonical") is ObservationModel.PoissonCanonical
    assert ObservationModel.for_kind(ObservationKind.GAUSSIAN) is ObservationModel.Gaussian


def test_poisson_unit_rate_zero_counts():
    params = ObservationParams(np.zeros((5, 2)), np.zeros(5))
    assert observation_loglik(np.zeros(5), np.array([0.3, 0.4]), params) == -5.0


def test_poisson_single_event_unit_rate():
    params = ObservationParams(np.zeros((1, 2)), np.zeros(1))
    assert observation_loglik(np.array([1.0]), np.zeros(2), params) == -1.0


def test_poisson_factorial_constant():
    params = ObservationParams(np.zeros((1, 1)), np.zeros(1))
    with_constant = observation_loglik(np.array([3.0]), np.zeros(1), params)
    without = observation_loglik(np.array([3.0]), np.zeros(1), params, include_constant=False)
    assert with_constant == pytest.approx(without - np.log(6.0))


def test_gaussian_zero_residual():
    loading = np.array([[1.0, 0.0], [0.5, 2.0]])
    bias = np.array([0.1, -0.2])
    params = ObservationParams(loading, bias, ObservationKind.GAUSSIAN, np.array(0.0))
    x = np.array([0.3, -0.7])
    value = observation_loglik(loading @ x + bias, x, params)
    assert value == pytest.approx(-np.log(2 * np.pi))


def test_gaussian_matches_scipy(gaussian):
    rng = np.random.default_rng(5)
    x, y = rng.normal(size=2), rng.normal(size=3)
    mean = gaussian.loading @ x + gaussian.bias
    expected = norm.logpdf(y, mean, np.sqrt(0.5)).sum()
    assert observation_loglik(y, x, gaussian) == pytest.approx(expected)


def test_batch_is_sum_of_rows(poisson):
    rng = np.random.default_rng(2)
    xs = rng.normal(size=(6, 2))
    ys = rng.integers(0, 3, size=(6, 4)).astype(float)
    total = observation_loglik(ys, xs, poisson)
    rows = sum(observation_loglik(y, x, poisson) for y, x in zip(ys, xs))
    assert total == pytest.approx(rows)


def test_poisson_hessian_is_negative_rate(poisson):
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, size=4).astype(float)
    x = rng.normal(size=2)
    predictor = linear_predictor(x, poisson)
    h = 1e-4
    for i in range(4):
        step = np.zeros(4)
        step[i] = h

        def loglik(eta):
            return float(ObservationModel.PoissonCanonical.log_likelihood(y, eta, poisson, True))

        second = (loglik(predictor + step) - 2 * loglik(predictor) + loglik(predictor - step)) / (
            h * h
        )
        assert second == pytest.approx(-np.exp(predictor[i]), rel=1e-4)
        assert second <= 0


@pytest.mark.parametrize("fixture_name", ["poisson", "gaussian"])
def test_loglik_gradient(fixture_name, request):
    params = request.getfixturevalue(fixture_name)
    rng = np.random.default_rng(6)
    x = rng.normal(size=2)
    y = (
        rng.integers(0, 2, size=params.observed_dim).astype(float)
        if params.kind == ObservationKind.POISSON
        else rng.normal(size=params.observed_dim)
    )
    blocks = {"loading": params.loading, "bias": params.bias, "x": x}
    if params.log_obs_noise_var is not None:
        blocks["log_obs_noise_var"] = params.log_obs_noise_var

    def build(values):
        fields = {k: v for k, v in values.items() if k != "x"}
        return observation_loglik(y, values["x"], ObservationParams(kind=params.kind, **fields))

    gradient_tape = GradientTape()
    traced = {name: gradient_tape.watch(value, name) for name, value in blocks.items()}
    gradients = gradient_tape.gradient(build(traced), traced)
    for name, value in blocks.items():
        expected = finite_diff_gradient(
            lambda v, name=name: build({**blocks, name: v}), np.array(value)
        )
        np.testing.assert_allclose(gradients[name], expected, rtol=1e-4, atol=1e-8)


@pytest.mark.xfail(raises=DomainError)
def test_negative_counts(poisson):
    observation_loglik(np.array([0.0, -1.0, 0.0, 0.0]), np.zeros(2), poisson)


@pytest.mark.xfail(raises=DomainError)
def test_fractional_counts(poisson):
    observation_loglik(np.array([0.0, 0.5, 0.0, 0.0]), np.zeros(2), poisson)


@pytest.mark.xfail(raises=ShapeError)
def test_observation_shape_mismatch(poisson):
    observation_loglik(np.zeros(3), np.zeros(2), poisson)


@pytest.mark.xfail(raises=ShapeError)
def test_latent_shape_mismatch(poisson):
    observation_loglik(np.zeros(4), np.zeros(3), poisson)


@pytest.mark.xfail(raises=ValueError)
def test_gaussian_requires_noise():
    ObservationParams(np.zeros((2, 2)), np.zeros(2), ObservationKind.GAUSSIAN)


@pytest.mark.xfail(raises=ValueError)
def test_unknown_kind():
    ObservationParams(np.zeros((2, 2)), np.zeros(2), "bernoulli")


def test_sample_gaussian_noiseless():
    loading, bias = np.array([[1.0, 2.0]]), np.array([0.5])
    params = ObservationParams(loading, bias, "gaussian", np.array(-800.0))
    sample = sample_observation(np.array([1.0, 1.0]), params, np.random.default_rng(0))
    np.testing.assert_allclose(sample, [3.5])


def test_sample_poisson_tiny_rate():
    params = ObservationParams(np.zeros((50, 2)), np.full(50, -50.0))
    sample = sample_observation(np.zeros((100, 2)), params, np.random.default_rng(0))
    np.testing.assert_array_equal(sample, np.zeros((100, 50)))


def test_sample_poisson_thinned_mean():
    params = ObservationParams(np.zeros((10, 1)), np.full(10, np.log(0.04)))
    sample = sample_observation(np.zeros((20_000, 1)), params, np.random.default_rng(3))
    assert set(np.unique(sample)) <= {0.0, 1.0}
    expected = 1 - np.exp(-0.04)
    stderr = np.sqrt(expected * (1 - expected) / sample.size)
    assert abs(sample.mean() - expected) < 3 * stderr


def test_expected_observation(poisson, gaussian):
    x = np.array([0.2, -0.1])
    np.testing.assert_allclose(
        expected_observation(x, poisson), np.exp(poisson.loading @ x + poisson.bias)
    )
    np.testing.assert_allclose(
        expected_observation(x, gaussian), gaussian.loading @ x + gaussian.bias
    )
