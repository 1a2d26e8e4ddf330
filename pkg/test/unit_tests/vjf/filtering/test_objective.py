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

from dataclasses import replace

import numpy as np
import pytest

from vjf.errors import NumericalError
from vjf.filtering import FilterState, TrainConfig, grad_step_loss, init_bundle, step_loss
from vjf.generative import expected_transition_loglik, observation_loglik
from vjf.numerics import DiagGaussian, finite_diff_gradient, gaussian_entropy
from vjf.recognition import recognize


def _bundle(kind="poisson-canonical", seed=0):
    rng = np.random.default_rng(seed)
    bundle = init_bundle(5, 2, 1, 8, 4, rng, kind=kind)
    return bundle.replace_parameters(
        {
            "dynamics.weights": 0.5 * rng.normal(size=(2, 4)),
            "dynamics.input_map": rng.normal(size=(2, 1)),
            "dynamics.log_state_noise_var": np.array(-1.0),
            "observation.bias": np.full(5, -1.0),
        }
    )


@pytest.fixture
def bundle():
    return _bundle()


@pytest.fixture
def previous():
    return FilterState(DiagGaussian(np.array([0.3, -0.2]), np.array([0.5, 0.8])), step_index=4)


Y = np.array([0.0, 1.0, 0.0, 0.0, 1.0])
U = np.array([0.7])


def test_hand_decomposition(bundle, previous):
    config = TrainConfig(penalty_gamma=2.0)
    loss, state, diagnostics = step_loss(Y, U, previous, bundle, config, np.random.default_rng(9))

    rng = np.random.default_rng(9)
    current_noise, previous_noise = rng.standard_normal(2), rng.standard_normal(2)
    posterior = recognize(Y, U, previous.posterior, bundle.recognition)
    current = posterior.mean + np.sqrt(posterior.variance) * current_noise
    earlier = previous.posterior.mean + np.sqrt(previous.posterior.variance) * previous_noise
    reconstruction = observation_loglik(Y, current, bundle.observation, include_constant=False)
    dynamics = expected_transition_loglik(posterior, earlier, U, bundle.dynamics)
    entropy = gaussian_entropy(posterior.variance)
    penalty = 0.5 * 2.0 * np.exp(-1.0)

    assert diagnostics.reconstruction_ll == pytest.approx(float(reconstruction))
    assert diagnostics.dynamics_ll == pytest.approx(float(dynamics))
    assert diagnostics.entropy == pytest.approx(float(entropy))
    assert diagnostics.penalty == pytest.approx(penalty)
    assert diagnostics.objective == pytest.approx(
        float(reconstruction + dynamics + entropy) - penalty
    )
    assert loss == pytest.approx(-diagnostics.objective)
    assert state.step_index == 5
    np.testing.assert_allclose(state.posterior.mean, posterior.mean)


def test_penalty_difference(bundle, previous):
    with_penalty, _, _ = step_loss(
        Y, U, previous, bundle, TrainConfig(penalty_gamma=2.0), np.random.default_rng(1)
    )
    without, _, _ = step_loss(
        Y, U, previous, bundle, TrainConfig(penalty_gamma=0.0), np.random.default_rng(1)
    )
    assert with_penalty - without == pytest.approx(np.exp(-1.0))


def test_deterministic_given_seed(bundle, previous):
    first = step_loss(Y, U, previous, bundle, TrainConfig(), np.random.default_rng(3))
    second = step_loss(Y, U, previous, bundle, TrainConfig(), np.random.default_rng(3))
    assert first[0] == second[0]
    assert first[2] == second[2]


def test_gradient_matches_loss(bundle, previous):
    gradients, loss, state, diagnostics = grad_step_loss(
        Y, U, previous, bundle, TrainConfig(), np.random.default_rng(5)
    )
    expected = step_loss(Y, U, previous, bundle, TrainConfig(), np.random.default_rng(5))
    assert loss == pytest.approx(expected[0])
    assert diagnostics == expected[2]
    assert set(gradients) == set(bundle.block_names())
    for name, value in bundle.parameters().items():
        assert gradients[name].shape == value.shape


def test_new_state_is_untraced(bundle, previous):
    _, _, state, _ = grad_step_loss(Y, U, previous, bundle, TrainConfig(), np.random.default_rng(5))
    assert type(state.posterior.mean) is np.ndarray
    assert type(state.posterior.variance) is np.ndarray


@pytest.mark.parametrize("kind", ["poisson-canonical", "gaussian"])
def test_gradient_against_finite_differences(kind, previous):
    bundle = _bundle(kind, seed=2)
    y = Y if kind == "poisson-canonical" else np.random.default_rng(4).normal(size=5)
    config = TrainConfig(penalty_gamma=0.5)
    gradients, _, _, _ = grad_step_loss(y, U, previous, bundle, config, np.random.default_rng(7))

    for name, value in bundle.parameters().items():

        def loss(x, name=name):
            perturbed = bundle.replace_parameters({name: x})
            return step_loss(y, U, previous, perturbed, config, np.random.default_rng(7))[0]

        np.testing.assert_allclose(
            gradients[name], finite_diff_gradient(loss, value), rtol=1e-4, atol=1e-6, err_msg=name
        )


def test_zero_input_has_no_input_map_gradient(bundle, previous):
    gradients, _, _, _ = grad_step_loss(
        Y, np.zeros(1), previous, bundle, TrainConfig(), np.random.default_rng(0)
    )
    np.testing.assert_array_equal(gradients["dynamics.input_map"], 0.0)
    assert np.any(gradients["dynamics.weights"] != 0.0)


def test_step_stores_recognition_inputs(bundle, previous):
    gradients, _, _, _ = grad_step_loss(
        Y, U, previous, bundle, TrainConfig(), np.random.default_rng(0)
    )
    _, state, _ = step_loss(Y, U, previous, bundle, TrainConfig(), np.random.default_rng(0))
    stored = state.recognition_inputs
    np.testing.assert_array_equal(stored.observation, Y)
    np.testing.assert_array_equal(stored.input, U)
    np.testing.assert_array_equal(stored.posterior.mean, previous.posterior.mean)
    assert all(np.all(np.isfinite(g)) for g in gradients.values())


def test_dynamics_term_trains_previous_recognition(bundle, previous):
    _, state, _ = step_loss(Y, U, previous, bundle, TrainConfig(), np.random.default_rng(0))
    y = np.array([1.0, 0.0, 0.0, 1.0, 0.0])
    with_history, _, _, _ = grad_step_loss(
        y, U, state, bundle, TrainConfig(), np.random.default_rng(1)
    )
    constant = replace(state, recognition_inputs=None)
    without_history, _, _, _ = grad_step_loss(
        y, U, constant, bundle, TrainConfig(), np.random.default_rng(1)
    )
    for name in bundle.block_names():
        if not name.startswith("recognition."):
            continue
        assert not np.allclose(with_history[name], without_history[name]), name


def test_history_sample_uses_recomputed_recognition(bundle, previous):
    config = TrainConfig()
    _, state, _ = step_loss(Y, U, previous, bundle, config, np.random.default_rng(0))
    y = np.array([1.0, 0.0, 0.0, 1.0, 0.0])
    _, _, diagnostics = step_loss(y, U, state, bundle, config, np.random.default_rng(3))

    rng = np.random.default_rng(3)
    current_noise, previous_noise = rng.standard_normal(2), rng.standard_normal(2)
    recomputed = recognize(Y, U, previous.posterior, bundle.recognition)
    posterior = recognize(y, U, state.posterior, bundle.recognition)
    earlier = recomputed.mean + np.sqrt(recomputed.variance) * previous_noise
    dynamics = expected_transition_loglik(posterior, earlier, U, bundle.dynamics)
    assert diagnostics.dynamics_ll == pytest.approx(float(dynamics))


def test_stored_history_is_untraced(bundle, previous):
    _, _, first, _ = grad_step_loss(Y, U, previous, bundle, TrainConfig(), np.random.default_rng(0))
    _, _, second, _ = grad_step_loss(Y, U, first, bundle, TrainConfig(), np.random.default_rng(1))
    stored = second.recognition_inputs
    assert type(stored.posterior.mean) is np.ndarray
    assert type(stored.posterior.variance) is np.ndarray
    np.testing.assert_array_equal(stored.posterior.mean, first.posterior.mean)


def _random_case(seed):
    rng = np.random.default_rng(seed)
    n, m, p = int(rng.integers(1, 11)), int(rng.integers(1, 4)), int(rng.integers(0, 3))
    q, r = int(rng.integers(1, 17)), int(rng.integers(1, 9))
    kind = "poisson-canonical" if seed % 2 == 0 else "gaussian"
    bundle = init_bundle(n, m, p, q, r, rng, kind=kind)
    bundle = bundle.replace_parameters(
        {
            "dynamics.weights": 0.5 * rng.normal(size=(m, r)),
            "dynamics.input_map": rng.normal(size=(m, p)),
            "dynamics.log_state_noise_var": np.array(rng.uniform(-2.0, 0.0)),
            "observation.bias": rng.uniform(-2.0, 0.0, size=n),
        }
    )

    def draw_input():
        return rng.normal(size=p) if p else None

    def draw_observation():
        if kind == "poisson-canonical":
            return rng.poisson(0.5, size=n).astype(float)
        return rng.normal(size=n)

    start = FilterState(DiagGaussian(rng.normal(size=m), rng.uniform(0.2, 1.5, size=m)), 3)
    config = TrainConfig(penalty_gamma=float(rng.uniform(0.0, 2.0)))
    _, state, _ = step_loss(draw_observation(), draw_input(), start, bundle, config, rng)
    return bundle, draw_observation(), draw_input(), state, config


@pytest.mark.parametrize("seed", range(200))
def test_gradient_against_finite_differences_random_dimensions(seed):
    bundle, y, u, state, config = _random_case(seed)
    gradients, _, _, _ = grad_step_loss(y, u, state, bundle, config, np.random.default_rng(seed))

    for name, value in bundle.parameters().items():

        def loss(x, name=name):
            perturbed = bundle.replace_parameters({name: x})
            return step_loss(y, u, state, perturbed, config, np.random.default_rng(seed))[0]

        np.testing.assert_allclose(
            gradients[name], finite_diff_gradient(loss, value), rtol=1e-4, atol=1e-6, err_msg=name
        )


def test_non_finite_reconstruction(bundle, previous):
    huge = bundle.replace_parameters({"observation.bias": np.full(5, 1e6)})
    with np.errstate(over="ignore", invalid="ignore"):
        with pytest.raises(NumericalError) as error:
            step_loss(Y, U, previous, huge, TrainConfig(), np.random.default_rng(0))
    assert error.value.component == "reconstruction"
