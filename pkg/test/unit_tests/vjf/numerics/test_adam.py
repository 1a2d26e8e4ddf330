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

from vjf.errors import DomainError, NumericalError, ShapeError
from vjf.numerics import AdamState, adam_update, clip_by_global_norm


@pytest.fixture
def state():
    return AdamState.fresh(2, learning_rate=0.1)


def test_fresh_defaults():
    fresh = AdamState.fresh((2, 3))
    assert fresh.first_moment.shape == (2, 3)
    assert fresh.step_count == 0
    assert (fresh.learning_rate, fresh.beta1, fresh.beta2, fresh.epsilon_hat) == (
        1e-3,
        0.9,
        0.999,
        1e-8,
    )


def test_zero_gradient_is_identity(state):
    params = np.array([1.0, -2.0])
    updated, new_state = adam_update(params, np.zeros(2), state)
    np.testing.assert_array_equal(updated, params)
    assert new_state.step_count == 1


def test_zero_gradient_is_identity_for_warm_state(state):
    params = np.array([1.0, -2.0])
    for _ in range(5):
        params, state = adam_update(params, np.array([0.3, -1.0]), state)
    frozen, state = adam_update(params, np.zeros(2), state)
    np.testing.assert_array_equal(frozen, params)


def test_first_step_moves_by_learning_rate(state):
    params = np.array([1.0, 1.0])
    updated, _ = adam_update(params, np.array([5.0, -0.01]), state)
    np.testing.assert_allclose(updated, [0.9, 1.1], rtol=1e-5)


def test_constant_gradient_descends_steadily():
    params, state = np.array([0.0]), AdamState.fresh(1, learning_rate=0.1)
    history = [params[0]]
    for _ in range(100):
        params, state = adam_update(params, np.array([1.0]), state)
        history.append(params[0])
    steps = -np.diff(history)
    assert np.all(steps > 0)
    np.testing.assert_allclose(steps[10:], 0.1, rtol=1e-6)
    assert state.step_count == 100


def test_state_is_not_mutated(state):
    adam_update(np.ones(2), np.ones(2), state)
    assert state.step_count == 0
    np.testing.assert_array_equal(state.first_moment, np.zeros(2))


@pytest.mark.xfail(raises=NumericalError)
def test_non_finite_gradient(state):
    adam_update(np.ones(2), np.array([np.nan, 1.0]), state)


@pytest.mark.xfail(raises=ShapeError)
def test_shape_mismatch(state):
    adam_update(np.ones(3), np.ones(3), state)


@pytest.mark.xfail(raises=DomainError)
def test_invalid_beta():
    AdamState.fresh(1, beta1=1.0)


def test_clip_by_global_norm():
    grads = {"a": np.array([3.0]), "b": np.array([[4.0]])}
    clipped, norm = clip_by_global_norm(grads, 1.0)
    assert norm == 5.0
    np.testing.assert_allclose(clipped["a"], [0.6])
    np.testing.assert_allclose(clipped["b"], [[0.8]])


def test_clip_disabled_with_infinity():
    grads = {"a": np.array([300.0])}
    clipped, norm = clip_by_global_norm(grads, float("inf"))
    np.testing.assert_array_equal(clipped["a"], grads["a"])
    assert norm == 300.0


@pytest.mark.xfail(raises=DomainError)
def test_clip_nonpositive_threshold():
    clip_by_global_norm({"a": np.ones(1)}, 0.0)
