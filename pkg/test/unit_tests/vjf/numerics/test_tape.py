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

from vjf.numerics import GradientTape, finite_diff_gradient, value_of
from vjf.numerics import tape as ops


def _check_gradient(build, x0, rtol=1e-5):
    gradient_tape = GradientTape()
    x = gradient_tape.watch(x0, "x")
    gradient = gradient_tape.gradient(build(x), {"x": x})["x"]
    expected = finite_diff_gradient(lambda v: float(build(v)), x0)
    np.testing.assert_allclose(gradient, expected, rtol=rtol, atol=1e-8)


@pytest.mark.parametrize(
    "build",
    [
        lambda x: ops.sum(x * x),
        lambda x: ops.sum(ops.exp(x) / (1.0 + x * x)),
        lambda x: ops.sum(ops.tanh(x) - 2.0 * x),
        lambda x: ops.sum(ops.log(ops.square(x) + 1.0)),
        lambda x: ops.sum(ops.sqrt(ops.exp(x))),
        lambda x: ops.sum((x - 3.0) ** 3),
        lambda x: ops.sum(3.0 / (x + 5.0)),
        lambda x: ops.sum(-x[1:] * x[:-1]),
        lambda x: ops.sum(ops.concatenate([x, ops.exp(x[0])]) * np.arange(5.0)),
        lambda x: ops.sum(ops.relu(x) * x),
        lambda x: ops.sum(ops.maximum(x, 0.2) * ops.minimum(x, -0.1)),
    ],
)
def test_elementwise_gradients(build):
    rng = np.random.default_rng(0)
    for _ in range(100):
        _check_gradient(build, rng.uniform(-1.5, 1.5, size=4))


@pytest.mark.parametrize("seed", range(100))
def test_matrix_vector_gradients(seed):
    rng = np.random.default_rng(seed)
    matrix = rng.normal(size=(3, 4))
    vector = rng.normal(size=4)

    _check_gradient(lambda a: ops.sum(ops.tanh(a @ vector)), matrix)
    _check_gradient(lambda v: ops.sum(ops.tanh(matrix @ v)), vector)
    _check_gradient(lambda v: ops.sum(v @ matrix.T), vector)
    _check_gradient(lambda v: v @ v, vector)
    _check_gradient(lambda a: ops.sum(ops.square(a @ a.T)), matrix)
    _check_gradient(lambda a: ops.sum(ops.exp(ops.sum(a, axis=0))), matrix)


def test_broadcast_gradient_is_reduced():
    gradient_tape = GradientTape()
    row = gradient_tape.watch(np.array([1.0, 2.0]), "row")
    loss = ops.sum(row * np.ones((3, 2)))
    np.testing.assert_allclose(gradient_tape.gradient(loss, {"row": row})["row"], [3.0, 3.0])


def test_maximum_blocks_gradient_below_floor():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.array([-5.0, 2.0]), "x")
    loss = ops.sum(ops.maximum(x, 0.0))
    np.testing.assert_allclose(gradient_tape.gradient(loss, {"x": x})["x"], [0.0, 1.0])


def test_minimum_blocks_gradient_above_ceiling():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.array([-5.0, 2.0]), "x")
    loss = ops.sum(ops.minimum(x, 0.0) * 3.0)
    np.testing.assert_allclose(gradient_tape.gradient(loss, {"x": x})["x"], [3.0, 0.0])


def test_relu_gradient():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.array([-1.0, 3.0]), "x")
    loss = ops.sum(ops.relu(x) * 2.0)
    np.testing.assert_allclose(gradient_tape.gradient(loss, {"x": x})["x"], [0.0, 2.0])


def test_unused_source_gets_zero_gradient():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.ones(2), "x")
    unused = gradient_tape.watch(np.ones((2, 2)), "unused")
    gradients = gradient_tape.gradient(ops.sum(x), {"x": x, "unused": unused})
    np.testing.assert_array_equal(gradients["unused"], np.zeros((2, 2)))


def test_reused_variable_accumulates():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.array([2.0]), "x")
    loss = ops.sum(x * x + x)
    np.testing.assert_allclose(gradient_tape.gradient(loss, {"x": x})["x"], [5.0])


def test_plain_inputs_stay_numpy():
    result = ops.exp(np.zeros(2)) + ops.matmul(np.eye(2), np.ones(2))
    assert isinstance(result, np.ndarray)
    np.testing.assert_array_equal(result, [2.0, 2.0])


def test_numpy_left_operand_defers_to_variable():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.ones(2), "x")
    product = np.array([2.0, 3.0]) * x
    assert isinstance(product, ops.Variable)
    np.testing.assert_array_equal(value_of(product), [2.0, 3.0])


@pytest.mark.xfail(raises=ValueError)
def test_gradient_of_vector_target():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.ones(2), "x")
    gradient_tape.gradient(x * 2.0, {"x": x})


@pytest.mark.xfail(raises=ValueError)
def test_gradient_of_foreign_target():
    gradient_tape = GradientTape()
    x = gradient_tape.watch(np.ones(2), "x")
    other = GradientTape()
    gradient_tape.gradient(ops.sum(other.watch(np.ones(1))), {"x": x})
