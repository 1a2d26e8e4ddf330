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

from vjf.errors import DomainError, NumericalError
from vjf.numerics import finite_diff_gradient


def test_quadratic():
    gradient = finite_diff_gradient(lambda x: float(x @ x), np.array([1.0, 2.0]), h=1e-5)
    np.testing.assert_allclose(gradient, [2.0, 4.0], rtol=1e-9)


def test_constant():
    np.testing.assert_array_equal(finite_diff_gradient(lambda x: 3.0, np.ones(3)), np.zeros(3))


def test_matrix_argument_keeps_shape():
    gradient = finite_diff_gradient(lambda a: float(np.sum(a ** 2)), np.ones((2, 3)))
    assert gradient.shape == (2, 3)
    np.testing.assert_allclose(gradient, 2.0 * np.ones((2, 3)), rtol=1e-8)


def test_input_not_modified():
    x = np.array([0.5, 0.25])
    finite_diff_gradient(lambda v: float(np.sum(np.sin(v))), x)
    np.testing.assert_array_equal(x, [0.5, 0.25])


@pytest.mark.xfail(raises=NumericalError)
def test_non_finite_evaluation():
    finite_diff_gradient(lambda x: float(np.log(x[0])), np.array([0.0]))


@pytest.mark.xfail(raises=DomainError)
def test_nonpositive_step():
    finite_diff_gradient(lambda x: 0.0, np.ones(1), h=0.0)
