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

from vjf.errors import ShapeError
from vjf.filtering import ModelBundle, init_bundle
from vjf.generative import ObservationKind
from vjf.numerics import GradientTape, Variable
from vjf.recognition import init_recognition


@pytest.fixture
def bundle():
    return init_bundle(5, 2, 1, 8, 4, np.random.default_rng(0))


def test_dimensions(bundle):
    assert bundle.dimensions == {"n": 5, "m": 2, "p": 1, "q": 8, "r": 4}
    assert bundle.kind == ObservationKind.POISSON


def test_block_names_poisson(bundle):
    assert bundle.block_names() == (
        "dynamics.weights",
        "dynamics.centers",
        "dynamics.log_inverse_widths",
        "dynamics.input_map",
        "dynamics.log_state_noise_var",
        "observation.loading",
        "observation.bias",
        "recognition.hidden_weights",
        "recognition.hidden_bias",
        "recognition.output_weights",
        "recognition.output_bias",
    )


def test_block_names_gaussian():
    bundle = init_bundle(5, 2, 0, 8, 4, np.random.default_rng(0), kind="gaussian")
    assert "observation.log_obs_noise_var" in bundle.block_names()


def test_parameters_are_copies(bundle):
    blocks = bundle.parameters()
    blocks["observation.bias"][:] = 100.0
    assert not np.any(bundle.parameters()["observation.bias"] == 100.0)


def test_replace_parameters(bundle):
    updated = bundle.replace_parameters({"dynamics.weights": np.ones((2, 4))})
    np.testing.assert_array_equal(updated.dynamics.weights, np.ones((2, 4)))
    assert not np.any(bundle.dynamics.weights == 1.0)
    assert updated.recognition is bundle.recognition


@pytest.mark.xfail(raises=KeyError)
def test_replace_unknown_block(bundle):
    bundle.replace_parameters({"dynamics.speed": np.zeros(2)})


@pytest.mark.xfail(raises=ShapeError)
def test_recognition_size_mismatch(bundle):
    ModelBundle(
        bundle.dynamics,
        bundle.observation,
        init_recognition(6, 2, 1, 8, np.random.default_rng(1)),
    )


def test_traced(bundle):
    tape = GradientTape()
    traced, sources = bundle.traced(tape)
    assert set(sources) == set(bundle.block_names())
    assert all(isinstance(v, Variable) for v in sources.values())
    assert traced.dynamics.weights is sources["dynamics.weights"]
