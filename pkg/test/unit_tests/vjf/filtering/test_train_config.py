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

import math

import pytest
from pydantic import ValidationError

from vjf.filtering import TrainConfig


def test_defaults():
    config = TrainConfig()
    assert config.penalty_gamma == 1.0
    assert config.clip_threshold == 10.0
    assert config.adam_hyperparameters == {
        "learning_rate": 1e-3,
        "beta1": 0.9,
        "beta2": 0.999,
        "epsilon_hat": 1e-8,
    }


def test_clipping_disabled():
    assert math.isinf(TrainConfig(grad_clip=None).clip_threshold)


def test_frozen_block_names():
    config = TrainConfig(frozen=["observation.loading", "dynamics.centers"])
    assert config.frozen == ["observation.loading", "dynamics.centers"]


@pytest.mark.parametrize(
    "fields",
    [
        {"frozen": ["loading"]},
        {"frozen": ["decoder.loading"]},
        {"grad_clip": 0.0},
        {"updates_per_step": 0},
        {"beta1": 1.0},
        {"learning_rate": -1.0},
        {"momentum": 0.9},
    ],
)
@pytest.mark.xfail(raises=ValidationError)
def test_invalid(fields):
    TrainConfig(**fields)


@pytest.mark.xfail(raises=ValidationError)
def test_immutable():
    config = TrainConfig()
    config.learning_rate = 0.1
