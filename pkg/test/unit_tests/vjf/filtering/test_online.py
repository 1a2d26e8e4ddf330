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

import logging

import numpy as np
import pytest

from vjf.errors import ConfigurationError
from vjf.filtering import (
    FilterState,
    TrainConfig,
    apply_gradients,
    filter_online,
    filter_step,
    init_bundle,
    init_optimizer,
)


def _sequence(seed, length=20, n=5, p=1):
    rng = np.random.default_rng(seed)
    observations = (rng.random((length, n)) < 0.2).astype(float)
    inputs = rng.normal(size=(length, p)) if p else None
    return observations, inputs


@pytest.fixture
def bundle():
    return init_bundle(5, 2, 1, 8, 4, np.random.default_rng(0))


def _assert_same_parameters(first, second):
    a, b = first.parameters(), second.parameters()
    assert a.keys() == b.keys()
    for name in a:
        np.testing.assert_array_equal(a[name], b[name], err_msg=name)


def test_zero_learning_rate_keeps_parameters(bundle):
    result = filter_online([_sequence(1)], bundle, TrainConfig(learning_rate=0.0))
    before, after = bundle.parameters(), result.bundle.parameters()
    for name in before:
        np.testing.assert_allclose(after[name], before[name], atol=1e-12, err_msg=name)


def test_single_sequence_equals_repeated_steps(bundle):
    config = TrainConfig(learning_rate=1e-2, seed=4)
    observations, inputs = _sequence(2)
    result = filter_online([(observations, inputs)], bundle, config)

    rng = np.random.default_rng(np.random.SeedSequence(4).spawn(2)[0])
    state, stepped, optimizer = FilterState.initial(2), bundle, init_optimizer(bundle, config)
    for t in range(len(observations)):
        u_prev = inputs[t - 1] if t else np.zeros(1)
        state, stepped, optimizer, _ = filter_step(
            observations[t], u_prev, state, stepped, optimizer, config, rng
        )
    _assert_same_parameters(result.bundle, stepped)
    np.testing.assert_array_equal(result.means[0][-1], state.posterior.mean)
    assert result.final_states[0].step_index == 20


def test_identical_sequences_match_single(bundle):
    config = TrainConfig(learning_rate=1e-2)
    sequence = _sequence(3)
    single = filter_online([sequence], bundle, config, rngs=[np.random.default_rng(7)])
    double = filter_online(
        [sequence, sequence],
        bundle,
        config,
        rngs=[np.random.default_rng(7), np.random.default_rng(7)],
    )
    _assert_same_parameters(single.bundle, double.bundle)
    np.testing.assert_array_equal(double.means[0], double.means[1])


def test_loading_columns_stay_normalized(bundle):
    result = filter_online([_sequence(4)], bundle, TrainConfig(learning_rate=0.05))
    np.testing.assert_allclose(np.linalg.norm(result.bundle.observation.loading, axis=0), 1.0)
    assert not np.allclose(result.bundle.observation.loading, bundle.observation.loading)


def test_frozen_blocks_do_not_move(bundle):
    config = TrainConfig(learning_rate=0.05, frozen=["observation.loading", "dynamics.centers"])
    result = filter_online([_sequence(5)], bundle, config)
    np.testing.assert_array_equal(result.bundle.observation.loading, bundle.observation.loading)
    np.testing.assert_array_equal(result.bundle.dynamics.centers, bundle.dynamics.centers)
    assert "observation.loading" not in result.optimizer


def test_variable_lengths(bundle):
    sequences = [_sequence(6, length=8), _sequence(7, length=5)]
    calls = []
    result = filter_online(sequences, bundle, TrainConfig(), on_step=lambda t, d: calls.append(t))
    assert [m.shape for m in result.means] == [(8, 2), (5, 2)]
    assert len(result.diagnostics) == 8
    assert calls == list(range(8))
    assert [s.step_index for s in result.final_states] == [8, 5]
    assert np.all(result.variances[1] > 0)


def test_wall_time_recording(bundle):
    quiet = filter_online([_sequence(8, length=5)], bundle, TrainConfig(record_wall_time=False))
    assert all(d.wall_time == 0.0 for d in quiet.diagnostics)
    timed = filter_online([_sequence(8, length=5)], bundle, TrainConfig())
    assert all(d.wall_time > 0.0 for d in timed.diagnostics)


def test_updates_per_step(bundle):
    config = TrainConfig(learning_rate=1e-2)
    once = filter_online([_sequence(9)], bundle, config)
    twice = filter_online([_sequence(9)], bundle, config.model_copy(update={"updates_per_step": 2}))
    assert twice.optimizer["dynamics.weights"].step_count == 40
    assert once.optimizer["dynamics.weights"].step_count == 20


def test_warm_start_carries_parameters(bundle):
    config = TrainConfig(learning_rate=1e-2, warm_start_passes=2, warm_start_steps=10)
    result = filter_online([_sequence(10)], bundle, config)
    assert result.optimizer["dynamics.weights"].step_count == 2 * 10 + 20
    assert result.means[0].shape == (20, 2)
    assert len(result.diagnostics) == 20


def test_reseed_centers_onto_visited_means(bundle):
    config = TrainConfig(reseed_after=6, frozen=["dynamics.centers"])
    result = filter_online([_sequence(11)], bundle, config)
    visited = result.means[0][:6]
    for center in result.bundle.dynamics.centers:
        assert np.any(np.all(visited == center, axis=1))


def test_rejected_update_keeps_bundle(bundle, caplog):
    config = TrainConfig()
    optimizer = init_optimizer(bundle, config)
    gradients = {name: np.zeros_like(v) for name, v in bundle.parameters().items()}
    gradients["dynamics.weights"][0, 0] = np.inf
    with caplog.at_level(logging.WARNING):
        updated, new_optimizer, rejected = apply_gradients(bundle, optimizer, gradients, config)
    assert rejected
    assert updated is bundle
    assert new_optimizer is optimizer
    assert "Rejected" in caplog.text


@pytest.mark.parametrize(
    "sequences",
    [
        [],
        [(np.zeros((5, 4)), np.zeros((5, 1)))],
        [(np.zeros((5, 5)), None)],
        [(np.zeros((5, 5)), np.zeros((4, 1)))],
        [(np.zeros((0, 5)), np.zeros((0, 1)))],
    ],
)
@pytest.mark.xfail(raises=ConfigurationError)
def test_invalid_sequences(bundle, sequences):
    filter_online(sequences, bundle, TrainConfig())


@pytest.mark.xfail(raises=ConfigurationError)
def test_generator_count(bundle):
    filter_online([_sequence(1)], bundle, TrainConfig(), rngs=[])


@pytest.mark.xfail(raises=ConfigurationError)
def test_unknown_frozen_block(bundle):
    init_optimizer(bundle, TrainConfig(frozen=["observation.log_obs_noise_var"]))
