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
from pydantic import ValidationError

from vjf.errors import ConfigurationError, DomainError
from vjf.simulators import (
    DynamicalSystem,
    SimSpec,
    simulate,
    simulate_bistable,
    simulate_fhn,
    simulate_lorenz,
    simulate_ring,
    simulate_switching_lds,
)


def _radii(trajectory):
    return np.linalg.norm(trajectory.latents, axis=1)


def test_ring_stays_on_unit_circle():
    spec = SimSpec(
        system="ring",
        parameters={"input_magnitude": 0.0},
        noise_std=0.0,
        initial_state=[1.0, 0.0],
        n_steps=1000,
    )
    (trajectory,) = simulate_ring(spec)
    np.testing.assert_allclose(_radii(trajectory), 1.0, atol=1e-10)


def test_ring_radius_decays_to_one():
    spec = SimSpec(
        system="ring",
        parameters={"input_magnitude": 0.0},
        noise_std=0.0,
        initial_state=[0.0, 2.0],
        n_steps=200,
    )
    (trajectory,) = simulate_ring(spec)
    radii = _radii(trajectory)
    assert np.all(np.diff(radii) < 0)
    assert np.all(radii > 1.0)
    times = np.arange(11) * 0.1
    assert np.all(np.abs(radii[:11] - (1.0 + np.exp(-times))) < 5 * 0.1)


def test_ring_phase_advances_with_drive():
    spec = SimSpec(system="ring", noise_std=0.0, initial_state=[1.0, 0.0], n_steps=20, seed=3)
    (trajectory,) = simulate_ring(spec)
    drive = trajectory.inputs[0, 0]
    assert abs(drive) == 1.0
    np.testing.assert_array_equal(trajectory.inputs, drive)
    angles = np.unwrap(np.arctan2(trajectory.latents[:, 1], trajectory.latents[:, 0]))
    np.testing.assert_allclose(np.diff(angles), drive * 0.1, atol=1e-3)


def test_ring_input_sign_varies_across_sequences():
    trajectories = simulate(SimSpec(system="ring", n_sequences=20, n_steps=2))
    signs = {t.inputs[0, 0] for t in trajectories}
    assert signs == {-1.0, 1.0}


@pytest.mark.xfail(raises=DomainError)
def test_ring_origin_start():
    simulate(SimSpec(system="ring", initial_state=[0.0, 0.0], n_steps=3))


def test_fhn_fixed_point():
    system = DynamicalSystem.create("fhn")
    np.testing.assert_allclose(system.velocity(np.array([0.5, 0.25]), np.zeros(0)), 0.0, atol=1e-12)


def test_fhn_oscillates():
    spec = SimSpec(system="fhn", noise_std=0.0, initial_state=[0.0, 0.0], n_steps=4000)
    (trajectory,) = simulate_fhn(spec)
    v = trajectory.latents[:, 0]
    assert trajectory.inputs.shape == (4000, 0)
    peaks = [t for t in range(1, len(v) - 1) if v[t - 1] < v[t] >= v[t + 1] and v[t] > 0.5]
    assert len(peaks) >= 3
    np.testing.assert_allclose(v[peaks[-1]], v[peaks[-2]], atol=1e-2)


@pytest.mark.parametrize(
    "state", [[0.0, 0.0, 0.0], [np.sqrt(72), np.sqrt(72), 27.0], [-np.sqrt(72), -np.sqrt(72), 27.0]]
)
def test_lorenz_fixed_points(state):
    system = DynamicalSystem.create("lorenz")
    np.testing.assert_allclose(system.velocity(np.array(state), np.zeros(0)), 0.0, atol=1e-12)


def test_lorenz_starts_are_distinct_grid_cells():
    system = DynamicalSystem.create("lorenz")
    rng = np.random.default_rng(0)
    starts = np.array([system.initial_state(i, 216, rng) for i in range(216)])
    assert len(np.unique(starts, axis=0)) == 216
    assert len(np.unique(starts[:, 0])) == 6


def test_lorenz_stays_in_box_after_transient():
    trajectories = simulate_lorenz(SimSpec(system="lorenz", n_sequences=8, n_steps=1000))
    for trajectory in trajectories:
        x, y, z = trajectory.latents.T
        assert trajectory.n_steps == 1000
        assert np.all(np.abs(x) < 30) and np.all(np.abs(y) < 30)
        assert np.all((z > 0) & (z < 60))


def test_lorenz_sensitive_dependence():
    def run(start):
        spec = SimSpec(
            system="lorenz", noise_std=0.0, transient=0, initial_state=start, n_steps=3000
        )
        return simulate(spec)[0].latents

    separation = np.linalg.norm(run([1.0, 1.0, 20.0]) - run([1.0 + 1e-9, 1.0, 20.0]), axis=1)
    assert separation[0] == pytest.approx(1e-9)
    assert separation.max() > 1.0


def test_switching_regimes_contract():
    system = DynamicalSystem.create("switching-lds")
    for matrix in system.regimes():
        np.testing.assert_allclose(np.abs(np.linalg.eigvals(matrix)), 0.995)


def test_switching_rotation_flips():
    spec = SimSpec(
        system="switching-lds",
        parameters={"switch_step": 50, "kick_norm": 0.0},
        noise_std=0.0,
        initial_state=[1.0, 0.0],
        n_steps=100,
    )
    (trajectory,) = simulate_switching_lds(spec)
    x = trajectory.latents
    norms = np.linalg.norm(x, axis=1)
    np.testing.assert_allclose(norms[1:] / norms[:-1], 0.995)
    turning = x[:-1, 0] * x[1:, 1] - x[:-1, 1] * x[1:, 0]
    assert np.all(turning[:49] < 0)
    assert np.all(turning[49:] > 0)


def test_switching_state_kick():
    spec = SimSpec(
        system="switching-lds",
        parameters={"switch_step": 10},
        noise_std=0.0,
        initial_state=[1.0, 0.0],
        n_steps=20,
    )
    system = spec.build_system()
    (trajectory,) = simulate(spec)
    _, second = system.regimes()
    kick = trajectory.latents[10] - second @ trajectory.latents[9]
    assert np.linalg.norm(kick) == pytest.approx(1.0)


def test_switching_noisy_state_bounded():
    spec = SimSpec(system="switching-lds", n_steps=6000, seed=5)
    (trajectory,) = simulate(spec)
    assert np.linalg.norm(trajectory.latents[3000:], axis=1).max() < 2.0


@pytest.mark.xfail(raises=ConfigurationError)
def test_switching_unstable_regime():
    DynamicalSystem.create("switching-lds", {"contraction": 1.0})


@pytest.mark.xfail(raises=ConfigurationError)
def test_switching_parameter_kick_too_large():
    DynamicalSystem.create("switching-lds", {"parameter_kick_norm": 0.01})


def test_bistable_equilibria():
    system = DynamicalSystem.create("bistable")
    for state in ([1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]):
        np.testing.assert_array_equal(system.velocity(np.array(state), np.zeros(1)), 0.0)


def test_bistable_converges_to_positive_well():
    spec = SimSpec(system="bistable", noise_std=0.0, initial_state=[0.2, 0.5], n_steps=500)
    (trajectory,) = simulate_bistable(spec)
    np.testing.assert_allclose(trajectory.latents[-1], [1.0, 0.0], atol=1e-3)


def test_bistable_symmetric_split():
    spec = SimSpec(
        system="bistable", noise_std=0.1, initial_state=[0.0, 0.0], n_sequences=200, n_steps=300
    )
    finals = np.array([t.latents[-1, 0] for t in simulate(spec)])
    assert 0.35 < np.mean(finals > 0) < 0.65


def test_longer_run_extends_shorter_run():
    short = simulate(SimSpec(system="ring", n_sequences=3, n_steps=50, seed=11))
    long = simulate(SimSpec(system="ring", n_sequences=3, n_steps=100, seed=11))
    for a, b in zip(short, long):
        np.testing.assert_array_equal(a.latents, b.latents[:50])
        np.testing.assert_array_equal(a.inputs, b.inputs[:50])


def test_seed_changes_trajectories():
    first = simulate(SimSpec(system="fhn", n_steps=20, seed=1))[0]
    second = simulate(SimSpec(system="fhn", n_steps=20, seed=2))[0]
    assert not np.allclose(first.latents, second.latents)


@pytest.mark.xfail(raises=ConfigurationError)
def test_unknown_parameter():
    simulate(SimSpec(system="fhn", parameters={"tau": 1.0}, n_steps=2))


@pytest.mark.xfail(raises=ConfigurationError)
def test_wrong_system_for_runner():
    simulate_ring(SimSpec(system="fhn", n_steps=2))


@pytest.mark.xfail(raises=ConfigurationError)
def test_initial_state_dimension():
    simulate(SimSpec(system="lorenz", initial_state=[1.0, 2.0], n_steps=2))


@pytest.mark.parametrize(
    "fields",
    [{"system": "pendulum"}, {"system": "ring", "dt": 0.0}, {"system": "ring", "noise_std": -1}],
)
@pytest.mark.xfail(raises=ValidationError)
def test_invalid_spec(fields):
    SimSpec(**fields)


def test_resolved_uses_system_defaults():
    spec = SimSpec(system="fhn").resolved()
    assert (spec.dt, spec.noise_std, spec.transient) == (0.5, 0.002, 0)
    assert SimSpec(system="lorenz").resolved().transient == 500
