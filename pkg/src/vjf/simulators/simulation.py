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

from logging import Logger, getLogger
from typing import List

import numpy as np

from vjf.errors import ConfigurationError, NumericalError
from vjf.simulators.spec import SimSpec
from vjf.simulators.systems import DynamicalSystem
from vjf.simulators.trajectory import Trajectory


def _simulate_sequence(
    system: DynamicalSystem, spec: SimSpec, index: int, rng: np.random.Generator
) -> Trajectory:
    if spec.initial_state is not None:
        x = np.asarray(spec.initial_state, dtype=float)
        if x.shape != (system.latent_dim,):
            raise ConfigurationError(
                f"initial_state has length {len(x)}, {system.name} has {system.latent_dim} "
                "latent dimensions",
                key_path="simulation.initial_state",
            )
    else:
        x = system.initial_state(index, spec.n_sequences, rng)
    constants = system.draw_constants(rng)
    total = spec.transient + spec.n_steps
    inputs = system.inputs(total, constants)
    latents = np.empty((total, system.latent_dim))
    latents[0] = x
    for t in range(total - 1):
        noise = rng.standard_normal(system.latent_dim)
        latents[t + 1] = (
            system.step(latents[t], inputs[t], spec.dt, t, constants) + spec.noise_std * noise
        )
        if not np.all(np.isfinite(latents[t + 1])):
            raise NumericalError(
                f"{system.name} sequence {index} diverged at step {t + 1}", component=system.name
            )
    return Trajectory(
        latents=latents[spec.transient :], inputs=inputs[spec.transient :], dt=spec.dt
    )


def simulate(spec: SimSpec, logger: Logger = getLogger(__name__)) -> List[Trajectory]:
    """
    Integrates `spec.n_sequences` independent sequences of the requested system.

    Sequence i draws from its own stream, `SeedSequence(spec.seed).spawn(n)[i]`, in the order
    start, per-sequence constants, then one noise vector per step. A run with more steps
    therefore extends a shorter run with the same seed.

    Args:
        spec (SimSpec): What to simulate.
        logger (Logger): Logger for progress messages. Default is `getLogger(__name__)`.

    Returns:
        List[Trajectory]: The sequences, without observations.

    Raises:
        ConfigurationError: If the system parameters are invalid.
        DomainError: If the ring attractor is started at the origin.
        NumericalError: If a sequence diverges.
    """
    spec = spec.resolved()
    system = spec.build_system()
    streams = np.random.SeedSequence(spec.seed).spawn(spec.n_sequences)
    logger.info(
        f"Simulating {spec.n_sequences} {spec.system} sequences of {spec.n_steps} steps "
        f"(dt={spec.dt}, noise_std={spec.noise_std}, transient={spec.transient})"
    )
    trajectories = []
    for index, stream in enumerate(streams):
        trajectories.append(_simulate_sequence(system, spec, index, np.random.default_rng(stream)))
        logger.debug(f"Simulated sequence {index}")
    return trajectories


def _simulate_system(name: str, spec: SimSpec, logger: Logger) -> List[Trajectory]:
    if spec.system != name:
        raise ConfigurationError(
            f"expected a {name} spec, got {spec.system}", key_path="simulation.system"
        )
    return simulate(spec, logger=logger)


def simulate_ring(spec: SimSpec, logger: Logger = getLogger(__name__)) -> List[Trajectory]:
    """Ring attractor sequences; the tangent drive of each sequence is its input."""
    return _simulate_system("ring", spec, logger)


def simulate_fhn(spec: SimSpec, logger: Logger = getLogger(__name__)) -> List[Trajectory]:
    return _simulate_system("fhn", spec, logger)


def simulate_lorenz(spec: SimSpec, logger: Logger = getLogger(__name__)) -> List[Trajectory]:
    """Lorenz sequences from evenly spread starts, with the transient discarded."""
    return _simulate_system("lorenz", spec, logger)


def simulate_switching_lds(
    spec: SimSpec, logger: Logger = getLogger(__name__)
) -> List[Trajectory]:
    return _simulate_system("switching-lds", spec, logger)


def simulate_bistable(spec: SimSpec, logger: Logger = getLogger(__name__)) -> List[Trajectory]:
    return _simulate_system("bistable", spec, logger)
