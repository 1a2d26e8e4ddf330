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

"""
Ground-truth dynamical systems integrated with explicit Euler-Maruyama steps.

Each system registers itself on `DynamicalSystem` and is created by name. A system holds its
parameters; everything drawn at random for one sequence (start, inputs, perturbations) is
drawn before the per-step noise, so a longer run extends a shorter one.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any, Dict, Mapping, Optional, Type

import numpy as np
from boltons.dictutils import FrozenDict

from vjf.errors import ConfigurationError, DomainError


class DynamicalSystem(ABC):
    """
    A continuous-time system `ẋ = f(x, u)` (or a discrete map) with its default settings.

    Args:
        parameters (Mapping[str, float], optional): Overrides of `default_parameters`.

    Raises:
        ConfigurationError: If a parameter is unknown or invalid.
    """

    name: str
    latent_dim: int
    input_dim: int = 0
    default_dt: float = 0.1
    default_noise_std: float = 0.0
    default_transient: int = 0
    default_parameters: FrozenDict = FrozenDict()

    _systems: Dict[str, Type[DynamicalSystem]] = {}

    def __init__(self, parameters: Optional[Mapping[str, float]] = None):
        parameters = dict(parameters or {})
        unknown = sorted(set(parameters) - set(self.default_parameters))
        if unknown:
            raise ConfigurationError(
                f"unknown {self.name} parameters {unknown}",
                key_path=f"simulation.parameters.{unknown[0]}",
            )
        self.parameters = FrozenDict({**self.default_parameters, **parameters})
        self.validate()

    def validate(self) -> None:
        """Checks the parameters. Raises `ConfigurationError` when they are unusable."""

    @abstractmethod
    def velocity(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """The vector field `f(x, u)`."""

    def draw_constants(self, rng: np.random.Generator) -> Dict[str, Any]:
        """Draws the per-sequence random quantities. Called once per sequence, after the start."""
        return {}

    def inputs(self, n_steps: int, constants: Mapping[str, Any]) -> np.ndarray:
        """Input sequence of shape (n_steps, input_dim)."""
        return np.zeros((n_steps, self.input_dim))

    def initial_state(
        self, index: int, n_sequences: int, rng: np.random.Generator
    ) -> np.ndarray:
        """Start of sequence `index` out of `n_sequences`."""
        return rng.uniform(-1.0, 1.0, size=self.latent_dim)

    def step(
        self, x: np.ndarray, u: np.ndarray, dt: float, t: int, constants: Mapping[str, Any]
    ) -> np.ndarray:
        """Deterministic part of the transition from step t to t + 1."""
        return x + dt * self.velocity(x, u)

    @classmethod
    def register_system(cls, system: Type[DynamicalSystem]) -> None:
        """
        Registers a system under its `name`.

        Args:
            system (Type[DynamicalSystem]): System class to register.
        """
        cls._systems[system.name] = system
        setattr(cls, system.__name__, system)

    @classmethod
    def create(
        cls, name: str, parameters: Optional[Mapping[str, float]] = None
    ) -> DynamicalSystem:
        """
        Instantiates the registered system `name`.

        Raises:
            ConfigurationError: If no system has that name.
        """
        try:
            system = cls._systems[name]
        except KeyError:
            raise ConfigurationError(
                f"unknown system {name}, expected one of {sorted(cls._systems)}",
                key_path="simulation.system",
            )
        return system(parameters)

    @classmethod
    def names(cls):
        return sorted(cls._systems)


class RingAttractor(DynamicalSystem):
    """
    Two-variable ring attractor in Cartesian form,

        ẋ = (r₀ - r) x / (τ_r r) - I y / τ_φ
        ẏ = (r₀ - r) y / (τ_r r) + I x / τ_φ

    with `r = ‖(x, y)‖`. The tangent drive `I` is constant per sequence with random sign and
    is recorded as the single input.
    """

    name = "ring"
    latent_dim = 2
    input_dim = 1
    default_dt = 0.1
    default_noise_std = 0.005
    default_parameters = FrozenDict(
        r0=1.0, tau_r=1.0, tau_phi=1.0, input_magnitude=1.0, radius_low=0.5, radius_high=1.5
    )

    def validate(self):
        p = self.parameters
        if p["r0"] <= 0 or p["tau_r"] <= 0 or p["tau_phi"] <= 0:
            raise ConfigurationError("ring r0, tau_r and tau_phi must be positive")
        if not 0 < p["radius_low"] <= p["radius_high"]:
            raise ConfigurationError("ring start radii must satisfy 0 < radius_low <= radius_high")

    def velocity(self, x, u):
        p = self.parameters
        radius = np.linalg.norm(x)
        if radius == 0:
            raise DomainError("ring attractor state at the origin has no polar angle")
        drive = u[0] if len(u) else 0.0
        radial = (p["r0"] - radius) / (p["tau_r"] * radius)
        return radial * x + drive / p["tau_phi"] * np.array([-x[1], x[0]])

    def initial_state(self, index, n_sequences, rng):
        p = self.parameters
        angle = rng.uniform(0.0, 2.0 * np.pi)
        radius = rng.uniform(p["radius_low"], p["radius_high"])
        return radius * np.array([np.cos(angle), np.sin(angle)])

    def draw_constants(self, rng):
        return {"drive": rng.choice([-1.0, 1.0]) * self.parameters["input_magnitude"]}

    def inputs(self, n_steps, constants):
        return np.full((n_steps, 1), constants["drive"])


class FitzHughNagumo(DynamicalSystem):
    """Relaxation oscillator `v̇ = v(a - v)(v - 1) - w + I`, `ẇ = b v - c w`."""

    name = "fhn"
    latent_dim = 2
    default_dt = 0.5
    default_noise_std = 0.002
    default_parameters = FrozenDict(a=-0.1, b=0.01, c=0.02, I=0.1)

    def velocity(self, x, u):
        p = self.parameters
        v, w = x
        return np.array([v * (p["a"] - v) * (v - 1.0) - w + p["I"], p["b"] * v - p["c"] * w])

    def initial_state(self, index, n_sequences, rng):
        return np.array([rng.uniform(-0.4, 1.2), rng.uniform(0.0, 0.3)])


class Lorenz(DynamicalSystem):
    """
    Lorenz system `ẋ = σ(y - x)`, `ẏ = x(ρ - z) - y`, `ż = xy - βz`.

    Starts are spread evenly over a box: sequence i takes cell i of a k×k×k grid with
    `k = ⌈n^(1/3)⌉`.
    """

    name = "lorenz"
    latent_dim = 3
    default_dt = 0.01
    default_noise_std = 0.0
    default_transient = 500
    default_parameters = FrozenDict(sigma=10.0, rho=28.0, beta=8.0 / 3.0, box_half_width=10.0)

    def velocity(self, x, u):
        p = self.parameters
        return np.array(
            [
                p["sigma"] * (x[1] - x[0]),
                x[0] * (p["rho"] - x[2]) - x[1],
                x[0] * x[1] - p["beta"] * x[2],
            ]
        )

    def initial_state(self, index, n_sequences, rng):
        half_width = self.parameters["box_half_width"]
        cells = int(np.ceil(round(n_sequences ** (1.0 / 3.0), 9)))
        position = np.unravel_index(index, (cells, cells, cells))
        fractions = (np.array(position) + 0.5) / cells
        lows = np.array([-half_width, -half_width, self.parameters["rho"] - 1.0 - half_width])
        return lows + 2.0 * half_width * fractions


def rotation(angle: float) -> np.ndarray:
    return np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])


class SwitchingLinear(DynamicalSystem):
    """
    A stable spiral that reverses its rotation: `x_{t+1} = A_k x_t + ε` with
    `A_1 = ρ R(-θ)` before `switch_step` and `A_2 = ρ R(+θ)` from it on.

    At the switch the state receives a kick of norm `kick_norm` in a random direction, and
    `A_2` can be perturbed by a random matrix of Frobenius norm `parameter_kick_norm`.
    """

    name = "switching-lds"
    latent_dim = 2
    default_dt = 1.0
    default_noise_std = 0.01
    default_parameters = FrozenDict(
        contraction=0.995,
        angle=0.1,
        switch_step=2000,
        kick_norm=1.0,
        parameter_kick_norm=0.0,
    )

    def validate(self):
        p = self.parameters
        if p["switch_step"] < 1:
            raise ConfigurationError("switch_step must be at least 1")
        if p["kick_norm"] < 0 or p["parameter_kick_norm"] < 0:
            raise ConfigurationError("kick norms must be non-negative")
        for matrix in self.regimes():
            radius = np.max(np.abs(np.linalg.eigvals(matrix)))
            if radius >= 1.0:
                raise ConfigurationError(
                    f"switching system regime has spectral radius {radius:.6g} >= 1",
                    key_path="simulation.parameters.contraction",
                )
        if p["parameter_kick_norm"] >= 1.0 - p["contraction"]:
            raise ConfigurationError(
                "parameter_kick_norm must stay below 1 - contraction to keep the spiral stable",
                key_path="simulation.parameters.parameter_kick_norm",
            )

    def regimes(self):
        p = self.parameters
        return (
            p["contraction"] * rotation(-p["angle"]),
            p["contraction"] * rotation(p["angle"]),
        )

    def velocity(self, x, u):
        first, _ = self.regimes()
        return first @ x - x

    def initial_state(self, index, n_sequences, rng):
        return rng.standard_normal(self.latent_dim)

    def draw_constants(self, rng):
        direction = rng.standard_normal(self.latent_dim)
        perturbation = rng.standard_normal((self.latent_dim, self.latent_dim))
        return {
            "kick": self.parameters["kick_norm"] * direction / np.linalg.norm(direction),
            "perturbation": self.parameters["parameter_kick_norm"]
            * perturbation
            / np.linalg.norm(perturbation),
        }

    def step(self, x, u, dt, t, constants):
        first, second = self.regimes()
        switch = int(self.parameters["switch_step"])
        if t + 1 < switch:
            return first @ x
        following = (second + constants["perturbation"]) @ x
        if t + 1 == switch:
            following = following + constants["kick"]
        return following


class Bistable(DynamicalSystem):
    """Double well `ẋ = x - x³ + u`, `ẏ = -y`: stable points (±1, 0), saddle at the origin."""

    name = "bistable"
    latent_dim = 2
    input_dim = 1
    default_dt = 0.1
    default_noise_std = 0.05
    default_parameters = FrozenDict(input_scale=0.0, start_half_width=1.5)

    def velocity(self, x, u):
        return np.array([x[0] - x[0] ** 3 + u[0], -x[1]])

    def initial_state(self, index, n_sequences, rng):
        half_width = self.parameters["start_half_width"]
        return rng.uniform(-half_width, half_width, size=2)

    def draw_constants(self, rng):
        return {"input": self.parameters["input_scale"] * rng.standard_normal()}

    def inputs(self, n_steps, constants):
        return np.full((n_steps, 1), constants["input"])


for _system in (RingAttractor, FitzHughNagumo, Lorenz, SwitchingLinear, Bistable):
    DynamicalSystem.register_system(_system)
