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
The per-step variational objective.

For an observation `y_t` with previous posterior `q_{t-1}` and the new posterior
`q_t = h(y_t, u_{t-1}, q_{t-1})`, one noise draw each gives `x̃_t ~ q_t` and `x̃_{t-1} ~ q_{t-1}`,
and the objective is

    log p(y_t | x̃_t) + E_{q_t}[log N(x_t; x̃_{t-1} + g(x̃_{t-1}) + B u_{t-1}, σ² I)]
        + H(q_t) - ½ γ σ²

The loss is its negative. `q_{t-1}` is recomputed from the observation, input and posterior
stored with the previous state, so the dynamics term trains the recognition network through
`x̃_{t-1}` as well as through `q_t`. Gradients stop at `q_{t-2}`, which is a constant, and
`q_t` is computed from the stored value of `q_{t-1}`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from vjf.errors import NumericalError
from vjf.filtering.bundle import ModelBundle
from vjf.filtering.config import TrainConfig
from vjf.generative.dynamics import expected_transition_loglik
from vjf.generative.observation import observation_loglik
from vjf.numerics import tape
from vjf.numerics.diag_gaussian import DiagGaussian, gaussian_entropy, reparam_sample
from vjf.numerics.tape import GradientTape, value_of
from vjf.recognition.network import recognize


@dataclass(frozen=True)
class RecognitionInputs:
    """The arguments of the recognition call that produced a posterior."""

    observation: np.ndarray
    input: Optional[np.ndarray]
    posterior: DiagGaussian


@dataclass(frozen=True)
class FilterState:
    """
    Posterior summary of one sequence after `step_index` observations.

    Args:
        posterior (DiagGaussian): Current posterior `q(x_t) = N(μ_t, diag(s_t))`.
        step_index (int): Number of observations consumed.
        recognition_inputs (RecognitionInputs, optional): What `posterior` was recognized
            from. `None` for a state that was not produced by a filter step, in which case the
            next step treats `posterior` as a constant.
    """

    posterior: DiagGaussian
    step_index: int = 0
    recognition_inputs: Optional[RecognitionInputs] = None

    @staticmethod
    def initial(latent_dim: int) -> FilterState:
        """The state before any observation: `μ_0 = 0`, `s_0 = 1`."""
        return FilterState(DiagGaussian.standard(latent_dim), 0)


@dataclass(frozen=True)
class StepDiagnostics:
    """
    Decomposition of the per-step objective.

    `objective == reconstruction_ll + dynamics_ll + entropy - penalty`, with
    `penalty = ½ γ σ²`. `wall_time` is in seconds.
    """

    reconstruction_ll: float
    dynamics_ll: float
    entropy: float
    penalty: float
    objective: float
    wall_time: float = 0.0
    update_rejected: bool = False

    @staticmethod
    def mean(diagnostics) -> StepDiagnostics:
        """Averages diagnostics field by field, as reported for a lockstep batch."""
        diagnostics = list(diagnostics)
        return StepDiagnostics(
            reconstruction_ll=float(np.mean([d.reconstruction_ll for d in diagnostics])),
            dynamics_ll=float(np.mean([d.dynamics_ll for d in diagnostics])),
            entropy=float(np.mean([d.entropy for d in diagnostics])),
            penalty=float(np.mean([d.penalty for d in diagnostics])),
            objective=float(np.mean([d.objective for d in diagnostics])),
            wall_time=float(np.mean([d.wall_time for d in diagnostics])),
            update_rejected=any(d.update_rejected for d in diagnostics),
        )


def _draw_noise(rng: np.random.Generator, latent_dim: int) -> Tuple[np.ndarray, np.ndarray]:
    current = rng.standard_normal(latent_dim)
    previous = rng.standard_normal(latent_dim)
    return current, previous


def _copy_input(u: Optional[np.ndarray]) -> Optional[np.ndarray]:
    return None if u is None else np.array(value_of(u), dtype=float)


def _forward(
    y: np.ndarray,
    u_prev: Optional[np.ndarray],
    state_prev: FilterState,
    bundle: ModelBundle,
    config: TrainConfig,
    noise: Tuple[np.ndarray, np.ndarray],
):
    previous = state_prev.posterior.detached()
    history = state_prev.recognition_inputs
    if history is None:
        sampled_previous = previous
    else:
        sampled_previous = recognize(
            history.observation, history.input, history.posterior, bundle.recognition
        )
    posterior = recognize(y, u_prev, previous, bundle.recognition)
    current_sample = reparam_sample(posterior, noise[0])
    previous_sample = reparam_sample(sampled_previous, noise[1])

    components = {
        "reconstruction": observation_loglik(
            y, current_sample, bundle.observation, include_constant=False
        ),
        "dynamics": expected_transition_loglik(
            posterior, previous_sample, u_prev, bundle.dynamics
        ),
        "entropy": gaussian_entropy(posterior.variance),
        "penalty": tape.exp(bundle.dynamics.log_state_noise_var) * (0.5 * config.penalty_gamma),
    }
    for name, value in components.items():
        if not np.isfinite(value_of(value)):
            raise NumericalError(f"{name} term of the objective is not finite", component=name)
    objective = (
        components["reconstruction"]
        + components["dynamics"]
        + components["entropy"]
        - components["penalty"]
    )
    diagnostics = StepDiagnostics(
        reconstruction_ll=float(value_of(components["reconstruction"])),
        dynamics_ll=float(value_of(components["dynamics"])),
        entropy=float(value_of(components["entropy"])),
        penalty=float(value_of(components["penalty"])),
        objective=float(value_of(objective)),
    )
    state_new = FilterState(
        posterior.detached(),
        state_prev.step_index + 1,
        RecognitionInputs(np.array(y, dtype=float), _copy_input(u_prev), previous),
    )
    return objective * -1.0, state_new, diagnostics


def step_loss(
    y: np.ndarray,
    u_prev: Optional[np.ndarray],
    state_prev: FilterState,
    bundle: ModelBundle,
    config: TrainConfig,
    rng: np.random.Generator,
) -> Tuple[float, FilterState, StepDiagnostics]:
    """
    Evaluates the negative per-step objective.

    Two standard-normal vectors are drawn from `rng`, first for `x̃_t` then for `x̃_{t-1}`.

    Args:
        y (np.ndarray): Observation at step t.
        u_prev (np.ndarray, optional): Input at step t - 1. `None` when the model has no inputs.
        state_prev (FilterState): State after step t - 1.
        bundle (ModelBundle): Model parameters.
        config (TrainConfig): Supplies the penalty weight.
        rng (np.random.Generator): Noise source.

    Returns:
        Tuple[float, FilterState, StepDiagnostics]: The loss, the state after step t and the
        decomposition of the objective.

    Raises:
        NumericalError: If a term of the objective is not finite. `component` names the term.
    """
    noise = _draw_noise(rng, bundle.latent_dim)
    loss, state_new, diagnostics = _forward(y, u_prev, state_prev, bundle, config, noise)
    return float(loss), state_new, diagnostics


def grad_step_loss(
    y: np.ndarray,
    u_prev: Optional[np.ndarray],
    state_prev: FilterState,
    bundle: ModelBundle,
    config: TrainConfig,
    rng: np.random.Generator,
) -> Tuple[Dict[str, np.ndarray], float, FilterState, StepDiagnostics]:
    """
    Evaluates `step_loss` and its exact gradient with respect to every parameter block.

    The noise draws are the same as those of `step_loss` given an identically seeded `rng`.

    Returns:
        Tuple[Dict[str, np.ndarray], float, FilterState, StepDiagnostics]: Gradients keyed by
        block name, then the outputs of `step_loss`.

    Raises:
        NumericalError: If a term of the objective is not finite.
    """
    noise = _draw_noise(rng, bundle.latent_dim)
    gradient_tape = GradientTape()
    traced_bundle, sources = bundle.traced(gradient_tape)
    loss, state_new, diagnostics = _forward(y, u_prev, state_prev, traced_bundle, config, noise)
    gradients = gradient_tape.gradient(loss, sources)
    return gradients, float(value_of(loss)), state_new, diagnostics
