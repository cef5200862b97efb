# Copyright 2024 The FSL Interferometry Authors. All rights reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Gravimetry service: zero-fringe inversion, offsets, error budgets and delays."""

import math
from typing import Callable, Optional

from loguru import logger
from scipy.optimize import brentq

from fsl_interferometry import closed_forms
from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import BracketError, ScenarioValidationError
from fsl_interferometry.geometry import is_mzi
from fsl_interferometry.models import (
    ErrorBudget,
    FringeUnknown,
    InitialConditions,
    Mechanism,
    MechanismKind,
    OffsetReport,
    PhysicalConstants,
    Scenario,
)
from fsl_interferometry.services.perturbation_service import total_phase

# Widest relative bracket tried around the seed.
_MAX_BRACKET = 0.5

_NOT_A_GRAVIMETER = (
    "E1-M1 transitions transfer no momentum: the setup is not suitable for gravimetry."
)


def _refuse_e1m1(mech: Mechanism) -> None:
    if mech.kind is MechanismKind.e1m1:
        raise ScenarioValidationError(_NOT_A_GRAVIMETER)


def interrogation_time(scenario: Scenario) -> float:
    """Pulse separation T of a Mach-Zehnder scenario."""
    if not is_mzi(scenario.geometry):
        raise ScenarioValidationError(
            f"Expected a Mach-Zehnder geometry, got `{scenario.geometry.label}`."
        )

    times = scenario.geometry.times
    return times[1] - times[0]


def compensation_delay(
    mech: Mechanism,
    g_estimate: float,
    Gamma: float,
    sigma: float,
    T: float,
    consts: PhysicalConstants,
) -> float:
    """
    Mirror-pulse delay that removes the first-order dependence on v₀.

    Args:
        mech: Diffraction mechanism, SPT or Bragg.
        g_estimate: Prior value of g in m/s².
        Gamma: Knowledge gap Γ of g in m/s².
        sigma: Chirp rate in m/s².
        T: Interrogation time in s.
        consts: Physical constants.

    Returns:
        δT in s.

    Raises:
        ScenarioValidationError: For other mechanisms.
    """
    if mech.kind is MechanismKind.spt:
        return closed_forms.spt_delay(g_estimate, Gamma, T, consts.c)
    if mech.kind is MechanismKind.bragg:
        return closed_forms.bragg_delay(g_estimate, Gamma, sigma, T, consts.c)

    raise ScenarioValidationError(
        f"No compensation delay is known for {mech.kind.value} transitions; use SPT"
        " or Bragg."
    )


def with_compensation(scenario: Scenario, Gamma: Optional[float]) -> Scenario:
    """Return the scenario with the delay for its current g, or without compensation."""
    if Gamma is None:
        return scenario.model_copy(
            update={"compensation_delay": None, "compensation_gamma": None}
        )

    delay = compensation_delay(
        scenario.mechanism,
        scenario.g,
        Gamma,
        scenario.sigma,
        interrogation_time(scenario),
        scenario.constants,
    )
    return scenario.model_copy(
        update={"compensation_delay": delay, "compensation_gamma": Gamma}
    )


def _scenario_at(
    scenario: Scenario, unknown: FringeUnknown
) -> Callable[[float], Scenario]:
    def build(value: float) -> Scenario:
        if unknown is FringeUnknown.g:
            trial = scenario.with_gravity(value)
        else:
            trial = scenario.with_chirp(value)
        if trial.compensation_gamma is not None:
            trial = with_compensation(trial, trial.compensation_gamma)

        return trial

    return build


def offset_gamma_analytic(
    mech: Mechanism,
    ic: InitialConditions,
    sigma: float,
    T: float,
    consts: PhysicalConstants,
    Gamma: Optional[float] = None,
) -> Optional[float]:
    """
    Closed-form zero-fringe offset γ with g/σ = 1 + γ.

    Args:
        mech: Diffraction mechanism.
        ic: Launch state and resonance velocity.
        sigma: Chirp rate in m/s².
        T: Interrogation time in s.
        consts: Physical constants.
        Gamma: Knowledge gap of a timing-compensated sequence, None without one.

    Returns:
        γ, or None for compensated sequences without a closed form (Bragg).

    Raises:
        ScenarioValidationError: For E1-M1 transitions and compensated Raman.
    """
    _refuse_e1m1(mech)
    c = consts.c

    if Gamma is not None:
        if mech.kind is MechanismKind.spt:
            return closed_forms.gamma_spt_compensated(ic.v_R, ic.v0, sigma, T, Gamma, c)
        if mech.kind is MechanismKind.bragg:
            return None
        raise ScenarioValidationError(
            f"Timing compensation is not defined for {mech.kind.value} transitions."
        )

    if mech.kind is MechanismKind.spt:
        return closed_forms.gamma_spt(ic.v_R, ic.v0, sigma, T, c)
    if mech.kind is MechanismKind.bragg:
        return closed_forms.gamma_bragg(ic.v_R, ic.v0, c)

    return closed_forms.gamma_raman(ic.v_R, ic.v0, sigma, T, mech.K, mech.delta_k, c)


def solve_zero_fringe(
    scenario: Scenario, unknown: FringeUnknown = FringeUnknown.g
) -> OffsetReport:
    """
    Solve total_phase = 0 for g (given σ) or for σ (given g).

    The bracket starts at seed·(1 ± ZERO_FRINGE_BRACKET), seeded with σ or g, and
    widens tenfold until the phase changes sign.

    Args:
        scenario: A Mach-Zehnder or butterfly scenario.
        unknown: Which quantity to solve for.

    Returns:
        The offset report; `gamma_analytic` is filled for Mach-Zehnder sequences.

    Raises:
        ScenarioValidationError: For E1-M1 transitions.
        BracketError: If no sign change is found.
    """
    _refuse_e1m1(scenario.mechanism)

    build = _scenario_at(scenario, unknown)
    seed = scenario.sigma if unknown is FringeUnknown.g else scenario.g
    if seed <= 0:
        raise ScenarioValidationError(f"The zero-fringe seed must be positive, got {seed}.")

    def phase(value: float) -> float:
        return total_phase(build(value)).total

    width = settings.zero_fringe_bracket
    while True:
        lo, hi = seed * (1 - width), seed * (1 + width)
        f_lo, f_hi = phase(lo), phase(hi)
        if f_lo == 0:
            root = lo
            break
        if f_hi == 0:
            root = hi
            break
        if math.copysign(1, f_lo) != math.copysign(1, f_hi):
            root = brentq(phase, lo, hi, xtol=1e-300, rtol=settings.root_rtol)
            break
        if width * 10 > _MAX_BRACKET:
            raise BracketError(
                f"The phase does not change sign for {unknown.value} in"
                f" [{lo}, {hi}]: the configuration is not monotonic around the seed"
                f" {seed}."
            )
        width *= 10
        logger.debug(f"Widening the zero-fringe bracket to {width}")

    if unknown is FringeUnknown.g:
        g, sigma = root, scenario.sigma
    else:
        g, sigma = scenario.g, root
    gamma = g / sigma - 1

    analytic = None
    explicit_delay = scenario.compensated and scenario.compensation_gamma is None
    if is_mzi(scenario.geometry) and not explicit_delay:
        analytic = offset_gamma_analytic(
            scenario.mechanism,
            scenario.initial,
            sigma,
            interrogation_time(scenario),
            scenario.constants,
            scenario.compensation_gamma,
        )

    return OffsetReport(
        mechanism=scenario.mechanism.kind,
        unknown=unknown,
        root=root,
        sigma=sigma,
        gamma=gamma,
        gamma_numeric=gamma,
        gamma_analytic=analytic,
        compensated=scenario.compensated,
    )


def error_budget(
    scenario: Scenario,
    delta_phi: float,
    delta_v0: float,
    compensated: bool = False,
    Gamma: float = 0.0,
) -> ErrorBudget:
    """
    Linearized Gaussian uncertainty of g for a single-photon Mach-Zehnder gravimeter.

    Args:
        scenario: SPT Mach-Zehnder scenario.
        delta_phi: Phase uncertainty in rad.
        delta_v0: Spread of the launch velocity in m/s.
        compensated: Whether the mirror pulse is timing-compensated.
        Gamma: Knowledge gap of g used by the compensation in m/s².

    Returns:
        The budget with Δg in m/s².

    Raises:
        ScenarioValidationError: For other mechanisms, geometries or negative inputs.
    """
    if scenario.mechanism.kind is not MechanismKind.spt:
        raise ScenarioValidationError(
            "Error budgets are derived for single-photon transitions only, got"
            f" {scenario.mechanism.kind.value}."
        )
    if delta_phi < 0 or delta_v0 < 0:
        raise ScenarioValidationError("Uncertainties must be non-negative.")

    T = interrogation_time(scenario)
    sigma, c, K = scenario.sigma, scenario.constants.c, scenario.mechanism.K
    if compensated:
        terms = closed_forms.spt_budget_compensated(
            delta_phi, delta_v0, K, sigma, T, Gamma, c
        )
    else:
        terms = closed_forms.spt_budget(
            delta_phi, delta_v0, K, sigma, T, scenario.initial.v_R, scenario.initial.v0, c
        )

    delta_g = abs(sigma) * math.sqrt(terms["phase_term"] + terms["velocity_term"])

    return ErrorBudget(
        delta_phi=delta_phi,
        delta_v0=delta_v0,
        delta_g=delta_g,
        Gamma=Gamma,
        compensated=compensated,
        **terms,
    )


def e1m1_differential_phase(
    v_B: float, T: float, k_A: float, g: float, consts: PhysicalConstants
) -> float:
    """
    Phase difference of two recoilless interferometers launched v_B apart.

    Args:
        v_B: Launch velocity difference in m/s.
        T: Interrogation time in s.
        k_A: Atomic wave number ω_A/c in rad/m.
        g: Gravitational acceleration in m/s².
        consts: Physical constants.

    Returns:
        4k_A gT²v_B/c in rad.
    """
    if v_B < 0 or T <= 0 or k_A <= 0 or g <= 0:
        raise ScenarioValidationError(
            "Expected v_B >= 0 and positive T, k_A and g, got"
            f" v_B={v_B}, T={T}, k_A={k_A}, g={g}."
        )

    return closed_forms.e1m1_differential(v_B, T, k_A, g, consts.c)

