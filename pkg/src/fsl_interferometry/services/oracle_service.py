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
"""Reduced-light-speed oracle.

Both arms are propagated with kicks applied when the delayed light front actually
reaches the atom, the exact phase is accumulated in extended precision, and the phases
of a c̃ grid are fitted with a₀ + a₁/c̃ + a₂/c̃² + ... to confirm the perturbative engine.
"""

from dataclasses import dataclass
from typing import Any, List, Sequence, Tuple

import mpmath
import numpy as np
from loguru import logger

from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import (
    CausalityError,
    IllConditionedFitError,
    ScenarioValidationError,
)
from fsl_interferometry.geometry import GROUND_RESPONSE
from fsl_interferometry.light_field import effective_wave_vector, phase_effective
from fsl_interferometry.models import (
    MechanismKind,
    OracleRun,
    PhysicalConstants,
    Scenario,
)
from fsl_interferometry.services.perturbation_service import (
    first_order_coefficient,
    unperturbed_phase,
)
from fsl_interferometry.trajectory import (
    ArmTrajectory,
    TrajectorySegment,
    propagate_idealized,
    solve_exact_interaction_time,
)
from fsl_interferometry.utils import log_log_slope, precise_context

# Largest accepted condition number of the {1, x, x², ...} design matrix.
_MAX_CONDITION = 1e10
# Powers 1/c̃⁰ to 1/c̃⁴ of the fitted series.
_MAX_COLUMNS = 5
_MIN_POINTS = 4
_MIN_DECADES = 1.5


@dataclass(frozen=True)
class InteractionEvent:
    """Exact kick of one arm by the pulse emitted at `nominal_time`."""

    nominal_time: Any
    time: Any
    position: Any
    weight: int
    kick: Any


_ArmEvents = Tuple[ArmTrajectory, List[InteractionEvent]]


def rescale_scenario(scenario: Scenario, c_tilde: float) -> Scenario:
    """
    The scenario in a world where light travels at c̃.

    K, k_A and the detuning c(Δk − k_A) are held fixed, so that resonance is preserved
    and every 1/c effect is amplified by c/c̃. Compensation delays are dropped.

    Args:
        scenario: Physical scenario.
        c_tilde: Reduced light speed in m/s.

    Returns:
        The rescaled scenario.
    """
    if c_tilde <= 0:
        raise ScenarioValidationError(f"c_tilde must be positive, got {c_tilde}.")
    if scenario.compensation_delay is not None:
        logger.warning("The oracle ignores the timing-shift compensation.")

    mech, field = scenario.mechanism, scenario.field
    detuning = field.delta_omega - mech.omega_A

    if mech.kind is MechanismKind.spt:
        delta_k = mech.K
        k_A = mech.K - detuning / c_tilde
    else:
        k_A = mech.k_A
        delta_k = mech.k_A + detuning / c_tilde
    omega_A = c_tilde * k_A
    delta_omega = c_tilde * delta_k

    return scenario.model_copy(
        update={
            "mechanism": mech.model_copy(
                update={"delta_k": delta_k, "k_A": k_A, "omega_A": omega_A}
            ),
            "species": scenario.species.model_copy(update={"omega_A": omega_A}),
            "field": field.model_copy(
                update={"delta_k": delta_k, "delta_omega": delta_omega}
            ),
            "constants": PhysicalConstants(c=c_tilde, hbar=scenario.constants.hbar),
            "compensation_delay": None,
            "compensation_gamma": None,
            "on_resonance": False,
        }
    )


def max_speed(scenario: Scenario) -> float:
    """Largest atomic speed along the unperturbed arms."""
    arms = propagate_idealized(
        scenario.geometry,
        scenario.mechanism,
        scenario.species,
        scenario.initial,
        scenario.g,
        scenario.constants,
    )
    end = scenario.geometry.total_time
    speeds = [
        abs(segment.velocity(t))
        for arm in arms
        for _, segment, lo, hi in arm.pieces(0.0, end)
        for t in (lo, hi)
    ]

    return max(speeds + [abs(scenario.initial.v0)])


def check_light_speeds(scenario: Scenario, c_tilde_values: Sequence[float]) -> None:
    """
    Check that every c̃ exceeds ten times the largest atomic speed.

    Raises:
        CausalityError: Naming every violating value.
    """
    limit = 10 * max_speed(scenario)
    violating = [c for c in c_tilde_values if c <= limit]
    if violating:
        raise CausalityError(
            f"c_tilde values {violating} m/s do not exceed 10 times the largest atomic"
            f" speed ({limit / 10} m/s).",
            violating[0],
        )


def _launch(reduced: Scenario, first_time: Any, ctx: mpmath.MPContext) -> ArmTrajectory:
    """Free fall of the launched atom, extended back to contain the first interaction."""
    mpf = ctx.mpf
    c_tilde, g = mpf(reduced.constants.c), mpf(reduced.g)
    parabola = TrajectorySegment(
        mpf(0), mpf(reduced.initial.z0), mpf(reduced.initial.v0), g
    )

    # A front meets an atom below the origin before the nominal pulse time.
    z_first = parabola.position(first_time)
    start = min(mpf(0), first_time + 2 * min(z_first, mpf(0)) / c_tilde)

    return ArmTrajectory.free_fall(
        start, parabola.position(start), parabola.velocity(start), g
    )


def exact_arm_events(
    reduced: Scenario, arm: int, ctx: mpmath.MPContext
) -> Tuple[ArmTrajectory, List[InteractionEvent]]:
    """
    Propagate one arm with kicks at the exact interaction times.

    Args:
        reduced: Scenario rescaled to the reduced light speed.
        arm: 1 or 2.
        ctx: Extended-precision context.

    Returns:
        The open-ended trajectory and its interaction events in order.

    Raises:
        CausalityError: If a front cannot reach the atom after the previous kick.
    """
    consts = reduced.constants
    c_tilde = consts.c
    mpf = ctx.mpf
    m_bar, hbar = mpf(reduced.species.m_bar), mpf(consts.hbar)

    times, _ = reduced.geometry.exact_schedule(ctx)
    trajectory = _launch(reduced, times[0], ctx)
    events: List[InteractionEvent] = []
    for T, weight in zip(times, reduced.geometry.weights(arm)):
        if weight == 0:
            continue

        t_star = solve_exact_interaction_time(trajectory, T, c_tilde, ctx=ctx)
        if trajectory.kick_times and t_star <= trajectory.kick_times[-1]:
            raise CausalityError(
                f"The pulse at T={float(T)} s reaches arm {arm} before its previous"
                f" kick at c_tilde={c_tilde} m/s.",
                c_tilde,
            )

        z_star = trajectory.position(t_star)
        k_eff = effective_wave_vector(
            reduced.field, reduced.g, z_star, t_star, consts, ctx
        )
        kick = weight * hbar * k_eff / m_bar
        trajectory = trajectory.with_kick(t_star, kick)
        events.append(InteractionEvent(T, t_star, z_star, weight, kick))

    return trajectory, events


def _arm_phase(
    reduced: Scenario,
    trajectory: ArmTrajectory,
    events: Sequence[InteractionEvent],
    window: Tuple[Any, Any],
    ctx: mpmath.MPContext,
) -> Any:
    mpf = ctx.mpf
    c, hbar = mpf(reduced.constants.c), mpf(reduced.constants.hbar)
    m_bar, g, omega_A = mpf(reduced.species.m_bar), mpf(reduced.g), mpf(reduced.species.omega_A)

    levels = [mpf(GROUND_RESPONSE)]
    for event in events:
        levels.append(levels[-1] + event.weight)

    action, internal = [], []
    for index, segment, lo, hi in trajectory.pieces(*window):
        v2 = segment.integral_v2(lo, hi)
        z = segment.integral_z(lo, hi)
        action.append(m_bar * (v2 / 2 - g * z) / hbar)
        internal.append(
            -omega_A * levels[index] * ((hi - lo) - v2 / (2 * c**2) + g * z / c**2)
        )

    imprint = []
    for event in events:
        phi_l, delta_phi = phase_effective(
            reduced.field, reduced.g, event.position, event.time, reduced.constants, ctx
        )
        imprint.append(event.weight * (phi_l + delta_phi))

    return ctx.fsum(action) + ctx.fsum(imprint) + ctx.fsum(internal)


def _exact_arms(
    scenario: Scenario, c_tilde: float, ctx: mpmath.MPContext
) -> Tuple[Scenario, _ArmEvents, _ArmEvents, Tuple[Any, Any]]:
    reduced = rescale_scenario(scenario, c_tilde)
    arm1 = exact_arm_events(reduced, 1, ctx)
    arm2 = exact_arm_events(reduced, 2, ctx)

    # Both arms are integrated over the span of all interaction events.
    times = [event.time for event in arm1[1] + arm2[1]]
    return reduced, arm1, arm2, (min(times), max(times))


def exact_arm_phase(scenario: Scenario, arm: int, c_tilde: float) -> float:
    """
    Exact phase of one arm at light speed c̃.

    Action, laser imprints at the exact interaction events and the internal-state phase
    are integrated from the first to the last interaction event of either arm.

    Args:
        scenario: Physical scenario.
        arm: 1 or 2.
        c_tilde: Reduced light speed in m/s.

    Returns:
        The phase in rad.

    Raises:
        CausalityError: If a front cannot reach the atom after the previous kick.
    """
    if arm not in (1, 2):
        raise ScenarioValidationError(f"Arms are numbered 1 and 2, got {arm}.")

    ctx = precise_context(settings.working_precision)
    reduced, *arms, window = _exact_arms(scenario, c_tilde, ctx)
    trajectory, events = arms[arm - 1]

    return float(_arm_phase(reduced, trajectory, events, window, ctx))


def exact_phase_difference(
    scenario: Scenario, c_tilde: float, precise: bool = False
) -> Any:
    """
    Exact arm-1 minus arm-2 phase at light speed c̃, separation phase included.

    Args:
        scenario: Physical scenario.
        c_tilde: Reduced light speed in m/s.
        precise: Return the extended-precision number instead of a float.

    Returns:
        The phase in rad.
    """
    ctx = precise_context(settings.working_precision)
    reduced, (arm1, events1), (arm2, events2), window = _exact_arms(
        scenario, c_tilde, ctx
    )

    end = window[1]
    p_bar = ctx.mpf(reduced.species.m_bar) * (arm1.velocity(end) + arm2.velocity(end)) / 2
    separation = p_bar * (arm2.position(end) - arm1.position(end)) / ctx.mpf(
        reduced.constants.hbar
    )

    phase = (
        _arm_phase(reduced, arm1, events1, window, ctx)
        - _arm_phase(reduced, arm2, events2, window, ctx)
        + separation
    )
    logger.debug(f"Exact phase at c_tilde={c_tilde} m/s: {phase}")

    return phase if precise else float(phase)


def check_grid(c_tilde_values: Sequence[float]) -> List[float]:
    """
    Validate a c̃ grid and return it in decreasing order.

    Raises:
        ScenarioValidationError: For fewer than four values or non-positive ones.
        IllConditionedFitError: If the values span less than 1.5 decades.
    """
    values = sorted((float(c) for c in c_tilde_values), reverse=True)
    if len(values) < _MIN_POINTS or values[-1] <= 0:
        raise ScenarioValidationError(
            f"The oracle needs at least {_MIN_POINTS} positive c_tilde values, got"
            f" {values}."
        )
    if len(set(values)) != len(values):
        raise ScenarioValidationError(f"c_tilde values must be distinct, got {values}.")
    if np.log10(values[0] / values[-1]) < _MIN_DECADES:
        raise IllConditionedFitError(
            f"c_tilde values {values} span less than {_MIN_DECADES} decades."
        )

    return values


def _tolerance_scale(scenario: Scenario) -> float:
    mech = scenario.mechanism
    T = scenario.geometry.total_time
    return (mech.K + mech.k_A) * abs(scenario.g) * T**3 * max_speed(scenario)


def fit_series(
    scenario: Scenario, c_tilde_values: Sequence[float], exact_phases: Sequence[Any]
) -> OracleRun:
    """
    Fit exact phases with a₀ + a₁/c̃ + a₂/c̃² + ... and compare with the engine.

    The fit runs in extended precision on the powers 1/c̃⁰ to 1/c̃⁴, or on as many
    powers as there are points for shorter grids. The model and residuals keep
    a₀ + a₁/c̃ only, so the residuals expose the order of the first neglected term.

    Args:
        scenario: Physical scenario.
        c_tilde_values: Decreasing light speeds.
        exact_phases: Exact phase difference at each light speed, as floats or
            extended-precision numbers.

    Returns:
        The oracle run with its verdict.

    Raises:
        IllConditionedFitError: If the design matrix is ill-conditioned.
    """
    c_tilde = np.asarray(c_tilde_values, dtype=float)
    c_min = float(c_tilde.min())
    columns = min(len(c_tilde), _MAX_COLUMNS)

    condition = np.linalg.cond(np.vander(c_min / c_tilde, columns, increasing=True))
    if not np.isfinite(condition) or condition > _MAX_CONDITION:
        raise IllConditionedFitError(
            f"Design matrix condition number {condition:.3e} is too large; spread the"
            " c_tilde values."
        )

    ctx = precise_context(settings.working_precision)
    xs = [ctx.mpf(c_min) / ctx.mpf(c) for c in c_tilde]
    phases = [ctx.mpf(phase) for phase in exact_phases]
    design = ctx.matrix([[x**j for j in range(columns)] for x in xs])
    coef, _ = ctx.qr_solve(design, ctx.matrix(phases))

    a0 = coef[0]
    a1 = coef[1] * c_min
    a2 = coef[2] * ctx.mpf(c_min) ** 2
    fitted = design * coef
    fit_residuals = [phase - fitted[i] for i, phase in enumerate(phases)]
    model = [a0 + a1 / ctx.mpf(c) for c in c_tilde]
    residuals = [phase - value for phase, value in zip(phases, model)]

    engine_scenario = scenario.model_copy(
        update={"compensation_delay": None, "compensation_gamma": None}
    )
    engine_a0 = unperturbed_phase(engine_scenario)
    engine_a1 = first_order_coefficient(engine_scenario)

    messages = []
    a0_tolerance = max(settings.oracle_a0_rtol * abs(engine_a0), settings.oracle_a0_atol)
    a0_ok = abs(a0 - engine_a0) <= a0_tolerance
    if not a0_ok:
        messages.append(
            f"a0={float(a0)} differs from the unperturbed phase {engine_a0} by more"
            f" than {a0_tolerance}."
        )

    a1_tolerance = settings.oracle_a1_rtol * max(
        abs(engine_a1), _tolerance_scale(scenario)
    )
    a1_ok = abs(a1 - engine_a1) <= a1_tolerance
    if not a1_ok:
        messages.append(
            f"a1={float(a1)} differs from the engine coefficient {engine_a1} by more"
            f" than {a1_tolerance}."
        )

    # Rounding floor at half the working digits.
    noise = max([1, *(abs(phase) for phase in phases)]) * ctx.mpf(10) ** (
        -(settings.working_precision // 2)
    )
    order_slope = None
    if all(abs(r) > noise for r in residuals):
        order_slope = log_log_slope(c_tilde, [float(r) for r in residuals])
    else:
        messages.append("Residuals reach the noise floor; order slope not fitted.")

    if a2 != 0 and max(abs(r) for r in fit_residuals) > 1e-3 * abs(a2) / c_min**2:
        messages.append("Fit residuals exceed 1e-3 of the second-order term.")

    passed = a0_ok and a1_ok
    logger.info(
        f"Oracle {'PASS' if passed else 'FAIL'}: a0={float(a0)}, a1={float(a1)}"
        f" (engine {engine_a1})"
    )

    return OracleRun(
        c_tilde_values=c_tilde.tolist(),
        exact_phases=[float(phase) for phase in phases],
        coefficients=(float(a0), float(a1), float(a2)),
        fit_residuals=[float(r) for r in fit_residuals],
        model_phases=[float(value) for value in model],
        residuals=[float(r) for r in residuals],
        engine_a0=engine_a0,
        engine_a1=engine_a1,
        order_slope=order_slope,
        passed=passed,
        messages=messages,
    )


def extract_series(scenario: Scenario, c_tilde_values: Sequence[float]) -> OracleRun:
    """
    Run the exact propagation on a c̃ grid and fit its 1/c̃ series.

    Args:
        scenario: Physical scenario.
        c_tilde_values: At least four light speeds spanning 1.5 decades.

    Returns:
        The oracle run.

    Raises:
        CausalityError: If a light speed is too close to the atomic speeds.
        IllConditionedFitError: If the grid cannot separate the coefficients.
    """
    values = check_grid(c_tilde_values)
    check_light_speeds(scenario, values)
    phases = [exact_phase_difference(scenario, c, precise=True) for c in values]

    return fit_series(scenario, values, phases)
