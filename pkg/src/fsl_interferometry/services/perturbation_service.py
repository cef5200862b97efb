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
"""First-order phase engine: unperturbed phase, perturbation functionals and timing shifts.

Everything is evaluated along the unperturbed arms in extended precision. Arm
differences are formed pulse by pulse and interval by interval before summation, so
the large common parts of both arms cancel exactly.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Sequence, Tuple

import mpmath
from loguru import logger

from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import OpenGeometryError, ScenarioValidationError
from fsl_interferometry.geometry import check_closure, is_mzi, response_levels
from fsl_interferometry.light_field import phase_effective
from fsl_interferometry.models import PhaseBreakdown, Scenario
from fsl_interferometry.trajectory import (
    ArmTrajectory,
    TrajectorySegment,
    propagate_idealized,
    velocity_symmetric,
)
from fsl_interferometry.utils import precise_context

FSL_TERMS: Tuple[str, ...] = ("fsl_clock", "fsl_doppler", "chirp", "time_dilation")
TIMING_TERMS: Tuple[str, ...] = ("ts_clock", "ts_doppler", "ts_chirp")


@dataclass(frozen=True)
class _Branch:
    """One arm entering a sum with a sign (+1 alone or for arm 1, -1 for arm 2)."""

    arm: ArmTrajectory
    weights: Tuple[int, ...]
    levels: Tuple[float, ...]
    sign: int


class _Evaluation:
    """Unperturbed arms of a closed scenario and its constants as context numbers."""

    def __init__(self, scenario: Scenario) -> None:
        geom = scenario.geometry
        closure = check_closure(
            geom,
            scenario.mechanism,
            scenario.species.m_bar,
            scenario.initial,
            scenario.g,
            scenario.constants,
        )
        if not closure.closed:
            raise OpenGeometryError(
                f"Geometry `{geom.label}` does not close: delta_z={closure.delta_z} m,"
                f" delta_v={closure.delta_v} m/s."
            )

        self.scenario = scenario
        self.ctx: mpmath.MPContext = precise_context(settings.working_precision)
        mpf = self.ctx.mpf

        self.arms = propagate_idealized(
            geom,
            scenario.mechanism,
            scenario.species,
            scenario.initial,
            scenario.g,
            scenario.constants,
            self.ctx,
        )
        self.times: List[Any] = geom.exact_schedule(self.ctx)[0]

        mech, field = scenario.mechanism, scenario.field
        self.c = mpf(scenario.constants.c)
        self.hbar = mpf(scenario.constants.hbar)
        self.m_bar = mpf(scenario.species.m_bar)
        self.g = mpf(scenario.g)
        self.K = mpf(mech.K)
        self.delta_k = mpf(mech.delta_k)
        self.k_A = mpf(mech.k_A)
        self.omega_A = mpf(mech.omega_A)
        self.delta_omega = mpf(field.delta_omega)
        self.sigma = mpf(field.sigma)
        self.t0 = mpf(field.t_init_retarded)

    def branch(self, arm: int, sign: int = 1) -> _Branch:
        geom = self.scenario.geometry
        return _Branch(
            self.arms[arm - 1],
            tuple(geom.weights(arm)),
            response_levels(geom, arm),
            sign,
        )

    def difference(self) -> Tuple[_Branch, _Branch]:
        return self.branch(1), self.branch(2, -1)

    def pulse_sum(
        self, branches: Sequence[_Branch], term: Callable[[ArmTrajectory, Any], Any]
    ) -> Any:
        """Σ_ℓ Σ_branches sign·w_ℓ·term(arm, T_ℓ), branches combined per pulse."""
        per_pulse = []
        for index, T in enumerate(self.times):
            per_pulse.append(
                sum(
                    (
                        b.sign * b.weights[index] * term(b.arm, T)
                        for b in branches
                        if b.weights[index] != 0
                    ),
                    self.ctx.zero,
                )
            )

        return self.ctx.fsum(per_pulse)

    def interval_sum(
        self,
        branches: Sequence[_Branch],
        integrand: Callable[[TrajectorySegment, Any, Any], Any],
        weighted: bool = True,
    ) -> Any:
        """Σ_i Σ_branches sign·Λ_i·∫ over the interval between pulses i and i+1."""
        per_interval = []
        for index, (a, b) in enumerate(zip(self.times, self.times[1:])):
            per_interval.append(
                sum(
                    (
                        br.sign
                        * (br.levels[index] if weighted else 1)
                        * integrand(br.arm.segment_at(a), a, b)
                        for br in branches
                    ),
                    self.ctx.zero,
                )
            )

        return self.ctx.fsum(per_interval)

    def lagrangian_integral(self, segment: TrajectorySegment, a: Any, b: Any) -> Any:
        """∫(v²/2 − gz) dt on one segment."""
        return segment.integral_v2(a, b) / 2 - self.g * segment.integral_z(a, b)

    def laser_phase(self, arm: ArmTrajectory, T: Any) -> Any:
        s = self.scenario
        phi_l, _ = phase_effective(
            s.field, s.g, arm.position(T), T, s.constants, self.ctx
        )
        return phi_l + self.omega_A * T


def _unperturbed(ev: _Evaluation) -> Any:
    branches = ev.difference()
    action = ev.interval_sum(branches, ev.lagrangian_integral, weighted=False)

    return ev.m_bar * action / ev.hbar + ev.pulse_sum(branches, ev.laser_phase)


def _functional_b(ev: _Evaluation, branches: Sequence[_Branch]) -> Dict[str, Any]:
    c = ev.c

    def z_term(arm, T):
        return arm.position(T)

    def zv_term(arm, T):
        return arm.position(T) * velocity_symmetric(arm, T)

    def zt_term(arm, T):
        return arm.position(T) * (T - ev.t0)

    def v2_integrand(segment, a, b):
        return segment.integral_v2(a, b)

    return {
        "fsl_clock": (ev.k_A - ev.delta_k) * ev.pulse_sum(branches, z_term),
        "fsl_doppler": (ev.K - ev.delta_k) / c * ev.pulse_sum(branches, zv_term),
        "chirp": (ev.K - ev.delta_k) * ev.sigma / c * ev.pulse_sum(branches, zt_term),
        "time_dilation": -ev.k_A / (2 * c) * ev.interval_sum(branches, v2_integrand),
    }


def _functional_a(ev: _Evaluation, branches: Sequence[_Branch], truncate: bool) -> Any:
    c, K, g, sigma = ev.c, ev.K, ev.g, ev.sigma

    def pulse_term(arm, T):
        z = arm.position(T)
        v = velocity_symmetric(arm, T)
        s = T - ev.t0
        delta_phi = -ev.delta_k * z * sigma * s / c
        doppler = 1 + v / c
        laser = K * (v + sigma * s) * z / c
        if not truncate:
            delta_phi -= K * z**2 * (g - sigma) / (2 * c**2)
            laser *= doppler

        return delta_phi + (ev.k_A - ev.delta_k) * z * doppler + laser

    mass_defect = ev.k_A / c * ev.interval_sum(branches, ev.lagrangian_integral)

    return ev.pulse_sum(branches, pulse_term) + mass_defect


def _timing_shift(ev: _Evaluation, branches: Sequence[_Branch]) -> Dict[str, Any]:
    s = ev.scenario
    zero = ev.ctx.zero
    if s.compensation_delay is None:
        return {name: zero for name in TIMING_TERMS}

    index = s.compensation_pulse
    delay = ev.ctx.mpf(s.compensation_delay)
    T = ev.times[index]

    clock, doppler, chirp = [], [], []
    for b in branches:
        weight = b.sign * b.weights[index]
        if weight == 0:
            continue
        v = velocity_symmetric(b.arm, T)
        clock.append(weight * (ev.omega_A - ev.delta_omega) * delay)
        doppler.append(weight * (ev.K + ev.k_A - ev.delta_k) * v * delay)
        chirp.append(weight * ev.K * ev.sigma * (T - ev.t0) * delay)

    return {
        "ts_clock": ev.ctx.fsum(clock),
        "ts_doppler": ev.ctx.fsum(doppler),
        "ts_chirp": ev.ctx.fsum(chirp),
    }


def _check_timing_geometry(scenario: Scenario) -> None:
    if scenario.compensation_delay is None:
        return
    if not is_mzi(scenario.geometry):
        raise ScenarioValidationError(
            "Timing-shift compensation is only defined for Mach-Zehnder sequences, got"
            f" `{scenario.geometry.label}`."
        )
    if scenario.compensation_pulse != 1:
        raise ScenarioValidationError(
            "Mach-Zehnder compensation delays the mirror pulse (index 1), got index"
            f" {scenario.compensation_pulse}."
        )


def unperturbed_phase(scenario: Scenario) -> float:
    """
    Phase of the ideal interferometer: action difference plus laser and clock phases.

    Args:
        scenario: A scenario with a closed geometry.

    Returns:
        φ_un in rad.

    Raises:
        OpenGeometryError: If the arms do not close.
    """
    return float(_unperturbed(_Evaluation(scenario)))


def arm_phase_functional_a(scenario: Scenario, arm: int, truncate: bool = True) -> float:
    """
    Perturbation phase of one arm in the pulse-timing form.

    Collects the pulse phase perturbations, the delay of each pulse times the laser and
    atomic frequencies, and the mass-defect Lagrangian weighted by the state response.
    With `truncate=False` the c⁻² pieces of the pulse terms are kept.

    Args:
        scenario: A scenario with a closed geometry.
        arm: 1 or 2.
        truncate: Whether to keep only first-order terms.

    Returns:
        The arm's contribution in rad.
    """
    ev = _Evaluation(scenario)
    return float(_functional_a(ev, (ev.branch(arm),), truncate))


def arm_phase_functional_b(scenario: Scenario, arm: int) -> float:
    """
    Perturbation phase of one arm in the split form: clock, Doppler, chirp, dilation.

    Args:
        scenario: A scenario with a closed geometry.
        arm: 1 or 2.

    Returns:
        The arm's contribution in rad.
    """
    ev = _Evaluation(scenario)
    return float(ev.ctx.fsum(_functional_b(ev, (ev.branch(arm),)).values()))


def arm_terms_b(scenario: Scenario, arm: int) -> Dict[str, float]:
    """Named split-form contributions of one arm."""
    ev = _Evaluation(scenario)
    return {
        name: float(value)
        for name, value in _functional_b(ev, (ev.branch(arm),)).items()
    }


def functional_difference(
    scenario: Scenario, form: str = "B", truncate: bool = True
) -> float:
    """
    Arm-1 minus arm-2 perturbation phase in either form, differenced per pulse.

    The two forms differ per arm by boundary terms that cancel between closed arms.

    Args:
        scenario: A scenario with a closed geometry.
        form: "A" for the pulse-timing form, "B" for the split form.
        truncate: Passed to the pulse-timing form.

    Returns:
        The difference in rad.
    """
    ev = _Evaluation(scenario)
    branches = ev.difference()
    if form == "A":
        return float(_functional_a(ev, branches, truncate))
    if form == "B":
        return float(ev.ctx.fsum(_functional_b(ev, branches).values()))

    raise ValueError(f"form must be 'A' or 'B', got {form!r}.")


def compensation_phase(scenario: Scenario) -> Dict[str, float]:
    """
    Phase added by delaying one pulse by the scenario's compensation delay.

    Args:
        scenario: A Mach-Zehnder scenario.

    Returns:
        The `ts_clock`, `ts_doppler` and `ts_chirp` contributions in rad, all zero
        without a delay.

    Raises:
        ScenarioValidationError: If a delay is set on another geometry.
    """
    _check_timing_geometry(scenario)
    ev = _Evaluation(scenario)

    return {name: float(value) for name, value in _timing_shift(ev, ev.difference()).items()}


def total_phase(scenario: Scenario) -> PhaseBreakdown:
    """
    Unperturbed phase plus every first-order contribution.

    Args:
        scenario: A scenario with a closed geometry.

    Returns:
        The breakdown; its total is the compensated sum of its terms.

    Raises:
        OpenGeometryError: If the arms do not close.
        ScenarioValidationError: If a compensation delay is set on a geometry that
            does not support it.
    """
    _check_timing_geometry(scenario)
    ev = _Evaluation(scenario)
    branches = ev.difference()

    terms = {"unperturbed": _unperturbed(ev)}
    terms.update(_functional_b(ev, branches))
    terms.update(_timing_shift(ev, branches))

    breakdown = PhaseBreakdown.assemble(
        **{name: float(value) for name, value in terms.items()}
    )
    logger.debug(
        f"{scenario.mechanism.kind.value} `{scenario.geometry.label}`:"
        f" unperturbed={breakdown.unperturbed} rad,"
        f" perturbation={breakdown.perturbation} rad"
    )

    return breakdown


def first_order_coefficient(scenario: Scenario) -> float:
    """Coefficient a₁ of 1/c in the phase: c times the summed perturbation."""
    return total_phase(scenario).perturbation * scenario.constants.c
