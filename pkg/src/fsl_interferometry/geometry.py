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
"""Pulse schedules, idealized state responses and phase-space closure."""

from typing import Sequence, Tuple

from loguru import logger

from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import ScenarioValidationError
from fsl_interferometry.light_field import recoil_velocity
from fsl_interferometry.models import (
    AtomSpecies,
    ClosureReport,
    Geometry,
    InitialConditions,
    Mechanism,
    PhysicalConstants,
    PulseEvent,
    ResponseSample,
)
from fsl_interferometry.trajectory import propagate_idealized
from fsl_interferometry.utils import precise_context

# Λ before the first pulse.
GROUND_RESPONSE = -0.5


def build_geometry(
    pulses: Sequence[Tuple[float, int, int]], total_time: float, label: str = "custom"
) -> Geometry:
    """Build a geometry from (time, weight_arm1, weight_arm2) triples."""
    return Geometry(
        pulses=tuple(
            PulseEvent(time=time, weight_arm1=w1, weight_arm2=w2)
            for time, w1, w2 in pulses
        ),
        total_time=total_time,
        label=label,
    )


def _build_multiples(
    T: float, pulses: Sequence[Tuple[int, int, int]], label: str
) -> Geometry:
    _check_interrogation_time(T)
    multiples = tuple(n for n, _, _ in pulses) + (pulses[-1][0],)

    return Geometry(
        pulses=tuple(
            PulseEvent(time=n * T, weight_arm1=w1, weight_arm2=w2)
            for n, w1, w2 in pulses
        ),
        total_time=multiples[-1] * T,
        label=label,
        interrogation_time=T,
        time_multiples=multiples,
    )


def _check_interrogation_time(T: float) -> None:
    if T <= 0:
        raise ScenarioValidationError(f"The interrogation time must be positive, got {T}.")


def build_mzi(T: float) -> Geometry:
    """
    Mach-Zehnder sequence: splitter, mirror and recombiner at 0, T and 2T.

    Args:
        T: Interrogation time in s.

    Returns:
        The geometry.
    """
    return _build_multiples(T, [(0, 1, 0), (1, -1, 1), (2, 0, -1)], "mzi")


def build_butterfly(T: float) -> Geometry:
    """
    Figure-of-eight sequence at 0, T, 3T and 4T.

    Args:
        T: Interrogation time in s.

    Returns:
        The geometry.
    """
    return _build_multiples(
        T, [(0, 1, 0), (1, -1, 1), (3, 1, -1), (4, -1, 0)], "butterfly"
    )


def is_mzi(geom: Geometry) -> bool:
    """Whether the schedule is a Mach-Zehnder sequence, whatever its label."""
    if len(geom.pulses) != 3:
        return False

    t0, t1, t2 = geom.times
    return (
        geom.weights(1) == [1, -1, 0]
        and geom.weights(2) == [0, 1, -1]
        and abs((t2 - t1) - (t1 - t0)) <= 1e-12 * max(t2, 1.0)
    )


def response(geom: Geometry, arm: int, t: float) -> ResponseSample:
    """
    Idealized state response Λ_j(t), averaged at pulse times.

    Args:
        geom: Pulse schedule.
        arm: 1 or 2.
        t: Time in s.

    Returns:
        The sample.
    """
    value = GROUND_RESPONSE
    for pulse in geom.pulses:
        if pulse.time < t:
            value += pulse.weight(arm)
        elif pulse.time == t:
            weight = pulse.weight(arm)
            return ResponseSample(lambda_=value + weight / 2, is_discontinuity=weight != 0)

    return ResponseSample(lambda_=value, is_discontinuity=False)


def response_levels(geom: Geometry, arm: int) -> Tuple[float, ...]:
    """Λ_j on the intervals between pulses: entry i holds the value after pulse i."""
    levels = []
    value = GROUND_RESPONSE
    for weight in geom.weights(arm):
        value += weight
        levels.append(value)

    return tuple(levels)


def check_closure(
    geom: Geometry,
    mech: Mechanism,
    m_bar: float,
    ic: InitialConditions,
    g: float,
    consts: PhysicalConstants,
) -> ClosureReport:
    """
    Separation of the unperturbed arms at the end of the sequence.

    The geometry is closed when both differences are below the closure tolerance in
    units of v_K·total_time and v_K.

    Args:
        geom: Pulse schedule.
        mech: Diffraction mechanism.
        m_bar: Mean atomic mass in kg.
        ic: Launch state.
        g: Gravitational acceleration in m/s².
        consts: Physical constants.

    Returns:
        The closure report.
    """
    ctx = precise_context(settings.working_precision)
    species = AtomSpecies(m_bar=m_bar, omega_A=mech.omega_A)
    arm1, arm2 = propagate_idealized(geom, mech, species, ic, g, consts, ctx)

    _, end = geom.exact_schedule(ctx)
    delta_z = float(arm1.position(end) - arm2.position(end))
    delta_v = float(arm1.velocity(end) - arm2.velocity(end))

    v_K = abs(recoil_velocity(mech.K, m_bar, consts))
    # Length unit v_K·total_time, i.e. 2v_K·T for a Mach-Zehnder sequence.
    z_scale, v_scale = (v_K * geom.total_time, v_K) if v_K > 0 else (1.0, 1.0)
    tolerance = settings.closure_tolerance
    closed = abs(delta_z) <= tolerance * z_scale and abs(delta_v) <= tolerance * v_scale

    if not closed:
        logger.debug(
            f"Geometry `{geom.label}` is open: delta_z={delta_z} m, delta_v={delta_v} m/s"
        )

    return ClosureReport(delta_z=delta_z, delta_v=delta_v, closed=closed)
