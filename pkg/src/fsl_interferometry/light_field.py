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
"""Chirped laser phases in weak gravity, the effective two-photon phase and resonances.

All phases are the eikonal solutions truncated at O(c⁻²). Functions accept floats or
numbers of an mpmath context passed as `ctx`; the arithmetic is the same.
"""

import math
from typing import Any, Optional, Tuple

import mpmath

from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import ScenarioValidationError
from fsl_interferometry.models import (
    BeamDirection,
    EffectiveField,
    LaserBeam,
    Mechanism,
    MechanismKind,
    PhysicalConstants,
    PulseEnvelope,
)
from fsl_interferometry.utils import lift, precise_context

# Finite differences of the (quadratic) phase need digits well beyond the carrier.
_EIKONAL_DPS = 60


def phase_single(
    beam: LaserBeam,
    g: float,
    z: Any,
    t: Any,
    consts: PhysicalConstants,
    ctx: Optional[mpmath.MPContext] = None,
) -> Any:
    """
    Phase of one chirped beam at height z and time t.

    Args:
        beam: The beam.
        g: Gravitational acceleration in m/s².
        z: Height in m.
        t: Time in s.
        consts: Physical constants.
        ctx: Optional mpmath context for extended precision.

    Returns:
        φ_± + κ_±(z, t) − ω_±(t − t_i)[1 + σ_±(t − t_i)/(2c)] in rad.
    """
    c, g, z, t = lift(ctx, consts.c, g, z, t)
    k, omega, sigma, phi0, L, t_init = lift(
        ctx, beam.k, beam.omega, beam.sigma, beam.phi0, beam.L, beam.t_init
    )
    sign = beam.direction.sign
    s = t - t_init

    kappa = (
        sign
        * (z + sign * L)
        * k
        * (
            1
            + sigma * s / c
            - ((g + sign * sigma) * z + (sigma - sign * g) * L) / (2 * c**2)
        )
    )

    return phi0 + kappa - omega * s * (1 + sigma * s / (2 * c))


def phase_effective(
    field: EffectiveField,
    g: float,
    z: Any,
    t: Any,
    consts: PhysicalConstants,
    ctx: Optional[mpmath.MPContext] = None,
) -> Tuple[Any, Any]:
    """
    Dominant effective phase Φ_L and its perturbation δΦ.

    Args:
        field: The effective field.
        g: Gravitational acceleration in m/s².
        z: Height in m.
        t: Time in s.
        consts: Physical constants.
        ctx: Optional mpmath context for extended precision.

    Returns:
        The pair (Φ_L, δΦ) in rad.
    """
    c, g, z, t = lift(ctx, consts.c, g, z, t)
    K, delta_omega, delta_k, sigma, phi_off, t_init = lift(
        ctx,
        field.K,
        field.delta_omega,
        field.delta_k,
        field.sigma,
        field.Phi_off,
        field.t_init_retarded,
    )
    s = t - t_init

    phi_l = phi_off + K * z - delta_omega * s + K * sigma * s**2 / 2
    delta_phi = -delta_k * z * sigma * s / c - K * z * (g - sigma) * z / (2 * c**2)

    return phi_l, delta_phi


def effective_wave_vector(
    field: EffectiveField,
    g: float,
    z: Any,
    t: Any,
    consts: PhysicalConstants,
    ctx: Optional[mpmath.MPContext] = None,
) -> Any:
    """Local gradient ∂_z(Φ_L + δΦ), the wave vector transferred by a pulse."""
    c, g, z, t = lift(ctx, consts.c, g, z, t)
    K, delta_k, sigma, t_init = lift(
        ctx, field.K, field.delta_k, field.sigma, field.t_init_retarded
    )

    return K - delta_k * sigma * (t - t_init) / c - K * (g - sigma) * z / c**2


def combine_beams(
    up: LaserBeam,
    down: LaserBeam,
    g: float,
    consts: PhysicalConstants,
    recoilless: bool = False,
) -> EffectiveField:
    """
    Combine counterpropagating beams into the effective field.

    A zero down beam (ω₋ = 0) describes a single-photon transition. With `recoilless`
    the down beam is sign-flipped (ω₋, k₋, φ₋ → −ω₋, −k₋, −φ₋), the pairing of a
    two-photon E1-M1 transition.

    Args:
        up: Beam sourced at −L.
        down: Beam sourced at +L.
        g: Gravitational acceleration in m/s².
        consts: Physical constants.
        recoilless: Whether to apply the E1-M1 sign flip.

    Returns:
        The effective field. Φ_off absorbs the constant K·g·L²/(2c²).

    Raises:
        ScenarioValidationError: If the beams do not share source distance,
            initiation time and chirp.
    """
    if up.direction is not BeamDirection.up or down.direction is not BeamDirection.down:
        raise ScenarioValidationError("Expected one up beam and one down beam.")
    if down.omega != 0 and not math.isclose(up.L, down.L, rel_tol=1e-12):
        raise ScenarioValidationError(
            f"Beam sources must be symmetric, got L={up.L} and L={down.L}."
        )
    if down.omega != 0 and up.t_init != down.t_init:
        raise ScenarioValidationError("Both beams must be initiated together.")

    sigma = -up.sigma
    if down.omega != 0 and down.sigma != sigma:
        raise ScenarioValidationError(
            f"Chirps must be opposite, got {up.sigma} and {down.sigma}."
        )

    if recoilless:
        down = down.flipped()

    K = up.k + down.k
    delta_omega = up.omega - down.omega
    L = up.L

    return EffectiveField(
        Phi_off=up.phi0 - down.phi0 + K * g * L**2 / (2 * consts.c**2),
        K=K,
        delta_omega=delta_omega,
        delta_k=delta_omega / consts.c,
        sigma=sigma,
        t_init_retarded=up.t_init + L / consts.c,
    )


def recoil_velocity(K: float, m_bar: float, consts: PhysicalConstants) -> float:
    """Return v_K = ħK/m̄."""
    if m_bar <= 0:
        raise ScenarioValidationError(f"m_bar must be positive, got {m_bar}.")

    return consts.hbar * K / m_bar


def recoil_frequency(K: float, m_bar: float, consts: PhysicalConstants) -> float:
    """Return ω_K = K·v_K/2."""
    return K * recoil_velocity(K, m_bar, consts) / 2


def doppler_frequency(K: float, v_R: float) -> float:
    """Return ω_D = K·v_R."""
    return K * v_R


def resonant_delta_omega(
    mech: Mechanism, v_R: float, m_bar: float, consts: PhysicalConstants
) -> float:
    """
    Frequency difference that drives the transition resonantly at velocity v_R.

    Args:
        mech: Diffraction mechanism.
        v_R: Velocity the lasers are tuned to in m/s.
        m_bar: Mean atomic mass in kg.
        consts: Physical constants.

    Returns:
        Δω = ω_A + ω_K + ω_D in rad/s, or ω_A for the Doppler-free E1-M1 pairing.
    """
    if m_bar <= 0:
        raise ScenarioValidationError(f"m_bar must be positive, got {m_bar}.")
    if mech.kind is MechanismKind.e1m1:
        return mech.omega_A

    return (
        mech.omega_A
        + recoil_frequency(mech.K, m_bar, consts)
        + doppler_frequency(mech.K, v_R)
    )


def pulse_arrival_time(beam: LaserBeam, z: float, consts: PhysicalConstants) -> float:
    """Time at which the envelope peak emitted at t_i reaches height z."""
    return beam.t_init + abs(z - beam.source_position) / consts.c


def envelope(
    beam: LaserBeam,
    env: PulseEnvelope,
    z: float,
    t: float,
    consts: PhysicalConstants,
) -> float:
    """
    Gaussian field magnitude of a pulse at height z and time t.

    Raises:
        ScenarioValidationError: For the delta-pulse limit σ_ω = 0.
    """
    if env.sigma_omega <= 0:
        raise ScenarioValidationError(
            "The envelope of a delta pulse is not a function; use sigma_omega > 0."
        )

    lag = t - pulse_arrival_time(beam, z, consts)

    return env.amplitude * math.exp(-(env.sigma_omega**2) * lag**2 / 2)


def eikonal_residual(
    beam: LaserBeam,
    g: float,
    z: float,
    t: float,
    consts: PhysicalConstants,
    h: Optional[Tuple[float, float]] = None,
) -> float:
    """
    Residual of the eikonal equation for the truncated beam phase.

    Evaluates (1 + gz/c²)⁻²(∂_tΦ/c)² − (∂_zΦ)² with central differences in extended
    precision. Steps much larger than the wavelength or the optical period leave the
    result dominated by discretization.

    Args:
        beam: The beam.
        g: Gravitational acceleration in m/s².
        z: Height in m.
        t: Time in s.
        consts: Physical constants.
        h: Steps (h_z, h_t); defaults to a fraction of the wavelength and of 1/ω.

    Returns:
        The residual in rad²/m².
    """
    if h is None:
        if beam.k == 0:
            raise ScenarioValidationError("A zero-frequency beam has no wavelength.")
        fraction = settings.eikonal_step_fraction
        h = (fraction * 2 * math.pi / abs(beam.k), fraction / abs(beam.omega))

    ctx = precise_context(_EIKONAL_DPS)
    c, g_, z_, t_, h_z, h_t = lift(ctx, consts.c, g, z, t, *h)

    def phase(zz, tt):
        return phase_single(beam, g, zz, tt, consts, ctx)

    d_z = (phase(z_ + h_z, t_) - phase(z_ - h_z, t_)) / (2 * h_z)
    d_t = (phase(z_, t_ + h_t) - phase(z_, t_ - h_t)) / (2 * h_t)
    residual = (d_t / c) ** 2 / (1 + g_ * z_ / c**2) ** 2 - d_z**2

    return float(residual)


def figure_preset() -> Tuple[EffectiveField, PhysicalConstants, float]:
    """
    Dimensionless single-photon field for chirped-phase diagrams.

    Units with c = Δω = 1, Φ_off = 4π/3, σ/(cΔω) = 0.05 and g/σ = 2.

    Returns:
        The field, the constants and g.
    """
    consts = PhysicalConstants(c=1.0, hbar=1.0)
    sigma = 0.05
    field = EffectiveField(
        Phi_off=4 * math.pi / 3, K=1.0, delta_omega=1.0, delta_k=1.0, sigma=sigma
    )

    return field, consts, 2 * sigma
