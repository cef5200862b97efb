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
"""Closed-form first-order phases, offsets and delays of the standard geometries.

These are reference values: the engine never uses them to compute a phase. The
command line prints them next to the engine output.
"""

from typing import Dict, Optional

from fsl_interferometry.geometry import is_mzi
from fsl_interferometry.light_field import recoil_velocity
from fsl_interferometry.models import MechanismKind, Scenario


def mirror_velocity(v0: float, g: float, T: float, v_K: float) -> float:
    """Mean velocity v_π = v₀ − gT + v_K/2 of the arms at the mirror pulse."""
    return v0 - g * T + v_K / 2


def mzi_contributions(
    K: float,
    delta_k: float,
    k_A: float,
    g: float,
    sigma: float,
    T: float,
    v_pi: float,
    c: float,
) -> Dict[str, float]:
    """Named Mach-Zehnder contributions in rad, keyed like `PhaseBreakdown`."""
    return {
        "unperturbed": -K * (g - sigma) * T**2,
        "fsl_clock": (delta_k - k_A) * g * T**2,
        "fsl_doppler": (delta_k - K) * g * T**2 * 3 * v_pi / c,
        "chirp": (K - delta_k) * sigma * T**2 * (2 * v_pi - g * T) / c,
        "time_dilation": -k_A * g * T**2 * v_pi / c,
    }


def butterfly_contributions(
    K: float, delta_k: float, k_A: float, g: float, sigma: float, T: float, c: float
) -> Dict[str, float]:
    """Named butterfly contributions in rad, keyed like `PhaseBreakdown`."""
    return {
        "unperturbed": 0.0,
        "fsl_clock": 0.0,
        "fsl_doppler": (delta_k - K) * g * T**2 * 6 * g * T / c,
        "chirp": (K - delta_k) * g * T**2 * 6 * sigma * T / c,
        "time_dilation": -k_A * g * T**2 * 2 * g * T / c,
    }


def spt_mzi_phase(
    K: float, g: float, sigma: float, T: float, v_R: float, v0: float, c: float
) -> float:
    """Single-photon Mach-Zehnder phase on resonance."""
    return -K * (g - sigma) * T**2 + K * g * T**2 * (v_R - v0 + g * T) / c


def bragg_mzi_phase(
    K: float,
    g: float,
    sigma: float,
    T: float,
    v_R: float,
    v0: float,
    v_K: float,
    c: float,
) -> float:
    """Bragg Mach-Zehnder phase on resonance."""
    v_pi = mirror_velocity(v0, g, T, v_K)
    return -K * (g - sigma) * T**2 * (1 + (2 * v_pi - g * T) / c) + K * g * T**2 * (
        v_R - v0
    ) / c


def raman_mzi_phase(
    K: float,
    delta_k: float,
    g: float,
    sigma: float,
    T: float,
    v_R: float,
    v0: float,
    v_K: float,
    c: float,
) -> float:
    """Raman Mach-Zehnder phase on resonance: the Bragg phase plus the Δk terms."""
    v_pi = mirror_velocity(v0, g, T, v_K)
    return bragg_mzi_phase(K, g, sigma, T, v_R, v0, v_K, c) + delta_k * (
        (g - sigma) * 2 * v_pi / c + g * sigma * T / c
    ) * T**2


def butterfly_phase(
    K: float, delta_k: float, k_A: float, g: float, sigma: float, T: float, c: float
) -> float:
    """Butterfly phase; the first term vanishes for single-photon transitions."""
    return -(K - delta_k) * g * T**2 * 6 * (g - sigma) * T / c - k_A * g * T**2 * 2 * (
        g * T
    ) / c


def e1m1_mzi_phase(k_A: float, g: float, T: float, v_pi: float, c: float) -> float:
    """Unchirped recoilless Mach-Zehnder phase 2k_A gT²v_π/c."""
    return k_A * g * T**2 * 2 * v_pi / c


def e1m1_differential(v_B: float, T: float, k_A: float, g: float, c: float) -> float:
    """Phase difference 4k_A gT²v_B/c of two recoilless interferometers."""
    return k_A * g * T**2 * 4 * v_B / c


def gamma_spt(v_R: float, v0: float, sigma: float, T: float, c: float) -> float:
    """Zero-fringe offset of a single-photon gravimeter."""
    return (v_R - v0) / c + sigma * T / c


def gamma_bragg(v_R: float, v0: float, c: float) -> float:
    """Zero-fringe offset of a Bragg gravimeter."""
    return (v_R - v0) / c


def gamma_raman(
    v_R: float, v0: float, sigma: float, T: float, K: float, delta_k: float, c: float
) -> float:
    """Zero-fringe offset of a Raman gravimeter."""
    return (v_R - v0) / c + (delta_k / K) * sigma * T / c


def gamma_spt_compensated(
    v_R: float, v0: float, sigma: float, T: float, Gamma: float, c: float
) -> float:
    """Offset of a timing-compensated single-photon gravimeter."""
    return sigma * T / c + (Gamma / sigma) * (v0 - v_R) / c


def compensated_spt_ratio(
    g: float, sigma: float, T: float, Gamma: float, v0: float, v_R: float, c: float
) -> float:
    """Compensated single-photon phase in units of KgT²."""
    return (
        -1
        + sigma / g
        + sigma * T / c
        + (Gamma / g) * (v0 - v_R - (g - sigma) * T) / c
    )


def spt_delay(g: float, Gamma: float, T: float, c: float) -> float:
    """Mirror-pulse delay removing the v₀ dependence of a single-photon phase."""
    return -(g + Gamma) * T**2 / (2 * c)


def bragg_delay(g: float, Gamma: float, sigma: float, T: float, c: float) -> float:
    """Mirror-pulse delay removing the v₀ dependence of a Bragg phase."""
    return -(3 * g + 3 * Gamma - 2 * sigma) * T**2 / (2 * c)


def spt_budget(
    delta_phi: float,
    delta_v0: float,
    K: float,
    sigma: float,
    T: float,
    v_R: float,
    v0: float,
    c: float,
) -> Dict[str, float]:
    """Phase and velocity parts of (Δg/σ)² without compensation."""
    return {
        "phase_term": (1 + 2 * (v_R - v0 + 2 * sigma * T) / c)
        * (delta_phi / (K * sigma * T**2)) ** 2,
        "velocity_term": (delta_v0 / c) ** 2,
    }


def spt_budget_compensated(
    delta_phi: float,
    delta_v0: float,
    K: float,
    sigma: float,
    T: float,
    Gamma: float,
    c: float,
) -> Dict[str, float]:
    """Phase and velocity parts of (Δg/σ)² with timing compensation."""
    return {
        "phase_term": (1 - 2 * (Gamma - sigma) * T / c)
        * (delta_phi / (K * sigma * T**2)) ** 2,
        "velocity_term": (Gamma * delta_v0 / (sigma * c)) ** 2,
    }


def _first_gap(scenario: Scenario) -> float:
    times = scenario.geometry.times
    return times[1] - times[0]


def reference_terms(scenario: Scenario) -> Optional[Dict[str, float]]:
    """Named contributions of a Mach-Zehnder or butterfly scenario, else None."""
    mech, c = scenario.mechanism, scenario.constants.c
    g, sigma = scenario.g, scenario.sigma

    if scenario.geometry.label == "butterfly":
        T = _first_gap(scenario)
        return butterfly_contributions(mech.K, mech.delta_k, mech.k_A, g, sigma, T, c)
    if not is_mzi(scenario.geometry):
        return None

    T = _first_gap(scenario)
    v_K = recoil_velocity(mech.K, scenario.species.m_bar, scenario.constants)
    v_pi = mirror_velocity(scenario.initial.v0, g, T, v_K)

    return mzi_contributions(mech.K, mech.delta_k, mech.k_A, g, sigma, T, v_pi, c)


def reference_phase(scenario: Scenario) -> Optional[float]:
    """Closed-form total phase of a resonant uncompensated scenario, else None."""
    if not scenario.on_resonance or scenario.compensated:
        return None

    mech, ic = scenario.mechanism, scenario.initial
    c, g, sigma = scenario.constants.c, scenario.g, scenario.sigma

    if scenario.geometry.label == "butterfly":
        T = _first_gap(scenario)
        return butterfly_phase(mech.K, mech.delta_k, mech.k_A, g, sigma, T, c)
    if not is_mzi(scenario.geometry):
        return None

    T = _first_gap(scenario)
    v_K = recoil_velocity(mech.K, scenario.species.m_bar, scenario.constants)
    if mech.kind is MechanismKind.spt:
        return spt_mzi_phase(mech.K, g, sigma, T, ic.v_R, ic.v0, c)
    if mech.kind is MechanismKind.bragg:
        return bragg_mzi_phase(mech.K, g, sigma, T, ic.v_R, ic.v0, v_K, c)
    if mech.kind is MechanismKind.raman:
        return raman_mzi_phase(mech.K, mech.delta_k, g, sigma, T, ic.v_R, ic.v0, v_K, c)
    if sigma != 0:
        return None

    return e1m1_mzi_phase(mech.k_A, g, T, mirror_velocity(ic.v0, g, T, v_K), c)
