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
"""Shared fixtures for the test suite."""

import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import pytest

from fsl_interferometry.models import Scenario
from fsl_interferometry.scenario import ScenarioFile, build_scenario

M_BAR = 1.443e-25
K_SR = 2 * math.pi / 698e-9
K_RB = 2 * 2 * math.pi / 780e-9
OMEGA_HFS = 2 * math.pi * 6.834682611e9
OMEGA_CLOCK = 2 * math.pi * 429.228004229873e12


def scenario_document(
    mechanism: str = "SPT",
    K: float = K_SR,
    geometry: str = "mzi",
    T: float = 0.3,
    pulses: Optional[List[Tuple[float, int, int]]] = None,
    sigma: float = 9.81,
    g: float = 9.81,
    z0: float = 0.0,
    v0: float = 0.0,
    v_res: float = 0.0,
    omega_A: Optional[float] = None,
    delta_k: Optional[float] = None,
    L: float = 1.0,
    c: Optional[float] = None,
    compensation: Optional[Dict[str, Any]] = None,
) -> Dict[str, Any]:
    """Build a scenario document with the given parameters."""
    atom: Dict[str, Any] = {"m_bar_kg": M_BAR, "z0_m": z0, "v0_m_s": v0, "v_res_m_s": v_res}
    if omega_A is not None:
        atom["omega_A_rad_s"] = omega_A

    lasers: Dict[str, Any] = {
        "mechanism": mechanism,
        "K_rad_m": K,
        "sigma_m_s2": sigma,
        "L_m": L,
        "phi_off_rad": 0.0,
    }
    if delta_k is not None:
        lasers["delta_k_rad_m"] = delta_k

    if pulses is None:
        geometry_section: Dict[str, Any] = {"builtin": geometry, "T_s": T}
    else:
        geometry_section = {
            "pulses": [{"time_s": t, "w1": w1, "w2": w2} for t, w1, w2 in pulses],
            "label": geometry,
        }

    document: Dict[str, Any] = {
        "atom": atom,
        "lasers": lasers,
        "geometry": geometry_section,
        "gravity": {"g_m_s2": g},
    }
    if c is not None:
        document["constants"] = {"c_m_s": c, "hbar_J_s": 1.054571817e-34}
    if compensation is not None:
        document["compensation"] = compensation

    return document


def make_scenario(**kwargs: Any) -> Scenario:
    """Build a `Scenario` through the scenario-file path."""
    return build_scenario(ScenarioFile.model_validate(scenario_document(**kwargs)))


@pytest.fixture
def scenario_factory() -> Callable[..., Scenario]:
    """Return the scenario builder."""
    return make_scenario


@pytest.fixture
def document_factory() -> Callable[..., Dict[str, Any]]:
    """Return the scenario-document builder."""
    return scenario_document


@pytest.fixture
def spt_mzi() -> Scenario:
    """Resonant single-photon Mach-Zehnder scenario with σ = g."""
    return make_scenario()


@pytest.fixture
def bragg_mzi() -> Scenario:
    """Resonant Bragg Mach-Zehnder scenario with σ = g."""
    return make_scenario(mechanism="Bragg", K=K_RB, T=0.2)
