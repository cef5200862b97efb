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
"""Tests the first-order phase engine."""

import numpy as np
import pytest

from fsl_interferometry import closed_forms
from fsl_interferometry.exceptions import OpenGeometryError, ScenarioValidationError
from fsl_interferometry.light_field import recoil_velocity
from fsl_interferometry.models import PHASE_TERMS, Scenario
from fsl_interferometry.services.perturbation_service import (
    FSL_TERMS,
    arm_phase_functional_a,
    arm_phase_functional_b,
    arm_terms_b,
    compensation_phase,
    first_order_coefficient,
    functional_difference,
    total_phase,
    unperturbed_phase,
)

from .conftest import K_RB, OMEGA_CLOCK, OMEGA_HFS, make_scenario

MECHANISMS = {
    "SPT": {"mechanism": "SPT"},
    "Bragg": {"mechanism": "Bragg", "K": K_RB},
    "Raman": {"mechanism": "Raman", "K": K_RB, "omega_A": OMEGA_HFS},
    "E1M1": {"mechanism": "E1M1", "K": 0.0, "omega_A": OMEGA_CLOCK},
}


def _v_pi(scenario: Scenario, T: float) -> float:
    v_K = recoil_velocity(scenario.mechanism.K, scenario.species.m_bar, scenario.constants)
    return closed_forms.mirror_velocity(scenario.initial.v0, scenario.g, T, v_K)


def _random_cases(geometry: str, count: int, seed: int) -> list:
    """Draw scenario parameters over the supported gravimeter ranges."""
    rng = np.random.default_rng(seed)
    names = ["SPT", "Bragg", "Raman"] + (["E1M1"] if geometry == "mzi" else [])
    cases = []
    for index in range(count):
        g = rng.uniform(1.0, 20.0)
        kwargs = dict(MECHANISMS[names[index % len(names)]])
        if kwargs["mechanism"] != "E1M1":
            kwargs["K"] = 10 ** rng.uniform(6.0, 8.0)
        kwargs.update(
            geometry=geometry,
            T=rng.uniform(0.01, 1.0),
            g=g,
            sigma=g * rng.uniform(0.9, 1.1),
            v0=rng.uniform(-1.0, 1.0),
            z0=rng.uniform(-0.5, 0.5),
        )
        cases.append(kwargs)

    return cases


@pytest.mark.parametrize("name", ["SPT", "Bragg", "Raman"])
def test_unperturbed_mzi(name: str) -> None:
    """Test that the ideal Mach-Zehnder phase is −K(g − σ)T²."""
    scenario = make_scenario(**MECHANISMS[name], sigma=9.8, z0=0.1, v0=0.05)

    assert unperturbed_phase(scenario) == pytest.approx(
        -scenario.mechanism.K * (9.81 - 9.8) * 0.3**2, rel=1e-10
    )


@pytest.mark.parametrize("geometry", ["mzi", "butterfly"])
def test_unperturbed_vanishes(geometry: str) -> None:
    """Test that the ideal phase vanishes when the chirp matches gravity."""
    scenario = make_scenario(geometry=geometry, T=0.1, v0=0.05)

    assert abs(unperturbed_phase(scenario)) < 1e-12


def test_unperturbed_butterfly_ignores_chirp() -> None:
    """Test that the ideal butterfly phase does not depend on σ − g."""
    scenario = make_scenario(mechanism="Bragg", K=K_RB, geometry="butterfly", T=0.1, sigma=9.0)

    assert abs(unperturbed_phase(scenario)) < 1e-12


@pytest.mark.parametrize("name", ["SPT", "Bragg", "Raman", "E1M1"])
def test_mzi_contributions(name: str) -> None:
    """Test each Mach-Zehnder contribution against its closed form."""
    T = 0.3
    scenario = make_scenario(**MECHANISMS[name], sigma=9.8, z0=0.1, v0=0.02)
    mech = scenario.mechanism
    expected = closed_forms.mzi_contributions(
        mech.K, mech.delta_k, mech.k_A, 9.81, 9.8, T, _v_pi(scenario, T), scenario.constants.c
    )
    breakdown = total_phase(scenario)

    for term in ("unperturbed",) + FSL_TERMS:
        assert getattr(breakdown, term) == pytest.approx(
            expected[term], rel=1e-9, abs=1e-15
        ), term


@pytest.mark.parametrize("name", ["SPT", "Bragg", "Raman"])
def test_butterfly_contributions(name: str) -> None:
    """Test each butterfly contribution against its closed form."""
    T = 0.1
    scenario = make_scenario(**MECHANISMS[name], geometry="butterfly", T=T, sigma=9.0)
    mech = scenario.mechanism
    expected = closed_forms.butterfly_contributions(
        mech.K, mech.delta_k, mech.k_A, 9.81, 9.0, T, scenario.constants.c
    )
    breakdown = total_phase(scenario)

    assert abs(breakdown.unperturbed) < 1e-12
    for term in FSL_TERMS:
        assert getattr(breakdown, term) == pytest.approx(
            expected[term], rel=1e-9, abs=1e-15
        ), term


@pytest.mark.parametrize("kwargs", _random_cases("mzi", 100, seed=20240301))
def test_mzi_contributions_random(kwargs) -> None:
    """Test random Mach-Zehnder scenarios against the closed forms and both functionals."""
    scenario = make_scenario(**kwargs)
    mech, T = scenario.mechanism, kwargs["T"]
    expected = closed_forms.mzi_contributions(
        mech.K,
        mech.delta_k,
        mech.k_A,
        scenario.g,
        scenario.sigma,
        T,
        _v_pi(scenario, T),
        scenario.constants.c,
    )
    breakdown = total_phase(scenario)

    for term in ("unperturbed",) + FSL_TERMS:
        assert getattr(breakdown, term) == pytest.approx(
            expected[term], rel=1e-9, abs=1e-15
        ), term
    assert functional_difference(scenario, "A") == pytest.approx(
        functional_difference(scenario, "B"), rel=1e-9, abs=1e-15
    )


@pytest.mark.parametrize("kwargs", _random_cases("butterfly", 100, seed=20240302))
def test_butterfly_contributions_random(kwargs) -> None:
    """Test random butterfly scenarios against the closed forms and both functionals."""
    scenario = make_scenario(**kwargs)
    mech = scenario.mechanism
    expected = closed_forms.butterfly_contributions(
        mech.K,
        mech.delta_k,
        mech.k_A,
        scenario.g,
        scenario.sigma,
        kwargs["T"],
        scenario.constants.c,
    )
    breakdown = total_phase(scenario)

    assert abs(breakdown.unperturbed) < 1e-12
    for term in FSL_TERMS:
        assert getattr(breakdown, term) == pytest.approx(
            expected[term], rel=1e-9, abs=1e-15
        ), term
    assert functional_difference(scenario, "A") == pytest.approx(
        functional_difference(scenario, "B"), rel=1e-9, abs=1e-15
    )


@pytest.mark.parametrize("name", ["SPT", "Bragg"])
@pytest.mark.parametrize("T", [0.1, 0.3, 0.7])
def test_unperturbed_butterfly_vanishes(name: str, T: float) -> None:
    """Test that the ideal butterfly phase vanishes for any T, chirp and launch."""
    scenario = make_scenario(
        **MECHANISMS[name], geometry="butterfly", T=T, sigma=9.0, v0=0.1, z0=0.2
    )

    assert abs(unperturbed_phase(scenario)) < 1e-12


@pytest.mark.parametrize("name", ["Bragg", "Raman"])
def test_mzi_chirp_at_source_distance(name: str) -> None:
    """Test that the chirp contribution does not depend on the source distance."""
    T = 0.3
    near = make_scenario(**MECHANISMS[name], sigma=9.8, v0=0.02, L=1e-3)
    far = make_scenario(**MECHANISMS[name], sigma=9.8, v0=0.02, L=1.0)
    mech = far.mechanism
    expected = closed_forms.mzi_contributions(
        mech.K, mech.delta_k, mech.k_A, 9.81, 9.8, T, _v_pi(far, T), far.constants.c
    )

    assert total_phase(far).chirp == pytest.approx(expected["chirp"], rel=1e-9)
    assert total_phase(near).chirp == pytest.approx(total_phase(far).chirp, rel=1e-12)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"sigma": 9.8, "z0": 0.1, "v0": 0.05, "v_res": 0.01},
        {"mechanism": "Bragg", "K": K_RB, "sigma": 9.7, "v0": -0.02},
        {"mechanism": "Bragg", "K": K_RB, "delta_k": 4e-4, "v0": 0.03},
        {"mechanism": "Raman", "K": K_RB, "omega_A": OMEGA_HFS, "z0": -0.05},
        {"mechanism": "E1M1", "K": 0.0, "omega_A": OMEGA_CLOCK, "v0": 0.3},
        {"geometry": "butterfly", "T": 0.1, "v0": 0.2, "z0": 0.3},
    ],
)
def test_functional_forms_agree(kwargs) -> None:
    """Test that the pulse-timing and split forms give the same arm difference."""
    scenario = make_scenario(**kwargs)

    assert functional_difference(scenario, "A") == pytest.approx(
        functional_difference(scenario, "B"), rel=1e-9, abs=1e-15
    )


def test_functional_difference_is_arm_difference() -> None:
    """Test that the arm difference matches the per-arm phases."""
    scenario = make_scenario(mechanism="Bragg", K=K_RB, sigma=9.7, v0=0.03)

    difference_a = arm_phase_functional_a(scenario, 1) - arm_phase_functional_a(scenario, 2)
    difference_b = arm_phase_functional_b(scenario, 1) - arm_phase_functional_b(scenario, 2)

    assert difference_a == pytest.approx(
        functional_difference(scenario, "A"), rel=1e-9, abs=1e-12
    )
    assert difference_b == pytest.approx(
        functional_difference(scenario, "B"), rel=1e-9, abs=1e-12
    )
    assert sum(arm_terms_b(scenario, 1).values()) == pytest.approx(
        arm_phase_functional_b(scenario, 1), rel=1e-12
    )
    assert set(arm_terms_b(scenario, 2)) == set(FSL_TERMS)


def test_functional_difference_invalid_form() -> None:
    """Test that only the two forms exist."""
    with pytest.raises(ValueError):
        functional_difference(make_scenario(), "C")


def test_untruncated_form_converges() -> None:
    """Test that the second-order pieces fade relative to the first order as c grows."""
    gaps = []
    for c in (1e6, 1e7):
        scenario = make_scenario(sigma=9.7, v0=0.5, z0=0.3, c=c)
        first = functional_difference(scenario, "B")
        full = functional_difference(scenario, "A", truncate=False)
        gaps.append(abs(full - first) / abs(first))

    assert gaps[0] < 1e-4
    assert gaps[1] <= 0.2 * gaps[0] + 1e-15


def test_first_order_scaling() -> None:
    """Test that the finite-speed contributions scale as 1/c."""
    c = 299792458.0
    slow = total_phase(make_scenario(v0=0.01, c=c))
    fast = total_phase(make_scenario(v0=0.01, c=2 * c))

    assert slow.perturbation == pytest.approx(2 * fast.perturbation, rel=1e-6)
    assert slow.time_dilation == pytest.approx(2 * fast.time_dilation, rel=1e-6)


def test_null_geometry() -> None:
    """Test that identically kicked arms give exactly zero phase."""
    scenario = make_scenario(pulses=[(0.0, 1, 1), (0.3, -1, -1)], geometry="null", v0=0.1)
    breakdown = total_phase(scenario)

    assert breakdown.total == 0.0
    for term in PHASE_TERMS:
        assert getattr(breakdown, term) == 0.0


def test_open_geometry() -> None:
    """Test that open geometries are refused."""
    scenario = make_scenario(pulses=[(0.0, 1, 0), (0.3, -1, 0)], geometry="open")

    with pytest.raises(OpenGeometryError):
        total_phase(scenario)

    with pytest.raises(OpenGeometryError):
        unperturbed_phase(scenario)


def test_e1m1_mzi_phase() -> None:
    """Test the recoilless Mach-Zehnder phase 2k_A gT²v_π/c."""
    T = 1.0
    scenario = make_scenario(
        mechanism="E1M1", K=0.0, omega_A=OMEGA_CLOCK, sigma=0.0, T=T, v0=0.01
    )
    breakdown = total_phase(scenario)
    v_pi = 0.01 - 9.81 * T

    assert abs(breakdown.unperturbed) < 1e-12
    assert breakdown.perturbation == pytest.approx(
        closed_forms.e1m1_mzi_phase(
            scenario.mechanism.k_A, 9.81, T, v_pi, scenario.constants.c
        ),
        rel=1e-9,
    )


@pytest.mark.parametrize(
    "kwargs",
    [
        {},
        {"v0": 0.01, "v_res": 0.03},
        {"mechanism": "Bragg", "K": K_RB, "T": 0.2, "v0": 0.01},
        {
            "mechanism": "Raman",
            "K": K_RB,
            "omega_A": OMEGA_HFS,
            "T": 0.2,
            "v0": 0.01,
        },
        {"geometry": "butterfly", "T": 0.1},
    ],
)
def test_total_phase_reference(kwargs) -> None:
    """Test the total phase against the closed form of resonant scenarios."""
    scenario = make_scenario(**kwargs)
    reference = closed_forms.reference_phase(scenario)

    assert reference is not None
    assert total_phase(scenario).total == pytest.approx(reference, rel=1e-6)


def test_first_order_coefficient() -> None:
    """Test that a₁ is c times the summed perturbation."""
    scenario = make_scenario(v0=0.02)

    assert first_order_coefficient(scenario) == pytest.approx(
        total_phase(scenario).perturbation * scenario.constants.c, rel=1e-12
    )


def test_compensation_phase() -> None:
    """Test the timing-shift contributions of a delayed mirror pulse."""
    delay = 1e-9
    T = 0.3
    scenario = make_scenario(
        v0=0.02, compensation={"enabled": True, "delay_s": delay}
    )
    mech, field = scenario.mechanism, scenario.field
    v_pi = _v_pi(scenario, T)
    terms = compensation_phase(scenario)

    assert terms["ts_clock"] == pytest.approx(
        2 * (field.delta_omega - mech.omega_A) * delay, rel=1e-9
    )
    assert terms["ts_doppler"] == pytest.approx(
        2 * (mech.delta_k - mech.k_A - mech.K) * v_pi * delay, rel=1e-9
    )
    assert terms["ts_chirp"] == pytest.approx(
        -2 * mech.K * field.sigma * T * delay, rel=1e-9
    )


def test_compensation_phase_without_delay() -> None:
    """Test that no delay means no timing-shift phase."""
    assert compensation_phase(make_scenario()) == {
        "ts_clock": 0.0,
        "ts_doppler": 0.0,
        "ts_chirp": 0.0,
    }

    zero = make_scenario(compensation={"enabled": True, "delay_s": 0.0})
    assert all(value == 0.0 for value in compensation_phase(zero).values())


def test_compensation_requires_mzi() -> None:
    """Test that timing shifts are refused outside Mach-Zehnder sequences."""
    scenario = make_scenario(
        geometry="butterfly", T=0.1, compensation={"enabled": True, "delay_s": 1e-9}
    )

    with pytest.raises(ScenarioValidationError):
        total_phase(scenario)


@pytest.mark.parametrize(
    "sigma, Gamma", [(9.81, 0.0), (9.8, 0.0), (9.81, 0.5)]
)
def test_compensated_spt_phase(sigma: float, Gamma: float) -> None:
    """Test the compensated single-photon phase in units of KgT²."""
    T, g, v0 = 0.3, 9.81, 0.05
    scenario = make_scenario(
        sigma=sigma, v0=v0, compensation={"enabled": True, "Gamma_m_s2": Gamma}
    )
    K, c = scenario.mechanism.K, scenario.constants.c

    assert total_phase(scenario).total / (K * g * T**2) == pytest.approx(
        closed_forms.compensated_spt_ratio(g, sigma, T, Gamma, v0, 0.0, c), rel=1e-6
    )


def test_compensation_removes_launch_velocity() -> None:
    """Test that compensation suppresses the launch-velocity dependence."""
    compensation = {"enabled": True, "Gamma_m_s2": 0.0}

    def spread(**kwargs) -> float:
        return abs(
            total_phase(make_scenario(v0=0.1, **kwargs)).total
            - total_phase(make_scenario(v0=-0.1, **kwargs)).total
        )

    assert spread(compensation=compensation) < 1e-6 * spread()
