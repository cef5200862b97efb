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
"""Tests the arm trajectories and interaction times."""

import pytest

from fsl_interferometry.exceptions import CausalityError
from fsl_interferometry.geometry import build_mzi
from fsl_interferometry.light_field import recoil_velocity
from fsl_interferometry.models import (
    AtomSpecies,
    InitialConditions,
    Mechanism,
    MechanismKind,
    PhysicalConstants,
)
from fsl_interferometry.trajectory import (
    ArmTrajectory,
    TrajectorySegment,
    interaction_delay,
    propagate_idealized,
    solve_exact_interaction_time,
    velocity_symmetric,
)
from fsl_interferometry.utils import log_log_slope, precise_context

CONSTS = PhysicalConstants(c=299792458.0, hbar=1.054571817e-34)
M_BAR = 1.443e-25
K = 9001698.14782
T = 0.3
G = 9.81
V0 = 0.1


@pytest.fixture
def arms():
    """Unperturbed Mach-Zehnder arms."""
    mech = Mechanism.build(MechanismKind.spt, K, K, K * CONSTS.c, CONSTS)
    species = AtomSpecies(m_bar=M_BAR, omega_A=mech.omega_A)
    return propagate_idealized(
        build_mzi(T), mech, species, InitialConditions(z0=0.2, v0=V0), G, CONSTS
    )


@pytest.fixture
def v_K() -> float:
    """Recoil velocity."""
    return recoil_velocity(K, M_BAR, CONSTS)


def test_segment() -> None:
    """Test the parabola and its integrals."""
    segment = TrajectorySegment(start_time=0.0, z=1.0, v=2.0, g=10.0)

    assert segment.position(1.0) == pytest.approx(-2.0)
    assert segment.velocity(1.0) == pytest.approx(-8.0)
    assert segment.integral_z(0.0, 1.0) == pytest.approx(1 / 3)
    assert segment.integral_v2(0.0, 1.0) == pytest.approx(52 / 3)


def test_propagate_idealized(arms, v_K: float) -> None:
    """Test the kicks of both Mach-Zehnder arms."""
    arm1, arm2 = arms

    assert arm1.velocity(0.1) == pytest.approx(V0 + v_K - G * 0.1)
    assert arm2.velocity(0.1) == pytest.approx(V0 - G * 0.1)
    assert arm1.velocity(0.4) == pytest.approx(V0 - G * 0.4)
    assert arm2.velocity(0.4) == pytest.approx(V0 + v_K - G * 0.4)
    assert arm1.position(2 * T) == pytest.approx(arm2.position(2 * T), abs=1e-12)
    assert arm1.kick_times == (0.0, T)
    assert arm2.kick_times == (T, 2 * T)


def test_velocity_symmetric(arms, v_K: float) -> None:
    """Test that kicks are regularized by the mean of both sides."""
    arm1, arm2 = arms
    v_pi = V0 - G * T + v_K / 2

    assert velocity_symmetric(arm1, T) == pytest.approx(v_pi)
    assert velocity_symmetric(arm2, T) == pytest.approx(v_pi)
    assert velocity_symmetric(arm1, 0.0) == pytest.approx(V0 + v_K / 2)
    assert velocity_symmetric(arm1, 0.1) == arm1.velocity(0.1)


def test_kicks_and_span(arms) -> None:
    """Test kick lookup, pieces and span checks."""
    arm1, _ = arms

    assert arm1.is_kick(0.0)
    assert arm1.is_kick(T)
    assert not arm1.is_kick(0.1)
    assert [(lo, hi) for _, _, lo, hi in arm1.pieces(0.0, 2 * T)] == [(0.0, T), (T, 2 * T)]

    with pytest.raises(ValueError):
        arm1.position(2 * T + 0.1)

    with pytest.raises(ValueError):
        arm1.position(-0.1)

    with pytest.raises(ValueError):
        arm1.with_kick(0.1, 1.0)


def test_interaction_delay(arms) -> None:
    """Test the idealized delay of a pulse."""
    arm1, _ = arms
    z = arm1.position(T)
    v = velocity_symmetric(arm1, T)

    assert interaction_delay(arm1, T, CONSTS) == pytest.approx(
        z / CONSTS.c * (1 + v / CONSTS.c), rel=1e-15
    )


def test_exact_interaction_time_at_rest() -> None:
    """Test that the front reaches a resting atom z/c̃ after emission."""
    arm = ArmTrajectory.free_fall(0.0, 1.0, 0.0, 0.0)
    t_star = solve_exact_interaction_time(arm, 0.1, 1e5)

    assert t_star == pytest.approx(0.1 + 1e-5, rel=1e-14)


def test_exact_interaction_time_moving() -> None:
    """Test the interaction time of a uniformly moving atom."""
    c_tilde = 1e5
    arm = ArmTrajectory.free_fall(0.0, 0.0, 1.0, 0.0)
    expected = 0.1 / (1 - 1 / c_tilde)

    assert solve_exact_interaction_time(arm, 0.1, c_tilde) == pytest.approx(
        expected, rel=1e-14
    )

    ctx = precise_context(40)
    ctx_arm = ArmTrajectory.free_fall(ctx.mpf(0), ctx.mpf(0), ctx.mpf(1), ctx.mpf(0))
    polished = solve_exact_interaction_time(ctx_arm, 0.1, c_tilde, ctx=ctx)
    exact = ctx.mpf(0.1) / (1 - 1 / ctx.mpf(c_tilde))

    assert abs(polished - exact) < ctx.mpf("1e-30")


def test_exact_interaction_time_falling() -> None:
    """Test that the root lies on the free-fall parabola."""
    c_tilde = 1e4
    arm = ArmTrajectory.free_fall(0.0, 0.5, 2.0, G)
    t_star = solve_exact_interaction_time(arm, 0.2, c_tilde)

    assert t_star - 0.2 == pytest.approx(arm.position(t_star) / c_tilde, rel=1e-9)


def test_interaction_delay_third_order() -> None:
    """Test that the first-order delay misses the exact one by a 1/c³ term."""
    ctx = precise_context(40)
    mpf = ctx.mpf
    # z = 0.5 m and v = 10 m/s at the pulse time.
    v0 = 10 + mpf(G)
    z0 = mpf("0.5") - v0 + mpf(G) / 2
    arm = ArmTrajectory.free_fall(mpf(0), z0, v0, mpf(G))

    c_values = [1e4, 1e5, 1e6, 1e7]
    gaps = []
    for c in c_values:
        consts = PhysicalConstants(c=c, hbar=CONSTS.hbar)
        exact = solve_exact_interaction_time(arm, 1.0, c, ctx=ctx) - 1
        gaps.append(float(exact - interaction_delay(arm, mpf(1), consts, ctx)))

    assert log_log_slope(c_values, gaps) == pytest.approx(-3.0, abs=0.05)
    assert gaps[-1] == pytest.approx((100 * 0.5 - G * 0.25 / 2) / 1e21, rel=1e-3)

def test_exact_interaction_time_causality() -> None:
    """Test that acausal interactions are rejected."""
    below = ArmTrajectory.free_fall(0.0, -1.0, 0.0, 0.0)
    with pytest.raises(CausalityError) as error:
        solve_exact_interaction_time(below, 0.0, 1e5)
    assert error.value.c_tilde == 1e5

    short = ArmTrajectory.free_fall(0.0, 1.0, 0.0, 0.0, end_time=0.05)
    with pytest.raises(CausalityError):
        solve_exact_interaction_time(short, 0.1, 1e5)
