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
"""Tests the pulse schedules, state responses and closure."""

import pytest

from fsl_interferometry.exceptions import ScenarioValidationError
from fsl_interferometry.geometry import (
    GROUND_RESPONSE,
    build_butterfly,
    build_geometry,
    build_mzi,
    check_closure,
    is_mzi,
    response,
    response_levels,
)
from fsl_interferometry.light_field import recoil_velocity
from fsl_interferometry.models import (
    InitialConditions,
    Mechanism,
    MechanismKind,
    PhysicalConstants,
)
from fsl_interferometry.utils import precise_context

CONSTS = PhysicalConstants(c=299792458.0, hbar=1.054571817e-34)
M_BAR = 1.443e-25
K = 9001698.14782


@pytest.fixture
def mechanism() -> Mechanism:
    """Single-photon mechanism."""
    return Mechanism.build(MechanismKind.spt, K, K, K * CONSTS.c, CONSTS)


def test_build_mzi() -> None:
    """Test the Mach-Zehnder schedule."""
    geom = build_mzi(0.3)

    assert geom.times == [0.0, 0.3, 0.6]
    assert geom.weights(1) == [1, -1, 0]
    assert geom.weights(2) == [0, 1, -1]
    assert geom.total_time == 0.6
    assert geom.label == "mzi"
    assert is_mzi(geom)


def test_build_butterfly() -> None:
    """Test the butterfly schedule."""
    geom = build_butterfly(0.1)

    assert geom.times == pytest.approx([0.0, 0.1, 0.3, 0.4])
    assert geom.weights(1) == [1, -1, 1, -1]
    assert geom.weights(2) == [0, 1, -1, 0]
    assert not is_mzi(geom)


def test_exact_schedule() -> None:
    """Test that built-in times are formed as multiples of T in the context."""
    ctx = precise_context(40)
    geom = build_butterfly(0.1)
    times, end = geom.exact_schedule(ctx)

    assert geom.time_multiples == (0, 1, 3, 4, 4)
    assert times[2] == 3 * ctx.mpf(0.1)
    assert end == 4 * ctx.mpf(0.1)
    assert times[3] - times[2] == times[1] - times[0]
    assert geom.exact_schedule() == (geom.times, geom.total_time)

    custom = build_geometry([(0.0, 1, 0), (0.1, -1, 1), (0.2, 0, -1)], 0.2)
    custom_times, custom_end = custom.exact_schedule(ctx)

    assert custom.time_multiples is None
    assert custom_times == [ctx.mpf(0.0), ctx.mpf(0.1), ctx.mpf(0.2)]
    assert custom_end == ctx.mpf(0.2)

@pytest.mark.parametrize("T", [0.0, -0.1])
def test_interrogation_time_must_be_positive(T: float) -> None:
    """Test that the interrogation time must be positive."""
    with pytest.raises(ScenarioValidationError):
        build_mzi(T)

    with pytest.raises(ScenarioValidationError):
        build_butterfly(T)


def test_is_mzi_custom() -> None:
    """Test that a relabeled Mach-Zehnder schedule is recognized."""
    geom = build_geometry([(0.1, 1, 0), (0.3, -1, 1), (0.5, 0, -1)], 0.5, "shifted")
    assert is_mzi(geom)

    uneven = build_geometry([(0.0, 1, 0), (0.2, -1, 1), (0.5, 0, -1)], 0.5)
    assert not is_mzi(uneven)


def test_response() -> None:
    """Test the state response of both Mach-Zehnder arms."""
    geom = build_mzi(0.3)

    assert response(geom, 1, -0.1).lambda_ == GROUND_RESPONSE
    assert response(geom, 1, 0.1).lambda_ == 0.5
    assert response(geom, 1, 0.5).lambda_ == -0.5
    assert response(geom, 1, 1.0).lambda_ == -0.5

    at_splitter = response(geom, 1, 0.0)
    assert at_splitter.lambda_ == 0.0
    assert at_splitter.is_discontinuity

    untouched = response(geom, 2, 0.0)
    assert untouched.lambda_ == -0.5
    assert not untouched.is_discontinuity

    assert response(geom, 2, 0.3).lambda_ == 0.0
    assert response(geom, 2, 0.4).lambda_ == 0.5


def test_response_levels() -> None:
    """Test the response on the intervals after each pulse."""
    assert response_levels(build_mzi(0.3), 1) == (0.5, -0.5, -0.5)
    assert response_levels(build_mzi(0.3), 2) == (-0.5, 0.5, -0.5)
    assert response_levels(build_butterfly(0.1), 1) == (0.5, -0.5, 0.5, -0.5)


@pytest.mark.parametrize("geom", [build_mzi(0.3), build_butterfly(0.1)])
def test_closure(geom, mechanism: Mechanism) -> None:
    """Test that the standard geometries close."""
    ic = InitialConditions(z0=0.2, v0=0.05)
    report = check_closure(geom, mechanism, M_BAR, ic, 9.81, CONSTS)

    assert report.closed
    assert abs(report.delta_z) < 1e-20
    assert abs(report.delta_v) < 1e-20


def test_open_geometry(mechanism: Mechanism) -> None:
    """Test that a split that is never recombined is reported open."""
    T = 0.3
    geom = build_geometry([(0.0, 1, 0), (T, -1, 0)], T, "open")
    report = check_closure(geom, mechanism, M_BAR, InitialConditions(), 9.81, CONSTS)

    assert not report.closed
    assert report.delta_z == pytest.approx(recoil_velocity(K, M_BAR, CONSTS) * T, rel=1e-9)
    assert report.delta_v == pytest.approx(0.0, abs=1e-20)


def test_null_geometry(mechanism: Mechanism) -> None:
    """Test that identically kicked arms close exactly."""
    geom = build_geometry([(0.0, 1, 1), (0.3, -1, -1)], 0.3, "null")
    report = check_closure(geom, mechanism, M_BAR, InitialConditions(v0=0.1), 9.81, CONSTS)

    assert report.closed
    assert report.delta_z == 0.0
    assert report.delta_v == 0.0
