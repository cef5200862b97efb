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
"""Piecewise-parabolic arm trajectories and interaction times of delayed pulses."""

import bisect
from dataclasses import dataclass, replace
from typing import Any, Iterator, Optional, Tuple

import mpmath
from scipy.optimize import brentq

from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import CausalityError
from fsl_interferometry.models import (
    AtomSpecies,
    Geometry,
    InitialConditions,
    Mechanism,
    PhysicalConstants,
)
from fsl_interferometry.utils import lift


@dataclass(frozen=True)
class TrajectorySegment:
    """Free fall from (z, v) at `start_time` with acceleration −g."""

    start_time: Any
    z: Any
    v: Any
    g: Any

    def position(self, t: Any) -> Any:
        """Height at time t."""
        tau = t - self.start_time
        return self.z + self.v * tau - self.g * tau**2 / 2

    def velocity(self, t: Any) -> Any:
        """Velocity at time t."""
        return self.v - self.g * (t - self.start_time)

    def integral_v2(self, a: Any, b: Any) -> Any:
        """∫ v² dt over [a, b]."""

        def primitive(tau):
            return self.v**2 * tau - self.v * self.g * tau**2 + self.g**2 * tau**3 / 3

        return primitive(b - self.start_time) - primitive(a - self.start_time)

    def integral_z(self, a: Any, b: Any) -> Any:
        """∫ z dt over [a, b]."""

        def primitive(tau):
            return self.z * tau + self.v * tau**2 / 2 - self.g * tau**3 / 6

        return primitive(b - self.start_time) - primitive(a - self.start_time)


@dataclass(frozen=True)
class ArmTrajectory:
    """
    Classical path of one arm.

    Segments start at the kick times; position is continuous and the velocity jumps by
    the kick velocity. `end_time=None` leaves the last segment open, which is how the
    exact propagation grows an arm event by event.
    """

    segments: Tuple[TrajectorySegment, ...]
    kick_times: Tuple[Any, ...] = ()
    kick_velocities: Tuple[Any, ...] = ()
    end_time: Optional[Any] = None

    @classmethod
    def free_fall(
        cls, t0: Any, z0: Any, v0: Any, g: Any, end_time: Optional[Any] = None
    ) -> "ArmTrajectory":
        """Single parabola starting at t0."""
        return cls(segments=(TrajectorySegment(t0, z0, v0, g),), end_time=end_time)

    @property
    def start_time(self) -> Any:
        """Start of the trajectory."""
        return self.segments[0].start_time

    def _index(self, t: Any) -> int:
        if t < self.start_time or (self.end_time is not None and t > self.end_time):
            raise ValueError(
                f"t={t} is outside the trajectory span [{self.start_time},"
                f" {self.end_time}]."
            )

        starts = [segment.start_time for segment in self.segments]
        return bisect.bisect_right(starts, t) - 1

    def segment_at(self, t: Any) -> TrajectorySegment:
        """Segment in force at t (the post-kick one at a kick time)."""
        return self.segments[self._index(t)]

    def position(self, t: Any) -> Any:
        """Height at t."""
        return self.segment_at(t).position(t)

    def velocity(self, t: Any) -> Any:
        """Right-sided velocity at t."""
        return self.segment_at(t).velocity(t)

    def velocity_left(self, t: Any) -> Any:
        """Left-sided velocity at t."""
        index = self._index(t)
        if index > 0 and self.segments[index].start_time == t:
            index -= 1

        return self.segments[index].velocity(t)

    def is_kick(self, t: Any) -> bool:
        """Whether t is one of the kick times."""
        index = self._index(t)
        return index > 0 and self.segments[index].start_time == t

    def pieces(self, a: Any, b: Any) -> Iterator[Tuple[int, TrajectorySegment, Any, Any]]:
        """Yield (index, segment, start, stop) covering [a, b] in order."""
        for index, segment in enumerate(self.segments):
            stop = (
                self.segments[index + 1].start_time
                if index + 1 < len(self.segments)
                else b
            )
            lo = max(a, segment.start_time)
            hi = min(b, stop)
            if hi > lo:
                yield index, segment, lo, hi

    def with_kick(self, t: Any, dv: Any) -> "ArmTrajectory":
        """Return the trajectory with a velocity kick dv applied at t."""
        if self.kick_times and t <= self.kick_times[-1]:
            raise ValueError(
                f"Kicks must be applied in causal order, got {t} after"
                f" {self.kick_times[-1]}."
            )

        segment = self.segment_at(t)
        kicked = TrajectorySegment(t, segment.position(t), segment.velocity(t) + dv, segment.g)

        return replace(
            self,
            segments=self.segments + (kicked,),
            kick_times=self.kick_times + (t,),
            kick_velocities=self.kick_velocities + (dv,),
        )


def propagate_idealized(
    geom: Geometry,
    mech: Mechanism,
    species: AtomSpecies,
    ic: InitialConditions,
    g: float,
    consts: PhysicalConstants,
    ctx: Optional[mpmath.MPContext] = None,
) -> Tuple[ArmTrajectory, ArmTrajectory]:
    """
    Unperturbed arm trajectories with kicks weight·ħK/m̄ at the pulse times.

    Args:
        geom: Pulse schedule.
        mech: Diffraction mechanism (provides K).
        species: Atom (provides m̄).
        ic: Launch state at t = 0.
        g: Gravitational acceleration in m/s².
        consts: Physical constants.
        ctx: Optional mpmath context for extended precision.

    Returns:
        The trajectories of arm 1 and arm 2, spanning [0, total_time].
    """
    hbar, K, m_bar = lift(ctx, consts.hbar, mech.K, species.m_bar)
    v_K = hbar * K / m_bar
    z0, v0, g_ = lift(ctx, ic.z0, ic.v0, g)
    times, end = geom.exact_schedule(ctx)

    arms = []
    for arm_index in (1, 2):
        arm = ArmTrajectory.free_fall(lift(ctx, 0)[0], z0, v0, g_, end_time=end)
        for T, weight in zip(times, geom.weights(arm_index)):
            if weight != 0:
                arm = arm.with_kick(T, weight * v_K)
        arms.append(arm)

    return arms[0], arms[1]


def velocity_symmetric(arm: ArmTrajectory, t: Any) -> Any:
    """
    Velocity with kicks regularized by the mean of the one-sided limits.

    Raises:
        ValueError: If t is outside the trajectory span.
    """
    if arm.is_kick(t):
        return (arm.velocity_left(t) + arm.velocity(t)) / 2

    return arm.velocity(t)


def interaction_delay(
    arm: ArmTrajectory,
    T_l: Any,
    consts: PhysicalConstants,
    ctx: Optional[mpmath.MPContext] = None,
) -> Any:
    """Delay ΔT = z/c·(1 + v/c) of the pulse nominally at T_l, symmetric velocity."""
    (c,) = lift(ctx, consts.c)
    z = arm.position(T_l)
    v = velocity_symmetric(arm, T_l)

    return z / c * (1 + v / c)


def solve_exact_interaction_time(
    arm: ArmTrajectory,
    T_l: float,
    c_tilde: float,
    rtol: Optional[float] = None,
    ctx: Optional[mpmath.MPContext] = None,
) -> Any:
    """
    Time t* at which the front of the pulse emitted at T_l reaches the atom.

    Solves t − T_l − z(t)/c̃ = 0 by bracketing over the trajectory; the function is
    strictly increasing while the atom is slower than c̃, so the root is unique. With a
    context the bracketed root is polished on its parabola in extended precision.

    Args:
        arm: Trajectory so far (may be open-ended).
        T_l: Nominal pulse time in s.
        c_tilde: Light speed in m/s.
        rtol: Relative tolerance of the bracketing.
        ctx: Optional mpmath context for the polished root.

    Returns:
        t* as a float, or as a context number when `ctx` is given.

    Raises:
        CausalityError: If the front reaches the atom outside the trajectory span.
    """
    rtol = settings.root_rtol if rtol is None else rtol

    def front_lag(t: float) -> float:
        return float(t - T_l - arm.position(t) / c_tilde)

    lo = float(arm.start_time)
    if front_lag(lo) > 0:
        raise CausalityError(
            f"The pulse at T={T_l} s reaches the atom before t={lo} s at"
            f" c_tilde={c_tilde} m/s.",
            c_tilde,
        )

    if arm.end_time is not None:
        hi = float(arm.end_time)
    else:
        hi = max(float(T_l), lo)
        step = max(abs(float(arm.position(hi))) / c_tilde, 1e-12)
        for _ in range(200):
            if front_lag(hi) >= 0:
                break
            hi += step
            step *= 2
    if front_lag(hi) < 0:
        raise CausalityError(
            f"No interaction of the pulse at T={T_l} s within the trajectory span at"
            f" c_tilde={c_tilde} m/s.",
            c_tilde,
        )

    root = brentq(front_lag, lo, hi, xtol=1e-300, rtol=rtol)
    if ctx is None:
        return root

    segment = arm.segment_at(ctx.mpf(root))
    c, T = ctx.mpf(c_tilde), ctx.mpf(T_l)
    a = segment.g / (2 * c)
    b = 1 - segment.v / c
    offset = segment.start_time - T - segment.z / c
    tau = -2 * offset / (b + ctx.sqrt(b**2 - 4 * a * offset))

    return segment.start_time + tau
