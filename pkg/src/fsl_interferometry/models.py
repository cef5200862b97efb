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
"""Models module of the FSL Interferometry engine."""

import math
from enum import Enum
from typing import Any, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fsl_interferometry.config import settings

# Relative slack for quantities that are products of stored floats.
_REL_TOL = 1e-12


class PhysicalConstants(BaseModel):
    """Speed of light and reduced Planck constant used by one evaluation."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    c: float
    hbar: float

    @field_validator("c", "hbar")
    def constant_must_be_positive(cls, value: float):  # noqa: B902, N805
        """Check that the constant is strictly positive."""
        if value <= 0:
            raise ValueError(f"Physical constants must be positive, got {value}.")

        return value

    @classmethod
    def from_settings(cls) -> "PhysicalConstants":
        """Return the constants configured in the environment."""
        return cls(c=settings.speed_of_light, hbar=settings.hbar)


class BeamDirection(str, Enum):
    """Propagation direction of a laser beam along the vertical axis."""

    up = "up"
    down = "down"

    @property
    def sign(self) -> int:
        """Return +1 for the up beam and -1 for the down beam."""
        return 1 if self is BeamDirection.up else -1


class LaserBeam(BaseModel):
    """One chirped beam, with the constant of its phase ansatz stored as `phi0`."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    direction: BeamDirection
    omega: float
    k: float
    sigma: float
    phi0: float = 0.0
    source_position: float
    t_init: float = 0.0

    @model_validator(mode="after")
    def source_must_match_direction(self) -> "LaserBeam":
        """Up beams start below the origin, down beams above it."""
        if self.direction.sign * self.source_position > 0:
            raise ValueError(
                f"A {self.direction.value} beam must be sourced at"
                f" {'-' if self.direction is BeamDirection.up else '+'}L, got"
                f" {self.source_position}."
            )
        if self.omega * self.k < 0:
            raise ValueError("omega and k must share their sign.")

        return self

    @classmethod
    def from_frequency(
        cls,
        direction: BeamDirection,
        omega: float,
        chirp: float,
        L: float,
        consts: PhysicalConstants,
        phi0: float = 0.0,
        t_init: float = 0.0,
    ) -> "LaserBeam":
        """
        Build a beam from its frequency, deriving k = ω/c and σ_± = ∓σ.

        Args:
            direction: Propagation direction.
            omega: Angular frequency in rad/s.
            chirp: Common chirp rate σ in m/s², shared by both beams.
            L: Distance of the source from the origin in m.
            consts: Physical constants.
            phi0: Offset phase in rad.
            t_init: Initiation time in s.

        Returns:
            The beam.
        """
        return cls(
            direction=direction,
            omega=omega,
            k=omega / consts.c,
            sigma=-direction.sign * chirp,
            phi0=phi0,
            source_position=-direction.sign * abs(L),
            t_init=t_init,
        )

    @property
    def L(self) -> float:
        """Distance between the source and the origin."""
        return abs(self.source_position)

    def flipped(self) -> "LaserBeam":
        """Return the beam with ω, k and φ sign-flipped (recoilless pairing)."""
        return self.model_copy(
            update={"omega": -self.omega, "k": -self.k, "phi0": -self.phi0}
        )


class EffectiveField(BaseModel):
    """Two-beam phase Φ_L + δΦ seen by the atom."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    Phi_off: float = 0.0
    K: float
    delta_omega: float
    delta_k: float
    sigma: float
    t_init_retarded: float = 0.0


class MechanismKind(str, Enum):
    """Diffraction mechanisms."""

    spt = "SPT"
    bragg = "Bragg"
    raman = "Raman"
    e1m1 = "E1M1"


class Mechanism(BaseModel):
    """Diffraction mechanism with its effective wave vectors and internal splitting."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    kind: MechanismKind
    K: float
    delta_k: float
    omega_A: float
    k_A: float

    @model_validator(mode="after")
    def mechanism_constraints(self) -> "Mechanism":
        """Enforce the resonance identities of each mechanism."""
        if self.K < 0 or self.omega_A < 0:
            raise ValueError("K and omega_A must be non-negative.")

        if self.kind is MechanismKind.spt:
            if not math.isclose(self.K, self.delta_k, rel_tol=_REL_TOL):
                raise ValueError(
                    f"SPT requires K = delta_k, got {self.K} and {self.delta_k}."
                )
            # omega_A / delta_omega == k_A / delta_k
            if abs(self.k_A - self.delta_k) > 1e-3 * self.delta_k:
                raise ValueError("SPT requires omega_A close to delta_omega.")
        elif self.kind is MechanismKind.bragg:
            if self.omega_A != 0 or self.k_A != 0:
                raise ValueError("Bragg diffraction keeps the internal state.")
        elif self.kind is MechanismKind.e1m1:
            if self.K != 0:
                raise ValueError(f"E1M1 transitions are recoilless, got K={self.K}.")
            if not math.isclose(self.delta_k, self.k_A, rel_tol=_REL_TOL):
                raise ValueError("E1M1 requires delta_k = k_A.")
        elif not 0 < self.delta_k < 1e-2 * self.K:
            raise ValueError(
                f"Raman requires 0 < delta_k << K, got delta_k={self.delta_k},"
                f" K={self.K}."
            )

        return self

    @classmethod
    def build(
        cls,
        kind: MechanismKind,
        K: float,
        delta_k: float,
        omega_A: float,
        consts: PhysicalConstants,
    ) -> "Mechanism":
        """Build a mechanism, deriving k_A = ω_A/c."""
        return cls(
            kind=kind, K=K, delta_k=delta_k, omega_A=omega_A, k_A=omega_A / consts.c
        )

    def delta_omega(self, consts: PhysicalConstants) -> float:
        """Return Δω = c·Δk."""
        return self.delta_k * consts.c


class PulseEnvelope(BaseModel):
    """Gaussian spectral envelope of a pulse."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    sigma_omega: float = Field(ge=0)
    amplitude: float = 1.0


class PulseEvent(BaseModel):
    """Pulse time with its signed Dirac weights on both arms."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    time: float
    weight_arm1: int
    weight_arm2: int

    @field_validator("weight_arm1", "weight_arm2")
    def weight_must_be_valid(cls, value: int):  # noqa: B902, N805
        """Check that the weight is -1, 0 or +1."""
        if value not in {-1, 0, 1}:
            raise ValueError(f"Pulse weights must be -1, 0 or +1, got {value}.")

        return value

    @model_validator(mode="after")
    def one_weight_must_be_nonzero(self) -> "PulseEvent":
        """A pulse must address at least one arm."""
        if self.weight_arm1 == 0 and self.weight_arm2 == 0:
            raise ValueError(f"Pulse at t={self.time} addresses no arm.")

        return self

    def weight(self, arm: int) -> int:
        """Return the weight on arm 1 or 2."""
        if arm not in (1, 2):
            raise ValueError(f"Arms are numbered 1 and 2, got {arm}.")

        return self.weight_arm1 if arm == 1 else self.weight_arm2


class Geometry(BaseModel):
    """Pulse schedule of an interferometer."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    pulses: Tuple[PulseEvent, ...]
    total_time: float
    label: str = "custom"
    # Built-in sequences keep their times as integer multiples of T.
    interrogation_time: Optional[float] = Field(default=None, gt=0)
    time_multiples: Optional[Tuple[int, ...]] = None

    @model_validator(mode="after")
    def schedule_must_be_valid(self) -> "Geometry":
        """Check ordering and the state bookkeeping of both arms."""
        if not self.pulses:
            raise ValueError("A geometry needs at least one pulse.")

        if (self.interrogation_time is None) != (self.time_multiples is None):
            raise ValueError("interrogation_time and time_multiples go together.")
        if self.time_multiples is not None:
            if len(self.time_multiples) != len(self.pulses) + 1:
                raise ValueError(
                    "time_multiples holds one entry per pulse plus the total time."
                )
            expected = [n * self.interrogation_time for n in self.time_multiples]
            actual = [pulse.time for pulse in self.pulses] + [self.total_time]
            if any(
                not math.isclose(a, e, rel_tol=_REL_TOL, abs_tol=0.0)
                for a, e in zip(actual, expected)
            ):
                raise ValueError(
                    f"Times {actual} are not the multiples {self.time_multiples} of"
                    f" T={self.interrogation_time}."
                )

        times = [pulse.time for pulse in self.pulses]
        if times[0] < 0:
            raise ValueError("Pulse times start at t = 0 or later.")
        if any(later <= earlier for earlier, later in zip(times, times[1:])):
            raise ValueError(f"Pulse times must be strictly increasing, got {times}.")
        if self.total_time < times[-1]:
            raise ValueError("total_time must cover the last pulse.")

        for arm in (1, 2):
            running = np.cumsum([pulse.weight(arm) for pulse in self.pulses])
            if not set(running.tolist()) <= {0, 1}:
                raise ValueError(
                    f"Arm {arm} leaves the two-state bookkeeping: running weights"
                    f" {running.tolist()}."
                )
            if running[-1] != 0:
                raise ValueError(f"Arm {arm} does not return to its initial state.")

        return self

    @property
    def times(self) -> List[float]:
        """Pulse times in order."""
        return [pulse.time for pulse in self.pulses]

    def weights(self, arm: int) -> List[int]:
        """Pulse weights of one arm in order."""
        return [pulse.weight(arm) for pulse in self.pulses]

    def exact_schedule(self, ctx: Optional[Any] = None) -> Tuple[List[Any], Any]:
        """
        Pulse times and total time, as context numbers when a context is given.

        Multiples of the interrogation time are formed in the context, so a schedule
        such as 0, T, 3T, 4T stays exactly symmetric for any T.

        Args:
            ctx: Optional mpmath context.

        Returns:
            The pulse times and the total time.
        """
        if ctx is None:
            return self.times, self.total_time
        if self.time_multiples is None:
            return [ctx.mpf(t) for t in self.times], ctx.mpf(self.total_time)

        T = ctx.mpf(self.interrogation_time)
        *times, end = [n * T for n in self.time_multiples]

        return times, end


class ResponseSample(BaseModel):
    """Value of the idealized state response Λ_j at one time."""

    lambda_: float
    is_discontinuity: bool


class ClosureReport(BaseModel):
    """Arm-1 minus arm-2 phase-space separation at the end of the sequence."""

    delta_z: float
    delta_v: float
    closed: bool


class AtomSpecies(BaseModel):
    """Atom with mean mass m̄ and internal splitting ω_A."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    m_bar: float = Field(gt=0)
    omega_A: float = Field(ge=0)

    def delta_m(self, consts: PhysicalConstants) -> float:
        """Return the mass defect Δm = ħω_A/c²."""
        return consts.hbar * self.omega_A / consts.c**2


class InitialConditions(BaseModel):
    """Launch state of the atom and the velocity the lasers are tuned to."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    z0: float = 0.0
    v0: float = 0.0
    v_R: float = 0.0


class Scenario(BaseModel):
    """Everything needed to evaluate one interferometer phase."""

    model_config = ConfigDict(frozen=True, allow_inf_nan=False)

    geometry: Geometry
    mechanism: Mechanism
    species: AtomSpecies
    initial: InitialConditions
    g: float
    field: EffectiveField
    constants: PhysicalConstants
    on_resonance: bool = False
    compensation_delay: Optional[float] = None
    compensation_gamma: Optional[float] = None
    compensation_pulse: int = 1

    @model_validator(mode="after")
    def parts_must_agree(self) -> "Scenario":
        """Field, mechanism and species must describe the same lasers and atom."""
        if not (
            math.isclose(self.field.K, self.mechanism.K, rel_tol=_REL_TOL)
            and math.isclose(
                self.field.delta_k, self.mechanism.delta_k, rel_tol=_REL_TOL
            )
            and math.isclose(
                self.field.delta_omega,
                self.field.delta_k * self.constants.c,
                rel_tol=_REL_TOL,
            )
        ):
            raise ValueError("Effective field and mechanism disagree on K or delta_k.")
        if not math.isclose(
            self.species.omega_A, self.mechanism.omega_A, rel_tol=_REL_TOL
        ):
            raise ValueError("Atom and mechanism disagree on omega_A.")
        if not 0 <= self.compensation_pulse < len(self.geometry.pulses):
            raise ValueError(
                f"Compensation pulse index {self.compensation_pulse} is outside the"
                " schedule."
            )
        if self.on_resonance:
            from fsl_interferometry.light_field import resonant_delta_omega

            expected = resonant_delta_omega(
                self.mechanism, self.initial.v_R, self.species.m_bar, self.constants
            )
            if not math.isclose(
                self.field.delta_omega, expected, rel_tol=1e-12, abs_tol=1e-9
            ):
                raise ValueError(
                    f"delta_omega={self.field.delta_omega} is off resonance, expected"
                    f" {expected}."
                )

        return self

    @property
    def sigma(self) -> float:
        """Common chirp rate."""
        return self.field.sigma

    @property
    def compensated(self) -> bool:
        """Whether a timing shift is applied."""
        return self.compensation_delay is not None

    def with_gravity(self, g: float) -> "Scenario":
        """Return a copy with another gravitational acceleration."""
        return self.model_copy(update={"g": g})

    def with_chirp(self, sigma: float) -> "Scenario":
        """Return a copy with another chirp rate."""
        return self.model_copy(
            update={"field": self.field.model_copy(update={"sigma": sigma})}
        )

    def with_initial(self, **changes: float) -> "Scenario":
        """Return a copy with updated initial conditions."""
        return self.model_copy(
            update={"initial": self.initial.model_copy(update=changes)}
        )


class PhaseBreakdown(BaseModel):
    """Unperturbed phase plus the named first-order contributions, in rad."""

    model_config = ConfigDict(allow_inf_nan=False)

    unperturbed: float
    fsl_clock: float
    fsl_doppler: float
    chirp: float
    time_dilation: float
    ts_clock: float = 0.0
    ts_doppler: float = 0.0
    ts_chirp: float = 0.0
    total: float

    @model_validator(mode="after")
    def total_must_be_sum(self) -> "PhaseBreakdown":
        """The total is the sum of all contributions."""
        parts = [getattr(self, name) for name in PHASE_TERMS]
        if not math.isclose(
            self.total, math.fsum(parts), rel_tol=1e-12, abs_tol=1e-12
        ):
            raise ValueError(f"total={self.total} is not the sum of {parts}.")

        return self

    @classmethod
    def assemble(cls, **terms: float) -> "PhaseBreakdown":
        """Build a breakdown whose total is the compensated sum of the terms."""
        return cls(**terms, total=math.fsum(terms.values()))

    @property
    def perturbation(self) -> float:
        """Sum of the first-order contributions."""
        return math.fsum(getattr(self, name) for name in PHASE_TERMS[1:])


PHASE_TERMS: Tuple[str, ...] = (
    "unperturbed",
    "fsl_clock",
    "fsl_doppler",
    "chirp",
    "time_dilation",
    "ts_clock",
    "ts_doppler",
    "ts_chirp",
)


class FringeUnknown(str, Enum):
    """Quantity solved for at the zero fringe."""

    g = "g"
    sigma = "sigma"


class OffsetReport(BaseModel):
    """Zero-fringe offset g/σ = 1 + γ."""

    mechanism: MechanismKind
    unknown: FringeUnknown
    root: float
    sigma: float
    gamma: float
    gamma_numeric: float
    gamma_analytic: Optional[float] = None
    compensated: bool = False

    @property
    def accuracy(self) -> float:
        """Systematic bias γ·σ on the inferred g in m/s²."""
        return self.gamma * self.sigma

    @property
    def accuracy_microgal(self) -> float:
        """Systematic bias in µGal (1 Gal = 1 cm/s²)."""
        return self.accuracy * 1e8


class ErrorBudget(BaseModel):
    """Linearized uncertainty of the inferred g."""

    delta_phi: float
    delta_v0: float
    delta_g: float = Field(ge=0)
    Gamma: float = 0.0
    compensated: bool = False
    phase_term: float
    velocity_term: float


class ExceptionSource(str, Enum):
    """Where a worker failure came from."""

    validation = "validation"
    computation = "computation"


class ProcessException(BaseModel):
    """Failure of one grid point, carried back across the worker pool."""

    source: ExceptionSource
    message: str
    value: Optional[float] = None


class OracleRun(BaseModel):
    """Exact phases at reduced light speeds and their 1/c̃ series fit."""

    c_tilde_values: List[float]
    exact_phases: List[float]
    coefficients: Tuple[float, float, float]
    fit_residuals: List[float]
    model_phases: List[float]
    residuals: List[float]
    engine_a0: float
    engine_a1: float
    order_slope: Optional[float] = None
    passed: bool
    messages: List[str] = Field(default_factory=list)


class SweepScale(str, Enum):
    """Spacing of sweep grid points."""

    linear = "linear"
    log = "log"


class SweepSpec(BaseModel):
    """Grid over one scenario-file parameter."""

    param: str
    start: float
    stop: float
    count: int = Field(ge=2)
    scale: SweepScale = SweepScale.linear

    @model_validator(mode="after")
    def range_must_be_valid(self) -> "SweepSpec":
        """Check that the range is not degenerate."""
        if self.start == self.stop:
            raise ValueError("Sweep start and stop must differ.")
        if self.scale is SweepScale.log and (self.start <= 0 or self.stop <= 0):
            raise ValueError("Log sweeps need positive start and stop.")

        return self

    def values(self) -> List[float]:
        """Grid points in order."""
        if self.scale is SweepScale.log:
            grid = np.geomspace(self.start, self.stop, self.count)
        else:
            grid = np.linspace(self.start, self.stop, self.count)

        return [float(value) for value in grid]


class OutputFormat(str, Enum):
    """Rendering of command output."""

    csv = "csv"
    table = "table"
