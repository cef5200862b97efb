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
"""Scenario files: schema, loading, saving and conversion to a `Scenario`.

Scenario files are JSON documents whose numeric keys carry their unit as a suffix.
"""

import json
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from fsl_interferometry.config import settings
from fsl_interferometry.exceptions import ScenarioValidationError
from fsl_interferometry.geometry import build_butterfly, build_geometry, build_mzi
from fsl_interferometry.light_field import recoil_velocity, resonant_delta_omega
from fsl_interferometry.models import (
    AtomSpecies,
    EffectiveField,
    Geometry,
    InitialConditions,
    Mechanism,
    MechanismKind,
    PhysicalConstants,
    Scenario,
)
from fsl_interferometry.services.gravimetry_service import with_compensation

# Warn when the mass defect is no longer a small correction.
_MASS_DEFECT_WARNING = 1e-6


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", allow_inf_nan=False)


class ConstantsSection(_Section):
    """Physical constants, defaulting to the configured values."""

    c_m_s: float = Field(default_factory=lambda: settings.speed_of_light, gt=0)
    hbar_J_s: float = Field(default_factory=lambda: settings.hbar, gt=0)


class AtomSection(_Section):
    """Atom and launch state."""

    m_bar_kg: float = Field(gt=0)
    omega_A_rad_s: Optional[float] = Field(default=None, ge=0)
    z0_m: float = 0.0
    v0_m_s: float = 0.0
    v_res_m_s: float = 0.0


class LasersSection(_Section):
    """Effective two-beam field."""

    mechanism: MechanismKind
    K_rad_m: float = Field(ge=0)
    delta_k_rad_m: Optional[float] = None
    sigma_m_s2: float
    # Source distance; places the envelope sources of `diagram`.
    L_m: float = Field(default=1.0, gt=0)
    phi_off_rad: float = 0.0


class BuiltinGeometry(str, Enum):
    """Geometries with a closed form."""

    mzi = "mzi"
    butterfly = "butterfly"


class PulseSection(_Section):
    """One pulse of a custom schedule."""

    time_s: float
    w1: int
    w2: int


class GeometrySection(_Section):
    """Either a built-in geometry with its T, or an explicit pulse list."""

    builtin: Optional[BuiltinGeometry] = None
    T_s: Optional[float] = Field(default=None, gt=0)
    pulses: Optional[List[PulseSection]] = None
    label: Optional[str] = None

    @model_validator(mode="after")
    def one_form_only(self) -> "GeometrySection":
        """Exactly one of `builtin` and `pulses` is given."""
        if (self.builtin is None) == (self.pulses is None):
            raise ValueError("Give either `builtin` with `T_s` or `pulses`.")
        if self.builtin is not None and self.T_s is None:
            raise ValueError("A built-in geometry needs `T_s`.")
        if self.pulses is not None and self.T_s is not None:
            raise ValueError("`T_s` only applies to built-in geometries.")

        return self


class GravitySection(_Section):
    """Gravitational acceleration."""

    g_m_s2: float


class CompensationSection(_Section):
    """Timing shift of the mirror pulse."""

    enabled: bool = False
    Gamma_m_s2: float = 0.0
    delay_s: Optional[float] = None


class ScenarioFile(_Section):
    """Top-level scenario document."""

    constants: ConstantsSection = Field(default_factory=ConstantsSection)
    atom: AtomSection
    lasers: LasersSection
    geometry: GeometrySection
    gravity: GravitySection
    compensation: Optional[CompensationSection] = None


def format_validation_error(error: ValidationError) -> str:
    """Render each error as `dotted.key.path: message`."""
    return "; ".join(
        f"{'.'.join(str(part) for part in item['loc']) or '<root>'}: {item['msg']}"
        for item in error.errors()
    )


def load_scenario_file(path: Union[str, Path]) -> ScenarioFile:
    """
    Read and validate a scenario file.

    Args:
        path: Path of the JSON document.

    Returns:
        The validated file.

    Raises:
        ScenarioValidationError: If the file is missing or not JSON.
        ValidationError: If the document does not follow the schema.
    """
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise ScenarioValidationError(f"Cannot read scenario file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ScenarioValidationError(f"{path} is not valid JSON: {e}") from e

    return ScenarioFile.model_validate(data)


def save_scenario_file(scenario_file: ScenarioFile, path: Union[str, Path]) -> None:
    """Write a scenario file that loads back to the same document."""
    data = scenario_file.model_dump(mode="json", exclude_none=True)
    Path(path).write_text(json.dumps(data, indent=2) + "\n", encoding="utf-8")


def apply_param(scenario_file: ScenarioFile, path: str, value: float) -> ScenarioFile:
    """
    Return a copy of the file with one numeric key replaced.

    Args:
        scenario_file: The file.
        path: Dotted key, e.g. `atom.v0_m_s`.
        value: New value.

    Returns:
        The revalidated file.

    Raises:
        ScenarioValidationError: If the path does not name a key of the file.
    """
    data: Dict[str, Any] = scenario_file.model_dump(mode="json")
    parts = path.split(".")
    node: Any = data
    for part in parts[:-1]:
        if not isinstance(node, dict) or not isinstance(node.get(part), dict):
            raise ScenarioValidationError(f"Invalid parameter path `{path}`.")
        node = node[part]
    if not isinstance(node, dict) or parts[-1] not in node or len(parts) < 2:
        raise ScenarioValidationError(f"Invalid parameter path `{path}`.")

    node[parts[-1]] = value
    return ScenarioFile.model_validate(data)


def _build_geometry(section: GeometrySection) -> Geometry:
    if section.builtin is BuiltinGeometry.mzi:
        return build_mzi(section.T_s)
    if section.builtin is BuiltinGeometry.butterfly:
        return build_butterfly(section.T_s)

    triples = [(pulse.time_s, pulse.w1, pulse.w2) for pulse in section.pulses]
    if not triples:
        raise ScenarioValidationError("geometry.pulses: at least one pulse is needed.")

    return build_geometry(triples, triples[-1][0], section.label or "custom")


def _atomic_frequency(scenario_file: ScenarioFile, consts: PhysicalConstants) -> float:
    atom, lasers = scenario_file.atom, scenario_file.lasers
    if atom.omega_A_rad_s is not None:
        return atom.omega_A_rad_s

    kind = lasers.mechanism
    if kind is MechanismKind.bragg:
        return 0.0
    if kind is MechanismKind.spt:
        K = lasers.K_rad_m
        v_K = recoil_velocity(K, atom.m_bar_kg, consts)
        return consts.c * K - K * v_K / 2 - K * atom.v_res_m_s

    raise ScenarioValidationError(
        f"atom.omega_A_rad_s: required for {kind.value} transitions."
    )


def build_scenario(scenario_file: ScenarioFile) -> Scenario:
    """
    Turn a validated file into a `Scenario`.

    A missing `lasers.delta_k_rad_m` is set to the resonance at `atom.v_res_m_s`, and
    a missing single-photon `atom.omega_A_rad_s` to the matching transition frequency.

    Args:
        scenario_file: The file.

    Returns:
        The scenario.

    Raises:
        ScenarioValidationError: For combinations the schema cannot express.
        ValidationError: If the parts violate the mechanism constraints.
    """
    consts = PhysicalConstants(
        c=scenario_file.constants.c_m_s, hbar=scenario_file.constants.hbar_J_s
    )
    atom, lasers = scenario_file.atom, scenario_file.lasers
    g = scenario_file.gravity.g_m_s2

    omega_A = _atomic_frequency(scenario_file, consts)
    on_resonance = lasers.delta_k_rad_m is None
    if on_resonance:
        draft = Mechanism.model_construct(
            kind=lasers.mechanism, K=lasers.K_rad_m, delta_k=0.0, omega_A=omega_A, k_A=0.0
        )
        delta_omega = resonant_delta_omega(draft, atom.v_res_m_s, atom.m_bar_kg, consts)
    else:
        delta_omega = lasers.delta_k_rad_m * consts.c
    delta_k = delta_omega / consts.c

    mechanism = Mechanism.build(lasers.mechanism, lasers.K_rad_m, delta_k, omega_A, consts)
    species = AtomSpecies(m_bar=atom.m_bar_kg, omega_A=omega_A)
    ratio = species.delta_m(consts) / species.m_bar
    if ratio > _MASS_DEFECT_WARNING:
        logger.warning(f"Mass defect is {ratio:.3e} of the mean mass.")

    # Pulse times are measured from t_i′ = 0: the beams leave their sources at −L/c.
    field = EffectiveField(
        Phi_off=lasers.phi_off_rad,
        K=lasers.K_rad_m,
        delta_omega=delta_omega,
        delta_k=delta_k,
        sigma=lasers.sigma_m_s2,
        t_init_retarded=0.0,
    )

    scenario = Scenario(
        geometry=_build_geometry(scenario_file.geometry),
        mechanism=mechanism,
        species=species,
        initial=InitialConditions(
            z0=atom.z0_m, v0=atom.v0_m_s, v_R=atom.v_res_m_s
        ),
        g=g,
        field=field,
        constants=consts,
        on_resonance=on_resonance,
    )

    compensation = scenario_file.compensation
    if compensation is None or not compensation.enabled:
        return scenario
    if compensation.delay_s is not None:
        return scenario.model_copy(update={"compensation_delay": compensation.delay_s})

    return with_compensation(scenario, compensation.Gamma_m_s2)


def load_scenario(path: Optional[Union[str, Path]] = None) -> Scenario:
    """Load and build a scenario, the configured default when no path is given."""
    return build_scenario(load_scenario_file(path or settings.default_scenario))
