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
"""Configuration module of the FSL Interferometry engine."""

import os
from os import getenv
from pathlib import Path
from typing import List

import numpy as np
from dotenv import load_dotenv
from loguru import logger
from pydantic import field_validator
from pydantic.dataclasses import dataclass
from scipy import constants

from fsl_interferometry import __version__

_DEFAULT_SCENARIO = str(Path(__file__).parent / "assets" / "default_scenario.json")


@dataclass
class Settings:
    """Configuration settings for the FSL Interferometry engine."""

    # General configuration
    project_name: str
    version: str
    description: str
    debug: bool
    # Physical constants
    speed_of_light: float
    hbar: float
    # Numerics configuration
    working_precision: int
    closure_tolerance: float
    root_rtol: float
    zero_fringe_bracket: float
    eikonal_step_fraction: float
    # Scenario configuration
    default_scenario: str
    # Oracle configuration
    oracle_c_tilde: List[float]
    oracle_a0_rtol: float
    oracle_a0_atol: float
    oracle_a1_rtol: float
    # Concurrency configuration
    max_workers: int

    @field_validator("project_name", "version", "description")
    def text_must_not_be_none(cls, value: str):  # noqa: B902, N805
        """Check that the general text fields are not None."""
        if value is None:
            raise ValueError(
                "General text settings must not be None, please verify the `.env`"
                " file."
            )

        return value

    @field_validator("speed_of_light", "hbar")
    def constant_must_be_positive(cls, value: float):  # noqa: B902, N805
        """Check that a physical constant is strictly positive."""
        if value <= 0:
            raise ValueError(
                f"Physical constants must be positive, got {value}, please verify the"
                " `.env` file."
            )

        return value

    @field_validator("working_precision")
    def working_precision_must_be_valid(cls, value: int):  # noqa: B902, N805
        """Check that the extended precision keeps at least 30 digits."""
        if value < 30:
            raise ValueError(
                f"working_precision must be at least 30 digits, got {value}, please"
                " verify the `.env` file."
            )

        return value

    @field_validator("root_rtol")
    def root_rtol_must_be_valid(cls, value: float):  # noqa: B902, N805
        """Check that the root tolerance is reachable in double precision."""
        if value < 4 * np.finfo(float).eps:
            raise ValueError(
                f"root_rtol must be at least {4 * np.finfo(float).eps:.3e}, please"
                " verify the `.env` file."
            )

        return value

    @field_validator(
        "closure_tolerance",
        "zero_fringe_bracket",
        "eikonal_step_fraction",
        "oracle_a0_rtol",
        "oracle_a0_atol",
        "oracle_a1_rtol",
    )
    def tolerance_must_be_valid(cls, value: float):  # noqa: B902, N805
        """Check that a tolerance lies in (0, 1)."""
        if not 0 < value < 1:
            raise ValueError(
                f"Tolerances must lie in (0, 1), got {value}, please verify the `.env`"
                " file."
            )

        return value

    @field_validator("oracle_c_tilde")
    def oracle_c_tilde_must_be_valid(cls, value: List[float]):  # noqa: B902, N805
        """Check that the oracle grid has enough positive values."""
        if len(value) < 4 or any(c <= 0 for c in value):
            raise ValueError(
                "oracle_c_tilde must hold at least 4 positive light speeds, please"
                " verify the `.env` file."
            )

        return value

    @field_validator("max_workers")
    def max_workers_must_be_valid(cls, value: int):  # noqa: B902, N805
        """Check that at least one worker is available."""
        if value < 1:
            raise ValueError(
                "max_workers must be at least 1, please verify the `.env` file."
            )

        return value

    def __post_init__(self):
        """Post initialization checks."""
        if self.speed_of_light != constants.c:
            logger.warning(
                f"Speed of light is set to {self.speed_of_light} m/s instead of"
                f" {constants.c} m/s. Every default scenario runs at reduced c."
            )
        if self.max_workers > (os.cpu_count() or 1):
            logger.warning(
                f"max_workers={self.max_workers} exceeds the {os.cpu_count()} available"
                " CPUs."
            )

        if np.log10(max(self.oracle_c_tilde) / min(self.oracle_c_tilde)) < 1.5:
            raise ValueError(
                "oracle_c_tilde must span at least 1.5 decades.\nFound:"
                f" {min(self.oracle_c_tilde)} to {max(self.oracle_c_tilde)}"
            )


load_dotenv()

# Oracle grid
_oracle_c_tilde = getenv("ORACLE_C_TILDE", None)
if _oracle_c_tilde is not None and _oracle_c_tilde != "":
    oracle_c_tilde = [float(x.strip()) for x in _oracle_c_tilde.split(",")]
else:
    oracle_c_tilde = [1e5, 3e5, 1e6, 3e6, 1e7]

settings = Settings(
    # General configuration
    project_name=getenv("PROJECT_NAME", "FSL Interferometry"),
    version=getenv("VERSION", __version__),
    description=getenv(
        "DESCRIPTION",
        "🔭 Finite-speed-of-light, chirp and mass-defect phases of light-pulse atom"
        " interferometers.",
    ),
    debug=getenv("DEBUG", False),
    # Physical constants
    speed_of_light=getenv("SPEED_OF_LIGHT", constants.c),
    hbar=getenv("HBAR", constants.hbar),
    # Numerics configuration
    working_precision=getenv("WORKING_PRECISION", 40),
    closure_tolerance=getenv("CLOSURE_TOLERANCE", 1e-12),
    root_rtol=getenv("ROOT_RTOL", 1e-15),
    zero_fringe_bracket=getenv("ZERO_FRINGE_BRACKET", 1e-4),
    eikonal_step_fraction=getenv("EIKONAL_STEP_FRACTION", 1e-4),
    # Scenario configuration
    default_scenario=getenv("DEFAULT_SCENARIO", _DEFAULT_SCENARIO),
    # Oracle configuration
    oracle_c_tilde=oracle_c_tilde,
    oracle_a0_rtol=getenv("ORACLE_A0_RTOL", 1e-10),
    oracle_a0_atol=getenv("ORACLE_A0_ATOL", 1e-12),
    oracle_a1_rtol=getenv("ORACLE_A1_RTOL", 1e-4),
    # Concurrency configuration
    max_workers=getenv("MAX_WORKERS", 4),
)
