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
"""Exceptions raised by the FSL Interferometry engine."""


class ScenarioValidationError(ValueError):
    """Input that cannot be evaluated: bad values or an unsupported combination."""


class ComputationError(RuntimeError):
    """A numerical step failed on otherwise valid input."""


class OpenGeometryError(ComputationError):
    """The unperturbed arms do not close in phase space."""


class CausalityError(ComputationError):
    """A light front cannot reach the atom in causal order."""

    def __init__(self, message: str, c_tilde: float) -> None:
        """Keep the offending light speed next to the message."""
        super().__init__(message)
        self.c_tilde = c_tilde


class BracketError(ComputationError):
    """No sign change was found around a zero-fringe seed."""


class IllConditionedFitError(ComputationError):
    """The oracle design matrix cannot separate the series coefficients."""
