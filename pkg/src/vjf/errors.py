# Copyright 2026 The vjf Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

from typing import Optional


class ShapeError(ValueError):
    """Raised when array lengths or matrix dimensions are inconsistent."""


class DomainError(ValueError):
    """Raised when a value lies outside the mathematical domain of an operation."""


class ConfigurationError(ValueError):
    """
    Raised when a configuration document or a set of model dimensions is invalid.

    Args:
        message (str): Human readable description of the problem.
        key_path (str, optional): Dotted path of the offending configuration key,
            for example `model.n`. Default is `None`.
    """

    def __init__(self, message: str, key_path: Optional[str] = None):
        super().__init__(f"{key_path}: {message}" if key_path else message)
        self.key_path = key_path


class NumericalError(ArithmeticError):
    """
    Raised when a loss, gradient or update becomes non-finite.

    Args:
        message (str): Human readable description of the problem.
        component (str, optional): Name of the offending term or parameter block,
            for example `reconstruction` or `dynamics.weights`. Default is `None`.
    """

    def __init__(self, message: str, component: Optional[str] = None):
        super().__init__(f"{component}: {message}" if component else message)
        self.component = component
