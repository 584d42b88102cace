# Copyright 2024 Google LLC
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Errors raised by loccstar.

The class names double as the error names reported by the command line.
"""
import typing as t


class LocCStarError(Exception):
    """Base class of every domain error."""


class EigenFailure(LocCStarError):
    """An eigensolver did not converge."""


class NotPositive(LocCStarError):
    """An operation that needs a positive element received something else."""


class Singular(LocCStarError):
    """An element is not invertible in some fiber.

    Attributes:
        index: the fiber (or tail marker) where invertibility fails, if known.
    """

    def __init__(self, message: str, index: t.Optional[t.Any] = None):
        super().__init__(message)
        self.index = index


class UnsupportedTail(LocCStarError):
    """The result would leave the prefix-plus-polynomial-tail representation."""


class ModuleMismatch(LocCStarError):
    """Operands belong to different Hilbert modules."""


class AlgebraMismatch(LocCStarError):
    """Operands belong to different locally C*-algebras."""


class UnknownIndex(LocCStarError, KeyError):
    """A seminorm index that is not in the index set."""

    def __str__(self) -> str:
        return Exception.__str__(self)


class EmptyKernel(LocCStarError):
    """An ideal was built from an empty set of kernel indices."""


class InvalidMatrix(LocCStarError, ValueError):
    """Matrix data that is not square, empty or not finite."""


class SpecError(LocCStarError, ValueError):
    """A JSON spec that does not describe a valid value."""
