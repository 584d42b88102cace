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
"""Hilbert A-modules X = A^k and ideal submodules.

The inner product is A-linear in the second argument:
<x, y a> = <x, y> a and <x a, y> = a* <x, y>.
"""
import dataclasses
import logging
import math
import numbers

import numpy as np
import typing as t

from .constant import DEFAULT_TOLERANCE
from .cstar_matrix import CMatrix, mnorm
from .exceptions import ModuleMismatch, UnsupportedTail
from .local_algebra import (
    Ideal,
    Index,
    LocalAlgebra,
    LocalElement,
    inverse,
    seminorm,
    sqrt,
    sup_norm,
)

logger = logging.getLogger(__name__)

FREE = 'free'
IDEAL = 'ideal'


@dataclasses.dataclass(frozen=True)
class HilbertModule:
    """A Hilbert module over `algebra`.

    Attributes:
        algebra (LocalAlgebra): the coefficient algebra A.
        rank (int): k, the number of entries of a vector.
        flavor (str): 'free' for A^k, 'ideal' for a right ideal I_S (rank 1).
        kernel_indices (frozenset): S for the ideal flavor.
    """
    algebra: LocalAlgebra
    rank: int
    flavor: str = FREE
    kernel_indices: t.FrozenSet[Index] = frozenset()

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError(f'Module rank must be >= 1, got {self.rank}.')
        if self.flavor == IDEAL:
            if self.rank != 1:
                raise ValueError('An ideal module has rank 1.')
            object.__setattr__(self, 'kernel_indices',
                               Ideal(self.algebra, self.kernel_indices).kernel_indices)
        elif self.flavor != FREE:
            raise ValueError(f'Unknown module flavor {self.flavor!r}.')

    @classmethod
    def free(cls, algebra: LocalAlgebra, rank: int) -> 'HilbertModule':
        return cls(algebra, rank)

    @classmethod
    def ideal(cls, algebra: LocalAlgebra, kernel_indices: t.Iterable[Index]) -> 'HilbertModule':
        return cls(algebra, 1, IDEAL, frozenset(kernel_indices))

    def vector(self, entries: t.Sequence[LocalElement]) -> 'ModuleVector':
        return ModuleVector(self, tuple(entries))

    def zero(self) -> 'ModuleVector':
        return self.vector([self.algebra.zero()] * self.rank)


@dataclasses.dataclass(frozen=True, eq=False)
class ModuleVector:
    """x in X as a k-tuple of algebra elements.

    `x @ a` is the right module action, `x + y`, `x - y` and `c * x` the vector
    space operations.
    """
    module: HilbertModule
    entries: t.Tuple[LocalElement, ...]

    __array_ufunc__ = None

    def __post_init__(self):
        entries = tuple(self.entries)
        module = self.module
        if len(entries) != module.rank:
            raise ValueError(f'Expected {module.rank} entries, got {len(entries)}.')
        if any(e.parent != module.algebra for e in entries):
            raise ModuleMismatch('Vector entries belong to a different algebra.')
        if module.flavor == IDEAL and not Ideal(module.algebra,
                                                module.kernel_indices).contains(entries[0]):
            raise ValueError('The entry of an ideal-module vector must lie in the ideal.')
        object.__setattr__(self, 'entries', entries)

    def _check(self, other: 'ModuleVector') -> None:
        if not isinstance(other, ModuleVector) or other.module != self.module:
            raise ModuleMismatch('Vectors belong to different modules.')

    def __add__(self, other: 'ModuleVector') -> 'ModuleVector':
        self._check(other)
        return ModuleVector(self.module, tuple(a + b for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: 'ModuleVector') -> 'ModuleVector':
        self._check(other)
        return ModuleVector(self.module, tuple(a - b for a, b in zip(self.entries, other.entries)))

    def __mul__(self, scalar: numbers.Number) -> 'ModuleVector':
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return ModuleVector(self.module, tuple(e * scalar for e in self.entries))

    __rmul__ = __mul__

    def __matmul__(self, a: LocalElement) -> 'ModuleVector':
        if not isinstance(a, LocalElement):
            return NotImplemented
        return ModuleVector(self.module, tuple(e @ a for e in self.entries))

    def is_zero(self) -> bool:
        return all(e.is_zero() for e in self.entries)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModuleVector):
            return NotImplemented
        return self.module == other.module and all(
            a == b for a, b in zip(self.entries, other.entries))

    __hash__ = None  # type: ignore[assignment]


def inner(x: ModuleVector, y: ModuleVector) -> LocalElement:
    """<x, y> = sum_i x_i* y_i.

    Raises:
        ModuleMismatch: if x and y live in different modules.
    """
    x._check(y)
    total = x.entries[0].adjoint() @ y.entries[0]
    for xi, yi in zip(x.entries[1:], y.entries[1:]):
        total = total + xi.adjoint() @ yi
    return total


def module_seminorm(x: ModuleVector, index: Index) -> float:
    """P̄_a(x) = P_a(<x, x>) ** 0.5."""
    return math.sqrt(seminorm(inner(x, x), index))


def cauchy_schwarz_gap(x: ModuleVector, y: ModuleVector, index: Index) -> float:
    """P_a(<x,x>) P_a(<y,y>) - P_a(<x,y>)**2, which is never negative."""
    xy = seminorm(inner(x, y), index)
    return seminorm(inner(x, x), index) * seminorm(inner(y, y), index) - xy * xy


def sup_module_norm(x: ModuleVector) -> float:
    """|x|^s = (|<x,x>|^s) ** 0.5, or math.inf outside X^s."""
    return math.sqrt(sup_norm(inner(x, x)))


def is_in_bounded_part(x: ModuleVector) -> bool:
    return math.isfinite(sup_module_norm(x))


def smooth(x: ModuleVector, t_param: float, tol: float = DEFAULT_TOLERANCE) -> ModuleVector:
    """x (e + t sqrt(<x,x>))**-1, a vector of X^s close to x for small t.

    For t = 1 every module seminorm of the result is at most 1, and
    P̄_a(x - smooth(x, t)) <= t P̄_a(x sqrt(<x,x>)).

    Raises:
        UnsupportedTail: if <x,x> has a growing tail.
        ValueError: if t is not positive.
    """
    if not t_param > 0:
        raise ValueError(f'The smoothing parameter must be positive, got {t_param}.')
    gram = inner(x, x)
    if gram.tail_degree >= 1:
        logger.debug(f'smooth refused <x,x> with a tail of degree {gram.tail_degree}.')
        raise UnsupportedTail('Smoothing needs <x,x> with a constant tail.')
    root = sqrt(gram, tol)
    algebra = x.module.algebra
    return x @ inverse(algebra.identity() + root * t_param, tol)


def quotient_vector(x: ModuleVector, index: Index) -> t.Tuple[CMatrix, ...]:
    """The image of x in the quotient module X_a = X / Ī_a."""
    return tuple(e.at(index) for e in x.entries)


def fiber_module_norm(images: t.Sequence[CMatrix]) -> float:
    """|sum_i m_i* m_i| ** 0.5, the Hilbert A_a-module norm of a quotient vector."""
    gram = images[0].adjoint() @ images[0]
    for m in images[1:]:
        gram = gram + m.adjoint() @ m
    return math.sqrt(mnorm(gram))


def in_kernel_submodule(x: ModuleVector, index: Index) -> bool:
    """x in Ī_a, i.e. <x,x> lies in I_a (exact test)."""
    return all(m.is_zero() for m in quotient_vector(x, index))


def stack(images: t.Sequence[CMatrix]) -> np.ndarray:
    """The k*d x d column block [m_1; ...; m_k] that X_a acts on."""
    return np.vstack([m.entries for m in images])
