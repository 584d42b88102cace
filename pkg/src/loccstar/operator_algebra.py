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
"""Adjointable operators on a free Hilbert module A^k.

An operator is a k x k matrix of algebra elements acting by left
multiplication, (Tx)_i = sum_j t_ij x_j, so T(xa) = (Tx)a holds by
construction and the adjoint is the entrywise adjoint of the transpose.

At a fiber a the operator becomes one (k d_a) x (k d_a) scalar matrix, the
"big matrix" whose entries are the blocks (t_ij)_a. Seminorms, spectra and
positivity are computed on those matrices.
"""
import dataclasses
import functools
import logging
import numbers

import numpy as np
import typing as t
from immutabledict import immutabledict

from .constant import DEFAULT_HORIZON, DEFAULT_TOLERANCE
from .cstar_matrix import CMatrix, mis_hermitian, mnorm
from .exceptions import ModuleMismatch
from .hilbert_module import FREE, HilbertModule, ModuleVector
from .local_algebra import (
    Index,
    LocalElement,
    TailRule,
    Verdict,
    is_positive,
    spectrum,
    sup_norm,
)

logger = logging.getLogger(__name__)

OperatorMatrix = t.Tuple[t.Tuple[LocalElement, ...], ...]


@dataclasses.dataclass(frozen=True, eq=False)
class ModuleOperator:
    """T in End*_A(X) for a free module X = A^k.

    Attributes:
        module (HilbertModule): the free module T acts on.
        matrix (tuple): k rows of k LocalElements.
    """
    module: HilbertModule
    matrix: OperatorMatrix

    __array_ufunc__ = None

    def __post_init__(self):
        module = self.module
        if module.flavor != FREE:
            raise ModuleMismatch('Operators are only defined on free modules.')
        rows = tuple(tuple(row) for row in self.matrix)
        k = module.rank
        if len(rows) != k or any(len(row) != k for row in rows):
            raise ValueError(f'An operator on a rank-{k} module needs a {k}x{k} matrix.')
        if any(e.parent != module.algebra for row in rows for e in row):
            raise ModuleMismatch('Operator entries belong to a different algebra.')
        object.__setattr__(self, 'matrix', rows)

    @classmethod
    def diagonal(cls, module: HilbertModule, entries: t.Sequence[LocalElement]) -> 'ModuleOperator':
        zero = module.algebra.zero()
        k = module.rank
        return cls(module, tuple(
            tuple(entries[i] if i == j else zero for j in range(k)) for i in range(k)))

    @classmethod
    def identity(cls, module: HilbertModule) -> 'ModuleOperator':
        return cls.diagonal(module, [module.algebra.identity()] * module.rank)

    @classmethod
    def zero(cls, module: HilbertModule) -> 'ModuleOperator':
        return cls.diagonal(module, [module.algebra.zero()] * module.rank)

    @property
    def rank(self) -> int:
        return self.module.rank

    def _check(self, other: 'ModuleOperator') -> None:
        if not isinstance(other, ModuleOperator) or other.module != self.module:
            raise ModuleMismatch('Operators act on different modules.')

    def _entrywise(self, other: 'ModuleOperator',
                   op: t.Callable[[LocalElement, LocalElement], LocalElement]) -> 'ModuleOperator':
        self._check(other)
        return ModuleOperator(self.module, tuple(
            tuple(op(a, b) for a, b in zip(r1, r2)) for r1, r2 in zip(self.matrix, other.matrix)))

    def __add__(self, other: 'ModuleOperator') -> 'ModuleOperator':
        return self._entrywise(other, lambda a, b: a + b)

    def __sub__(self, other: 'ModuleOperator') -> 'ModuleOperator':
        return self._entrywise(other, lambda a, b: a - b)

    def __mul__(self, scalar: numbers.Number) -> 'ModuleOperator':
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return ModuleOperator(self.module, tuple(
            tuple(e * scalar for e in row) for row in self.matrix))

    __rmul__ = __mul__

    def __matmul__(self, other: 'ModuleOperator') -> 'ModuleOperator':
        if not isinstance(other, ModuleOperator):
            return NotImplemented
        return compose(self, other)

    def is_zero(self) -> bool:
        return all(e.is_zero() for row in self.matrix for e in row)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModuleOperator):
            return NotImplemented
        return self.module == other.module and all(
            a == b for r1, r2 in zip(self.matrix, other.matrix) for a, b in zip(r1, r2))

    __hash__ = None  # type: ignore[assignment]

    def block(self, index: Index) -> np.ndarray:
        """The big matrix at `index` as a plain array."""
        return self.fiber_element().at(index).entries

    def fiber_element(self) -> LocalElement:
        """T as an element of the amplified algebra M_k(A).

        Components are the big matrices; in the countable model the tail is the
        polynomial whose j-th coefficient is the block matrix of the entries'
        j-th tail coefficients. Built once per operator.
        """
        return self._fiber

    @functools.cached_property
    def _fiber(self) -> LocalElement:
        algebra = self.module.algebra
        amplified = algebra.amplified(self.rank)
        comps = immutabledict({
            a: CMatrix._wrap(np.block([[e.at(a).entries for e in row] for row in self.matrix]))
            for a in algebra.indices()})
        tail = None
        if algebra.is_countable:
            size = max(e.tail_degree for row in self.matrix for e in row) + 1
            zero = np.zeros((algebra.common_dim, algebra.common_dim), dtype=np.complex128)

            def coeff(e: LocalElement, j: int) -> np.ndarray:
                return e.tail.coeffs[j].entries if j < len(e.tail.coeffs) else zero

            tail = TailRule(tuple(
                CMatrix._wrap(np.block([[coeff(e, j) for e in row] for row in self.matrix]))
                for j in range(size)))
        logger.debug(f'Assembled a rank-{self.rank} operator as an element of M_{self.rank}(A).')
        return LocalElement(amplified, comps, tail)


def apply(op: ModuleOperator, x: ModuleVector) -> ModuleVector:
    """Tx with (Tx)_i = sum_j t_ij x_j.

    Raises:
        ModuleMismatch: if x does not live in the module of `op`.
    """
    if x.module != op.module:
        raise ModuleMismatch('Vector and operator live in different modules.')
    entries = []
    for row in op.matrix:
        total = row[0] @ x.entries[0]
        for tij, xj in zip(row[1:], x.entries[1:]):
            total = total + tij @ xj
        entries.append(total)
    return ModuleVector(op.module, tuple(entries))


def adjoint(op: ModuleOperator) -> ModuleOperator:
    """T* with (T*)_ij = (t_ji)*, so <Tx, y> = <x, T*y>."""
    k = op.rank
    return ModuleOperator(op.module, tuple(
        tuple(op.matrix[j][i].adjoint() for j in range(k)) for i in range(k)))


def compose(first: ModuleOperator, second: ModuleOperator) -> ModuleOperator:
    """The product first . second, as a block matrix product over A."""
    first._check(second)
    k = first.rank
    rows = []
    for i in range(k):
        row = []
        for j in range(k):
            total = first.matrix[i][0] @ second.matrix[0][j]
            for m in range(1, k):
                total = total + first.matrix[i][m] @ second.matrix[m][j]
            row.append(total)
        rows.append(tuple(row))
    return ModuleOperator(first.module, tuple(rows))


def quotient_operator(op: ModuleOperator, index: Index) -> CMatrix:
    """T_a, the big matrix acting on the quotient module X_a."""
    return CMatrix._wrap(op.block(index))


def op_seminorm(op: ModuleOperator, index: Index) -> float:
    """P^_a(T), the spectral norm of the big matrix at `index`."""
    return mnorm(quotient_operator(op, index))


def op_sup_norm(op: ModuleOperator) -> float:
    """sup_a P^_a(T), or math.inf when some entry has a growing tail."""
    return sup_norm(op.fiber_element())


def op_spectrum(op: ModuleOperator, horizon: int = DEFAULT_HORIZON,
                tol: float = DEFAULT_TOLERANCE) -> Verdict:
    """Sp(T) as the union of the spectra of the big matrices."""
    return spectrum(op.fiber_element(), horizon, tol)


def op_is_positive(op: ModuleOperator, horizon: int = DEFAULT_HORIZON,
                   tol: float = DEFAULT_TOLERANCE) -> Verdict:
    """T >= 0, i.e. every big matrix is positive semidefinite."""
    return is_positive(op.fiber_element(), horizon, tol)


def op_is_self_adjoint(op: ModuleOperator, tol: float = DEFAULT_TOLERANCE) -> bool:
    """T = T*, decided entrywise: t_ij = (t_ji)* in every stored fiber and tail coefficient."""
    k = op.rank
    for i in range(k):
        for j in range(i, k):
            diff = op.matrix[i][j] - op.matrix[j][i].adjoint()
            scale = op.matrix[i][j]
            for alpha in diff.parent.indices():
                if mnorm(diff.at(alpha)) > tol * (1.0 + mnorm(scale.at(alpha))):
                    return False
            if diff.tail is not None and not all(
                    mnorm(c) <= tol * (1.0 + mnorm(s))
                    for c, s in zip(diff.tail.coeffs, _padded_coeffs(scale.tail, len(diff.tail.coeffs)))):
                return False
    return True


def _padded_coeffs(tail: TailRule, size: int) -> t.List[CMatrix]:
    coeffs = list(tail.coeffs[:size])
    return coeffs + [CMatrix.zeros(tail.dim)] * (size - len(coeffs))


def is_fiber_hermitian(op: ModuleOperator, index: Index, tol: float = DEFAULT_TOLERANCE) -> bool:
    """T_a = (T_a)* within tolerance."""
    return mis_hermitian(quotient_operator(op, index), tol)
