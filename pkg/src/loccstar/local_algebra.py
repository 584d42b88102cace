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
"""Locally C*-algebras realized as families of matrix fibers.

Two index models are supported:

* `FiniteIndex`: finitely many labelled fibers M_{d_a}(C); the algebra is their
  product and every element is bounded.
* `CountableIndex`: fibers M_d(C) indexed by n = 1, 2, ...; an element is stored
  as explicit components for n <= N plus a `TailRule`, a matrix polynomial in n
  that gives every component with n > N.

Operations that need a bounded tail (inverse, square root) raise
`UnsupportedTail` instead of approximating.
"""
import dataclasses
import logging
import math
import numbers

import numpy as np
import typing as t
from immutabledict import immutabledict

from .constant import DEFAULT_HORIZON, DEFAULT_TOLERANCE, UNBOUNDED
from .cstar_matrix import (
    CMatrix,
    mis_hermitian,
    mis_positive,
    minverse,
    mnorm,
    mspectrum,
    msqrt,
)
from .exceptions import (
    AlgebraMismatch,
    EmptyKernel,
    NotPositive,
    Singular,
    SpecError,
    UnknownIndex,
    UnsupportedTail,
)

logger = logging.getLogger(__name__)

Index = t.Union[str, int]


class Verdict(t.NamedTuple):
    """A result together with whether it was decided exactly.

    `exact` is False only when a growing tail was checked up to a finite horizon.
    """
    value: t.Any
    exact: bool


@dataclasses.dataclass(frozen=True)
class FiniteIndex:
    """Finitely many seminorm labels, kept in sorted order."""
    labels: t.Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        if not labels:
            raise ValueError('A finite index set needs at least one label.')
        if len(set(labels)) != len(labels):
            raise ValueError(f'Index labels must be distinct: {labels}')
        object.__setattr__(self, 'labels', tuple(sorted(labels)))

    is_countable = False

    def prefix(self) -> t.Tuple[str, ...]:
        return self.labels

    def normalize(self, index: Index) -> str:
        label = str(index)
        if label not in self.labels:
            raise UnknownIndex(f'Unknown index {index!r}; expected one of {list(self.labels)}.')
        return label


@dataclasses.dataclass(frozen=True)
class CountableIndex:
    """The indices n = 1, 2, ... with an explicit prefix 1..prefix_len."""
    prefix_len: int

    def __post_init__(self):
        if int(self.prefix_len) < 1:
            raise ValueError(f'prefix_len must be >= 1, got {self.prefix_len}.')
        object.__setattr__(self, 'prefix_len', int(self.prefix_len))

    is_countable = True

    def prefix(self) -> t.Tuple[int, ...]:
        return tuple(range(1, self.prefix_len + 1))

    def normalize(self, index: Index) -> int:
        if isinstance(index, bool):
            raise UnknownIndex(f'Unknown index {index!r}.')
        if isinstance(index, str):
            label = index.strip()
            if not (label.isascii() and label.isdecimal()):
                raise UnknownIndex(f'Unknown index {index!r}; expected a positive integer.')
            index = int(label)
        if not isinstance(index, numbers.Integral) or index < 1:
            raise UnknownIndex(f'Unknown index {index!r}; expected a positive integer.')
        return int(index)


IndexSet = t.Union[FiniteIndex, CountableIndex]


@dataclasses.dataclass(frozen=True, eq=False)
class TailRule:
    """a_n = sum_k n**k * coeffs[k] for every n beyond the prefix.

    Trailing coefficients that are exactly zero are dropped, so `degree` is the
    effective degree; the zero tail keeps a single zero coefficient.
    """
    coeffs: t.Tuple[CMatrix, ...]

    __array_ufunc__ = None

    def __post_init__(self):
        coeffs = tuple(self.coeffs)
        if not coeffs:
            raise ValueError('A tail rule needs at least one coefficient.')
        dim = coeffs[0].dim
        if any(c.dim != dim for c in coeffs):
            raise ValueError('All tail coefficients must share one dimension.')
        while len(coeffs) > 1 and coeffs[-1].is_zero():
            coeffs = coeffs[:-1]
        object.__setattr__(self, 'coeffs', coeffs)

    @classmethod
    def constant(cls, value: CMatrix) -> 'TailRule':
        return cls((value,))

    @property
    def dim(self) -> int:
        return self.coeffs[0].dim

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> CMatrix:
        return self.coeffs[-1]

    def evaluate(self, n: int) -> CMatrix:
        acc = self.coeffs[-1]
        for coeff in reversed(self.coeffs[:-1]):
            acc = acc * float(n) + coeff
        return acc

    def _padded(self, other: 'TailRule') -> t.Tuple[t.List[CMatrix], t.List[CMatrix]]:
        size = max(len(self.coeffs), len(other.coeffs))
        zero = CMatrix.zeros(self.dim)
        mine = list(self.coeffs) + [zero] * (size - len(self.coeffs))
        theirs = list(other.coeffs) + [zero] * (size - len(other.coeffs))
        return mine, theirs

    def __add__(self, other: 'TailRule') -> 'TailRule':
        mine, theirs = self._padded(other)
        return TailRule(tuple(a + b for a, b in zip(mine, theirs)))

    def __sub__(self, other: 'TailRule') -> 'TailRule':
        mine, theirs = self._padded(other)
        return TailRule(tuple(a - b for a, b in zip(mine, theirs)))

    def __matmul__(self, other: 'TailRule') -> 'TailRule':
        out = [CMatrix.zeros(self.dim)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + a @ b
        return TailRule(tuple(out))

    def scale(self, scalar: numbers.Number) -> 'TailRule':
        return TailRule(tuple(c * scalar for c in self.coeffs))

    def adjoint(self) -> 'TailRule':
        return TailRule(tuple(c.adjoint() for c in self.coeffs))

    def is_zero(self) -> bool:
        return self.degree == 0 and self.coeffs[0].is_zero()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TailRule):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and all(
            a == b for a, b in zip(self.coeffs, other.coeffs))

    __hash__ = None  # type: ignore[assignment]


@dataclasses.dataclass(frozen=True)
class LocalAlgebra:
    """A locally C*-algebra A with fibers A_a = A / I_a.

    Attributes:
        index (IndexSet): the seminorm index set.
        fiber_dims (immutabledict): label -> d_a for the finite model.
        common_dim (int): the shared fiber dimension of the countable model.

    Example:
        >>> alg = LocalAlgebra.finite({'a1': 2, 'a2': 1})
        >>> seminorm(alg.identity(), 'a1')
        1.0
    """
    index: IndexSet
    fiber_dims: immutabledict = immutabledict()
    common_dim: t.Optional[int] = None

    def __post_init__(self):
        if self.index.is_countable:
            if self.common_dim is None or self.common_dim < 1:
                raise ValueError('The countable model needs a fiber dimension >= 1.')
        else:
            if set(self.fiber_dims) != set(self.index.labels):
                raise ValueError('fiber_dims must give a dimension for every label.')
            if any(int(d) < 1 for d in self.fiber_dims.values()):
                raise ValueError('Every fiber dimension must be >= 1.')

    @classmethod
    def finite(cls, fibers: t.Mapping[str, int]) -> 'LocalAlgebra':
        dims = immutabledict({str(k): int(v) for k, v in fibers.items()})
        return cls(FiniteIndex(tuple(dims)), fiber_dims=dims)

    @classmethod
    def countable(cls, dim: int, prefix_len: int) -> 'LocalAlgebra':
        return cls(CountableIndex(prefix_len), common_dim=int(dim))

    @property
    def is_countable(self) -> bool:
        return self.index.is_countable

    def indices(self) -> t.Tuple[Index, ...]:
        """The explicitly stored indices, in iteration order."""
        return self.index.prefix()

    def dim(self, index: Index) -> int:
        alpha = self.index.normalize(index)
        if self.is_countable:
            return self.common_dim
        return self.fiber_dims[alpha]

    def amplified(self, k: int) -> 'LocalAlgebra':
        """Same index set with every fiber dimension multiplied by k."""
        if self.is_countable:
            return LocalAlgebra(self.index, common_dim=self.common_dim * k)
        return LocalAlgebra(self.index,
                            fiber_dims=immutabledict({a: d * k for a, d in self.fiber_dims.items()}))

    def element(self, components: t.Mapping[Index, CMatrix],
                tail: t.Optional[t.Union[TailRule, t.Sequence[CMatrix]]] = None) -> 'LocalElement':
        comps = immutabledict({self.index.normalize(k): v for k, v in components.items()})
        if tail is not None and not isinstance(tail, TailRule):
            tail = TailRule(tuple(tail))
        return LocalElement(self, comps, tail)

    def from_function(self, component: t.Callable[[Index], CMatrix],
                      tail: t.Optional[TailRule] = None) -> 'LocalElement':
        return LocalElement(
            self, immutabledict({a: component(a) for a in self.indices()}), tail)

    def scalar(self, z: numbers.Number) -> 'LocalElement':
        tail = TailRule.constant(CMatrix.identity(self.common_dim) * z) if self.is_countable else None
        return self.from_function(lambda a: CMatrix.identity(self.dim(a)) * z, tail)

    def identity(self) -> 'LocalElement':
        return self.scalar(1.0)

    def zero(self) -> 'LocalElement':
        return self.scalar(0.0)


@dataclasses.dataclass(frozen=True, eq=False)
class LocalElement:
    """An element a of A, stored fiber by fiber.

    Arithmetic is componentwise; `@` is the algebra product and `*` multiplies
    by a complex scalar.
    """
    parent: LocalAlgebra
    components: immutabledict
    tail: t.Optional[TailRule] = None

    __array_ufunc__ = None

    def __post_init__(self):
        parent = self.parent
        if set(self.components) != set(parent.indices()):
            raise ValueError('Components must be given for exactly the stored indices.')
        for alpha, comp in self.components.items():
            if comp.dim != parent.dim(alpha):
                raise ValueError(f'Component at {alpha!r} has dimension {comp.dim}, '
                                 f'expected {parent.dim(alpha)}.')
        if parent.is_countable:
            tail = self.tail if self.tail is not None else TailRule.constant(
                CMatrix.zeros(parent.common_dim))
            if tail.dim != parent.common_dim:
                raise ValueError('Tail dimension does not match the algebra.')
            object.__setattr__(self, 'tail', tail)
        elif self.tail is not None:
            raise ValueError('Elements of a finite model have no tail.')

    @property
    def tail_degree(self) -> int:
        """K_eff of the tail, 0 in the finite model."""
        return self.tail.degree if self.tail is not None else 0

    def at(self, index: Index) -> CMatrix:
        alpha = self.parent.index.normalize(index)
        if alpha in self.components:
            return self.components[alpha]
        return self.tail.evaluate(alpha)

    def _check(self, other: 'LocalElement') -> None:
        if not isinstance(other, LocalElement) or (
                other.parent is not self.parent and other.parent != self.parent):
            raise AlgebraMismatch('Operands belong to different algebras.')

    def _combine(self, other: 'LocalElement',
                 op: t.Callable[[t.Any, t.Any], t.Any]) -> 'LocalElement':
        self._check(other)
        comps = immutabledict({a: op(m, other.components[a]) for a, m in self.components.items()})
        tail = op(self.tail, other.tail) if self.tail is not None else None
        return LocalElement(self.parent, comps, tail)

    def __add__(self, other: 'LocalElement') -> 'LocalElement':
        return self._combine(other, lambda x, y: x + y)

    def __sub__(self, other: 'LocalElement') -> 'LocalElement':
        return self._combine(other, lambda x, y: x - y)

    def __matmul__(self, other: 'LocalElement') -> 'LocalElement':
        if not isinstance(other, LocalElement):
            return NotImplemented
        return self._combine(other, lambda x, y: x @ y)

    def __mul__(self, scalar: numbers.Number) -> 'LocalElement':
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        comps = immutabledict({a: m * scalar for a, m in self.components.items()})
        tail = self.tail.scale(scalar) if self.tail is not None else None
        return LocalElement(self.parent, comps, tail)

    __rmul__ = __mul__

    def __neg__(self) -> 'LocalElement':
        return self * -1.0

    def adjoint(self) -> 'LocalElement':
        comps = immutabledict({a: m.adjoint() for a, m in self.components.items()})
        tail = self.tail.adjoint() if self.tail is not None else None
        return LocalElement(self.parent, comps, tail)

    def is_zero(self) -> bool:
        """Exact test: every stored component and the tail vanish."""
        return all(m.is_zero() for m in self.components.values()) and (
            self.tail is None or self.tail.is_zero())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LocalElement):
            return NotImplemented
        return (self.parent == other.parent and
                all(m == other.components[a] for a, m in self.components.items()) and
                self.tail == other.tail)

    __hash__ = None  # type: ignore[assignment]


@dataclasses.dataclass(frozen=True)
class Ideal:
    """I_S = {a : a_s = 0 for every s in S}; I_a for S = {a}."""
    parent: LocalAlgebra
    kernel_indices: t.FrozenSet[Index]

    def __post_init__(self):
        kernel = frozenset(self.parent.index.normalize(a) for a in self.kernel_indices)
        object.__setattr__(self, 'kernel_indices', kernel)

    def contains(self, a: LocalElement) -> bool:
        if a.parent != self.parent:
            raise AlgebraMismatch('Element and ideal belong to different algebras.')
        return all(a.at(alpha).is_zero() for alpha in self.kernel_indices)

    def project(self, a: LocalElement) -> LocalElement:
        """a*u with u the unit of the ideal; lands in I_S."""
        return a @ approximate_identity(self)


def _check_horizon(horizon: int) -> None:
    if isinstance(horizon, bool) or not isinstance(horizon, numbers.Integral) or horizon < 1:
        raise SpecError(f'horizon must be a positive integer, got {horizon!r}.')


def _tail_seminorm_indices(a: LocalElement, horizon: int) -> t.Iterable[int]:
    start = a.parent.index.prefix_len + 1
    return range(start, start + horizon)


def seminorm(a: LocalElement, index: Index) -> float:
    """P_a(a): the norm of the component of `a` at `index`.

    Raises:
        UnknownIndex: if `index` is not in the index set.
    """
    return mnorm(a.at(index))


def sup_norm(a: LocalElement) -> float:
    """|a|^s = sup of all seminorms, or `UNBOUNDED` (math.inf).

    Exact in both models: a tail of effective degree >= 1 grows without bound,
    a constant tail contributes its single norm.
    """
    prefix = max(mnorm(m) for m in a.components.values())
    if a.tail is None:
        return prefix
    if a.tail.degree >= 1:
        return UNBOUNDED
    return max(prefix, mnorm(a.tail.coeffs[0]))


def is_in_bounded_part(a: LocalElement) -> bool:
    """True iff a lies in A^s."""
    return math.isfinite(sup_norm(a))


def _merge_spectra(values: t.Iterable[complex], tol: float) -> t.Tuple[complex, ...]:
    ordered = sorted(values, key=lambda z: (z.real, z.imag))
    kept: t.List[complex] = []
    for z in ordered:
        if kept and np.min(np.abs(np.asarray(kept) - z)) <= tol * (1.0 + abs(z)):
            continue
        kept.append(z)
    return tuple(kept)


def _tail_components(a: LocalElement, horizon: int) -> t.Tuple[t.List[CMatrix], bool]:
    """The matrices that decide spectral questions for the tail, and exactness."""
    if a.tail is None:
        return [], True
    if a.tail.degree == 0:
        return [a.tail.coeffs[0]], True
    return [a.tail.evaluate(n) for n in _tail_seminorm_indices(a, horizon)], False


def spectrum(a: LocalElement, horizon: int = DEFAULT_HORIZON,
             tol: float = DEFAULT_TOLERANCE) -> Verdict:
    """Sp(a) as the union of the fiber spectra.

    Returns:
        Verdict: (sorted tuple of complex numbers, exactness flag). For growing
        tails the union runs over n <= N + horizon and is flagged inexact.

    Raises:
        EigenFailure: propagated from the fiber eigensolver.
        SpecError: if `horizon` is not a positive integer.
    """
    _check_horizon(horizon)
    tail_matrices, exact = _tail_components(a, horizon)
    values: t.List[complex] = []
    for m in list(a.components.values()) + tail_matrices:
        values.extend(mspectrum(m, tol))
    return Verdict(_merge_spectra(values, tol), exact)


def is_hermitian(a: LocalElement, tol: float = DEFAULT_TOLERANCE) -> bool:
    """a = a*, componentwise; tails are decided coefficient by coefficient."""
    comps_ok = all(mis_hermitian(m, tol) for m in a.components.values())
    if a.tail is None:
        return comps_ok
    return comps_ok and all(mis_hermitian(c, tol) for c in a.tail.coeffs)


def is_positive(a: LocalElement, horizon: int = DEFAULT_HORIZON,
                tol: float = DEFAULT_TOLERANCE) -> Verdict:
    """a >= 0, checked fiber by fiber.

    A negative answer is always exact. For a tail of effective degree >= 1 a
    positive answer means: every coefficient is Hermitian, the leading one is
    positive and every fiber up to N + horizon is positive.

    Raises:
        SpecError: if `horizon` is not a positive integer.
    """
    _check_horizon(horizon)
    if not all(mis_positive(m, tol) for m in a.components.values()):
        return Verdict(False, True)
    if a.tail is None:
        return Verdict(True, True)
    if a.tail.degree == 0:
        return Verdict(mis_positive(a.tail.coeffs[0], tol), True)
    if not all(mis_hermitian(c, tol) for c in a.tail.coeffs):
        return Verdict(False, True)
    if not mis_positive(a.tail.leading, tol):
        return Verdict(False, True)
    for n in _tail_seminorm_indices(a, horizon):
        if not mis_positive(a.tail.evaluate(n), tol):
            return Verdict(False, True)
    return Verdict(True, False)


def is_leq(a: LocalElement, b: LocalElement, horizon: int = DEFAULT_HORIZON,
           tol: float = DEFAULT_TOLERANCE) -> Verdict:
    """a <= b, i.e. b - a >= 0."""
    return is_positive(b - a, horizon, tol)


def _require_constant_tail(a: LocalElement, operation: str) -> None:
    if a.tail is not None and a.tail.degree >= 1:
        logger.debug('%s refused a tail of degree %d', operation, a.tail.degree)
        raise UnsupportedTail(
            f'{operation} of a tail of degree {a.tail.degree} is not representable.')


def sqrt(a: LocalElement, tol: float = DEFAULT_TOLERANCE) -> LocalElement:
    """The positive square root, computed fiber by fiber.

    Raises:
        UnsupportedTail: for a tail of effective degree >= 1.
        NotPositive: if some fiber is not positive.
    """
    _require_constant_tail(a, 'Square root')

    def root(alpha: Index, m: CMatrix) -> CMatrix:
        try:
            return msqrt(m, tol)
        except NotPositive as e:
            raise NotPositive(f'Element is not positive at index {alpha!r}.') from e

    comps = immutabledict({alpha: root(alpha, m) for alpha, m in a.components.items()})
    tail = TailRule.constant(root('tail', a.tail.coeffs[0])) if a.tail is not None else None
    return LocalElement(a.parent, comps, tail)


def inverse(a: LocalElement, tol: float = DEFAULT_TOLERANCE) -> LocalElement:
    """The inverse, computed fiber by fiber.

    Raises:
        UnsupportedTail: for a tail of effective degree >= 1.
        Singular: naming the first index where the component is not invertible.
    """
    _require_constant_tail(a, 'Inverse')

    def invert(alpha: Index, m: CMatrix) -> CMatrix:
        try:
            return minverse(m, tol)
        except Singular as e:
            raise Singular(f'Element is not invertible at index {alpha!r}: {e}', index=alpha) from e

    comps = immutabledict({alpha: invert(alpha, m) for alpha, m in a.components.items()})
    tail = TailRule.constant(invert('tail', a.tail.coeffs[0])) if a.tail is not None else None
    return LocalElement(a.parent, comps, tail)


def approximate_identity(ideal: Ideal) -> LocalElement:
    """The unit u of I_S: zero on S, the identity elsewhere.

    The constant net {u} is an exact approximate identity of the ideal.

    Raises:
        EmptyKernel: if S is empty.
        UnsupportedTail: if S reaches past the stored prefix of a countable model.
    """
    kernel = ideal.kernel_indices
    if not kernel:
        raise EmptyKernel('An approximate identity needs a nonempty kernel set.')
    algebra = ideal.parent
    stored = set(algebra.indices())
    if not kernel <= stored:
        raise UnsupportedTail(f'Kernel indices {sorted(kernel - stored)} lie in the tail.')

    def unit(alpha: Index) -> CMatrix:
        d = algebra.dim(alpha)
        return CMatrix.zeros(d) if alpha in kernel else CMatrix.identity(d)

    tail = TailRule.constant(CMatrix.identity(algebra.common_dim)) if algebra.is_countable else None
    return algebra.from_function(unit, tail)


def quotient_map(a: LocalElement, index: Index) -> CMatrix:
    """a_a = a + I_a, evaluated through the tail rule when needed."""
    return a.at(index)
