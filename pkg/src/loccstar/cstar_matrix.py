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
"""Dense complex matrices and the C*-algebra primitives of one fiber M_d(C)."""
import dataclasses
import logging
import numbers

import numpy as np
import scipy.linalg
import typing as t

from .constant import DEFAULT_TOLERANCE
from .exceptions import EigenFailure, InvalidMatrix, NotPositive, Singular

logger = logging.getLogger(__name__)


@dataclasses.dataclass(frozen=True, eq=False)
class CMatrix:
    """An immutable d x d complex matrix with value semantics.

    Attributes:
        entries (np.ndarray): read-only complex128 array of shape (d, d).

    Example:
        >>> a = CMatrix([[0, 2], [0, 0]])
        >>> mnorm(a)
        2.0
    """
    entries: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        arr = np.array(self.entries, dtype=np.complex128)
        _check_square_finite(arr)
        arr.setflags(write=False)
        object.__setattr__(self, 'entries', arr)

    @classmethod
    def _wrap(cls, arr: np.ndarray) -> 'CMatrix':
        # Takes ownership of a freshly computed array without copying it.
        _check_square_finite(arr)
        arr.setflags(write=False)
        obj = object.__new__(cls)
        object.__setattr__(obj, 'entries', arr)
        return obj

    @classmethod
    def identity(cls, dim: int) -> 'CMatrix':
        return cls._wrap(np.eye(dim, dtype=np.complex128))

    @classmethod
    def zeros(cls, dim: int) -> 'CMatrix':
        return cls._wrap(np.zeros((dim, dim), dtype=np.complex128))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def adjoint(self) -> 'CMatrix':
        return CMatrix._wrap(np.ascontiguousarray(self.entries.conj().T))

    def is_zero(self) -> bool:
        return not self.entries.any()

    def allclose(self, other: 'CMatrix', tol: float = DEFAULT_TOLERANCE) -> bool:
        """True if mnorm(self - other) <= tol * (1 + max norm of the two)."""
        scale = 1.0 + max(mnorm(self), mnorm(other))
        return mnorm(self - other) <= tol * scale

    def __add__(self, other: 'CMatrix') -> 'CMatrix':
        return CMatrix._wrap(self.entries + _entries_of(other, self.dim))

    def __sub__(self, other: 'CMatrix') -> 'CMatrix':
        return CMatrix._wrap(self.entries - _entries_of(other, self.dim))

    def __neg__(self) -> 'CMatrix':
        return CMatrix._wrap(-self.entries)

    def __matmul__(self, other: 'CMatrix') -> 'CMatrix':
        return CMatrix._wrap(self.entries @ _entries_of(other, self.dim))

    def __mul__(self, scalar: numbers.Number) -> 'CMatrix':
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return CMatrix._wrap(self.entries * complex(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: numbers.Number) -> 'CMatrix':
        return self * (1.0 / complex(scalar))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, CMatrix):
            return NotImplemented
        return bool(np.array_equal(self.entries, other.entries))

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f'CMatrix(dim={self.dim}, entries={self.entries.tolist()!r})'

    def to_json(self) -> t.List[t.List[t.List[float]]]:
        """Rows of [re, im] pairs."""
        return [[[float(z.real), float(z.imag)] for z in row] for row in self.entries]

    @classmethod
    def from_json(cls, rows: t.Sequence[t.Sequence[t.Sequence[float]]]) -> 'CMatrix':
        try:
            arr = np.array([[complex(re, im) for re, im in row] for row in rows],
                           dtype=np.complex128)
        except (TypeError, ValueError) as e:
            raise InvalidMatrix(f'Matrix entries must be [re, im] pairs: {e}') from e
        return cls(arr)


def _check_square_finite(arr: np.ndarray) -> None:
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InvalidMatrix(f'Expected a non-empty square matrix, got shape {arr.shape}.')
    if not np.isfinite(arr).all():
        raise InvalidMatrix('Matrix entries must be finite.')


def _entries_of(other: CMatrix, dim: int) -> np.ndarray:
    if other.dim != dim:
        raise InvalidMatrix(f'Dimension mismatch: {dim} vs {other.dim}.')
    return other.entries


def mnorm(a: CMatrix) -> float:
    """The fiber C*-norm: the largest singular value."""
    return float(scipy.linalg.svdvals(a.entries, check_finite=False)[0])


def _scale(a: CMatrix) -> float:
    return 1.0 + mnorm(a)


def mis_hermitian(a: CMatrix, tol: float = DEFAULT_TOLERANCE) -> bool:
    return mnorm(a - a.adjoint()) <= tol * _scale(a)


def _symmetrized(a: CMatrix) -> np.ndarray:
    arr = a.entries
    return (arr + arr.conj().T) / 2


def mspectrum(a: CMatrix, tol: float = DEFAULT_TOLERANCE) -> t.Tuple[complex, ...]:
    """Eigenvalues of `a` with multiplicity, sorted by (real, imag).

    Hermitian input (within `tol`) is symmetrized and solved with the Hermitian
    eigensolver, so the returned values are exactly real.

    Raises:
        EigenFailure: if LAPACK does not converge.
    """
    try:
        if mis_hermitian(a, tol):
            values = scipy.linalg.eigvalsh(_symmetrized(a), check_finite=False)
            spectrum = [complex(float(v), 0.0) for v in values]
        else:
            values = scipy.linalg.eigvals(a.entries, check_finite=False)
            spectrum = [complex(v) for v in values]
    except (scipy.linalg.LinAlgError, ValueError) as e:
        logger.error(f'LAPACK eigvals failed on a {a.dim}x{a.dim} matrix: {e}')
        raise EigenFailure(f'Eigenvalue computation failed for a {a.dim}x{a.dim} matrix') from e
    return tuple(sorted(spectrum, key=lambda z: (z.real, z.imag)))


def mpositivity_margin(a: CMatrix, tol: float = DEFAULT_TOLERANCE) -> float:
    """Signed slack of the positivity test; `a` passes iff the result is >= 0.

    The slack is the smaller of the Hermitian slack
    tol*(1+|a|) - |a - a*| and the spectral slack lambda_min + tol*(1+|a|).
    """
    allowance = tol * _scale(a)
    hermitian_slack = allowance - mnorm(a - a.adjoint())
    if hermitian_slack < 0:
        return hermitian_slack
    try:
        lowest = float(scipy.linalg.eigvalsh(_symmetrized(a), check_finite=False)[0])
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise EigenFailure('Hermitian eigenvalue computation failed') from e
    return min(hermitian_slack, lowest + allowance)


def mis_positive(a: CMatrix, tol: float = DEFAULT_TOLERANCE) -> bool:
    """True iff a is Hermitian and Sp(a) is in [0, inf), both within tol*(1+|a|)."""
    return mpositivity_margin(a, tol) >= 0


def msqrt(a: CMatrix, tol: float = DEFAULT_TOLERANCE) -> CMatrix:
    """The unique positive square root of a positive matrix.

    Raises:
        NotPositive: if `a` fails `mis_positive` at `tol`.
    """
    if not mis_positive(a, tol):
        raise NotPositive(f'Matrix of dimension {a.dim} is not positive.')
    values, vectors = scipy.linalg.eigh(_symmetrized(a), check_finite=False)
    roots = np.sqrt(np.clip(values, 0.0, None))
    return CMatrix._wrap((vectors * roots) @ vectors.conj().T)


def minverse(a: CMatrix, tol: float = DEFAULT_TOLERANCE) -> CMatrix:
    """Inverse of `a`.

    Raises:
        Singular: if the smallest singular value is <= tol.
    """
    smallest = float(scipy.linalg.svdvals(a.entries, check_finite=False)[-1])
    if smallest <= tol:
        logger.debug(f'Refusing to invert: smallest singular value {smallest:.3e}.')
        raise Singular(f'Smallest singular value {smallest:.3e} is below {tol:.1e}.')
    return CMatrix._wrap(scipy.linalg.inv(a.entries, check_finite=False))
