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
"""Seeded random models and the property-based verification suite.

Every property is a function of a `RandomModels` instance that returns an
`Outcome`: a signed margin (the trial passes iff it is >= 0), whether the
verdicts it used were exact, and whether the trial was skipped as degenerate.
Trial t of the property at registry position p draws from
SeedSequence(seed, spawn_key=(p, t)), so serial and parallel runs agree.
"""
import dataclasses
import json
import logging
import math

import numpy as np
import pandas as pd
import scipy.linalg
import typing as t
from concurrent.futures import ProcessPoolExecutor

from .config import TrialConfig, thread_budget
from .constant import PROPERTY_IDS, property_trial_scale
from .cstar_matrix import CMatrix, mnorm, mpositivity_margin
from .exceptions import LocCStarError
from .hilbert_module import (
    HilbertModule,
    ModuleVector,
    cauchy_schwarz_gap,
    fiber_module_norm,
    in_kernel_submodule,
    inner,
    is_in_bounded_part as vector_is_bounded,
    module_seminorm,
    quotient_vector,
    smooth,
    stack,
    sup_module_norm,
)
from .local_algebra import (
    Ideal,
    Index,
    LocalAlgebra,
    LocalElement,
    TailRule,
    approximate_identity,
    inverse,
    is_hermitian,
    is_in_bounded_part,
    seminorm,
    spectrum,
    sqrt,
    sup_norm,
)
from .operator_algebra import (
    ModuleOperator,
    adjoint,
    apply,
    compose,
    is_fiber_hermitian,
    op_is_positive,
    op_is_self_adjoint,
    op_seminorm,
    op_spectrum,
    op_sup_norm,
    quotient_operator,
)

logger = logging.getLogger(__name__)

# Countable-model tail degrees 0, 1 and 2 are drawn with these weights.
TAIL_DEGREE_WEIGHTS = (0.6, 0.3, 0.1)
# Eq3.6 passes only if the sampled sup reaches this share of P^_a(T) ...
TIGHTNESS_RATIO = 0.8
# ... on at least this share of its trials.
TIGHTNESS_QUORUM = 0.95
DEGENERATE = 1e-12
MAX_FAILING_TRIALS = 10
# Random vectors x tried against <Tx, x> >= 0 for one positive T.
QUADRATIC_FORM_SAMPLES = 100


class RandomModels:
    """Random algebras, elements, vectors and operators drawn from one generator.

    Matrix entries have independent standard Gaussian real and imaginary parts.
    """

    def __init__(self, rng: np.random.Generator, cfg: TrialConfig):
        self.rng = rng
        self.cfg = cfg

    @property
    def eps(self) -> float:
        return self.cfg.tolerance

    def loose(self, magnitude: float) -> float:
        return 10.0 * self.eps * (1.0 + magnitude)

    def tight(self, magnitude: float) -> float:
        return 0.1 * self.eps * (1.0 + magnitude)

    def algebra(self, model: t.Optional[str] = None) -> LocalAlgebra:
        cfg = self.cfg
        if model is None:
            model = 'finite' if self.rng.random() < 0.5 else 'tail'
        if model == 'finite':
            count = int(self.rng.integers(1, cfg.max_fibers + 1))
            return LocalAlgebra.finite(
                {f'a{i + 1}': int(self.rng.integers(1, cfg.max_dim + 1)) for i in range(count)})
        return LocalAlgebra.countable(int(self.rng.integers(1, cfg.max_dim + 1)), cfg.prefix_len)

    def rank(self) -> int:
        return int(self.rng.integers(1, self.cfg.max_rank + 1))

    def scalar(self) -> complex:
        return complex(self.rng.standard_normal(), self.rng.standard_normal())

    def matrix(self, dim: int) -> CMatrix:
        rng = self.rng
        return CMatrix._wrap(rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))

    def unitary(self, dim: int) -> np.ndarray:
        q, r = scipy.linalg.qr(self.matrix(dim).entries)
        phases = np.diagonal(r) / np.abs(np.diagonal(r))
        return q * phases

    def definite_matrix(self, dim: int, low: float = 0.25, high: float = 2.0) -> CMatrix:
        """u diag(l) u* with eigenvalues l drawn from [low, high]."""
        u = self.unitary(dim)
        values = self.rng.uniform(low, high, size=dim)
        return CMatrix._wrap((u * values) @ u.conj().T)

    def semidefinite_matrix(self, dim: int, high: float = 2.0) -> CMatrix:
        """u diag(l) u* with l in [0, high]; each l is zero with probability 1/3."""
        u = self.unitary(dim)
        values = self.rng.uniform(0.0, high, size=dim)
        values[self.rng.random(dim) < 1.0 / 3.0] = 0.0
        return CMatrix._wrap((u * values) @ u.conj().T)

    def tail_degree(self) -> int:
        return int(self.rng.choice(len(TAIL_DEGREE_WEIGHTS), p=TAIL_DEGREE_WEIGHTS))

    def element(self, algebra: LocalAlgebra, bounded: bool = False,
                degree: t.Optional[int] = None) -> LocalElement:
        comps = {a: self.matrix(algebra.dim(a)) for a in algebra.indices()}
        tail = None
        if algebra.is_countable:
            if degree is None:
                degree = 0 if bounded else self.tail_degree()
            tail = TailRule(tuple(self.matrix(algebra.common_dim) for _ in range(degree + 1)))
        return algebra.element(comps, tail)

    def positive(self, algebra: LocalAlgebra, bounded: bool = False) -> LocalElement:
        """b* b, positive by construction."""
        b = self.element(algebra, bounded)
        return b.adjoint() @ b

    def hermitian(self, algebra: LocalAlgebra, bounded: bool = False) -> LocalElement:
        b = self.element(algebra, bounded)
        return (b + b.adjoint()) * 0.5

    def definite(self, algebra: LocalAlgebra) -> LocalElement:
        """A positive element with every fiber spectrum in [0.25, 2]."""
        comps = {a: self.definite_matrix(algebra.dim(a)) for a in algebra.indices()}
        tail = TailRule.constant(self.definite_matrix(algebra.common_dim)) \
            if algebra.is_countable else None
        return algebra.element(comps, tail)

    def semidefinite(self, algebra: LocalAlgebra) -> LocalElement:
        """A positive element with singular fibers, constant tail in the countable model."""
        comps = {a: self.semidefinite_matrix(algebra.dim(a)) for a in algebra.indices()}
        tail = TailRule.constant(self.semidefinite_matrix(algebra.common_dim)) \
            if algebra.is_countable else None
        return algebra.element(comps, tail)

    def kernel(self, algebra: LocalAlgebra) -> t.FrozenSet[Index]:
        """A random nonempty set of stored indices."""
        indices = algebra.indices()
        size = int(self.rng.integers(1, len(indices) + 1))
        chosen = self.rng.choice(len(indices), size=size, replace=False)
        return frozenset(indices[int(i)] for i in chosen)

    def stored_index(self, algebra: LocalAlgebra) -> Index:
        indices = algebra.indices()
        return indices[int(self.rng.integers(len(indices)))]

    def check_index(self, algebra: LocalAlgebra) -> Index:
        choices = check_indices(algebra, self.cfg)
        return choices[int(self.rng.integers(len(choices)))]

    def module(self, algebra: LocalAlgebra, ideal: bool = False) -> HilbertModule:
        if ideal:
            return HilbertModule.ideal(algebra, self.kernel(algebra))
        return HilbertModule.free(algebra, self.rank())

    def vector(self, module: HilbertModule, bounded: bool = False) -> ModuleVector:
        algebra = module.algebra
        entries = [self.element(algebra, bounded) for _ in range(module.rank)]
        if module.kernel_indices:
            ideal = Ideal(algebra, module.kernel_indices)
            entries = [ideal.project(e) for e in entries]
        return module.vector(entries)

    def operator(self, module: HilbertModule, bounded: bool = False) -> ModuleOperator:
        k = module.rank
        return ModuleOperator(module, tuple(
            tuple(self.element(module.algebra, bounded) for _ in range(k)) for _ in range(k)))

    def self_adjoint_operator(self, module: HilbertModule, bounded: bool = False) -> ModuleOperator:
        q = self.operator(module, bounded)
        return (q + adjoint(q)) * 0.5

    def positive_operator(self, module: HilbertModule, bounded: bool = False) -> ModuleOperator:
        q = self.operator(module, bounded)
        return compose(adjoint(q), q)


def generate(kind: str, cfg: TrialConfig, rng: t.Optional[np.random.Generator] = None) -> t.Any:
    """One random instance of `kind`, deterministic in cfg.seed when rng is None.

    Raises:
        ValueError: for an unknown kind.
    """
    models = RandomModels(rng if rng is not None else np.random.default_rng(cfg.seed), cfg)

    def on_module(make: t.Callable[[HilbertModule], t.Any]) -> t.Callable[[], t.Any]:
        return lambda: make(models.module(models.algebra()))

    makers = {
        'algebra': models.algebra,
        'element': lambda: models.element(models.algebra()),
        'positive_element': lambda: models.positive(models.algebra()),
        'vector': on_module(models.vector),
        'operator': on_module(models.operator),
        'self_adjoint_operator': on_module(models.self_adjoint_operator),
        'positive_operator': on_module(models.positive_operator),
    }
    if kind not in makers:
        raise ValueError(f'Unknown kind {kind!r}; expected one of {sorted(makers)}.')
    return makers[kind]()


GENERATOR_KINDS = ('algebra', 'element', 'positive_element', 'vector', 'operator',
                   'self_adjoint_operator', 'positive_operator')


def check_indices(algebra: LocalAlgebra, cfg: TrialConfig) -> t.Tuple[Index, ...]:
    """Indices a property is checked at: every stored index plus, in the
    countable model, the first, middle and last tail fiber of the horizon."""
    stored = algebra.indices()
    if not algebra.is_countable:
        return stored
    n = algebra.index.prefix_len
    tail = sorted({n + 1, n + max(1, cfg.horizon // 2), n + cfg.horizon})
    return stored + tuple(tail)


def _decisive(a: LocalElement, horizon: int) -> t.Tuple[t.List[t.Tuple[t.Any, CMatrix]], bool]:
    """(where, matrix) pairs whose positivity decides a >= 0, and exactness.

    `where` is a stored index, 'tail' for the constant or leading tail
    coefficient, or the tail fiber n beyond the prefix.
    """
    pairs: t.List[t.Tuple[t.Any, CMatrix]] = list(a.components.items())
    if a.tail is None:
        return pairs, True
    if a.tail.degree == 0:
        return pairs + [('tail', a.tail.coeffs[0])], True
    start = a.parent.index.prefix_len + 1
    pairs.append(('tail', a.tail.leading))
    pairs.extend((n, a.tail.evaluate(n)) for n in range(start, start + horizon))
    return pairs, False


def positivity_margin(a: LocalElement, eps: float, horizon: int) -> t.Tuple[float, bool]:
    """Signed slack of the positivity test on `a` and whether it is exact."""
    pairs, exact = _decisive(a, horizon)
    margin = min(mpositivity_margin(m, eps) for _, m in pairs)
    if not exact:
        margin = min([margin] + [eps * (1.0 + mnorm(c)) - mnorm(c - c.adjoint())
                                 for c in a.tail.coeffs])
    # A failed check is a concrete witness.
    return margin, exact or margin < 0


def _hausdorff(xs: t.Sequence[complex], ys: t.Sequence[complex]) -> float:
    x = np.asarray(xs, dtype=np.complex128)
    y = np.asarray(ys, dtype=np.complex128)
    d = np.abs(x[:, None] - y[None, :])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


class Outcome(t.NamedTuple):
    margin: float = 0.0
    exact: bool = True
    skipped: bool = False
    tight: t.Optional[bool] = None
    error: t.Optional[str] = None


class Margins:
    """Collects the signed slack of every assertion in one trial."""

    def __init__(self, models: RandomModels):
        self.models = models
        self.values: t.List[float] = []
        self.exact = True

    def upper(self, value: float, bound: float, allowance: float) -> None:
        """value <= bound + allowance."""
        self.values.append(float(bound + allowance - value))

    def lower(self, value: float, bound: float, allowance: float) -> None:
        """value >= bound - allowance."""
        self.values.append(float(value - bound + allowance))

    def close(self, value: float, target: float, allowance: float) -> None:
        self.values.append(float(allowance - abs(value - target)))

    def holds(self, condition: bool) -> None:
        self.values.append(0.0 if condition else -1.0)

    def positive(self, a: LocalElement, eps: t.Optional[float] = None) -> float:
        eps = 10.0 * self.models.eps if eps is None else eps
        margin, exact = positivity_margin(a, eps, self.models.cfg.horizon)
        self.exact = self.exact and exact
        self.values.append(float(margin))
        return margin

    def outcome(self, tight: t.Optional[bool] = None) -> Outcome:
        return Outcome(min(self.values) if self.values else 0.0, self.exact, tight=tight)


PropertyCheck = t.Callable[[RandomModels], Outcome]
PROPERTY_CHECKS: t.Dict[str, PropertyCheck] = {}


def register(property_id: str) -> t.Callable[[PropertyCheck], PropertyCheck]:
    def wrap(check: PropertyCheck) -> PropertyCheck:
        if property_id not in property_trial_scale:
            raise KeyError(f'{property_id} is not in the property registry.')
        PROPERTY_CHECKS[property_id] = check
        return check
    return wrap


# -- Locally C*-algebras ------------------------------------------------------

def _positive_cone(m: RandomModels, alg: LocalAlgebra, out: Margins) -> None:
    """Sums and nonnegative multiples of positives are positive; h and -h are
    both positive only when every seminorm of h is within tolerance."""
    a, b = m.positive(alg), m.positive(alg)
    out.positive(a + b)
    out.positive(a * float(m.rng.uniform(0.0, 4.0)))
    h = m.hermitian(alg, bounded=True) * float(10.0 ** m.rng.uniform(-12.0, 0.0))
    horizon = m.cfg.horizon
    both = (positivity_margin(h, m.eps, horizon)[0] >= 0
            and positivity_margin(-h, m.eps, horizon)[0] >= 0)
    for alpha in check_indices(alg, m.cfg):
        p = seminorm(h, alpha)
        out.holds(not both or p <= m.loose(p))
    zero = alg.zero()
    out.holds(positivity_margin(zero, 0.0, horizon)[0] >= 0)
    out.holds(positivity_margin(-zero, 0.0, horizon)[0] >= 0)


def _separation(m: RandomModels, alg: LocalAlgebra, a: LocalElement, out: Margins) -> None:
    """The seminorms vanish together exactly at zero."""
    where = check_indices(alg, m.cfg)
    zero = a - a
    out.holds(zero.is_zero())
    out.holds(all(seminorm(zero, alpha) == 0.0 for alpha in where))
    # One stored component of a, everything else zero.
    spot = m.stored_index(alg)
    comps = {alpha: a.at(alpha) if alpha == spot else CMatrix.zeros(alg.dim(alpha))
             for alpha in alg.indices()}
    spike = alg.element(comps)
    out.holds(not spike.is_zero())
    seen = [seminorm(spike, alpha) > 0 for alpha in where]
    out.holds(seen == [alpha == spot for alpha in where])
    if alg.is_countable:
        # Zero prefix, nonzero tail of degree <= 2: one of the three tail indices sees it.
        comps = {alpha: CMatrix.zeros(alg.common_dim) for alpha in alg.indices()}
        tail_only = alg.element(comps, a.tail)
        largest = max(seminorm(tail_only, alpha) for alpha in where)
        out.holds(tail_only.is_zero() == (largest == 0.0))


@register('Def1.1-1')
def check_submultiplicative(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a, b = m.element(alg), m.element(alg)
    ab = a @ b
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        bound = seminorm(a, alpha) * seminorm(b, alpha)
        out.upper(seminorm(ab, alpha), bound, m.loose(bound))
    _separation(m, alg, a, out)
    return out.outcome()


@register('Def1.1-2')
def check_involution_isometry(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a = m.element(alg)
    star = a.adjoint()
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        p = seminorm(a, alpha)
        out.close(seminorm(star, alpha), p, m.tight(p))
    return out.outcome()


@register('Def1.1-3')
def check_cstar_identity(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a = m.element(alg)
    gram = a.adjoint() @ a
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        p2 = seminorm(a, alpha) ** 2
        out.close(seminorm(gram, alpha), p2, m.loose(p2))
    return out.outcome()


@register('Eq1.1')
def check_spectrum_union(m: RandomModels) -> Outcome:
    alg = m.algebra('finite')
    a = m.hermitian(alg) if m.rng.random() < 0.5 else m.element(alg)
    verdict = spectrum(a, m.cfg.horizon, m.eps)
    oracle = np.concatenate([np.linalg.eigvals(a.at(alpha).entries) for alpha in alg.indices()])
    out = Margins(m)
    out.holds(verdict.exact)
    out.upper(_hausdorff(verdict.value, oracle), 0.0, m.loose(float(np.abs(oracle).max())))
    return out.outcome()


@register('L1.1a')
def check_order_monotone(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a = m.positive(alg)
    c = m.element(alg)
    b = a + c.adjoint() @ c
    out = Margins(m)
    out.positive(b - a)
    for alpha in check_indices(alg, m.cfg):
        pb = seminorm(b, alpha)
        out.upper(seminorm(a, alpha), pb, m.loose(pb))
    _positive_cone(m, alg, out)
    return out.outcome()


@register('L1.1c')
def check_inverse_antitone(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a = m.definite(alg)
    c = m.element(alg, bounded=True)
    b = a + c.adjoint() @ c
    out = Margins(m)
    out.positive(inverse(a, m.eps) - inverse(b, m.eps))
    return out.outcome()


@register('L1.1d')
def check_congruence(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a = m.hermitian(alg)
    c = m.element(alg)
    b = a + c.adjoint() @ c
    d = m.element(alg)
    out = Margins(m)
    out.positive(d.adjoint() @ b @ d - d.adjoint() @ a @ d)
    return out.outcome()


@register('L1.2a')
def check_resolvent_contraction(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a = m.positive(alg, bounded=True)
    e = alg.identity()
    b = e + a * float(10.0 ** m.rng.uniform(-2.0, 1.0))
    out = Margins(m)
    # b >= e, so b is invertible with b^-1 <= e.
    out.positive(b - e)
    b_inv = inverse(b, m.eps)
    out.positive(e - b_inv)
    for alpha in check_indices(alg, m.cfg):
        out.upper(seminorm(b_inv, alpha), 1.0, m.loose(1.0))
    return out.outcome()


@register('L1.2b')
def check_cayley_bound(m: RandomModels) -> Outcome:
    alg = m.algebra()
    a = m.positive(alg, bounded=True)
    r = a @ inverse(alg.identity() + a, m.eps)
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        out.upper(seminorm(r, alpha), 1.0, m.loose(1.0))
    return out.outcome()


@register('L1.2c')
def check_unit_ball_complement(m: RandomModels) -> Outcome:
    alg = m.algebra()
    p = m.positive(alg, bounded=True)
    size = sup_norm(p)
    if size < DEGENERATE:
        return Outcome(skipped=True)
    a = p * float(m.rng.uniform(0.2, 1.0) / size)
    d = alg.identity() - a
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        out.upper(seminorm(d, alpha), 1.0, m.loose(1.0))
    return out.outcome()


@register('Rem1.1')
def check_square_root(m: RandomModels) -> Outcome:
    alg = m.algebra()
    h = m.semidefinite(alg)
    root = sqrt(h @ h, m.eps)
    q = m.positive(alg, bounded=True)
    q_root = sqrt(q, m.eps)
    out = Margins(m)
    out.positive(q_root)
    residual = q_root @ q_root - q
    recovered = root - h
    for alpha in check_indices(alg, m.cfg):
        # The root is only 1/2-Holder continuous at singular input.
        p = seminorm(h, alpha)
        out.upper(seminorm(recovered, alpha), 0.0, math.sqrt(m.loose(p * p)))
        out.upper(seminorm(residual, alpha), 0.0, m.loose(seminorm(q, alpha)))
    return out.outcome()


@register('ApproxId')
def check_approximate_identity(m: RandomModels) -> Outcome:
    alg = m.algebra()
    ideal = Ideal(alg, m.kernel(alg))
    u = approximate_identity(ideal)
    a = ideal.project(m.element(alg))
    out = Margins(m)
    out.holds(ideal.contains(a))
    out.upper(sup_norm(a - a @ u), 0.0, 0.0)
    out.positive(u, m.eps)
    for alpha in check_indices(alg, m.cfg):
        out.upper(seminorm(u, alpha), 1.0, 0.0)
    return out.outcome()


# -- Hilbert modules ----------------------------------------------------------

@register('Def2.1')
def check_inner_product_axioms(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg, ideal=m.rng.random() < 0.25)
    x, y, z = m.vector(module), m.vector(module), m.vector(module)
    a = m.element(alg)
    lam = m.scalar()
    xy, yx, xz = inner(x, y), inner(y, x), inner(x, z)
    identities = [
        (inner(x, y + z), xy + xz),
        (inner(x, y @ a), xy @ a),
        (inner(x @ a, y), a.adjoint() @ xy),
        (inner(x, y * lam), xy * lam),
        (xy.adjoint(), yx),
    ]
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        px, py, pz = (module_seminorm(v, alpha) for v in (x, y, z))
        scale = px * (py + pz) * (1.0 + seminorm(a, alpha) + abs(lam))
        for lhs, rhs in identities:
            out.upper(seminorm(lhs - rhs, alpha), 0.0, m.loose(scale))
    out.positive(inner(x, x))
    zero = module.zero()
    out.holds(inner(zero, zero).is_zero())
    out.holds(x.is_zero() or not inner(x, x).is_zero())
    return out.outcome()


@register('Eq2.1')
def check_cauchy_schwarz(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    x, y = m.vector(module), m.vector(module)
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        pxx = seminorm(inner(x, x), alpha)
        pyy = seminorm(inner(y, y), alpha)
        out.lower(cauchy_schwarz_gap(x, y, alpha), 0.0, m.loose(pxx * pyy))
        out.close(cauchy_schwarz_gap(x, x, alpha), 0.0, m.loose(pxx * pxx))
    return out.outcome()


@register('L2.2-1')
def check_module_seminorm(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    x, y = m.vector(module), m.vector(module)
    a = m.element(alg)
    lam = m.scalar()
    xa, sx, xy = x @ a, x * lam, x + y
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        px, py = module_seminorm(x, alpha), module_seminorm(y, alpha)
        bound = px * seminorm(a, alpha)
        out.upper(module_seminorm(xa, alpha), bound, m.loose(bound))
        out.close(module_seminorm(sx, alpha), abs(lam) * px, m.loose(abs(lam) * px))
        out.upper(module_seminorm(xy, alpha), px + py, m.loose(px + py))
    return out.outcome()


def _single_fiber_element(algebra: LocalAlgebra, where: t.Any, value: CMatrix) -> LocalElement:
    """The element equal to `value` at a stored index, or on the whole tail."""
    on_component = where in algebra.indices()
    comps = {a: value if on_component and a == where else CMatrix.zeros(algebra.dim(a))
             for a in algebra.indices()}
    tail = None
    if algebra.is_countable:
        tail = TailRule.constant(CMatrix.zeros(algebra.common_dim) if on_component else value)
    return algebra.element(comps, tail)


@register('L2.2-2')
def check_module_separation(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    checked = check_indices(alg, m.cfg)
    out = Margins(m)
    zero = module.zero()
    out.holds(zero.is_zero() and all(module_seminorm(zero, a) == 0.0 for a in checked))
    support = m.check_index(alg)
    entry = _single_fiber_element(alg, support, m.matrix(alg.dim(support)))
    entries = [alg.zero()] * module.rank
    entries[int(m.rng.integers(module.rank))] = entry
    x = module.vector(entries)
    out.holds(not x.is_zero() and module_seminorm(x, support) > 0.0)
    return out.outcome()


@register('L2.2-3')
def check_seminorm_duality(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    x = m.vector(module)
    alpha = m.check_index(alg)
    px = module_seminorm(x, alpha)
    if px < DEGENERATE:
        return Outcome(skipped=True)
    images = stack(quotient_vector(x, alpha))
    samples = m.rng.standard_normal((50,) + images.shape) \
        + 1j * m.rng.standard_normal((50,) + images.shape)
    samples /= np.linalg.norm(samples, ord=2, axis=(1, 2))[:, None, None]
    sampled = float(np.linalg.norm(images.conj().T @ samples, ord=2, axis=(1, 2)).max())
    witness = seminorm(inner(x, x * (1.0 / px)), alpha)
    out = Margins(m)
    out.upper(max(sampled, witness), px, m.loose(px))
    out.lower(max(sampled, witness), px, 1000.0 * m.eps * (1.0 + px))
    return out.outcome()


@register('Eq2.4')
def check_bounded_part(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    x = m.vector(module)
    out = Margins(m)
    norm = sup_module_norm(x)
    if inner(x, x).tail_degree >= 1:
        out.holds(norm == math.inf and not vector_is_bounded(x))
    else:
        stored = alg.indices()
        if alg.is_countable:
            stored = stored + (alg.index.prefix_len + 1,)
        out.holds(norm == max(module_seminorm(x, a) for a in stored))
        out.holds(vector_is_bounded(x))
    a = m.element(alg)
    if a.tail_degree >= 1:
        out.holds(sup_norm(a) == math.inf and not is_in_bounded_part(a))
    else:
        fibers = list(a.components.values()) + ([a.tail.coeffs[0]] if a.tail is not None else [])
        out.holds(sup_norm(a) == max(mnorm(c) for c in fibers))
    xb, yb = m.vector(module, bounded=True), m.vector(module, bounded=True)
    pairing = inner(xb, yb)
    out.holds(is_in_bounded_part(pairing))
    bound = sup_module_norm(xb) * sup_module_norm(yb)
    out.upper(sup_norm(pairing), bound, m.loose(bound))
    return out.outcome()


@register('L2.3a')
def check_smoothing_contraction(m: RandomModels) -> Outcome:
    alg = m.algebra()
    x = m.vector(m.module(alg), bounded=True)
    s = smooth(x, 1.0, m.eps)
    out = Margins(m)
    out.holds(vector_is_bounded(s))
    out.upper(sup_module_norm(s), 1.0, m.loose(1.0))
    for alpha in check_indices(alg, m.cfg):
        out.upper(module_seminorm(s, alpha), 1.0, m.loose(1.0))
    return out.outcome()


@register('L2.3b')
def check_smoothing_convergence(m: RandomModels) -> Outcome:
    alg = m.algebra()
    x = m.vector(m.module(alg), bounded=True)
    w = x @ sqrt(inner(x, x), m.eps)
    steps = (1e-1, 1e-2, 1e-3)
    smoothed = [x - smooth(x, step, m.eps) for step in steps]
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        pw = module_seminorm(w, alpha)
        deviations = [module_seminorm(d, alpha) for d in smoothed]
        for step, dev in zip(steps, deviations):
            out.upper(dev, step * pw, m.loose(step * pw))
        for larger, smaller in zip(deviations, deviations[1:]):
            out.upper(smaller, larger, m.loose(larger))
    return out.outcome()


@register('L2.4')
def check_quotient_by_approximate_identity(m: RandomModels) -> Outcome:
    alg = m.algebra()
    x = m.vector(m.module(alg))
    alpha = m.stored_index(alg)
    u = approximate_identity(Ideal(alg, {alpha}))
    px = module_seminorm(x, alpha)
    y = x @ u
    out = Margins(m)
    out.close(sup_module_norm(x - y), px, 1e-12 * (1.0 + px))
    out.upper(sup_module_norm(y - y @ u), 0.0, 0.0)
    out.holds(in_kernel_submodule(y, alpha))
    return out.outcome()


@register('L2.5')
def check_quotient_norm(m: RandomModels) -> Outcome:
    alg = m.algebra()
    x = m.vector(m.module(alg))
    alpha = m.check_index(alg)
    px = module_seminorm(x, alpha)
    out = Margins(m)
    out.close(fiber_module_norm(quotient_vector(x, alpha)), px, m.eps * (1.0 + px))
    if alpha in alg.indices():
        y = x @ approximate_identity(Ideal(alg, {alpha}))
        out.holds(all(c.is_zero() for c in quotient_vector(y, alpha)))
    return out.outcome()


@register('Thm2.3')
def check_quotient_module(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    x, y = m.vector(module), m.vector(module)
    a = m.element(alg)
    lam = m.scalar()
    alpha = m.check_index(alg)
    mx, my = quotient_vector(x, alpha), quotient_vector(y, alpha)
    px, py, pa = fiber_module_norm(mx), fiber_module_norm(my), seminorm(a, alpha)
    gram = mx[0].adjoint() @ my[0]
    for p, q in zip(mx[1:], my[1:]):
        gram = gram + p.adjoint() @ q
    out = Margins(m)
    out.upper(mnorm(inner(x, y).at(alpha) - gram), 0.0, m.loose(px * py))
    a_alpha = a.at(alpha)
    for image, entry in zip(quotient_vector(x @ a, alpha), mx):
        out.upper(mnorm(image - entry @ a_alpha), 0.0, m.loose(px * pa))
    out.upper(fiber_module_norm([p + q for p, q in zip(mx, my)]), px + py, m.loose(px + py))
    out.close(fiber_module_norm([p * lam for p in mx]), abs(lam) * px, m.loose(abs(lam) * px))
    return out.outcome()


# -- Operators ----------------------------------------------------------------

@register('Def3.1')
def check_bounded_operator(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    op = m.operator(module)
    x = m.vector(module)
    a = m.element(alg)
    tx = apply(op, x)
    drift = apply(op, x @ a) - tx @ a
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        bound = op_seminorm(op, alpha) * module_seminorm(x, alpha)
        out.upper(module_seminorm(tx, alpha), bound, m.loose(bound))
        out.upper(module_seminorm(drift, alpha), 0.0, m.loose(bound * seminorm(a, alpha)))
    return out.outcome()


@register('Eq3.1')
def check_operator_seminorm_algebra(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    s, t_op = m.operator(module), m.operator(module)
    product, total = compose(s, t_op), s + t_op
    reversed_adjoint = adjoint(product) - compose(adjoint(t_op), adjoint(s))
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        ps, pt = op_seminorm(s, alpha), op_seminorm(t_op, alpha)
        out.upper(op_seminorm(product, alpha), ps * pt, m.loose(ps * pt))
        out.upper(op_seminorm(total, alpha), ps + pt, m.loose(ps + pt))
        out.upper(op_seminorm(reversed_adjoint, alpha), 0.0, m.loose(ps * pt))
        qs, qt = quotient_operator(s, alpha), quotient_operator(t_op, alpha)
        out.upper(mnorm(quotient_operator(product, alpha) - qs @ qt), 0.0, m.loose(ps * pt))
        out.upper(mnorm(quotient_operator(total, alpha) - (qs + qt)), 0.0, m.loose(ps + pt))
        out.upper(mnorm(quotient_operator(adjoint(s), alpha) - qs.adjoint()), 0.0, m.tight(ps))
    zero = ModuleOperator.zero(module)
    out.holds(zero.is_zero() and all(op_seminorm(zero, a) == 0.0 for a in alg.indices()))
    out.holds(s.is_zero() or any(op_seminorm(s, a) > 0.0 for a in check_indices(alg, m.cfg)))
    return out.outcome()


@register('L3.2')
def check_adjoint_pairing(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    op = m.operator(module)
    star = adjoint(op)
    x, y = m.vector(module), m.vector(module)
    defect = inner(apply(op, x), y) - inner(x, apply(star, y))
    out = Margins(m)
    for alpha in check_indices(alg, m.cfg):
        scale = op_seminorm(op, alpha) * module_seminorm(x, alpha) * module_seminorm(y, alpha)
        out.upper(seminorm(defect, alpha), 0.0, m.eps * (1.0 + scale))
    out.holds(adjoint(star) == op)
    alpha = m.stored_index(alg)
    x0 = x @ approximate_identity(Ideal(alg, {alpha}))
    out.holds(in_kernel_submodule(apply(op, x0), alpha) and
              in_kernel_submodule(apply(star, x0), alpha))
    return out.outcome()


def unit_ball_sup(rng: np.random.Generator, big: np.ndarray, dim: int, samples: int = 200) -> float:
    """max |B M| / |M| over sampled quotient vectors M, a lower bound of |B|.

    M ranges over (k d) x d blocks; half of the samples take two power steps
    M <- B* B M before normalization.
    """
    n = big.shape[0]
    ms = rng.standard_normal((samples, n, dim)) + 1j * rng.standard_normal((samples, n, dim))
    gram = big.conj().T @ big
    half = samples // 2
    for _ in range(2):
        ms[:half] = gram @ ms[:half]
        ms[:half] /= np.linalg.norm(ms[:half], ord=2, axis=(1, 2))[:, None, None]
    ms /= np.linalg.norm(ms, ord=2, axis=(1, 2))[:, None, None]
    return float(np.linalg.norm(big @ ms, ord=2, axis=(1, 2)).max())


@register('Eq3.6')
def check_operator_cstar_identity(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    op = m.operator(module)
    alpha = m.check_index(alg)
    p = op_seminorm(op, alpha)
    if p < DEGENERATE:
        return Outcome(skipped=True)
    out = Margins(m)
    out.close(op_seminorm(compose(adjoint(op), op), alpha), p * p, m.loose(p * p))
    out.close(op_seminorm(adjoint(op), alpha), p, m.tight(p))
    sampled = unit_ball_sup(m.rng, op.block(alpha), alg.dim(alpha))
    out.upper(sampled, p, m.loose(p))
    return out.outcome(tight=sampled >= TIGHTNESS_RATIO * p)


@register('P3.1a')
def check_operator_spectrum_union(m: RandomModels) -> Outcome:
    alg = m.algebra('finite')
    module = m.module(alg)
    op = m.self_adjoint_operator(module) if m.rng.random() < 0.5 else m.operator(module)
    verdict = op_spectrum(op, m.cfg.horizon, m.eps)
    oracle = np.concatenate([np.linalg.eigvals(op.block(a)) for a in alg.indices()])
    out = Margins(m)
    out.holds(verdict.exact)
    out.upper(_hausdorff(verdict.value, oracle), 0.0, m.loose(float(np.abs(oracle).max())))
    return out.outcome()


@register('P3.1b')
def check_fiberwise_self_adjoint(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    constructed = m.rng.random() < 0.5
    op = m.self_adjoint_operator(module) if constructed else m.operator(module)
    entrywise = op_is_self_adjoint(op, m.eps)
    out = Margins(m)
    out.holds(entrywise == constructed)
    out.holds(entrywise == is_hermitian(op.fiber_element(), m.eps))
    if entrywise:
        out.holds(all(is_fiber_hermitian(op, a, m.eps) for a in check_indices(alg, m.cfg)))
    return out.outcome()


def _negative_direction(op: ModuleOperator, horizon: int,
                        eps: float) -> t.Optional[t.Tuple[t.Any, CMatrix, np.ndarray]]:
    """Where the operator fails positivity most, its big matrix there and the
    eigenvector of the lowest eigenvalue."""
    pairs, _ = _decisive(op.fiber_element(), horizon)
    where, worst = min(pairs, key=lambda pair: mpositivity_margin(pair[1], eps))
    if mpositivity_margin(worst, eps) >= 0:
        return None
    sym = (worst.entries + worst.entries.conj().T) / 2
    _, vectors = scipy.linalg.eigh(sym)
    return where, worst, vectors[:, 0]


def _witness_vector(op: ModuleOperator, where: t.Any, direction: np.ndarray) -> ModuleVector:
    """x whose quotient image at `where` has `direction` as its first column."""
    alg = op.module.algebra
    dim = alg.dim(where) if where in alg.indices() else alg.common_dim
    entries = []
    for block in direction.reshape(op.rank, dim):
        column = np.zeros((dim, dim), dtype=np.complex128)
        column[:, 0] = block
        entries.append(_single_fiber_element(alg, where, CMatrix(column)))
    return op.module.vector(entries)


@register('P3.1c')
def check_positivity_by_fibers(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    constructed = m.rng.random() < 0.5
    op = m.positive_operator(module) if constructed else m.self_adjoint_operator(module)
    verdict = op_is_positive(op, m.cfg.horizon, m.eps)
    out = Margins(m)
    out.exact = verdict.exact
    out.holds(verdict.value or not constructed)
    if verdict.value:
        for alpha in check_indices(alg, m.cfg):
            big = op.block(alpha)
            d = alg.dim(alpha)
            ms = m.rng.standard_normal((100, big.shape[0], d)) \
                + 1j * m.rng.standard_normal((100, big.shape[0], d))
            forms = ms.conj().transpose(0, 2, 1) @ big @ ms
            out.values.append(min(mpositivity_margin(CMatrix(f), 10.0 * m.eps) for f in forms))
    else:
        found = _negative_direction(op, m.cfg.horizon, m.eps)
        out.holds(found is not None)
        if found is not None:
            _, big, v = found
            column = np.zeros((v.shape[0], big.dim // op.rank), dtype=np.complex128)
            column[:, 0] = v
            form = CMatrix(column.conj().T @ big.entries @ column)
            out.holds(mpositivity_margin(form, m.eps) < 0)
    return out.outcome()


@register('P3.2')
def check_quadratic_form(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    out = Margins(m)
    if m.rng.random() < 0.5:
        op = m.positive_operator(module)
        for _ in range(QUADRATIC_FORM_SAMPLES):
            x = m.vector(module)
            out.positive(inner(apply(op, x), x))
        return out.outcome()
    op = m.self_adjoint_operator(module)
    found = _negative_direction(op, m.cfg.horizon, m.eps)
    if found is None:
        return Outcome(skipped=True)
    where, _, direction = found
    x = _witness_vector(op, where, direction)
    margin, _ = positivity_margin(inner(apply(op, x), x), m.eps, m.cfg.horizon)
    out.holds(margin < 0)
    return out.outcome()


@register('P3.3')
def check_bounded_operators(m: RandomModels) -> Outcome:
    alg = m.algebra()
    module = m.module(alg)
    op = m.operator(module, bounded=True)
    norm = op_sup_norm(op)
    stored = alg.indices() + ((alg.index.prefix_len + 1,) if alg.is_countable else ())
    out = Margins(m)
    out.holds(norm == max(op_seminorm(op, a) for a in stored))
    for _ in range(5):
        x = m.vector(module, bounded=True)
        tx = apply(op, x)
        out.holds(vector_is_bounded(tx))
        bound = norm * sup_module_norm(x)
        out.upper(sup_module_norm(tx), bound, m.loose(bound))
    if alg.is_countable:
        growing = m.operator(module, bounded=True)
        i, j = (int(v) for v in m.rng.integers(module.rank, size=2))
        rows = [list(row) for row in growing.matrix]
        rows[i][j] = m.element(alg, degree=1)
        out.holds(op_sup_norm(ModuleOperator(module, tuple(map(tuple, rows)))) == math.inf)
    return out.outcome()


# -- Runner -------------------------------------------------------------------

@dataclasses.dataclass
class PropertyReport:
    """Aggregated result of one property.

    Attributes:
        id (str): the registry id.
        trials (int): trials run.
        failures (int): trials with a negative margin or a domain error.
        worst_margin (float): smallest margin over completed trials, None if none.
        skipped (int): degenerate trials that were not evaluated.
        exact (int): trials decided with exact verdicts only.
        horizon_verified (int): trials that used a horizon-verified verdict.
        errors (dict): domain error name -> count.
        failing_trials (list): the first failing trial indices.
        tightness (float): share of tight unit-ball samples, Eq3.6 only.
        seed (int): the run seed, to replay failing trials.
    """
    id: str
    trials: int
    failures: int = 0
    worst_margin: t.Optional[float] = None
    skipped: int = 0
    exact: int = 0
    horizon_verified: int = 0
    errors: t.Dict[str, int] = dataclasses.field(default_factory=dict)
    failing_trials: t.List[int] = dataclasses.field(default_factory=list)
    tightness: t.Optional[float] = None
    seed: int = 0

    @property
    def passed(self) -> bool:
        return self.failures == 0 and (self.tightness is None or self.tightness >= TIGHTNESS_QUORUM)

    def to_json(self) -> t.Dict[str, t.Any]:
        out = dataclasses.asdict(self)
        out['errors'] = dict(sorted(self.errors.items()))
        out['passed'] = self.passed
        return out


def trial_count(property_id: str, cfg: TrialConfig) -> int:
    return max(1, int(round(cfg.trials * property_trial_scale[property_id])))


def trial_rng(cfg: TrialConfig, position: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(position, trial)))


def run_trial(property_id: str, cfg: TrialConfig, trial: int) -> Outcome:
    """Run one trial; domain errors are returned, not raised."""
    position = PROPERTY_IDS.index(property_id)
    models = RandomModels(trial_rng(cfg, position, trial), cfg)
    try:
        return PROPERTY_CHECKS[property_id](models)
    except (LocCStarError, np.linalg.LinAlgError) as e:
        logger.debug(f'{property_id} trial {trial} raised {type(e).__name__}: {e}')
        return Outcome(margin=-math.inf, error=type(e).__name__)


def _aggregate(property_id: str, cfg: TrialConfig, outcomes: t.Sequence[Outcome]) -> PropertyReport:
    report = PropertyReport(property_id, len(outcomes), seed=cfg.seed)
    tight_hits = tight_total = 0
    for trial, outcome in enumerate(outcomes):
        if outcome.skipped:
            report.skipped += 1
            continue
        if outcome.error is not None:
            report.errors[outcome.error] = report.errors.get(outcome.error, 0) + 1
        else:
            if report.worst_margin is None or outcome.margin < report.worst_margin:
                report.worst_margin = outcome.margin
            if outcome.exact:
                report.exact += 1
            else:
                report.horizon_verified += 1
            if outcome.tight is not None:
                tight_total += 1
                tight_hits += int(outcome.tight)
        if outcome.error is not None or outcome.margin < 0:
            report.failures += 1
            if len(report.failing_trials) < MAX_FAILING_TRIALS:
                report.failing_trials.append(trial)
    if tight_total:
        report.tightness = tight_hits / tight_total
    return report


def _run_chunk(property_id: str, cfg: TrialConfig, trials: range) -> t.List[Outcome]:
    return [run_trial(property_id, cfg, trial) for trial in trials]


def _chunks(n: int, parts: int) -> t.List[range]:
    """Split range(n) into at most `parts` contiguous, nearly equal ranges."""
    bounds = np.linspace(0, n, min(n, parts) + 1).round().astype(int)
    return [range(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]


def run_suite(cfg: TrialConfig, workers: t.Optional[int] = None,
              only: t.Optional[t.Iterable[str]] = None) -> t.List[PropertyReport]:
    """One PropertyReport per registry id, in registry order.

    Each property is split into one contiguous chunk of trials per worker, and
    the chunks run in worker processes; trial seeds do not depend on the split.

    Args:
        cfg: the trial configuration.
        workers: worker processes; defaults to `thread_budget()`. With 1 the
          suite runs in the calling process.
        only: restrict the run to these ids (registry order is kept).
    """
    selected = PROPERTY_IDS if only is None else tuple(p for p in PROPERTY_IDS if p in set(only))
    workers = workers or thread_budget()
    plan = {p: _chunks(trial_count(p, cfg), workers) for p in selected}
    if workers == 1:
        outcomes = {p: [o for chunk in chunks for o in _run_chunk(p, cfg, chunk)]
                    for p, chunks in plan.items()}
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {p: [pool.submit(_run_chunk, p, cfg, chunk) for chunk in chunks]
                       for p, chunks in plan.items()}
            outcomes = {p: [o for f in fs for o in f.result()] for p, fs in futures.items()}
    reports = []
    for property_id in selected:
        report = _aggregate(property_id, cfg, outcomes[property_id])
        logger.info(f'{property_id}: {report.failures}/{report.trials} failures, '
                    f'worst margin {report.worst_margin}.')
        reports.append(report)
    return reports


def suite_passed(reports: t.Iterable[PropertyReport]) -> bool:
    return all(r.passed for r in reports)


def reports_to_json(reports: t.Iterable[PropertyReport]) -> str:
    return json.dumps([r.to_json() for r in reports], indent=2, allow_nan=False)


def reports_to_text(reports: t.Iterable[PropertyReport]) -> str:
    columns = ['id', 'trials', 'failures', 'worst_margin', 'skipped', 'exact',
               'horizon_verified', 'tightness', 'passed']
    frame = pd.DataFrame([r.to_json() for r in reports], columns=columns)
    return frame.to_string(index=False)
