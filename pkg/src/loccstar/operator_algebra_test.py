import math
import unittest

import numpy as np

from .cstar_matrix import CMatrix, mnorm
from .exceptions import ModuleMismatch, SpecError
from .hilbert_module import HilbertModule, in_kernel_submodule, inner, module_seminorm
from .local_algebra import Ideal, LocalAlgebra, TailRule, approximate_identity, seminorm
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


def diag(*values) -> CMatrix:
    return CMatrix(np.diag(np.asarray(values, dtype=complex)))


class TestFiniteOperators(unittest.TestCase):
    def setUp(self):
        self.alg = LocalAlgebra.finite({'a1': 1, 'a2': 2})
        self.module = HilbertModule.free(self.alg, 2)
        el = self.alg.element
        self.t = ModuleOperator(self.module, (
            (el({'a1': diag(1), 'a2': CMatrix([[1, 2], [0, 1]])}),
             el({'a1': diag(2j), 'a2': diag(0, 1)})),
            (el({'a1': diag(0), 'a2': diag(1j, 1)}),
             el({'a1': diag(-1), 'a2': CMatrix([[0, 1], [1, 0]])})),
        ))
        self.x = self.module.vector([
            el({'a1': diag(1), 'a2': CMatrix([[1, 0], [1j, 1]])}),
            el({'a1': diag(1j), 'a2': diag(2, 0)}),
        ])
        self.y = self.module.vector([
            el({'a1': diag(3), 'a2': diag(1, -1)}),
            el({'a1': diag(-2), 'a2': CMatrix([[0, 1j], [1, 0]])}),
        ])

    def test_apply(self):
        tx = apply(self.t, self.x)
        # In the fiber a1: (1 * 1 + 2j * 1j, 0 * 1 + -1 * 1j).
        self.assertEqual(tx.entries[0].at('a1'), diag(-1))
        self.assertEqual(tx.entries[1].at('a1'), diag(-1j))

    def test_big_matrix(self):
        big = quotient_operator(self.t, 'a1')
        np.testing.assert_array_equal(big.entries, [[1, 2j], [0, -1]])
        self.assertEqual(quotient_operator(self.t, 'a2').dim, 4)
        self.assertAlmostEqual(op_seminorm(self.t, 'a1'), mnorm(big))

    def test_adjoint_pairing(self):
        star = adjoint(self.t)
        lhs = inner(apply(self.t, self.x), self.y)
        rhs = inner(self.x, apply(star, self.y))
        for alpha in ('a1', 'a2'):
            self.assertLess(mnorm(lhs.at(alpha) - rhs.at(alpha)), 1e-12)
        self.assertEqual(adjoint(star), self.t)
        self.assertEqual(quotient_operator(star, 'a2'), quotient_operator(self.t, 'a2').adjoint())

    def test_right_linearity(self):
        a = self.alg.element({'a1': diag(2 - 1j), 'a2': CMatrix([[1, 1], [0, 3j]])})
        lhs = apply(self.t, self.x @ a)
        rhs = apply(self.t, self.x) @ a
        for e, f in zip(lhs.entries, rhs.entries):
            for alpha in ('a1', 'a2'):
                self.assertLess(mnorm(e.at(alpha) - f.at(alpha)), 1e-12)

    def test_seminorm_bounds(self):
        for alpha in ('a1', 'a2'):
            bound = op_seminorm(self.t, alpha) * module_seminorm(self.x, alpha)
            self.assertLessEqual(module_seminorm(apply(self.t, self.x), alpha), bound + 1e-9)
            product = op_seminorm(compose(self.t, self.t), alpha)
            self.assertLessEqual(product, op_seminorm(self.t, alpha) ** 2 + 1e-9)
            gram = op_seminorm(compose(adjoint(self.t), self.t), alpha)
            self.assertAlmostEqual(gram, op_seminorm(self.t, alpha) ** 2, places=9)

    def test_sup_norm_is_max_over_fibers(self):
        expected = max(op_seminorm(self.t, 'a1'), op_seminorm(self.t, 'a2'))
        self.assertEqual(op_sup_norm(self.t), expected)

    def test_identity_and_zero(self):
        ident = ModuleOperator.identity(self.module)
        self.assertEqual(apply(ident, self.x), self.x)
        self.assertAlmostEqual(op_seminorm(ident, 'a2'), 1.0)
        self.assertTrue(ModuleOperator.zero(self.module).is_zero())
        self.assertTrue(op_is_positive(ident).value)

    def test_spectrum_and_positivity(self):
        op = ModuleOperator.diagonal(self.module, [
            self.alg.element({'a1': diag(2), 'a2': diag(1, 3)}),
            self.alg.element({'a1': diag(-1), 'a2': diag(0, 1)}),
        ])
        verdict = op_spectrum(op)
        self.assertTrue(verdict.exact)
        np.testing.assert_allclose(verdict.value, [-1, 0, 1, 2, 3], atol=1e-12)
        self.assertEqual(tuple(op_is_positive(op)), (False, True))

    def test_self_adjoint(self):
        s = (self.t + adjoint(self.t)) * 0.5
        self.assertTrue(op_is_self_adjoint(s))
        self.assertTrue(all(is_fiber_hermitian(s, a) for a in ('a1', 'a2')))
        self.assertFalse(op_is_self_adjoint(self.t))
        self.assertFalse(is_fiber_hermitian(self.t, 'a1'))
        q = compose(adjoint(self.t), self.t)
        self.assertTrue(op_is_positive(q).value)

    def test_quadratic_form_of_positive_operator(self):
        q = compose(adjoint(self.t), self.t)
        form = inner(apply(q, self.x), self.x)
        for alpha in ('a1', 'a2'):
            self.assertGreaterEqual(np.linalg.eigvalsh(
                (form.at(alpha).entries + form.at(alpha).entries.conj().T) / 2).min(), -1e-12)

    def test_kernel_submodule_is_invariant(self):
        u = approximate_identity(Ideal(self.alg, {'a2'}))
        x0 = self.x @ u
        self.assertTrue(in_kernel_submodule(apply(self.t, x0), 'a2'))
        self.assertTrue(in_kernel_submodule(apply(adjoint(self.t), x0), 'a2'))

    def test_mismatches(self):
        other = HilbertModule.free(self.alg, 1)
        with self.assertRaises(ModuleMismatch):
            apply(ModuleOperator.identity(other), self.x)
        with self.assertRaises(ModuleMismatch):
            compose(self.t, ModuleOperator.identity(other))
        with self.assertRaises(ModuleMismatch):
            ModuleOperator.identity(HilbertModule.ideal(self.alg, {'a1'}))
        with self.assertRaises(ValueError):
            ModuleOperator(self.module, ((self.alg.identity(),),))


class TestCountableOperators(unittest.TestCase):
    def setUp(self):
        self.alg = LocalAlgebra.countable(dim=1, prefix_len=2)
        self.module = HilbertModule.free(self.alg, 2)

    def element(self, first, second, coeffs):
        return self.alg.element({1: diag(first), 2: diag(second)},
                                TailRule(tuple(diag(c) for c in coeffs)))

    def test_bounded_operator(self):
        op = ModuleOperator.diagonal(self.module, [
            self.element(1, 2, [3]), self.element(-4, 0, [1])])
        self.assertAlmostEqual(op_sup_norm(op), 4.0)
        self.assertAlmostEqual(op_seminorm(op, 10), 3.0)
        self.assertTrue(op_spectrum(op).exact)

    def test_growing_entry_is_unbounded(self):
        # t_12 = n beyond the prefix.
        zero = self.alg.zero()
        op = ModuleOperator(self.module, (
            (self.alg.identity(), self.element(0, 0, [0, 1])),
            (zero, self.alg.identity()),
        ))
        self.assertEqual(op_sup_norm(op), math.inf)
        self.assertAlmostEqual(op_seminorm(op, 1), 1.0)
        self.assertGreater(op_seminorm(op, 20), 20.0)
        self.assertFalse(op_spectrum(op, horizon=4).exact)

    def test_self_adjoint_tail(self):
        upper = self.element(1, 1, [0, 1j])
        op = ModuleOperator(self.module, (
            (self.alg.identity(), upper),
            (upper.adjoint(), self.alg.identity()),
        ))
        self.assertTrue(op_is_self_adjoint(op))
        self.assertTrue(is_fiber_hermitian(op, 30))
        # The big matrix [[1, i n], [-i n, 1]] has eigenvalues 1 +- n.
        verdict = op_is_positive(op, horizon=4)
        self.assertEqual(tuple(verdict), (False, True))

    def test_positive_growing_operator_is_horizon_verified(self):
        op = ModuleOperator.diagonal(self.module, [
            self.element(1, 2, [0, 1]), self.alg.identity()])
        self.assertEqual(tuple(op_is_positive(op, horizon=4)), (True, False))
        self.assertAlmostEqual(seminorm(op.fiber_element(), 7), 7.0)

    def test_block_reads_the_cached_fiber_element(self):
        upper = self.element(1, 2, [0.5, 1j, 2])
        op = ModuleOperator(self.module, (
            (self.alg.identity(), upper),
            (self.alg.zero(), upper.adjoint()),
        ))
        self.assertIs(op.fiber_element(), op.fiber_element())
        for index in (1, 2, 3, 9):
            expected = np.block([[e.at(index).entries for e in row] for row in op.matrix])
            np.testing.assert_array_equal(op.block(index), expected)

    def test_horizon_must_be_positive(self):
        op = ModuleOperator.identity(self.module)
        with self.assertRaises(SpecError):
            op_is_positive(op, horizon=0)
        with self.assertRaises(SpecError):
            op_spectrum(op, horizon=-1)


if __name__ == "__main__":
    unittest.main()
