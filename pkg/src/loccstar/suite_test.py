import json
import math
import unittest

import numpy as np

from unittest.mock import patch

from .config import TrialConfig
from .constant import PROPERTY_IDS
from .cstar_matrix import mis_positive, mspectrum
from .exceptions import Singular
from .hilbert_module import ModuleVector
from .local_algebra import LocalAlgebra, LocalElement, is_positive
from .operator_algebra import ModuleOperator, op_is_positive, op_is_self_adjoint
from .suite import (
    GENERATOR_KINDS,
    PROPERTY_CHECKS,
    Outcome,
    PropertyReport,
    QUADRATIC_FORM_SAMPLES,
    Margins,
    RandomModels,
    _aggregate,
    _chunks,
    _positive_cone,
    _separation,
    generate,
    positivity_margin,
    check_indices,
    reports_to_json,
    reports_to_text,
    run_suite,
    run_trial,
    suite_passed,
    trial_count,
    unit_ball_sup,
)

SMALL = TrialConfig(seed=3, trials=2, max_dim=3, max_fibers=3, max_rank=2,
                    prefix_len=3, horizon=8)

# Identities that hold up to rounding for every draw.
ALGEBRAIC = ('Def1.1-1', 'Def1.1-2', 'Def1.1-3', 'ApproxId', 'Def2.1', 'L2.4',
             'Def3.1', 'Eq3.1', 'L3.2', 'P3.1b')


class TestRegistry(unittest.TestCase):

    def test_every_id_has_a_check(self):
        self.assertEqual(set(PROPERTY_CHECKS), set(PROPERTY_IDS))
        self.assertEqual(len(PROPERTY_IDS), 32)

    def test_trial_count_scales(self):
        cfg = TrialConfig(trials=10)
        self.assertEqual(trial_count('Def1.1-1', cfg), 10)
        self.assertEqual(trial_count('Eq2.1', cfg), 25)
        self.assertEqual(trial_count('P3.2', cfg), 5)
        self.assertEqual(trial_count('P3.2', TrialConfig(trials=1)), 1)


class TestGenerate(unittest.TestCase):

    def test_kinds(self):
        types = {
            'algebra': LocalAlgebra,
            'element': LocalElement,
            'positive_element': LocalElement,
            'vector': ModuleVector,
            'operator': ModuleOperator,
            'self_adjoint_operator': ModuleOperator,
            'positive_operator': ModuleOperator,
        }
        self.assertEqual(set(GENERATOR_KINDS), set(types))
        for kind, cls in types.items():
            with self.subTest(kind=kind):
                self.assertIsInstance(generate(kind, SMALL), cls)

    def test_same_seed_same_instance(self):
        for kind in ('element', 'operator'):
            self.assertEqual(generate(kind, SMALL), generate(kind, SMALL))
        self.assertNotEqual(generate('element', SMALL.replace(seed=4)), generate('element', SMALL))

    def test_constructed_positivity(self):
        for seed in range(5):
            cfg = SMALL.replace(seed=seed)
            self.assertTrue(is_positive(generate('positive_element', cfg), cfg.horizon).value)
            self.assertTrue(op_is_positive(generate('positive_operator', cfg), cfg.horizon).value)
            self.assertTrue(op_is_self_adjoint(generate('self_adjoint_operator', cfg)))

    def test_semidefinite_fibers_can_be_singular(self):
        models = RandomModels(np.random.default_rng(11), SMALL)
        lowest = []
        for _ in range(20):
            m = models.semidefinite_matrix(3)
            self.assertTrue(mis_positive(m))
            lowest.append(min(v.real for v in mspectrum(m)))
        self.assertTrue(any(abs(v) < 1e-12 for v in lowest))
        self.assertTrue(any(v > 1e-3 for v in lowest))

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            generate('sheaf', SMALL)


class TestHelpers(unittest.TestCase):

    def test_check_indices(self):
        finite = LocalAlgebra.finite({'a1': 1, 'a2': 2})
        self.assertEqual(check_indices(finite, SMALL), ('a1', 'a2'))
        countable = LocalAlgebra.countable(1, 3)
        self.assertEqual(check_indices(countable, SMALL), (1, 2, 3, 4, 7, 11))

    def test_chunks_cover_every_trial_once(self):
        for n, parts in ((10, 3), (2, 8), (1, 1), (200, 8)):
            with self.subTest(n=n, parts=parts):
                chunks = _chunks(n, parts)
                self.assertEqual(len(chunks), min(n, parts))
                self.assertEqual([i for chunk in chunks for i in chunk], list(range(n)))
                self.assertTrue(all(len(chunk) > 0 for chunk in chunks))

    def test_positivity_margin(self):
        alg = LocalAlgebra.finite({'a1': 2})
        margin, exact = positivity_margin(alg.identity(), 1e-9, 8)
        self.assertGreater(margin, 0.0)
        self.assertTrue(exact)
        margin, exact = positivity_margin(-alg.identity(), 1e-9, 8)
        self.assertLess(margin, 0.0)
        self.assertTrue(exact)

    def test_unit_ball_sup_is_a_lower_bound(self):
        rng = np.random.default_rng(0)
        big = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        norm = float(np.linalg.norm(big, ord=2))
        sampled = unit_ball_sup(rng, big, 2)
        self.assertLessEqual(sampled, norm * (1 + 1e-12))
        self.assertGreater(sampled, 0.5 * norm)


class TestAggregate(unittest.TestCase):

    def test_counts(self):
        outcomes = [
            Outcome(0.5),
            Outcome(-0.1, exact=False),
            Outcome(skipped=True),
            Outcome(margin=-math.inf, error='Singular'),
        ]
        report = _aggregate('Def1.1-1', SMALL, outcomes)
        self.assertEqual(report.trials, 4)
        self.assertEqual(report.failures, 2)
        self.assertEqual(report.worst_margin, -0.1)
        self.assertEqual(report.skipped, 1)
        self.assertEqual(report.exact, 1)
        self.assertEqual(report.horizon_verified, 1)
        self.assertEqual(report.errors, {'Singular': 1})
        self.assertEqual(report.failing_trials, [1, 3])
        self.assertFalse(report.passed)

    def test_tightness_quorum(self):
        outcomes = [Outcome(0.1, tight=True)] * 9 + [Outcome(0.1, tight=False)]
        report = _aggregate('Eq3.6', SMALL, outcomes)
        self.assertEqual(report.failures, 0)
        self.assertAlmostEqual(report.tightness, 0.9)
        self.assertFalse(report.passed)
        self.assertTrue(_aggregate('Eq3.6', SMALL, outcomes[:9]).passed)

    def test_domain_errors_are_returned(self):
        def raises(models):
            raise Singular('no inverse', index='a1')

        with patch.dict(PROPERTY_CHECKS, {'Def1.1-1': raises}):
            outcome = run_trial('Def1.1-1', SMALL, 0)
        self.assertEqual(outcome.error, 'Singular')
        self.assertEqual(outcome.margin, -math.inf)


class TestChecks(unittest.TestCase):

    def test_positive_cone_and_separation(self):
        for seed in range(8):
            for model in ('finite', 'tail'):
                with self.subTest(seed=seed, model=model):
                    models = RandomModels(np.random.default_rng(seed), SMALL)
                    alg = models.algebra(model)
                    out = Margins(models)
                    _positive_cone(models, alg, out)
                    _separation(models, alg, models.element(alg), out)
                    self.assertGreaterEqual(min(out.values), 0.0)

    def test_registered_checks_pass(self):
        for property_id in ('Def1.1-1', 'L1.1a', 'Rem1.1'):
            for trial in range(6):
                with self.subTest(id=property_id, trial=trial):
                    outcome = run_trial(property_id, SMALL, trial)
                    self.assertIsNone(outcome.error)
                    self.assertGreaterEqual(outcome.margin, 0.0)

    def test_quadratic_form_sample_count(self):
        self.assertEqual(QUADRATIC_FORM_SAMPLES, 100)
        outcome = run_trial('P3.2', SMALL, 0)
        self.assertIsNone(outcome.error)


class TestRunSuite(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.reports = run_suite(SMALL, workers=2)

    def test_one_report_per_property_in_order(self):
        self.assertEqual(tuple(r.id for r in self.reports), PROPERTY_IDS)
        for report in self.reports:
            with self.subTest(id=report.id):
                self.assertEqual(report.trials, trial_count(report.id, SMALL))
                accounted = (report.exact + report.horizon_verified + report.skipped +
                             sum(report.errors.values()))
                self.assertEqual(accounted, report.trials)
                self.assertEqual(report.seed, SMALL.seed)

    def test_algebraic_properties_pass(self):
        by_id = {r.id: r for r in self.reports}
        for property_id in ALGEBRAIC:
            with self.subTest(id=property_id):
                self.assertTrue(by_id[property_id].passed, by_id[property_id])

    def test_only_tightness_property_reports_tightness(self):
        for report in self.reports:
            if report.id != 'Eq3.6':
                self.assertIsNone(report.tightness)

    def test_reports_serialize(self):
        decoded = json.loads(reports_to_json(self.reports))
        self.assertEqual([r['id'] for r in decoded], list(PROPERTY_IDS))
        self.assertIn('passed', decoded[0])
        text = reports_to_text(self.reports)
        self.assertIn('worst_margin', text)
        self.assertIn('Def1.1-1', text)
        self.assertEqual(suite_passed(self.reports), all(r['passed'] for r in decoded))

    def test_worker_count_does_not_change_results(self):
        only = ('Def1.1-1', 'L2.3b', 'P3.1c')
        serial = run_suite(SMALL, workers=1, only=only)
        parallel = run_suite(SMALL, workers=4, only=only)
        self.assertEqual(reports_to_json(serial), reports_to_json(parallel))
        self.assertEqual(reports_to_json(serial),
                         reports_to_json([r for r in self.reports if r.id in only]))

    def test_zero_tolerance_runs(self):
        reports = run_suite(SMALL.replace(tolerance=0.0), workers=1, only=['Def1.1-1', 'P3.2'])
        self.assertEqual([r.id for r in reports], ['Def1.1-1', 'P3.2'])
        self.assertTrue(all(isinstance(r, PropertyReport) for r in reports))


if __name__ == "__main__":
    unittest.main()
