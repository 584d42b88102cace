import contextlib
import io
import json
import os
import tempfile
import unittest

from .cli import (
    EXIT_DOMAIN_ERROR,
    EXIT_OK,
    EXIT_PARSE_ERROR,
    EXIT_SUITE_FAILURE,
    main,
    parse_arguments,
)
from .constant import PROPERTY_IDS
from .schema import algebra_from_json, element_from_json

FINITE = json.dumps({'model': 'finite', 'fibers': [{'label': 'a1', 'dim': 1},
                                                   {'label': 'a2', 'dim': 1}]})
TAIL = json.dumps({'model': 'tail', 'dim': 1, 'prefix_len': 2})


def scalar(z: complex):
    return [[[float(z.real), float(z.imag)]]]


def finite_element(first: complex, second: complex) -> str:
    return json.dumps({'components': {'a1': scalar(first), 'a2': scalar(second)}})


def run(*argv: str):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        status = main(list(argv))
    return status, json.loads(out.getvalue())


class TestParseArguments(unittest.TestCase):

    def test_defaults(self):
        args = parse_arguments(['smooth', '--alg', FINITE, '--vec', '{}'])
        self.assertEqual(args.t_param, 1.0)
        self.assertEqual(args.format, 'json')
        self.assertIsNone(args.horizon)

    def test_parse_errors(self):
        for argv in (
            [],
            ['frobnicate'],
            ['seminorm', '--alg', FINITE, '--elem', '{}'],
            ['smooth', '--alg', FINITE, '--vec', '{}', '--t', '-1'],
            ['gen', '--kind', 'sheaf'],
            ['verify', '--trials', 'many'],
            ['is-positive', '--alg', TAIL, '--elem', '{}', '--horizon', '0'],
            ['is-positive', '--alg', TAIL, '--elem', '{}', '--horizon', '-3'],
            ['is-positive', '--alg', TAIL, '--elem', '{}', '--tol', '-1'],
            ['is-positive', '--alg', TAIL, '--elem', '{}', '--hor', '4'],
            ['verify', '--tri', '1'],
        ):
            with self.subTest(argv=argv):
                status, out = run(*argv)
                self.assertEqual(status, EXIT_PARSE_ERROR)
                self.assertEqual(out['error'], 'ParseError')


class TestElementCommands(unittest.TestCase):

    def test_seminorm(self):
        status, out = run('seminorm', '--alg', FINITE, '--elem', finite_element(1, 3j),
                          '--index', 'a2')
        self.assertEqual(status, EXIT_OK)
        self.assertAlmostEqual(out['result'], 3.0)
        self.assertTrue(out['exact'])
        self.assertEqual(out['tolerance'], 1e-9)

    def test_unbounded_sup_norm(self):
        growing = json.dumps({'components': {'1': scalar(1), '2': scalar(2)},
                              'tail': {'coeffs': [scalar(0), scalar(1)]}})
        status, out = run('sup-norm', '--alg', TAIL, '--elem', growing)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(out['result'], 'Unbounded')

    def test_spectrum(self):
        status, out = run('spectrum', '--alg', FINITE, '--elem', finite_element(2, -1))
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(out['result'], [[-1.0, 0.0], [2.0, 0.0]])

    def test_is_positive_and_order(self):
        status, out = run('is-positive', '--alg', FINITE, '--elem', finite_element(1, -1))
        self.assertEqual((status, out['result'], out['exact']), (EXIT_OK, False, True))
        status, out = run('is-positive', '--alg', FINITE, '--elem', finite_element(1, -1),
                          '--elem2', finite_element(2, 0))
        self.assertEqual((status, out['result']), (EXIT_OK, True))

    def test_sqrt_of_non_positive(self):
        status, out = run('sqrt', '--alg', FINITE, '--elem', finite_element(4, -1))
        self.assertEqual(status, EXIT_DOMAIN_ERROR)
        self.assertEqual(out['error'], 'NotPositive')

    def test_inverse(self):
        status, out = run('inverse', '--alg', FINITE, '--elem', finite_element(2, 4))
        self.assertEqual(status, EXIT_OK)
        alg = algebra_from_json(json.loads(FINITE))
        inv = element_from_json(alg, out['result'])
        self.assertAlmostEqual(inv.at('a2').entries[0, 0], 0.25)
        status, out = run('inverse', '--alg', FINITE, '--elem', finite_element(2, 0))
        self.assertEqual((status, out['error']), (EXIT_DOMAIN_ERROR, 'Singular'))

    def test_unknown_index(self):
        status, out = run('seminorm', '--alg', FINITE, '--elem', finite_element(1, 1),
                          '--index', 'a9')
        self.assertEqual((status, out['error']), (EXIT_DOMAIN_ERROR, 'UnknownIndex'))

    def test_non_ascii_digit_index(self):
        elem = json.dumps({'components': {'1': scalar(1), '2': scalar(2)}})
        for label in ('\u00b2', '\u0663'):
            with self.subTest(label=label):
                status, out = run('seminorm', '--alg', TAIL, '--elem', elem, '--index', label)
                self.assertEqual((status, out['error']), (EXIT_DOMAIN_ERROR, 'UnknownIndex'))

    def test_negative_tail_fiber_within_one_step(self):
        # a_1 = 0 and a_n = n**2 - 5 beyond it, so a_2 = -1.
        alg = json.dumps({'model': 'tail', 'dim': 1, 'prefix_len': 1})
        elem = json.dumps({'components': {'1': scalar(0)},
                           'tail': {'coeffs': [scalar(-5), scalar(0), scalar(1)]}})
        status, out = run('is-positive', '--alg', alg, '--elem', elem, '--horizon', '1')
        self.assertEqual((status, out['result'], out['exact']), (EXIT_OK, False, True))
        status, out = run('is-positive', '--alg', alg, '--elem', elem, '--horizon', '0')
        self.assertEqual((status, out['error']), (EXIT_PARSE_ERROR, 'ParseError'))

    def test_deeply_nested_inline_json(self):
        nested = '[' * 100000 + ']' * 100000
        status, out = run('sup-norm', '--alg', FINITE, '--elem', nested)
        self.assertEqual((status, out['error']), (EXIT_PARSE_ERROR, 'ParseError'))

    def test_bad_spec_is_a_parse_error(self):
        status, out = run('sup-norm', '--alg', FINITE, '--elem', '{"components": {"a1": 1}}')
        self.assertEqual((status, out['error']), (EXIT_PARSE_ERROR, 'ParseError'))


class TestModuleCommands(unittest.TestCase):
    def setUp(self):
        self.x = json.dumps({'module': {'rank': 2},
                             'entries': [json.loads(finite_element(3, 1)),
                                         json.loads(finite_element(4j, 0))]})
        self.temp_dir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.temp_dir.cleanup()

    def test_inner_from_files(self):
        alg_path = os.path.join(self.temp_dir.name, 'alg.json')
        vec_path = os.path.join(self.temp_dir.name, 'x.json')
        with open(alg_path, 'w') as f:
            f.write(FINITE)
        with open(vec_path, 'w') as f:
            f.write(self.x)
        status, out = run('inner', '--alg', alg_path, '--vec', vec_path, '--vec2', vec_path)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(out['result']['components']['a1'], scalar(25))

    def test_module_seminorm(self):
        status, out = run('module-seminorm', '--alg', FINITE, '--vec', self.x, '--index', 'a1')
        self.assertEqual(status, EXIT_OK)
        self.assertAlmostEqual(out['result'], 5.0)

    def test_smooth(self):
        status, out = run('smooth', '--alg', FINITE, '--vec', self.x, '--t', '2')
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(len(out['result']['entries']), 2)

    def test_undecodable_file(self):
        alg_path = os.path.join(self.temp_dir.name, 'alg.json')
        with open(alg_path, 'wb') as f:
            f.write(b'\xff\xfe{')
        status, out = run('sup-norm', '--alg', alg_path, '--elem', finite_element(1, 1))
        self.assertEqual((status, out['error']), (EXIT_PARSE_ERROR, 'ParseError'))

    def test_unknown_protocol(self):
        status, out = run('sup-norm', '--alg', 'bogus://x', '--elem', finite_element(1, 1))
        self.assertEqual((status, out['error']), (EXIT_PARSE_ERROR, 'ParseError'))

    def test_missing_file(self):
        status, out = run('smooth', '--alg', FINITE,
                          '--vec', os.path.join(self.temp_dir.name, 'absent.json'))
        self.assertEqual((status, out['error']), (EXIT_PARSE_ERROR, 'ParseError'))


class TestOperatorCommands(unittest.TestCase):
    def setUp(self):
        one = json.loads(finite_element(1, 1))
        upper = json.loads(finite_element(2j, 0))
        zero = json.loads(finite_element(0, 0))
        self.op = json.dumps({'rank': 2, 'matrix': [[one, upper], [zero, one]]})

    def test_op_seminorm(self):
        status, out = run('op-seminorm', '--alg', FINITE, '--op', self.op, '--index', 'a2')
        self.assertEqual(status, EXIT_OK)
        self.assertAlmostEqual(out['result'], 1.0)

    def test_adjoint(self):
        status, out = run('adjoint', '--alg', FINITE, '--op', self.op)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(out['result']['matrix'][1][0]['components']['a1'], scalar(-2j))

    def test_op_spectrum(self):
        status, out = run('op-spectrum', '--alg', FINITE, '--op', self.op)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(len(out['result']), 1)
        self.assertAlmostEqual(out['result'][0][0], 1.0)
        self.assertTrue(out['exact'])


class TestGenAndVerify(unittest.TestCase):

    def test_gen_is_deterministic(self):
        first = run('gen', '--kind', 'element', '--seed', '5')
        self.assertEqual(first, run('gen', '--kind', 'element', '--seed', '5'))
        status, out = first
        self.assertEqual(status, EXIT_OK)
        alg = algebra_from_json(out['result']['algebra'])
        element_from_json(alg, out['result']['element'])

    def test_gen_operator(self):
        status, out = run('gen', '--kind', 'positive_operator', '--seed', '1')
        self.assertEqual(status, EXIT_OK)
        self.assertIn('operator', out['result'])

    def test_verify(self):
        status, out = run('verify', '--seed', '1', '--trials', '1')
        self.assertIn(status, (EXIT_OK, EXIT_SUITE_FAILURE))
        self.assertEqual([r['id'] for r in out], list(PROPERTY_IDS))
        self.assertEqual(status == EXIT_OK, all(r['passed'] for r in out))

    def test_verify_text(self):
        out = io.StringIO()
        with contextlib.redirect_stdout(out):
            main(['verify', '--seed', '1', '--trials', '1', '--format', 'text'])
        self.assertIn('horizon_verified', out.getvalue())

    def test_bad_trial_config(self):
        status, out = run('verify', '--trials', '0')
        self.assertEqual((status, out['error']), (EXIT_PARSE_ERROR, 'ParseError'))


if __name__ == "__main__":
    unittest.main()
