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
"""Command-line front end.

Every command prints one JSON document on standard output; logs go to
standard error. Exit status: 0 success, 1 domain error, 2 parse error,
3 suite failure.

Example:
    loccstar seminorm --alg alg.json --elem e.json --index a1
    loccstar verify --seed 42 --trials 20 --format text
"""
import argparse
import logging
import sys

import typing as t

from .config import TrialConfig, load_trial_config
from .constant import DEFAULT_HORIZON, DEFAULT_TOLERANCE
from .exceptions import LocCStarError, SpecError
from .hilbert_module import ModuleVector, inner, module_seminorm, smooth
from .local_algebra import (
    LocalAlgebra,
    is_leq,
    is_positive,
    inverse,
    seminorm,
    spectrum,
    sqrt,
    sup_norm,
)
from .operator_algebra import ModuleOperator, adjoint, op_seminorm, op_spectrum
from .schema import (
    algebra_from_json,
    algebra_to_json,
    complex_to_json,
    element_from_json,
    element_to_json,
    operator_from_json,
    operator_to_json,
    real_to_json,
    vector_from_json,
    vector_to_json,
)
from .suite import (
    GENERATOR_KINDS,
    generate,
    reports_to_json,
    reports_to_text,
    run_suite,
    suite_passed,
)
from .utils import dump_json, read_json

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_PARSE_ERROR = 2
EXIT_SUITE_FAILURE = 3

PARSE_ERROR = 'ParseError'

# Flags each command cannot run without.
REQUIRED = {
    'seminorm': ('alg', 'elem', 'index'),
    'sup-norm': ('alg', 'elem'),
    'spectrum': ('alg', 'elem'),
    'is-positive': ('alg', 'elem'),
    'sqrt': ('alg', 'elem'),
    'inverse': ('alg', 'elem'),
    'inner': ('alg', 'vec', 'vec2'),
    'module-seminorm': ('alg', 'vec', 'index'),
    'smooth': ('alg', 'vec'),
    'op-seminorm': ('alg', 'op', 'index'),
    'adjoint': ('alg', 'op'),
    'op-spectrum': ('alg', 'op'),
    'verify': (),
    'gen': ('kind',),
}


class ParseError(Exception):
    """Raised instead of exiting when the command line does not parse."""


class _Parser(argparse.ArgumentParser):

    def error(self, message: str) -> t.NoReturn:
        raise ParseError(message)


def _positive_float(raw: str) -> float:
    value = float(raw)
    if not value > 0:
        raise argparse.ArgumentTypeError(f'expected a positive number, got {raw}')
    return value


def _positive_int(raw: str) -> int:
    value = int(raw)
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer, got {raw}')
    return value


def _nonnegative_float(raw: str) -> float:
    value = float(raw)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f'expected a non-negative number, got {raw}')
    return value


def parse_arguments(argv: t.Optional[t.Sequence[str]] = None) -> argparse.Namespace:
    """Parse the command line.

    Raises:
        ParseError: on unknown flags, bad values or missing required flags.
    """
    common = _Parser(add_help=False, allow_abbrev=False)
    common.add_argument('--alg', help='Algebra spec: a path, an fsspec URL or inline JSON.')
    common.add_argument('--elem', help='Element spec.')
    common.add_argument('--elem2', help='Second element; is-positive then decides elem <= elem2.')
    common.add_argument('--vec', help='Vector spec.')
    common.add_argument('--vec2', help='Second vector spec.')
    common.add_argument('--op', help='Operator spec.')
    common.add_argument('--index', help='Seminorm index: a label or a positive integer.')
    common.add_argument('--horizon', type=_positive_int,
                        help=f'Tail horizon H (default {DEFAULT_HORIZON}).')
    common.add_argument('--tol', type=_nonnegative_float,
                        help=f'Tolerance eps (default {DEFAULT_TOLERANCE}).')
    common.add_argument('--seed', type=int, help='Random seed for verify and gen.')
    common.add_argument('--trials', type=int, help='Trials per property for verify.')
    common.add_argument('--format', choices=('json', 'text'), default='json',
                        help='Report format for verify.')
    common.add_argument('--kind', choices=GENERATOR_KINDS, help='What gen generates.')
    common.add_argument('--t', dest='t_param', type=_positive_float, default=1.0,
                        help='Smoothing parameter for smooth.')
    common.add_argument('--config', help='A .cfg trial configuration with a [suite] section.')
    common.add_argument('--verbose', action='store_true', help='Log at DEBUG level.')

    parser = _Parser(prog='loccstar', description='Locally C*-algebra toolkit.',
                     allow_abbrev=False)
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    for name in REQUIRED:
        commands.add_parser(name, parents=[common], allow_abbrev=False)

    args = parser.parse_args(argv)
    missing = [f'--{flag}' for flag in REQUIRED[args.command] if getattr(args, flag) is None]
    if missing:
        raise ParseError(f'{args.command} needs {", ".join(missing)}.')
    return args


def _tolerance(args: argparse.Namespace) -> float:
    return DEFAULT_TOLERANCE if args.tol is None else args.tol


def _horizon(args: argparse.Namespace) -> int:
    return DEFAULT_HORIZON if args.horizon is None else args.horizon


def _trial_config(args: argparse.Namespace) -> TrialConfig:
    cfg = load_trial_config(args.config) if args.config else TrialConfig()
    try:
        return cfg.replace(seed=args.seed, trials=args.trials, tolerance=args.tol,
                           horizon=args.horizon)
    except ValueError as e:
        raise SpecError(f'Invalid trial configuration: {e}') from e


def _result(value: t.Any, args: argparse.Namespace, exact: bool = True) -> t.Dict[str, t.Any]:
    return {'result': value, 'exact': exact, 'tolerance': _tolerance(args)}


def _generated(instance: t.Any) -> t.Dict[str, t.Any]:
    if isinstance(instance, LocalAlgebra):
        return {'algebra': algebra_to_json(instance)}
    if isinstance(instance, ModuleOperator):
        return {'algebra': algebra_to_json(instance.module.algebra),
                'operator': operator_to_json(instance)}
    if isinstance(instance, ModuleVector):
        return {'algebra': algebra_to_json(instance.module.algebra),
                'vector': vector_to_json(instance)}
    return {'algebra': algebra_to_json(instance.parent), 'element': element_to_json(instance)}


def dispatch(args: argparse.Namespace) -> t.Tuple[int, str]:
    """Run one parsed command; returns the exit status and the text to print.

    Raises:
        SpecError: if an input does not parse against its schema.
        LocCStarError: for domain errors.
    """
    command = args.command
    tol, horizon = _tolerance(args), _horizon(args)

    if command == 'verify':
        cfg = _trial_config(args)
        logger.info(f'Running the property suite with {cfg}.')
        reports = run_suite(cfg)
        text = reports_to_text(reports) if args.format == 'text' else reports_to_json(reports)
        return (EXIT_OK if suite_passed(reports) else EXIT_SUITE_FAILURE), text
    if command == 'gen':
        cfg = _trial_config(args)
        return EXIT_OK, dump_json(_result(_generated(generate(args.kind, cfg)), args))

    algebra = algebra_from_json(read_json(args.alg))

    def element(source: str):
        return element_from_json(algebra, read_json(source))

    def vector(source: str):
        return vector_from_json(algebra, read_json(source))

    if command == 'seminorm':
        out = _result(real_to_json(seminorm(element(args.elem), args.index)), args)
    elif command == 'sup-norm':
        out = _result(real_to_json(sup_norm(element(args.elem))), args)
    elif command == 'spectrum':
        verdict = spectrum(element(args.elem), horizon, tol)
        out = _result([complex_to_json(z) for z in verdict.value], args, verdict.exact)
    elif command == 'is-positive':
        a = element(args.elem)
        if args.elem2 is not None:
            verdict = is_leq(a, element(args.elem2), horizon, tol)
        else:
            verdict = is_positive(a, horizon, tol)
        out = _result(bool(verdict.value), args, verdict.exact)
    elif command == 'sqrt':
        out = _result(element_to_json(sqrt(element(args.elem), tol)), args)
    elif command == 'inverse':
        out = _result(element_to_json(inverse(element(args.elem), tol)), args)
    elif command == 'inner':
        out = _result(element_to_json(inner(vector(args.vec), vector(args.vec2))), args)
    elif command == 'module-seminorm':
        out = _result(real_to_json(module_seminorm(vector(args.vec), args.index)), args)
    elif command == 'smooth':
        out = _result(vector_to_json(smooth(vector(args.vec), args.t_param, tol)), args)
    else:
        op = operator_from_json(algebra, read_json(args.op))
        if command == 'op-seminorm':
            out = _result(real_to_json(op_seminorm(op, args.index)), args)
        elif command == 'adjoint':
            out = _result(operator_to_json(adjoint(op)), args)
        else:
            verdict = op_spectrum(op, horizon, tol)
            out = _result([complex_to_json(z) for z in verdict.value], args, verdict.exact)
    return EXIT_OK, dump_json(out)


def _error(name: str, message: str) -> str:
    return dump_json({'error': name, 'message': message})


def main(argv: t.Optional[t.Sequence[str]] = None) -> int:
    """Entry point of the `loccstar` console script."""
    try:
        args = parse_arguments(argv)
    except ParseError as e:
        print(_error(PARSE_ERROR, str(e)))
        return EXIT_PARSE_ERROR

    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr)
    try:
        status, text = dispatch(args)
    except SpecError as e:
        logger.debug(f'Rejected input: {e}')
        print(_error(PARSE_ERROR, str(e)))
        return EXIT_PARSE_ERROR
    except LocCStarError as e:
        print(_error(type(e).__name__, str(e)))
        return EXIT_DOMAIN_ERROR
    print(text)
    return status


if __name__ == '__main__':
    sys.exit(main())
