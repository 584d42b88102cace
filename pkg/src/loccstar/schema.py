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
"""JSON codec for algebras, elements, vectors and operators.

Every `*_from_json` validates its input against the matching JSON Schema first
and raises `SpecError` for anything that does not describe a valid value. The
formats are documented in docs/schema.md.
"""
import logging
import math

import jsonschema
import typing as t

from .constant import UNBOUNDED
from .cstar_matrix import CMatrix
from .exceptions import LocCStarError, SpecError
from .hilbert_module import FREE, IDEAL, HilbertModule, ModuleVector
from .local_algebra import LocalAlgebra, LocalElement, TailRule
from .operator_algebra import ModuleOperator

logger = logging.getLogger(__name__)

UNBOUNDED_TOKEN = 'Unbounded'

MATRIX_SCHEMA = {
    'type': 'array',
    'minItems': 1,
    'items': {
        'type': 'array',
        'minItems': 1,
        'items': {
            'type': 'array',
            'items': {'type': 'number'},
            'minItems': 2,
            'maxItems': 2,
        },
    },
}

ALGEBRA_SCHEMA = {
    'oneOf': [
        {
            'type': 'object',
            'properties': {
                'model': {'const': 'finite'},
                'fibers': {
                    'type': 'array',
                    'minItems': 1,
                    'items': {
                        'type': 'object',
                        'properties': {
                            'label': {'type': 'string', 'minLength': 1},
                            'dim': {'type': 'integer', 'minimum': 1},
                        },
                        'required': ['label', 'dim'],
                        'additionalProperties': False,
                    },
                },
            },
            'required': ['model', 'fibers'],
            'additionalProperties': False,
        },
        {
            'type': 'object',
            'properties': {
                'model': {'const': 'tail'},
                'dim': {'type': 'integer', 'minimum': 1},
                'prefix_len': {'type': 'integer', 'minimum': 1},
            },
            'required': ['model', 'dim', 'prefix_len'],
            'additionalProperties': False,
        },
    ],
}

ELEMENT_SCHEMA = {
    'type': 'object',
    'properties': {
        'components': {'type': 'object', 'additionalProperties': MATRIX_SCHEMA},
        'tail': {
            'type': 'object',
            'properties': {'coeffs': {'type': 'array', 'minItems': 1, 'items': MATRIX_SCHEMA}},
            'required': ['coeffs'],
            'additionalProperties': False,
        },
    },
    'required': ['components'],
    'additionalProperties': False,
}

MODULE_SCHEMA = {
    'type': 'object',
    'properties': {
        'rank': {'type': 'integer', 'minimum': 1},
        'flavor': {'enum': [FREE, IDEAL]},
        'kernel': {'type': 'array', 'items': {'type': ['string', 'integer']}},
    },
    'required': ['rank'],
    'additionalProperties': False,
}

VECTOR_SCHEMA = {
    'type': 'object',
    'properties': {
        'module': MODULE_SCHEMA,
        'entries': {'type': 'array', 'minItems': 1, 'items': ELEMENT_SCHEMA},
    },
    'required': ['module', 'entries'],
    'additionalProperties': False,
}

OPERATOR_SCHEMA = {
    'type': 'object',
    'properties': {
        'rank': {'type': 'integer', 'minimum': 1},
        'matrix': {
            'type': 'array',
            'minItems': 1,
            'items': {'type': 'array', 'minItems': 1, 'items': ELEMENT_SCHEMA},
        },
    },
    'required': ['rank', 'matrix'],
    'additionalProperties': False,
}


def validate(instance: t.Any, schema: t.Dict[str, t.Any], what: str) -> None:
    """Validate `instance` against `schema`.

    Raises:
        SpecError: naming `what` and the first violation.
    """
    try:
        jsonschema.validate(instance=instance, schema=schema)
    except jsonschema.ValidationError as e:
        logger.debug(f'{what} spec fails its schema at {list(e.absolute_path)}: {e.message}')
        raise SpecError(f'Invalid {what} spec: {e.message}') from e


def _building(what: str, build: t.Callable[[], t.Any]) -> t.Any:
    # Valid JSON that still breaks a domain invariant is a spec error too.
    try:
        return build()
    except SpecError:
        raise
    except (LocCStarError, ValueError, KeyError) as e:
        raise SpecError(f'Invalid {what} spec: {e}') from e


def algebra_from_json(obj: t.Any) -> LocalAlgebra:
    validate(obj, ALGEBRA_SCHEMA, 'algebra')
    if obj['model'] == 'finite':
        labels = [f['label'] for f in obj['fibers']]
        if len(set(labels)) != len(labels):
            raise SpecError(f'Invalid algebra spec: duplicate fiber labels {labels}.')
        return _building('algebra', lambda: LocalAlgebra.finite(
            {f['label']: int(f['dim']) for f in obj['fibers']}))
    return _building('algebra', lambda: LocalAlgebra.countable(int(obj['dim']), int(obj['prefix_len'])))


def algebra_to_json(algebra: LocalAlgebra) -> t.Dict[str, t.Any]:
    if algebra.is_countable:
        return {'model': 'tail', 'dim': algebra.common_dim,
                'prefix_len': algebra.index.prefix_len}
    return {'model': 'finite',
            'fibers': [{'label': a, 'dim': algebra.dim(a)} for a in algebra.indices()]}


def _element(algebra: LocalAlgebra, obj: t.Dict[str, t.Any]) -> LocalElement:
    components = {k: CMatrix.from_json(m) for k, m in obj['components'].items()}
    tail = None
    if 'tail' in obj:
        tail = TailRule(tuple(CMatrix.from_json(m) for m in obj['tail']['coeffs']))
    return algebra.element(components, tail)


def element_from_json(algebra: LocalAlgebra, obj: t.Any) -> LocalElement:
    validate(obj, ELEMENT_SCHEMA, 'element')
    return _building('element', lambda: _element(algebra, obj))


def element_to_json(a: LocalElement) -> t.Dict[str, t.Any]:
    out: t.Dict[str, t.Any] = {
        'components': {str(k): m.to_json() for k, m in a.components.items()}}
    if a.tail is not None:
        out['tail'] = {'coeffs': [c.to_json() for c in a.tail.coeffs]}
    return out


def _module(algebra: LocalAlgebra, obj: t.Dict[str, t.Any]) -> HilbertModule:
    if obj.get('flavor', FREE) == IDEAL:
        if int(obj['rank']) != 1:
            raise SpecError('Invalid vector spec: an ideal module has rank 1.')
        return HilbertModule.ideal(algebra, obj.get('kernel', []))
    return HilbertModule.free(algebra, int(obj['rank']))


def vector_from_json(algebra: LocalAlgebra, obj: t.Any) -> ModuleVector:
    validate(obj, VECTOR_SCHEMA, 'vector')

    def build() -> ModuleVector:
        module = _module(algebra, obj['module'])
        return module.vector([_element(algebra, e) for e in obj['entries']])

    return _building('vector', build)


def vector_to_json(x: ModuleVector) -> t.Dict[str, t.Any]:
    module: t.Dict[str, t.Any] = {'rank': x.module.rank, 'flavor': x.module.flavor}
    if x.module.flavor == IDEAL:
        module['kernel'] = sorted(str(alpha) for alpha in x.module.kernel_indices)
    return {'module': module, 'entries': [element_to_json(e) for e in x.entries]}


def operator_from_json(algebra: LocalAlgebra, obj: t.Any) -> ModuleOperator:
    validate(obj, OPERATOR_SCHEMA, 'operator')

    def build() -> ModuleOperator:
        module = HilbertModule.free(algebra, int(obj['rank']))
        matrix = tuple(tuple(_element(algebra, e) for e in row) for row in obj['matrix'])
        return ModuleOperator(module, matrix)

    return _building('operator', build)


def operator_to_json(op: ModuleOperator) -> t.Dict[str, t.Any]:
    return {'rank': op.rank,
            'matrix': [[element_to_json(e) for e in row] for row in op.matrix]}


def real_to_json(value: float) -> t.Union[float, str]:
    """A norm value, with `UNBOUNDED` written as "Unbounded"."""
    if value == UNBOUNDED:
        return UNBOUNDED_TOKEN
    return float(value)


def real_from_json(value: t.Union[float, str]) -> float:
    if value == UNBOUNDED_TOKEN:
        return math.inf
    return float(value)


def complex_to_json(z: complex) -> t.List[float]:
    return [float(z.real), float(z.imag)]
