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
import json
import logging

import fsspec
import typing as t

from .exceptions import SpecError

logger = logging.getLogger(__name__)


def read_json(source: str) -> t.Any:
    """Loads a JSON document from a path or URL, or parses it inline.

    A `source` whose first non-blank character is '{' or '[' is parsed as JSON
    text; anything else is opened with fsspec, so local paths, gs:// and
    memory:// URLs all work.

    Args:
        source (str): A path, URL or JSON text.

    Returns:
        The decoded JSON value.

    Raises:
        SpecError: If the file cannot be opened or does not hold valid JSON.
    """
    text = source.lstrip()
    if text[:1] in ('{', '['):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise SpecError(f'Inline JSON does not parse: {e}') from e
        except RecursionError as e:
            raise SpecError('Inline JSON is nested too deeply.') from e
    try:
        with fsspec.open(source, 'r') as f:
            return json.load(f)
    except FileNotFoundError as e:
        raise SpecError(f'No such input file {source!r}.') from e
    except json.JSONDecodeError as e:
        raise SpecError(f'{source!r} is not valid JSON: {e}') from e
    except RecursionError as e:
        raise SpecError(f'{source!r} is nested too deeply.') from e
    except (OSError, UnicodeDecodeError, ValueError) as e:
        # ValueError also covers an unknown fsspec protocol.
        raise SpecError(f'Cannot read {source!r}: {e}') from e


def dump_json(obj: t.Any) -> str:
    """Serializes `obj` deterministically; non-finite floats are rejected."""
    return json.dumps(obj, allow_nan=False, separators=(',', ': '))


def write_text(text: str, target: str) -> None:
    """Writes `text` to a path or URL through fsspec."""
    with fsspec.open(target, 'w') as f:
        f.write(text)
    logger.info(f'Wrote {len(text)} characters to {target}.')
