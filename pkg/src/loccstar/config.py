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
# ==============================================================================
import configparser
import dataclasses
import logging
import os
import typing as t

from .constant import DEFAULT_HORIZON, DEFAULT_TOLERANCE, THREADS_ENV_VAR
from .exceptions import SpecError

logger = logging.getLogger(__name__)

SECTION = 'suite'


@dataclasses.dataclass(frozen=True)
class TrialConfig:
    """Parameters of one verification run.

    Attributes:
        seed (int): root of every per-trial random stream.
        trials (int): trials per property before per-property scaling.
        max_dim (int): largest fiber dimension drawn.
        max_fibers (int): largest number of fibers in a finite model.
        max_rank (int): largest module rank k.
        prefix_len (int): N, the explicit prefix of countable models.
        horizon (int): H, tail fibers checked beyond the prefix.
        tolerance (float): the base tolerance eps; 0 is allowed.
    """
    seed: int = 42
    trials: int = 200
    max_dim: int = 6
    max_fibers: int = 5
    max_rank: int = 4
    prefix_len: int = 8
    horizon: int = DEFAULT_HORIZON
    tolerance: float = DEFAULT_TOLERANCE

    def __post_init__(self):
        for name in ('trials', 'max_dim', 'max_fibers', 'max_rank', 'prefix_len', 'horizon'):
            if getattr(self, name) < 1:
                raise ValueError(f'{name} must be positive, got {getattr(self, name)}.')
        if not 0 <= self.tolerance < 1:
            raise ValueError(f'tolerance must lie in [0, 1), got {self.tolerance}.')
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f'seed must be a 64-bit unsigned integer, got {self.seed}.')

    def replace(self, **overrides: t.Any) -> 'TrialConfig':
        """A copy with every override that is not None applied."""
        return dataclasses.replace(self, **{k: v for k, v in overrides.items() if v is not None})


def _field_types() -> t.Dict[str, t.Callable[[str], t.Any]]:
    return {f.name: (float if f.type in (float, 'float') else int)
            for f in dataclasses.fields(TrialConfig)}


def load_trial_config(config_file: str) -> TrialConfig:
    """Read the [suite] section of a .cfg file into a TrialConfig.

    Missing keys keep their defaults.

    Raises:
        SpecError: if the file has no [suite] section, names an unknown key or
            holds a value that does not parse.
    """
    config = configparser.ConfigParser()
    if not config.read(config_file):
        raise SpecError(f'Cannot read trial configuration {config_file!r}.')
    if not config.has_section(SECTION):
        raise SpecError(f'{config_file!r} has no [{SECTION}] section.')

    types = _field_types()
    values = {}
    for key, raw in config.items(SECTION):
        if key not in types:
            raise SpecError(f'Unknown trial setting {key!r} in {config_file!r}.')
        try:
            values[key] = types[key](raw)
        except ValueError as e:
            raise SpecError(f'Bad value {raw!r} for {key!r} in {config_file!r}.') from e
    try:
        cfg = TrialConfig(**values)
    except ValueError as e:
        raise SpecError(f'Invalid trial configuration {config_file!r}: {e}') from e
    logger.debug(f'Loaded {cfg} from {config_file}.')
    return cfg


def write_trial_config(cfg: TrialConfig, config_file: str) -> None:
    """Write `cfg` as the [suite] section of `config_file`, keeping other sections."""
    config = configparser.ConfigParser()
    config.read(config_file)
    if not config.has_section(SECTION):
        config.add_section(SECTION)
    for name, value in dataclasses.asdict(cfg).items():
        config.set(SECTION, name, repr(value) if isinstance(value, float) else str(value))
    with open(config_file, 'w') as file:
        config.write(file, space_around_delimiters=False)


def thread_budget(default: t.Optional[int] = None) -> int:
    """Worker processes for the suite; LOCCSTAR_THREADS overrides the default."""
    fallback = default or min(8, os.cpu_count() or 1)
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return fallback
    try:
        threads = int(raw)
    except ValueError:
        logger.warning(f'Ignoring {THREADS_ENV_VAR}={raw!r}: not an integer.')
        return fallback
    return max(1, threads)
