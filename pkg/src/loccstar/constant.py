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
import math

DEFAULT_TOLERANCE = 1e-9
DEFAULT_HORIZON = 64

UNBOUNDED = math.inf

THREADS_ENV_VAR = 'LOCCSTAR_THREADS'

# Trials per property are the configured count times this factor (at least 1).
property_trial_scale = {
    'Def1.1-1': 1.0,
    'Def1.1-2': 1.0,
    'Def1.1-3': 1.0,
    'Eq1.1': 0.5,
    'L1.1a': 1.0,
    'L1.1c': 1.0,
    'L1.1d': 1.0,
    'L1.2a': 1.0,
    'L1.2b': 1.0,
    'L1.2c': 1.0,
    'Rem1.1': 1.0,
    'ApproxId': 1.0,
    'Def2.1': 1.0,
    'Eq2.1': 2.5,
    'L2.2-1': 1.0,
    'L2.2-2': 1.0,
    'L2.2-3': 1.0,
    'Eq2.4': 1.0,
    'L2.3a': 0.5,
    'L2.3b': 0.5,
    'L2.4': 1.0,
    'L2.5': 1.0,
    'Thm2.3': 1.0,
    'Def3.1': 1.0,
    'Eq3.1': 1.0,
    'L3.2': 1.0,
    'Eq3.6': 1.0,
    'P3.1a': 0.5,
    'P3.1b': 1.0,
    'P3.1c': 0.5,
    'P3.2': 0.5,
    'P3.3': 1.0,
}

PROPERTY_IDS = tuple(property_trial_scale)
