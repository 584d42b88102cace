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
"""Runs the full property suite with the trial configuration in configs/default.cfg.

Usage:
    python src/run-loccstar.py [path/to/trials.cfg [path/or/url/of/report.txt]]

The text report is printed, and also written through fsspec when a second
argument is given.
"""
import logging
import os
import sys

from loccstar import load_trial_config, reports_to_text, run_suite, suite_passed, thread_budget
from loccstar.utils import write_text

# Logger Configuration
logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

DEFAULT_CONFIG = os.path.join(os.path.dirname(__file__), '..', 'configs', 'default.cfg')

if __name__ == "__main__":
    config_file = sys.argv[1] if len(sys.argv) > 1 else DEFAULT_CONFIG
    cfg = load_trial_config(config_file)
    workers = thread_budget()
    logger.info(f"Verifying {cfg} with {workers} workers.")
    reports = run_suite(cfg, workers)
    report = reports_to_text(reports)
    print(report)
    if len(sys.argv) > 2:
        write_text(report, sys.argv[2])
    if not suite_passed(reports):
        failed = [r.id for r in reports if not r.passed]
        logger.error(f"Properties failed: {failed}.")
        sys.exit(3)
    logger.info("All properties passed.")
