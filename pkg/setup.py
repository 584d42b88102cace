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
"""Setup loccstar.

Pure Python on top of numpy and scipy; no non-python dependencies are needed.
"""
from setuptools import setup, find_packages

setup(
    name='loccstar',
    package_dir={'': 'src'},
    packages=find_packages('src'),
    description="Locally C*-algebras, Hilbert modules and their operators as exact matrix models.",
    version='0.1.0',
    platforms=['darwin', 'linux'],
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'scipy',
        'pandas',
        'immutabledict',
        'fsspec',
        'jsonschema',
    ],
    tests_require=['pytest'],
    entry_points={
        'console_scripts': ['loccstar=loccstar.cli:main'],
    },
)
