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
from .config import TrialConfig, load_trial_config, thread_budget, write_trial_config
from .constant import DEFAULT_HORIZON, DEFAULT_TOLERANCE, PROPERTY_IDS, UNBOUNDED
from .cstar_matrix import (
    CMatrix,
    mis_hermitian,
    mis_positive,
    minverse,
    mnorm,
    mpositivity_margin,
    mspectrum,
    msqrt,
    )
from .exceptions import (
    AlgebraMismatch,
    EigenFailure,
    EmptyKernel,
    InvalidMatrix,
    LocCStarError,
    ModuleMismatch,
    NotPositive,
    Singular,
    SpecError,
    UnknownIndex,
    UnsupportedTail,
    )
from .hilbert_module import (
    HilbertModule,
    ModuleVector,
    cauchy_schwarz_gap,
    fiber_module_norm,
    in_kernel_submodule,
    inner,
    module_seminorm,
    quotient_vector,
    smooth,
    sup_module_norm,
    )
from .local_algebra import (
    CountableIndex,
    FiniteIndex,
    Ideal,
    LocalAlgebra,
    LocalElement,
    TailRule,
    Verdict,
    approximate_identity,
    inverse,
    is_hermitian,
    is_in_bounded_part,
    is_leq,
    is_positive,
    quotient_map,
    seminorm,
    spectrum,
    sqrt,
    sup_norm,
    )
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
from .suite import (
    PropertyReport,
    RandomModels,
    generate,
    reports_to_json,
    reports_to_text,
    run_suite,
    suite_passed,
    )
