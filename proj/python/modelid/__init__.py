# Copyright 2026 The modelid Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Black-box model identification with Bayesian optimization."""

from modelid._modelid import (
    GpSurrogate,
    ParameterSpace,
    default_config,
    default_push_space,
    default_structure_space,
    default_structure_truth,
    expected_improvement,
    identify,
    method_ids,
    push_displacement,
    random_search,
    run_experiment,
    structure_param_names,
)

__all__ = [
    "GpSurrogate",
    "ParameterSpace",
    "default_config",
    "default_push_space",
    "default_structure_space",
    "default_structure_truth",
    "expected_improvement",
    "identify",
    "method_ids",
    "push_displacement",
    "random_search",
    "run_experiment",
    "structure_param_names",
]
