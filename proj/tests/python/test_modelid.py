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
"""Smoke tests of the Python bindings."""

import csv
import math

import numpy as np
import pytest

import modelid


def test_push_displacement_degenerate_pair():
    assert modelid.push_displacement(1.0, 0.32, 1.0) == pytest.approx(1.5625, abs=1e-12)
    assert modelid.push_displacement(0.8, 0.5, 1.0) == pytest.approx(1.5625, abs=1e-12)


def test_parameter_space_normalization():
    space = modelid.ParameterSpace(["a", "b"], [1.0, 2.0], [3.0, 6.0], 10)
    np.testing.assert_allclose(space.normalize([2.0, 5.0]), [0.5, 0.75])
    np.testing.assert_allclose(space.denormalize([0.5, 0.75]), [2.0, 5.0])
    assert space.dim == 2
    assert space.names == ["a", "b"]
    with pytest.raises(ValueError):
        space.normalize([1.0])


def test_gp_interpolates_and_matches_single_point_closed_form():
    gp = modelid.GpSurrogate.fit([[0.0]], [2.5], length_scale=0.3, signal_var=1.7,
                                 prior_mean=0.0)
    mean, var = gp.predict([0.2])
    k = 1.7 * math.exp(-0.2**2 / (2 * 0.3**2))
    assert mean == pytest.approx(k * 2.5 / (1.7 + gp.jitter), abs=1e-10)
    assert var == pytest.approx(1.7 - k * k / (1.7 + gp.jitter), abs=1e-10)


def test_expected_improvement_at_best_with_unit_variance():
    assert modelid.expected_improvement(0.0, 1.0, 0.0) == pytest.approx(0.398942, abs=1e-6)
    assert modelid.expected_improvement(5.0, 0.0, 3.0) == 0.0


def test_identify_python_error_function():
    space = modelid.ParameterSpace(["x", "y"], [0.0, 0.0], [1.0, 1.0], 50)

    def error(theta):
        return float((theta[0] - 0.3) ** 2 + (theta[1] - 0.7) ** 2)

    result = modelid.identify(error, space, budget=30, seed=1)
    assert len(result["history"]) == 30
    assert result["best_error"] < 1e-2
    best = result["best_so_far"]
    assert all(b >= a for a, b in zip(best[1:], best[:-1]))
    again = modelid.identify(error, space, budget=30, seed=1)
    np.testing.assert_array_equal(result["best_theta"], again["best_theta"])

    rs = modelid.random_search(error, space, budget=5, seed=2)
    assert len(rs["history"]) == 5
    assert min(h["error"] for h in rs["history"]) == rs["best_error"]


def test_run_experiment_writes_rows(tmp_path):
    config = modelid.default_config("push")
    config.update(methods=["random"], budget=10, seeds=[0, 1], out_dir=str(tmp_path))
    summary = modelid.run_experiment(config)
    assert [row["method"] for row in summary] == ["random"]
    assert summary[0]["runs"] == 2
    with open(tmp_path / "random.csv") as f:
        rows = [r for r in csv.reader(line for line in f if not line.startswith("#"))]
    assert len(rows) == 1 + 20


def test_run_experiment_rejects_unknown_method(tmp_path):
    config = modelid.default_config("push")
    config.update(methods=["simplex"], out_dir=str(tmp_path))
    with pytest.raises(ValueError):
        modelid.run_experiment(config)


def test_structure_space_matches_truth():
    space = modelid.default_structure_space()
    truth = modelid.default_structure_truth()
    assert space.dim == 12
    assert space.contains(truth)
    assert "rod_spacing" in modelid.structure_param_names()
