# Copyright 2026 The vjf Authors. All Rights Reserved.
#
# Licensed under the Apache License, Version 2.0 (the "License"). You
# may not use this file except in compliance with the License. A copy of
# the License is located at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# or in the "license" file accompanying this file. This file is
# distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF
# ANY KIND, either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

import numpy as np
import pytest
from acceptance_testing_utils import read_json, read_table, run_command

from vjf.filtering import load_checkpoint

RING = {"simulation": {"system": "ring"}, "train": {"record_wall_time": False}}


@pytest.fixture(scope="module")
def filtered(run_directory):
    return run_command(run_directory / "filter", "filter", RING)


def test_posterior_means_recover_latents(filtered):
    summary = read_json(filtered / "summary.json")
    assert summary["alignment"]["posterior_rmse"] < 0.2


def test_diagnostics_plateau(filtered):
    summary = read_json(filtered / "summary.json")
    assert summary["plateau"] == {"recon_ll": True, "dyn_ll": True, "entropy": True}
    diagnostics = read_table(filtered / "diagnostics.csv")
    assert np.all(np.isfinite(diagnostics))


def test_fixed_points_around_the_ring(run_directory, filtered):
    document = dict(RING, checkpoint=str(filtered / "checkpoint.json"))
    portrait = run_command(run_directory / "portrait", "portrait", document)
    fixed_points = read_json(portrait / "portrait_aligned_fixed_points.json")
    radii = np.array([np.linalg.norm(point["location"]) for point in fixed_points])
    assert np.sum(np.abs(radii - 1) < 0.3) >= 5
    central = [point for point, radius in zip(fixed_points, radii) if radius < 0.3]
    assert any(point["class"] == "unstable" for point in central)


def test_checkpoint_columns_have_unit_norm(filtered):
    loading = np.asarray(load_checkpoint(filtered / "checkpoint.json").observation.loading)
    np.testing.assert_allclose(np.linalg.norm(loading, axis=0), 1.0, atol=1e-12)


def test_rerun_is_byte_identical(run_directory, filtered):
    again = run_command(run_directory / "again", "filter", RING)
    for name in ["checkpoint.json", "diagnostics.csv", "posterior_means.csv", "summary.json"]:
        assert (again / name).read_bytes() == (filtered / name).read_bytes()
