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

from acceptance_testing_utils import read_json, run_command


def test_step_time_does_not_grow(run_directory):
    document = {"simulation": {"system": "ring"}, "model": {"p": 1}}
    report = read_json(run_command(run_directory, "bench", document) / "bench.json")
    assert report["dimensions"] == {"n": 50, "m": 2, "p": 1, "q": 100, "r": 20}
    assert report["n_steps"] == 5000
    low, high = report["slope_ci"]
    assert low <= 0 <= high
    assert report["median_ms"] < 10


def test_full_scale_dimensions(run_directory):
    document = {"simulation": {"system": "ring"}, "preset": "full"}
    report = read_json(run_command(run_directory / "full", "bench", document) / "bench.json")
    assert report["dimensions"]["n"] == 200
    assert report["median_ms"] < 10
    assert report["reference_ms_per_step"] == 1.1
