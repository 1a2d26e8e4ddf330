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


@pytest.fixture(scope="module")
def predicted(run_directory):
    document = {"simulation": {"system": "fhn"}, "train": {"record_wall_time": False}}
    return run_command(run_directory, "predict", document)


def test_rollout_keeps_oscillating(predicted):
    rollout = read_table(predicted / "rollout.csv")
    n_trials = int(rollout[:, 0].max()) + 1
    latents = rollout[:, 2:].reshape(n_trials, -1, 2)
    assert latents.shape[1] == 1000
    spread = latents[:, -500:].std(axis=1).mean(axis=0)
    assert np.all(spread > 0.1)


def test_short_horizon_beats_constant_prediction(predicted):
    rmse = read_table(predicted / "rmse.csv")
    truth_std = np.mean(read_json(predicted / "prediction_summary.json")["truth_std"])
    assert rmse[99, 0] == 100
    assert rmse[99, 1] < truth_std
