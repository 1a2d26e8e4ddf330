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

import json

import numpy as np
import pytest

from vjf.errors import ConfigurationError
from vjf.filtering import init_bundle, load_checkpoint, save_checkpoint


@pytest.fixture(params=[("poisson-canonical", "tanh"), ("gaussian", "relu")])
def bundle(request):
    kind, activation = request.param
    rng = np.random.default_rng(0)
    bundle = init_bundle(5, 2, 1, 8, 4, rng, kind=kind, activation=activation)
    return bundle.replace_parameters({"dynamics.weights": rng.normal(size=(2, 4)) / 3.0})


def test_bit_exact(tmp_path, bundle):
    path = tmp_path / "model.json"
    save_checkpoint(bundle, path)
    loaded = load_checkpoint(path)
    assert loaded.kind == bundle.kind
    assert loaded.recognition.activation == bundle.recognition.activation
    original = bundle.parameters()
    for name, value in loaded.parameters().items():
        np.testing.assert_array_equal(value, original[name], err_msg=name)
    assert loaded.block_names() == bundle.block_names()


def _edit(path, change):
    document = json.loads(path.read_text())
    change(document)
    path.write_text(json.dumps(document))


@pytest.mark.parametrize(
    "change",
    [
        lambda d: d["arrays"].pop("dynamics.centers"),
        lambda d: d["arrays"].update({"dynamics.speed": {"shape": [1], "data": ["0x1.0p+0"]}}),
        lambda d: d.update(format="other"),
        lambda d: d.update(version=2),
        lambda d: d["dimensions"].update(q=9),
        lambda d: d.update(extra=True),
        lambda d: d["arrays"]["observation.bias"].update(shape=[4]),
    ],
)
@pytest.mark.xfail(raises=ConfigurationError)
def test_malformed(tmp_path, bundle, change):
    path = tmp_path / "model.json"
    save_checkpoint(bundle, path)
    _edit(path, change)
    load_checkpoint(path)


@pytest.mark.xfail(raises=ConfigurationError)
def test_unreadable(tmp_path):
    load_checkpoint(tmp_path)
