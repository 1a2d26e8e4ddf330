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

import pytest


@pytest.fixture(scope="module")
def run_directory(tmp_path_factory, request):
    """A fresh artifact directory per test module, e.g. `test_ring_recovery0`."""
    return tmp_path_factory.mktemp(request.module.__name__.rsplit(".", 1)[-1])
