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

from vjf.filtering.bundle import ModelBundle  # noqa: F401
from vjf.filtering.checkpoint import (  # noqa: F401
    CheckpointDocument,
    load_checkpoint,
    save_checkpoint,
)
from vjf.filtering.config import TrainConfig  # noqa: F401
from vjf.filtering.initialization import (  # noqa: F401
    init_bundle,
    init_loading_fa,
    normalize_loading,
)
from vjf.filtering.objective import (  # noqa: F401
    FilterState,
    RecognitionInputs,
    StepDiagnostics,
    grad_step_loss,
    step_loss,
)
from vjf.filtering.online import (  # noqa: F401
    FilterResult,
    OptimizerBank,
    apply_gradients,
    filter_online,
    filter_step,
    init_optimizer,
    reseed_centers,
)
from vjf.filtering.prediction import (  # noqa: F401
    Rollout,
    infer_posteriors,
    one_step_prediction,
    predict_rollout,
    predict_with_resets,
)
