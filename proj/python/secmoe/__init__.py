# Copyright 2026 The secmoe Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#   http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Two-party secure inference for sparse mixture-of-experts models."""

import json

from ._secmoe import (
    BENCH_SCHEMA,
    REPORT_SCHEMA,
    FixedConfig,
    ModelConfig,
    SecmoeError,
    Weights,
    _bench,
    _infer,
    gelu_approx,
    gelu_exact,
    gen_weights,
    load_weights,
    plain_forward,
    save_weights,
    selftest,
)

__all__ = [
    "BENCH_SCHEMA",
    "REPORT_SCHEMA",
    "FixedConfig",
    "ModelConfig",
    "SecmoeError",
    "Weights",
    "bench",
    "gelu_approx",
    "gelu_exact",
    "gen_weights",
    "infer",
    "load_weights",
    "plain_forward",
    "save_weights",
    "selftest",
]


def infer(weights, tokens, protocol="secmoe", seed=1, gate_scaling=False, net="lan"):
    """Secure forward pass with both parties in this process.

    Returns the output as a (seq_len, d_model) array and the report as a dict.
    """
    out, report = _infer(weights, tokens, protocol, seed, gate_scaling, net)
    return out, json.loads(report)


def bench(experts, family="toy-moe", protocols=("secmoe", "dense"), seed=1):
    """Sweep expert counts; returns the bench report as a dict."""
    return json.loads(_bench(list(experts), family, list(protocols), seed))
