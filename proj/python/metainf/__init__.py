# Copyright 2026 The MetaInf Authors. All Rights Reserved.
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

"""Zero-shot selection of LLM inference acceleration methods.

Thin dict-based wrappers over the native ``_metainf`` module.
"""

import json as _json

from . import _metainf
from ._metainf import (
    DataError,
    Error,
    InfeasibleError,
    IntegrityError,
    IoError,
    ProviderError,
    UsageError,
    fallback_embed,
)

__all__ = [
    "DataError",
    "Error",
    "InfeasibleError",
    "IntegrityError",
    "IoError",
    "ProviderError",
    "Selector",
    "UsageError",
    "estimate_cost",
    "evaluate",
    "fallback_embed",
    "load_selector",
    "run_cli",
    "synth_oracle",
    "train",
]


class Selector:
    """A trained selector snapshot."""

    def __init__(self, native):
        self._native = native

    @property
    def kind(self):
        return self._native.kind

    @property
    def model_version(self):
        return self._native.model_version

    def to_json(self):
        return _json.loads(self._native.to_json())

    def rank(self, task, hardware):
        return _json.loads(self._native.rank(_json.dumps(task), _json.dumps(hardware)))

    def select(self, task, hardware, budget=None):
        return _json.loads(
            self._native.select(_json.dumps(task), _json.dumps(hardware), budget)
        )


def load_selector(model, raw_dim=384):
    if not isinstance(model, str):
        model = _json.dumps(model)
    return Selector(_metainf.load_selector(model, raw_dim))


def train(records, catalog, selector="metainf", style="rich", rank=64):
    return Selector(_metainf.train(str(records), str(catalog), selector, style, rank))


def synth_oracle(seed=7):
    return Selector(_metainf.synth_oracle(seed))


def evaluate(trials=1000, seed=7, synth_seed=7, style="rich", rank=64):
    return _json.loads(_metainf.evaluate(trials, seed, synth_seed, style, rank))


def estimate_cost(hardware, runtime_s):
    return _metainf.estimate_cost(_json.dumps(hardware), runtime_s)


def run_cli(args):
    """Runs the command line in-process; returns (exit_code, stdout, stderr)."""
    return _metainf.run_cli([str(a) for a in args])
