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

import json
import math

import pytest

import metainf

L4X4 = {"id": "l4x4", "gpu_class": "L4", "gpu_count": 4, "memory_gb": 24.0,
        "price_per_hour": 3.2}


def task(batch_size, model="llama-3.1-8b"):
    return {"id": "smoke-%d" % batch_size, "description": "chat assistant traffic",
            "batch_size": batch_size, "prompt_count": 1000, "model": model}


def test_fallback_embed_is_unit_and_pure():
    a = metainf.fallback_embed("hello", 64)
    b = metainf.fallback_embed("hello", 64)
    assert a == b
    assert len(a) == 64
    assert math.isclose(sum(x * x for x in a), 1.0, rel_tol=1e-12)


def test_estimate_cost():
    assert metainf.estimate_cost(L4X4, 36.0) == pytest.approx(3.2 * 36.0 / 3600.0)
    with pytest.raises(metainf.DataError):
        metainf.estimate_cost(L4X4, 0.0)


def test_oracle_selection_matches_reference_table():
    oracle = metainf.synth_oracle(7)
    assert oracle.kind == "oracle"
    assert oracle.select(task(16), L4X4)["method_name"] == "All"
    assert oracle.select(task(256), L4X4)["method_name"] == "Prefix Caching"
    ranking = oracle.rank(task(16), L4X4)
    runtimes = [r["predicted_runtime_s"] for r in ranking]
    assert runtimes == sorted(runtimes)


def test_infeasible_budget_carries_cheapest_cost():
    oracle = metainf.synth_oracle(7)
    with pytest.raises(metainf.InfeasibleError) as info:
        oracle.select(task(16), L4X4, budget=0.0)
    assert info.value.cheapest_cost > 0.0
    ok = oracle.select(task(16), L4X4, budget=info.value.cheapest_cost)
    assert ok["cost"] <= info.value.cheapest_cost


def test_cli_round_trip(tmp_path):
    d = str(tmp_path / "data")
    code, out, _ = metainf.run_cli(["--data-dir", d, "synth", "--seed", "3"])
    assert code == 0 and json.loads(out)["train_tasks"] == 200
    code, out, _ = metainf.run_cli(["--data-dir", d, "train", "--selector", "ridge"])
    assert code == 0
    version = json.loads(out)["model_version"]
    code, out, _ = metainf.run_cli(["--data-dir", d, "select", "--task-desc", "chat",
                                    "--model", "phi-2", "--hardware", "t4x4"])
    assert code == 0 and json.loads(out)["model_version"] == version

    sel = metainf.load_selector(json.loads((tmp_path / "data" / "model.json").read_text()))
    assert sel.model_version == version

    trained = metainf.train(tmp_path / "data" / "records.jsonl",
                            tmp_path / "data" / "catalog.json", selector="ridge")
    assert trained.model_version == version


def test_cli_usage_error():
    code, _, err = metainf.run_cli(["evaluate", "--bogus"])
    assert code == 2
    assert "Usage" in err


def test_evaluate_small():
    rep = metainf.evaluate(trials=200, seed=1)
    sel = rep["selectors"]
    assert sel["oracle"]["accuracy"] == 1.0
    assert sel["metainf"]["accuracy"] > sel["global_best"]["accuracy"]
