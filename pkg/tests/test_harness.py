import json
import math
from pathlib import Path

import numpy as np
import pandas as pd
import pytest

from runner import cli
from runner.harness import (
    EXACT_CHAIN,
    MDP,
    TRANSNN,
    TRANSNN_CONTROL,
    RunOptions,
    benchmark,
    compare_actions,
    run_scenario,
)
from sisnet import settings
from sisnet.exports import dumps, jsonable
from sisnet.network.generators import random_scenario
from sisnet.network.scenario import write_scenario

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "data" / "scenarios"


@pytest.fixture
def isolated_dirs(tmp_path, monkeypatch):
    monkeypatch.setattr(settings, "LOG_DIR", str(tmp_path / "logs"))
    monkeypatch.setattr(settings, "OUTPUT_DIR", str(tmp_path / "runs"))
    return tmp_path


class TestCompareActions:
    def test_vacuous_inclusion(self):
        report = compare_actions(np.zeros((3, 2)), np.zeros((3, 2)))
        assert report["inclusion_fraction"] == 1.0
        assert report["inclusion_holds"]
        assert report["first_step_agreement"]
        assert report["entries"] == []

    def test_partial_inclusion(self):
        mdp = np.array([[1, 0], [0, 1], [0, 0]])
        transnn = np.array([[1, 1], [0, 0], [0, 0]])
        report = compare_actions(mdp, transnn, mdp_action_fraction=[[0.5, 0.0], [0.0, 0.5], [0.0, 0.0]])
        assert report["inclusion_fraction"] == 0.5
        assert not report["inclusion_holds"]
        assert report["overlap"] == pytest.approx(1 / 3)
        assert report["agreement_fraction"] == pytest.approx(4 / 6)
        assert not report["first_step_agreement"]
        assert report["inclusion_fraction_all_trials"] == pytest.approx(0.5)
        assert len(report["entries"]) == 3

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="shape"):
            compare_actions(np.zeros((2, 2)), np.zeros((3, 2)))


class TestRunScenario:
    def test_single_healthy_node(self):
        result = run_scenario(SCENARIO_DIR / "single_node.json", RunOptions(trials=500))
        assert not result.actions[MDP].any()
        assert not result.actions[TRANSNN_CONTROL].any()
        assert result.costs[MDP]["V0"] == 0.0
        assert result.costs[TRANSNN_CONTROL]["J2"] == 0.0
        assert result.comparison["inclusion_holds"]
        assert not result.has_warnings

    def test_useless_vaccine_full_agreement(self):
        result = run_scenario(SCENARIO_DIR / "five_node_useless_vaccine.json", RunOptions(trials=2000))
        assert not result.actions[MDP].any()
        assert not result.actions[TRANSNN_CONTROL].any()
        assert result.comparison["agreement_fraction"] == 1.0
        assert result.comparison["first_step_agreement"]

    def test_skip_mdp(self):
        result = run_scenario(SCENARIO_DIR / "five_node.json", RunOptions(methods=(MDP,), skip_mdp=True, trials=100))
        assert MDP in result.skipped
        assert MDP not in result.actions

    def test_mdp_skipped_over_cap(self, monkeypatch):
        monkeypatch.setattr(settings, "MDP_NODE_CAP", 3)
        scenario = random_scenario(4, 3, seed=1)
        result = run_scenario(scenario, RunOptions(methods=(MDP, TRANSNN_CONTROL), trials=200))
        assert "cap" in result.skipped[MDP]
        assert result.comparison is None
        assert result.actions[TRANSNN_CONTROL].shape == (3, 4)

    def test_bundled_scenario(self, tmp_path):
        out = tmp_path / "compare"
        options = RunOptions(trials=5000, out_dir=out)
        result = run_scenario(SCENARIO_DIR / "five_node.json", options)

        for method in (EXACT_CHAIN, TRANSNN, MDP, TRANSNN_CONTROL):
            assert result.timing[method] > 0.0
        assert result.timing[TRANSNN_CONTROL] < result.timing[MDP]
        assert result.actions[MDP].shape == (10, 5)
        assert result.actions[TRANSNN_CONTROL].shape == (10, 5)
        assert 0.0 <= result.comparison["inclusion_fraction"] <= 1.0
        assert result.costs["dominance"]["mdp_not_worse"]
        assert result.bound_check.exact_ok
        assert result.verification.rule_mismatches == 0

        for name in ("result.json", "traces.csv", "timing.csv", "actions_mdp.csv", "actions_transnn_control.csv",
                     "mdp_policy.json", "marginals_monte_carlo.csv", "marginals_p.csv"):
            assert (out / name).is_file(), name
        doc = json.loads((out / "result.json").read_text(encoding="utf-8"))
        for section in ("actions", "costs", "bound_check", "verification", "skipped", "warnings", "timing"):
            assert section in doc
        traces = pd.read_csv(out / "traces.csv")
        assert list(traces.columns) == ["trial", "k", "node", "state", "action"]
        actions = pd.read_csv(out / "actions_mdp.csv")
        assert list(actions.columns) == ["k", "node", "value"]
        assert len(actions) == 50

    def test_deterministic(self, tmp_path):
        docs = []
        for name in ("first", "second"):
            out = tmp_path / name
            run_scenario(SCENARIO_DIR / "five_node.json", RunOptions(trials=3000, out_dir=out))
            docs.append(json.loads((out / "result.json").read_text(encoding="utf-8")))
        for section in ("actions", "costs", "comparison"):
            assert json.dumps(docs[0][section], sort_keys=True) == json.dumps(docs[1][section], sort_keys=True), section
        assert docs[0]["transnn_control"]["schedule"] == docs[1]["transnn_control"]["schedule"]

    def test_seed_override(self):
        result = run_scenario(SCENARIO_DIR / "five_node.json", RunOptions(methods=(EXACT_CHAIN,), trials=100, seed=5))
        assert result.seed == 5


class TestBenchmark:
    def test_smoke(self):
        table = benchmark([3], [4], repeats=1)
        assert list(table.columns) == ["method", "n", "T", "repeats", "median_seconds", "min_seconds"]
        assert set(table["method"]) == {MDP, TRANSNN_CONTROL}
        assert (table["median_seconds"] > 0).all()

    def test_validation(self):
        with pytest.raises(ValueError):
            benchmark([3], [4], repeats=0)
        with pytest.raises(ValueError):
            benchmark([], [4])

    @pytest.mark.slow
    def test_speedup_at_five_nodes(self):
        table = benchmark([5], [10], repeats=3).set_index("method")
        assert table.loc[MDP, "min_seconds"] >= 100.0 * table.loc[TRANSNN_CONTROL, "min_seconds"]

    @pytest.mark.slow
    def test_mdp_time_grows_with_horizon(self):
        table = benchmark([4], [2, 10], repeats=3, methods=(MDP,)).set_index("T")
        assert table.loc[10, "min_seconds"] > 2.0 * table.loc[2, "min_seconds"]


class TestCli:
    def test_compare_exit_ok(self, isolated_dirs):
        out = isolated_dirs / "cmp"
        code = cli.main(["compare", "--scenario", str(SCENARIO_DIR / "five_node.json"), "--out", str(out)])
        assert code == cli.EXIT_OK
        doc = json.loads((out / "result.json").read_text(encoding="utf-8"))
        assert doc["warnings"] == []
        assert doc["transnn_control"]["status"] == "converged"
        assert {"inclusion_fraction", "first_step_agreement"} <= set(doc["comparison"])
        assert (isolated_dirs / "logs" / "sisnet.log").is_file()

    def test_default_output_directory(self, isolated_dirs):
        code = cli.main(["solve-transnn", "--scenario", str(SCENARIO_DIR / "single_node.json")])
        assert code == cli.EXIT_OK
        assert (isolated_dirs / "runs" / "single_node_solve_transnn" / "result.json").is_file()

    def test_validation_error(self, isolated_dirs):
        bad = isolated_dirs / "bad.json"
        bad.write_text(json.dumps({"n": 1, "T": 1, "beta": 0.3, "c": 1.0, "initial": [1.0], "weights": {"static": [[1.4]]}}))
        assert cli.main(["simulate", "--scenario", str(bad), "--trials", "10"]) == cli.EXIT_VALIDATION
        assert cli.main(["simulate", "--scenario", str(isolated_dirs / "missing.json")]) == cli.EXIT_VALIDATION

    def test_state_space_too_large(self, isolated_dirs, monkeypatch):
        monkeypatch.setattr(settings, "MDP_NODE_CAP", 2)
        path = write_scenario(random_scenario(3, 2, seed=0), isolated_dirs / "er3.json")
        assert cli.main(["solve-mdp", "--scenario", str(path), "--trials", "10"]) == cli.EXIT_RUNTIME

    def test_bench(self, isolated_dirs):
        out = isolated_dirs / "bench"
        code = cli.main(["bench", "--sizes", "2,3", "--horizons", "3", "--repeats", "1", "--out", str(out)])
        assert code == cli.EXIT_OK
        table = pd.read_csv(out / "bench.csv")
        assert len(table) == 4


class TestJson:
    def test_special_values(self):
        doc = jsonable({"a": np.array([1.0, np.inf]), "b": float("nan"), "c": np.int64(3), "d": np.bool_(True)})
        assert doc == {"a": [1.0, "inf"], "b": None, "c": 3, "d": True}
        assert math.isfinite(json.loads(dumps({"x": -np.inf, "y": 0.5}))["y"])
        assert json.loads(dumps({"x": -np.inf}))["x"] == "-inf"
