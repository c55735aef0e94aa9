import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from psbench import harness, recipes
from psbench.harness import CurveStats, ExperimentSpec, RandomParams, SweepGrid, aggregate
from psbench.ps_agent import PsParams
from psbench.td_agents import TdParams


def test_aggregate_hand_example():
    stats = aggregate([[10, 20], [30, 20]])
    np.testing.assert_array_equal(stats.mean, [20.0, 20.0])
    np.testing.assert_array_equal(stats.msd, [10.0, 0.0])


def test_aggregate_rejects_ragged():
    with pytest.raises(ValueError, match="differ in length"):
        aggregate([[1, 2, 3], [1, 2]])
    with pytest.raises(ValueError):
        aggregate([])


@given(st.lists(st.lists(st.integers(1, 10**6), min_size=3, max_size=3), min_size=1, max_size=20))
def test_aggregate_matches_numpy(rows):
    stats = aggregate(rows)
    data = np.array(rows, dtype=float)
    np.testing.assert_allclose(stats.mean, data.mean(axis=0))
    np.testing.assert_allclose(stats.msd, data.std(axis=0), atol=1e-9)
    assert np.all(stats.msd >= 0)


def test_final_tail():
    stats = CurveStats(np.array([5.0, 4.0, 2.0]), np.array([1.0, 1.0, 3.0]))
    assert stats.final() == (2.0, 3.0)
    assert stats.final(2) == (3.0, 2.0)


def test_spec_defaults_and_validation():
    assert ExperimentSpec("gridworld", PsParams(0.1)).n_trials == 500
    assert ExperimentSpec("mountaincar", PsParams(0.1)).n_trials == 1000
    with pytest.raises(ValueError):
        ExperimentSpec("cartpole", PsParams(0.1))
    with pytest.raises(ValueError):
        ExperimentSpec("gridworld", PsParams(0.1), n_agents=0)


def test_single_agent_has_zero_spread():
    stats = harness.run_experiment(ExperimentSpec("gridworld", PsParams(0.2), n_trials=20, n_agents=1))
    np.testing.assert_array_equal(stats.msd, 0.0)


def test_same_seed_same_curve_and_parallel_agrees():
    spec = ExperimentSpec("gridworld", TdParams(0.3, 0.9, 0.05, 0.0, "sarsa"), n_trials=30, n_agents=6, seed=5)
    a = harness.run_ensemble(spec)
    np.testing.assert_array_equal(a, harness.run_ensemble(spec))
    np.testing.assert_array_equal(a, harness.run_ensemble(spec, jobs=2))
    other = harness.run_ensemble(ExperimentSpec("gridworld", spec.agent, n_trials=30, n_agents=6, seed=6))
    assert not np.array_equal(a, other)


def test_step_cap_truncates():
    spec = ExperimentSpec("mountaincar", RandomParams(), n_trials=3, max_steps_per_trial=50, n_agents=2)
    np.testing.assert_array_equal(harness.run_ensemble(spec), 50)


def test_sweep_grid_order_and_size():
    grid = SweepGrid({"alpha": [0.1, 0.2], "mu": [0.5, 0.6, 0.7]})
    assert len(grid) == 6
    assert grid.points()[:2] == [{"alpha": 0.1, "mu": 0.5}, {"alpha": 0.1, "mu": 0.6}]


def _small_sweep():
    template = ExperimentSpec("gridworld", PsParams(0.0), n_trials=15, n_agents=3, seed=9)
    return SweepGrid({"eta": [0.05, 0.2, 0.5]}), template


def test_sweep_parallel_matches_serial():
    grid, template = _small_sweep()
    serial = harness.run_sweep(grid, template)
    parallel = harness.run_sweep(grid, template, jobs=2)
    np.testing.assert_array_equal(serial.scores, parallel.scores)
    np.testing.assert_array_equal(serial.msds, parallel.msds)


def test_sweep_point_equals_direct_run():
    grid, template = _small_sweep()
    done = harness.run_sweep(grid, template)
    direct = harness.run_experiment(harness.point_spec(template, {"eta": 0.2}, 1))
    assert done.scores[1] == direct.final()[0]


def test_sweep_resumes_from_cache(tmp_path, monkeypatch):
    grid, template = _small_sweep()
    first = harness.run_sweep(grid, template, cache_dir=tmp_path)
    assert len(list(tmp_path.glob("point_*.json"))) == 3
    (tmp_path / "point_000001.json").unlink()
    calls = []
    original = harness.run_experiment
    monkeypatch.setattr(harness, "run_experiment", lambda spec, jobs=1: calls.append(spec) or original(spec, jobs))
    second = harness.run_sweep(grid, template, cache_dir=tmp_path)
    assert len(calls) == 1 and calls[0].agent.eta == 0.2
    np.testing.assert_array_equal(first.scores, second.scores)


def test_curve_csv_round_trip(tmp_path):
    stats = aggregate([[3, 7, 1], [5, 9, 2]])
    harness.write_curve_csv(tmp_path / "c.csv", stats)
    back = harness.read_curve_csv(tmp_path / "c.csv")
    np.testing.assert_array_equal(back.mean, stats.mean)
    np.testing.assert_array_equal(back.msd, stats.msd)
    harness.write_curve_dat(tmp_path / "c.dat", stats)
    lines = (tmp_path / "c.dat").read_text().splitlines()
    assert lines[1].split() == ["1", "4.0", "3.0", "5.0"]


def test_sweep_csv_columns(tmp_path):
    grid = SweepGrid({"alpha": [0.1], "mu": [0.5, 0.9]}, np.array([20.0, 15.0]), np.array([1.0, 2.0]))
    harness.write_sweep_csv(tmp_path / "s.csv", grid)
    rows = list(csv.reader(open(tmp_path / "s.csv")))
    assert rows == [["alpha", "mu", "score", "msd"], ["0.1", "0.5", "20.0", "1.0"], ["0.1", "0.9", "15.0", "2.0"]]
    with pytest.raises(ValueError):
        harness.write_sweep_csv(tmp_path / "x.csv", SweepGrid({"a": [1]}))


@pytest.mark.parametrize(
    "name, sizes",
    [("fig3", [81, 81]), ("fig5", [4410, 4410]), ("fig7", [41]), ("fig8", [441, 441])],
)
def test_recipe_cardinalities(name, sizes):
    recipe = recipes.get(name)
    assert [len(s.grid) for s in recipe.sweeps] == sizes


def test_recipe_overrides_and_unknown():
    recipe = recipes.get("fig9", n_agents=3, seed=4)
    assert recipe.kind == "run"
    assert all(spec.n_agents == 3 and spec.seed == 4 for spec in recipe.runs.values())
    assert recipes.get("fig3").sweeps[0].grid.axes["eta"][-1] == pytest.approx(0.4)
    with pytest.raises(KeyError, match="fig42"):
        recipes.get("fig42")


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_gridworld_q_never_beats_optimum(seed):
    spec = ExperimentSpec("gridworld", TdParams(0.5, 0.9, 0.1, 1.0, "q"), n_trials=5, n_agents=1, seed=seed)
    assert harness.run_ensemble(spec).min() >= 14
