import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from psbench import cli, harness, snapshot
from psbench.cli import ConfigError, RunConfig


def run(argv, capsys):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_run_writes_curves_and_is_reproducible(tmp_path, capsys):
    argv = ["run", "--agents", "4", "--trials", "25", "--seed", "7"]
    code, out, _ = run(argv + ["--out", str(tmp_path / "a")], capsys)
    assert code == 0 and "final mean" in out
    run(argv + ["--out", str(tmp_path / "b")], capsys)
    for name in ("curve.csv", "curve.dat"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    stats = harness.read_curve_csv(tmp_path / "a" / "curve.csv")
    assert stats.n_trials == 25


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "7")
    run(["run", "--agents", "4", "--trials", "25", "--out", str(tmp_path / "env")], capsys)
    run(["run", "--agents", "4", "--trials", "25", "--seed", "7", "--out", str(tmp_path / "flag")], capsys)
    assert (tmp_path / "env" / "curve.csv").read_bytes() == (tmp_path / "flag" / "curve.csv").read_bytes()


def test_snapshot_then_replay(tmp_path, capsys):
    snap = tmp_path / "agent.snap"
    argv = ["run", "--agents", "1", "--trials", "200", "--seed", "1", "--out", str(tmp_path), "--snapshot", str(snap)]
    run(argv, capsys)
    code, out, _ = run(["replay", str(snap)], capsys)
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0].split()[:3] == ["1", "(3,", "1)"]
    assert lines[-1] == "steps: 14 (goal reached)"


def test_replay_td_respects_step_cap(tmp_path, capsys):
    # untried actions keep the optimistic initial value, so a frozen greedy policy may loop
    snap = tmp_path / "agent.snap"
    run(["run", "--agent", "q", "--agents", "1", "--trials", "30", "--out", str(tmp_path), "--snapshot", str(snap)], capsys)
    code, out, _ = run(["replay", str(snap), "--max-steps", "300"], capsys)
    assert code == 0
    n = int(out.strip().splitlines()[-1].split()[1])
    assert 14 <= n <= 300
    assert len(out.strip().splitlines()) == n + 1


def test_replay_mountaincar_ps(tmp_path, capsys):
    snap = tmp_path / "mc.snap"
    run(["run", "--env", "mountaincar", "--agents", "1", "--trials", "40", "--out", str(tmp_path), "--snapshot", str(snap)], capsys)
    code, out, _ = run(["replay", str(snap), "--quiet", "--max-steps", "5000"], capsys)
    assert code == 0 and out.startswith("steps: ")


def test_replay_truncated_snapshot_reports_offset(tmp_path, capsys):
    snap = tmp_path / "agent.snap"
    run(["run", "--agents", "1", "--trials", "5", "--out", str(tmp_path), "--snapshot", str(snap)], capsys)
    text = snap.read_bytes()
    snap.write_bytes(text[: len(text) // 2])
    code, _, err = run(["replay", str(snap)], capsys)
    assert code != 0 and "byte offset" in err


def test_unknown_config_key_named(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("env = gridworld\nlearning_rate = 0.1\n")
    code, _, err = run(["run", "--config", str(cfg)], capsys)
    assert code != 0 and "learning_rate" in err


def test_bad_values_exit_nonzero(tmp_path, capsys):
    assert run(["run", "--eta", "1.5", "--out", str(tmp_path)], capsys)[0] != 0
    assert run(["sweep", "--axis", "zeta=0:1:3", "--out", str(tmp_path)], capsys)[0] != 0
    assert run(["run", "--maze", str(tmp_path / "missing.txt"), "--out", str(tmp_path)], capsys)[0] != 0
    with pytest.raises(SystemExit):
        cli.main(["sweep", "--recipe", "fig42"])


def test_expect_optimum_mismatch(tmp_path, capsys):
    code, _, err = run(["run", "--expect-optimum", "13", "--out", str(tmp_path)], capsys)
    assert code != 0 and "14" in err


def test_custom_maze(tmp_path, capsys):
    maze = tmp_path / "maze.txt"
    maze.write_text("S..\n.#.\n..G\n")
    code, out, _ = run(["run", "--maze", str(maze), "--agents", "2", "--trials", "30", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert harness.read_curve_csv(tmp_path / "curve.csv").mean.min() >= 4


def test_sweep_recipe_run_kind(tmp_path, capsys):
    code, out, _ = run(["sweep", "--recipe", "fig6", "--agents", "2", "--trials", "10", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert {p.name for p in tmp_path.glob("curve_*.csv")} == {"curve_ps.csv", "curve_q.csv", "curve_sarsa.csv"}


def test_custom_sweep_and_resume(tmp_path, capsys):
    argv = ["sweep", "--axis", "eta=0.1,0.3", "--agents", "2", "--trials", "10", "--out", str(tmp_path)]
    assert run(argv, capsys)[0] == 0
    first = (tmp_path / "sweep.csv").read_text()
    assert first.splitlines()[0] == "panel,eta,score,msd"
    assert len(first.splitlines()) == 3
    assert len(list((tmp_path / "points_custom").glob("*.json"))) == 2
    run(argv, capsys)
    assert (tmp_path / "sweep.csv").read_text() == first


def test_dump_config_round_trip(capsys):
    code, out, _ = run(["run", "--env", "mountaincar", "--agent", "sarsa", "--dump-config"], capsys)
    assert code == 0
    config = RunConfig.from_text(out)
    assert config.epsilon == 0.01 and config.trials == 1000 and config.eta == 0.024
    assert config.to_text() == out


def test_config_defaults_depend_on_env():
    grid = RunConfig().resolved()
    car = RunConfig(env="mountaincar").resolved()
    assert (grid.eta, grid.epsilon, grid.trials) == (0.24, 0.0, 500)
    assert (car.eta, car.epsilon, car.trials) == (0.024, 0.01, 1000)
    assert RunConfig(env="mountaincar", eta=0.5).resolved().eta == 0.5


def test_config_parse_errors():
    with pytest.raises(ConfigError, match="agents"):
        RunConfig.from_text("agents = many\n")
    with pytest.raises(ConfigError, match="line 1"):
        RunConfig.from_text("just words\n")
    assert RunConfig.from_text("# comment\n\nseed = 3  # trailing\n").seed == 3


@given(
    env=st.sampled_from(["gridworld", "mountaincar"]),
    agent=st.sampled_from(["ps", "q", "sarsa", "random"]),
    eta=st.one_of(st.none(), st.floats(0, 1)),
    alpha=st.one_of(st.none(), st.floats(0, 1)),
    seed=st.integers(0, 2**63),
    agents=st.integers(1, 1000),
)
def test_config_round_trip_idempotent(env, agent, eta, alpha, seed, agents):
    config = RunConfig(env=env, agent=agent, eta=eta, alpha=alpha, seed=seed, agents=agents)
    text = config.to_text()
    assert RunConfig.from_text(text) == config
    assert RunConfig.from_text(text).to_text() == text


def test_parse_axis():
    assert cli.parse_axis("eta=0:0.4:3") == ("eta", [0.0, 0.2, 0.4])
    assert cli.parse_axis("mu=0.5, 0.9") == ("mu", [0.5, 0.9])
    with pytest.raises(ConfigError):
        cli.parse_axis("eta")
    with pytest.raises(ConfigError):
        cli.parse_axis("eta=a:b:c")


def test_snapshot_records_env(tmp_path, capsys):
    snap = tmp_path / "s.snap"
    run(["run", "--env", "mountaincar", "--agent", "sarsa", "--agents", "1", "--trials", "3", "--out", str(tmp_path), "--snapshot", str(snap)], capsys)
    loaded = snapshot.load(snap)
    assert loaded.kind == "sarsa"
    assert loaded.params["env"] == "mountaincar"
    assert np.all(np.isfinite(loaded.values))
