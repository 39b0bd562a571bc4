"""Tests for the experiment CLI, the runner and the summary."""
from pathlib import Path

import pytest

from cli.commands.preset import preset_figure1
from cli.main import app
from cli.report import compute_verdicts
from cli.runner import EXIT_CONFIG, EXIT_ENGINE, EXIT_IO, EXIT_OK, run_experiment
from cli.state import ArtifactError, ArtifactStore
from parsers.experiment import ExperimentConfig, load_config
from qja.dynamics import sample_trajectory

SMALL = """\
name: small
instance: {kind: potential, D: 8, seed: 2}
schedule: {n_steps: 40, dt: 0.1, beta_final: 10.0}
engines: [qja, qja_no_unitary, mapped_qa, gap_scan]
thresholds: {qja_min_gs_prob: null}
seed: 3
"""

JARZYNSKI = """\
name: je
instance: {kind: potential, D: 4, seed: 3}
schedule: {n_steps: 3, dt: 0.1, beta_final: 2.0}
engines: [je_exact, je_mc]
je: {n_samples: 20000}
seed: 5
"""


@pytest.fixture
def small_config(tmp_path) -> Path:
    path = tmp_path / "small.yaml"
    path.write_text(SMALL)
    return path


@pytest.fixture
def je_config(tmp_path) -> Path:
    path = tmp_path / "je.yaml"
    path.write_text(JARZYNSKI)
    return path


def test_run_writes_artifacts(runner, small_config, tmp_path):
    out = tmp_path / "out"
    result = runner.invoke(app, ["run", str(small_config), "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    for name in ("config.yaml", "reference.csv", "qja.csv", "qja_final.csv",
                 "qja_no_unitary.csv", "mapped_qa.csv", "gap.csv", "summary.txt"):
        assert (out / name).is_file(), name
    header = (out / "qja.csv").read_text().splitlines()[0]
    assert header == "step,t,beta,overlap_gibbs,gs_prob,norm_drift"
    assert (out / "qja_final.csv").read_text().startswith("index,energy,probability,gibbs_probability\n")
    assert len((out / "reference.csv").read_text().splitlines()) == 42
    summary = (out / "summary.txt").read_text()
    assert "PASS qja.min_overlap" in summary
    assert "overall: PASS" in summary


def test_runs_are_byte_identical(runner, small_config, je_config, tmp_path):
    for config in (small_config, je_config):
        first, second = tmp_path / f"{config.stem}-a", tmp_path / f"{config.stem}-b"
        assert runner.invoke(app, ["run", str(config), "--out", str(first)]).exit_code == EXIT_OK
        assert runner.invoke(app, ["run", str(config), "--out", str(second), "--threads", "3"]).exit_code == EXIT_OK
        produced = sorted(p.name for p in first.iterdir() if p.suffix in (".csv", ".txt") and p.name != "summary.txt")
        assert produced
        for name in produced:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name


def test_jarzynski_engines(runner, je_config, tmp_path):
    out = tmp_path / "je"
    result = runner.invoke(app, ["run", str(je_config), "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    header = (out / "je_mc.csv").read_text().splitlines()[0]
    assert header == "sample_index,work_exponent,exp_work"
    assert len((out / "je_mc.csv").read_text().splitlines()) == 20_001
    exact = ArtifactStore(out).read_values("je_exact.txt")
    assert float(exact["rel_error"]) < 1e-12
    assert set(ArtifactStore(out).read_values("je_mc.txt")) == {"lhs", "rhs", "stderr", "n_samples"}
    assert "PASS je_exact.rel_error" in (out / "summary.txt").read_text()


def test_monte_carlo_rows_replay_as_single_trajectories(runner, je_config, tmp_path):
    out = tmp_path / "je"
    assert runner.invoke(app, ["run", str(je_config), "--out", str(out)]).exit_code == EXIT_OK
    rows = ArtifactStore(out).read_csv("je_mc.csv")
    config = load_config(je_config)
    cost, schedule = config.instance.build(), config.schedule.build()
    for index in (0, 1, 4_321, 19_999):
        replayed = sample_trajectory(cost, schedule, seed=config.seed, index=index)
        assert repr(replayed.work_exponent) == rows[index]["work_exponent"]


def test_seed_override_changes_monte_carlo(runner, je_config, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    runner.invoke(app, ["run", str(je_config), "--out", str(a)])
    runner.invoke(app, ["run", str(je_config), "--out", str(b), "--seed", "6"])
    assert (a / "je_mc.csv").read_bytes() != (b / "je_mc.csv").read_bytes()
    assert "seed: 6" in (b / "summary.txt").read_text()


def test_relative_output_goes_under_output_root(runner, small_config, tmp_path):
    result = runner.invoke(app, ["run", str(small_config), "--out", "relative"])
    assert result.exit_code == EXIT_OK, result.output
    assert (tmp_path / "runs" / "relative" / "summary.txt").is_file()


def test_empty_engine_list_exits_with_config_error(runner, tmp_path):
    config = tmp_path / "empty.yaml"
    config.write_text("instance: {D: 4, seed: 0}\nengines: []\n")
    out = tmp_path / "never"
    result = runner.invoke(app, ["run", str(config), "--out", str(out)])
    assert result.exit_code == EXIT_CONFIG
    assert not out.exists()


def test_missing_config_exits_with_config_error(runner, tmp_path):
    result = runner.invoke(app, ["run", str(tmp_path / "nope.yaml")])
    assert result.exit_code == EXIT_CONFIG


def test_engine_failure_exit_code(tmp_path):
    config = ExperimentConfig.model_validate({
        "instance": {"kind": "ising", "n_s": 2, "seed": 0},
        "dynamics": {"topology": "ring"},
        "schedule": {"n_steps": 5},
        "engines": ["qja"],
    })
    outcome = run_experiment(config, tmp_path / "out")
    assert outcome.exit_code == EXIT_ENGINE
    assert "qja failed" in outcome.error


def test_invalid_instance_content_exit_code(tmp_path):
    config = ExperimentConfig.model_validate({
        "instance": {"kind": "double_well", "D": 5, "barrier": 0.1},
        "engines": ["gap_scan"],
    })
    assert run_experiment(config, tmp_path / "out").exit_code == EXIT_CONFIG


def test_unwritable_output_exits_with_io_error(runner, small_config, tmp_path):
    blocker = tmp_path / "file.txt"
    blocker.write_text("not a directory")
    result = runner.invoke(app, ["run", str(small_config), "--out", str(blocker / "sub")])
    assert result.exit_code == EXIT_IO


def test_validate_command(runner, small_config, tmp_path):
    result = runner.invoke(app, ["-v", "validate", str(small_config)])
    assert result.exit_code == EXIT_OK, result.output
    assert "is valid" in result.output
    bad = tmp_path / "bad.yaml"
    bad.write_text("instance: {kind: ising, n_s: 2, seed: 0}\ndynamics: {topology: ring}\nengines: [qja]\n")
    assert runner.invoke(app, ["validate", str(bad)]).exit_code == EXIT_CONFIG


def test_summarize_recomputes_summary(runner, small_config, tmp_path):
    out = tmp_path / "out"
    runner.invoke(app, ["run", str(small_config), "--out", str(out)])
    original = (out / "summary.txt").read_text()
    (out / "summary.txt").unlink()
    result = runner.invoke(app, ["summarize", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    assert (out / "summary.txt").read_text() == original


def test_summarize_without_run(runner, tmp_path):
    result = runner.invoke(app, ["summarize", str(tmp_path / "empty")])
    assert result.exit_code == EXIT_IO


def test_summary_flags_broken_artifacts(runner, small_config, tmp_path):
    out = tmp_path / "out"
    runner.invoke(app, ["run", str(small_config), "--out", str(out)])
    lines = (out / "qja.csv").read_text().splitlines()
    fields = lines[5].split(",")
    fields[3] = "0.5"
    lines[5] = ",".join(fields)
    (out / "qja.csv").write_text("\n".join(lines) + "\n")
    failed = [v.name for v in compute_verdicts(ArtifactStore(out)) if v.passed is False]
    assert failed == ["qja.min_overlap"]


def test_non_finite_cells_are_refused(tmp_path):
    store = ArtifactStore(tmp_path)
    with pytest.raises(ArtifactError):
        store.write_csv("x.csv", ["a"], [{"a": float("nan")}])
    assert not (tmp_path / "x.csv").exists()


def test_preset_figure1_config():
    config = preset_figure1()
    schedule = config.schedule.build()
    assert (schedule.beta_grid[0], schedule.beta_grid[-1]) == (0.0, 100.0)
    assert (schedule.f_grid[0], schedule.f_grid[-1]) == (0.0, 1.0)
    assert config.instance.build().dimension == 64
    assert [e.value for e in config.engines] == ["qa", "qja"]
    assert preset_figure1().config_hash() == config.config_hash()


def test_preset_save_config(runner, tmp_path, monkeypatch):
    saved = tmp_path / "figure1.yaml"
    monkeypatch.setattr("cli.commands.preset.launch", lambda config, threads: None)
    result = runner.invoke(app, ["preset", "figure1", "--save-config", str(saved)])
    assert result.exit_code == EXIT_OK, result.output
    assert "n_steps: 1000" in saved.read_text()


@pytest.mark.slow
def test_preset_figure1_run(runner, tmp_path):
    out = tmp_path / "figure1"
    result = runner.invoke(app, ["preset", "figure1", "--out", str(out)])
    assert result.exit_code == EXIT_OK, result.output
    for name in ("qa.csv", "qja.csv", "reference.csv", "summary.txt"):
        assert (out / name).is_file()
    summary = (out / "summary.txt").read_text()
    assert "PASS qja.min_overlap" in summary
    assert "PASS qa.final_gs_prob" in summary
    assert "PASS qja.final_gs_prob" in summary
    assert "overall: PASS" in summary
    assert "PASS qja_minus_qa.final_gs_prob" in summary
