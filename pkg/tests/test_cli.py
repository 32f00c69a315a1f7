"""CLI and experiment-runner tests: schemas, determinism, exit codes."""

import json

import pytest

from gigsampler.bench import (
    COLUMNS,
    ExperimentSpec,
    run_acceptance_grid,
    run_cutoff_curve,
    run_quantile_check,
    run_rejection_constant_grid,
    run_timing_grid,
)
from gigsampler.cli import main
from gigsampler.errors import DomainError


def run_cli(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_sample_prints_variates(capsys):
    code, out, _ = run_cli(
        ["sample", "--lambda", "-0.1", "--psi", "1", "--chi", "1",
         "--n", "5", "--seed", "42"], capsys)
    assert code == 0
    lines = out.strip().split("\n")
    assert len(lines) == 5
    assert all(float(v) > 0 for v in lines)


def test_sample_is_byte_identical_across_runs(capsys):
    args = ["sample", "--lambda", "-0.1", "--psi", "1", "--chi", "1",
            "--n", "20", "--seed", "42"]
    _, first, _ = run_cli(args, capsys)
    _, second, _ = run_cli(args, capsys)
    assert first == second


def test_unsupported_parameters_exit_code(capsys):
    code, _, err = run_cli(
        ["sample", "--lambda", "0", "--psi", "1", "--chi", "1"], capsys)
    assert code == 1
    assert "not supported" in err


def test_usage_error_exit_code(capsys):
    code, _, err = run_cli(["sample", "--lambda", "-0.1"], capsys)
    assert code == 1
    assert err


def test_numerical_failure_exit_code(capsys):
    # One stored cutoff is unattainable at these parameters.
    code, _, err = run_cli(
        ["sample", "--lambda", "-0.001", "--psi", "0.1", "--chi", "0.1",
         "--n", "1", "--cutoffs", "1"], capsys)
    assert code == 2
    assert "numerical failure" in err


def test_seed_env_var_override(capsys, monkeypatch):
    args = ["sample", "--lambda", "-0.1", "--psi", "1", "--chi", "1", "--n", "3"]
    monkeypatch.setenv("GIGSAMPLER_SEED", "7")
    _, with_env, _ = run_cli(args, capsys)
    _, again, _ = run_cli(args + ["--seed", "7"], capsys)
    assert with_env == again
    monkeypatch.setenv("GIGSAMPLER_SEED", "8")
    _, other, _ = run_cli(args, capsys)
    assert with_env != other


def test_config_file_supplies_defaults(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"lam": -0.1, "psi": 1.0, "chi": 1.0,
                               "n": 4, "seed": 5}))
    code, out, _ = run_cli(["--config", str(cfg), "sample", "--lambda", "-0.1",
                            "--psi", "1", "--chi", "1"], capsys)
    assert code == 0
    assert len(out.strip().split("\n")) == 4


def test_sample_csv_output_and_figure(tmp_path, capsys):
    out = tmp_path / "draws.csv"
    code, _, _ = run_cli(
        ["sample", "--lambda", "-0.1", "--psi", "1", "--chi", "1",
         "--n", "200", "--seed", "1", "--out", str(out)], capsys)
    assert code == 0
    lines = out.read_text().split("\n")
    assert lines[0] == "value"
    assert len([l for l in lines if l]) == 201
    assert (tmp_path / "draws.png").exists()


def test_no_plot_suppresses_figure(tmp_path, capsys):
    out = tmp_path / "draws.csv"
    code, _, _ = run_cli(
        ["sample", "--lambda", "-0.1", "--psi", "1", "--chi", "1",
         "--n", "50", "--seed", "1", "--out", str(out), "--no-plot"], capsys)
    assert code == 0
    assert not (tmp_path / "draws.png").exists()


def test_acceptance_grid_csv_deterministic(tmp_path, capsys):
    args = ["acceptance-grid", "--lambda", "-0.1,-1", "--beta", "0.1",
            "--mode", "naive", "--replicates", "2", "--draws", "5000",
            "--seed", "3", "--no-plot"]
    a = tmp_path / "a.csv"
    b = tmp_path / "b.csv"
    run_cli(args + ["--out", str(a)], capsys)
    run_cli(args + ["--out", str(b)], capsys)
    assert a.read_bytes() == b.read_bytes()
    header = a.read_text().split("\n")[0]
    assert header == ",".join(COLUMNS["acceptance-grid"])


def test_json_payload_has_stable_shape(tmp_path, capsys):
    out = tmp_path / "r.json"
    code, _, _ = run_cli(
        ["acceptance-grid", "--lambda", "-1", "--beta", "0.1", "--mode",
         "rate", "--eps0", "0.5", "--replicates", "2", "--draws", "5000",
         "--seed", "3", "--format", "json", "--out", str(out), "--no-plot"],
        capsys)
    assert code == 0
    payload = json.loads(out.read_text())
    assert set(payload) == {"spec", "results", "versions"}
    assert payload["spec"]["experiment"] == "acceptance-grid"
    assert payload["versions"]["gigsampler"]
    assert set(payload["results"][0]) == set(COLUMNS["acceptance-grid"])


def test_grid_figures_rendered(tmp_path, capsys):
    out = tmp_path / "grid.csv"
    code, _, _ = run_cli(
        ["acceptance-grid", "--lambda", "-1", "--beta", "0.1", "--mode",
         "naive", "--replicates", "2", "--draws", "2000", "--seed", "3",
         "--out", str(out)], capsys)
    assert code == 0
    assert (tmp_path / "grid.png").stat().st_size > 0


def test_validate_small_battery(capsys):
    code, out, err = run_cli(["validate", "--n", "20000", "--seed", "3"], capsys)
    assert code == 0, err
    assert out.count("true") >= 40


def test_runner_records_cell_errors_and_continues():
    spec = ExperimentSpec(experiment="acceptance-grid", lambdas=(-0.001,),
                          betas=(0.1,), mode="count", counts=(1, 10),
                          replicates=1, draws=2000, seed=0)
    rows = run_acceptance_grid(spec)["results"]
    assert rows[0]["error"] is not None  # one cutoff unattainable here
    assert rows[1]["error"] is None
    assert rows[1]["cutoff_count"] == 10


def test_quantile_check_rows():
    spec = ExperimentSpec(experiment="quantile-check", lambdas=(-0.1,),
                          psi=1.0, chi=1.0, replicates=1, draws=20_000, seed=1)
    rows = run_quantile_check(spec)["results"]
    stats = [r["statistic"] for r in rows]
    assert stats == ["q10", "q25", "median", "q75", "q90", "mean",
                     "ks_statistic", "ks_pvalue"]
    med = next(r for r in rows if r["statistic"] == "median")
    assert med["abs_diff"] < 0.05


def test_cutoff_curve_runner_monotone():
    spec = ExperimentSpec(experiment="cutoff-curve", lambdas=(-1.0,),
                          betas=(2.0,), curve_points=25, replicates=1, seed=0)
    rows = run_cutoff_curve(spec)["results"]
    counts = [r["cutoff_count"] for r in rows]
    assert counts == sorted(counts, reverse=True)


def test_timing_grid_structure():
    spec = ExperimentSpec(experiment="timing-grid", lambdas=(0.1,), betas=(0.1,),
                          eps0s=(0.2, 0.6), sizes=(1, 100), replicates=2,
                          draws=1, seed=0)
    rows = run_timing_grid(spec)["results"]
    assert len(rows) == 4
    for n in (1, 100):
        col = [r for r in rows if r["n"] == n]
        assert sum(r["column_min"] for r in col) == 1
    assert all(r["model_seconds_per_variate"] > 0 for r in rows)


def test_rejection_grid_runner():
    spec = ExperimentSpec(experiment="rejection-grid", lambdas=(0.5,),
                          betas=(1.0,), counts=(10, 40), replicates=1,
                          draws=4000, seed=0)
    rows = run_rejection_constant_grid(spec)["results"]
    assert rows[0]["cutoff_count"] == 10 and rows[1]["cutoff_count"] == 40
    assert rows[0]["rejection_constant_mean"] > rows[1]["rejection_constant_mean"] - 0.05
    with pytest.raises(DomainError):
        run_rejection_constant_grid(
            ExperimentSpec(experiment="rejection-grid", lambdas=(2.0,),
                           betas=(1.0,), seed=0))


def test_experiment_spec_validation():
    with pytest.raises(DomainError):
        ExperimentSpec(experiment="nonsense")
    with pytest.raises(DomainError):
        ExperimentSpec(experiment="validate", replicates=0)
