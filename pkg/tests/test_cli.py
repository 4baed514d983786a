"""
Сквозные тесты командной строки: запуск, артефакты и коды выхода.
"""

import json
import math
from types import SimpleNamespace

import pytest

from phaseseg import interface_1d, pipelines
from phaseseg.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, main
from phaseseg.components import CheckLedger
from phaseseg.config import SCHEMAS, build_config

TF_ARGS = [
    "tf",
    "--alpha1", repr(math.pi / 2),
    "--alpha2", repr(math.pi / 2),
    "--g", "4",
    "--K", "2",
    "--stability-samples", "3",
]


def test_tf_run_writes_artifacts(tmp_path):
    out = tmp_path / "tf"
    assert main(TF_ARGS + ["--output-dir", str(out), "--plot-script", "true"]) == EXIT_OK

    report = json.loads((out / "report.json").read_text())
    assert report["passed"] is True
    assert report["config"]["command"] == "tf"
    assert abs(report["results"]["r1"] - 1.0) < 1e-12
    assert abs(report["results"]["E0"] - 4.00912) < 1e-5
    for name in ("tf_profile.csv", "tf_energy_vs_radius.csv", "tf_swap.csv", "plot_tf_profile.py", "report.json"):
        assert (out / name).is_file()
        assert name in report["manifest"]

    header = (out / "tf_profile.csv").read_text().splitlines()[0]
    assert header == "r,rho1,rho2"
    assert {c["name"] for c in report["checks"]} >= {"energy_matches_closed_form", "gap_identity"}


def test_usage_error_exit_code(tmp_path, capsys):
    assert main(["tf", "--alpha1", "1"]) == EXIT_USAGE
    assert main([]) == EXIT_USAGE
    err = capsys.readouterr().err
    assert "usage" in err


def test_numerical_error_exit_code(tmp_path, capsys):
    argv = ["tf", "--alpha1", "1", "--alpha2", "1", "--g", "1", "--K", "2", "--output-dir", str(tmp_path)]
    assert main(argv) == EXIT_FAILED
    assert "DomainError" in capsys.readouterr().err


def test_failed_check_exit_code(tmp_path, monkeypatch):
    async def failing(ctx):
        ctx.checks.record("always_false", False, 1.0, 0.0)
        ctx.artifacts.write_csv("empty.csv", [{"x": 1.0}])
        return {"ok": False}

    monkeypatch.setitem(SCHEMAS, "always-fails", ())
    monkeypatch.setitem(pipelines.PIPELINES, "always-fails", failing)

    assert main(["always-fails", "--output-dir", str(tmp_path)]) == EXIT_FAILED
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["passed"] is False
    assert report["checks"][0]["name"] == "always_false"
    assert report["manifest"] == ["empty.csv", "report.json"]


# ======================= sigma1d / sigma-sweep =======================

def _failed_bvp(*args, **kwargs):
    return SimpleNamespace(success=False, message="The maximum number of mesh nodes is exceeded.")


def test_sigma_row_reports_failed_polish(monkeypatch):
    """Сбой краевого решателя виден в строке и проваливает проверку."""
    monkeypatch.setattr(interface_1d, "solve_bvp", _failed_bvp)
    row = pipelines.sigma_row(1001, 0.5, True, (1.0, 5.0))
    assert row["polished"] is False

    ledger = CheckLedger()
    pipelines._check_sigma_row(ledger, row, 1.0, polish=True)
    checks = {r.name: r for r in ledger.records}
    assert checks["polish_converged[lambda=1,K=5]"].passed is False
    assert checks["bracket[lambda=1,K=5]"].passed

    unpolished = CheckLedger()
    pipelines._check_sigma_row(unpolished, row, 1.0)
    assert not any(r.name.startswith("polish_converged") for r in unpolished.records)


def test_sigma1d_failed_polish_exit_code(tmp_path, monkeypatch):
    monkeypatch.setattr(interface_1d, "solve_bvp", _failed_bvp)
    argv = ["sigma1d", "--lambda", "1", "--K", "5", "--n", "1001", "--polish", "true", "--output-dir", str(tmp_path)]
    assert main(argv) == EXIT_FAILED
    report = json.loads((tmp_path / "report.json").read_text())
    checks = {c["name"]: c for c in report["checks"]}
    assert checks["polish_converged[lambda=1,K=5]"]["passed"] is False
    assert report["results"]["polished"] is False


@pytest.mark.slow
@pytest.mark.parametrize("lambda_", [0.1, 0.5, 1.0])
@pytest.mark.parametrize("K", [4.0, 16.0, 64.0, 256.0])
def test_sigma_sweep_default_grid_meets_tolerances(lambda_, K):
    """Сетка по умолчанию дает равнораспределение и вилку на приемочной сетке (λ, K)."""
    config = build_config("sigma-sweep", {"lambda": "0.1,0.5,1", "K_list": "4,16,64,256"}, environ={})
    row = pipelines.sigma_row(config["n"], config["weak_threshold"], config["polish"], (lambda_, K))

    ledger = CheckLedger()
    pipelines._check_sigma_row(ledger, row, config["equipartition_tol"], config["polish"])
    failed = [(r.name, r.value, r.tolerance) for r in ledger.records if not r.passed]
    assert failed == []


# ======================= shape-stability =======================

def test_shape_stability_poincare_and_capped_constants(tmp_path):
    out = tmp_path / "shapes"
    argv = [
        "shape-stability",
        "--R-count", "21",
        "--fuglede-R", "1.2",
        "--fuglede-k", "2",
        "--fuglede-t", "0.001",
        "--samples", "10",
        "--output-dir", str(out),
    ]
    assert main(argv) in (EXIT_OK, EXIT_FAILED)

    report = json.loads((out / "report.json").read_text())
    checks = {c["name"]: c for c in report["checks"]}
    for delta in ("0.1", "0.01"):
        assert checks[f"poincare_finite[delta={delta}]"]["passed"] is True
        held_out = checks[f"poincare_held_out[delta={delta}]"]
        assert held_out["passed"] is True
        assert held_out["value"] <= held_out["tolerance"]
    assert set(report["results"]["poincare"]) == {"0.1", "0.01"}
    assert "instability_constant_samples" in checks
    assert report["results"]["constants"]["capped_samples"] <= report["results"]["constants"]["samples"]

    header = (out / "poincare.csv").read_text().splitlines()[0]
    assert header == "delta,Lambda,held_out"
    assert "capped_samples" in (out / "stability_constants.csv").read_text().splitlines()[0]
