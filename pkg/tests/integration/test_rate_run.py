import csv
import json
from pathlib import Path

import pytest

from cli.models.experiment import ExperimentConfig
from core.exceptions import EXIT_OK
from main import main


@pytest.fixture
def quiet_payload(transport_payload):
    # four paths per ell are too few for the statistical gates
    return {**transport_payload, "enforce_statistical_gates": False}


def read_rows(path: Path):
    with path.open(newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.integration
def test_rate_run_writes_artifacts(write_config, quiet_payload, tmp_path):
    """Test a small transport sweep end to end"""
    out = tmp_path / "run"
    code = main(["rate", "--config", write_config(quiet_payload), "--out", str(out), "--workers", "1"])
    assert code == EXIT_OK

    rows = read_rows(out / "rates.csv")
    assert rows[0] == ["ell", "estimate", "stderr", "bound_rhs", "z_estimate", "z_stderr"]
    assert [float(r[0]) for r in rows[1:]] == quiet_payload["ell_grid"]
    assert all(float(r[1]) > 0 for r in rows[1:])

    fit = json.loads((out / "fit.json").read_text())
    assert fit["predicted_exponent"] == pytest.approx(2.0 / 3.0)
    assert fit["route"] == "maximal"
    assert fit["slope_ci"][0] <= fit["slope"] <= fit["slope_ci"][1]
    assert len(fit["convolution"]) == 3
    assert all(c["max_defect"] <= c["tolerance"] for c in fit["convolution"])
    # the echoed config reproduces the run
    assert ExperimentConfig.parse_obj(fit["config"]) == ExperimentConfig.parse_obj(quiet_payload)

    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "rate"
    assert manifest["seed"] == quiet_payload["seed"]
    assert str(out / "rates.csv") in manifest["artifacts"]
    assert str(out / "fit.json") in manifest["artifacts"]


@pytest.mark.integration
def test_rates_independent_of_worker_count(write_config, quiet_payload, tmp_path):
    """Test that rates.csv is byte-identical for one and two workers"""
    config = write_config(quiet_payload)
    for workers in ("1", "2"):
        assert main(["rate", "--config", config, "--out", str(tmp_path / workers), "--workers", workers]) == EXIT_OK
    assert (tmp_path / "1" / "rates.csv").read_bytes() == (tmp_path / "2" / "rates.csv").read_bytes()


@pytest.mark.integration
def test_rate_run_records_diagnostics(write_config, quiet_payload, tmp_path):
    """Test per-path diagnostics and snapshots for the first path"""
    payload = {**quiet_payload, "ell_grid": [0.5, 0.35, 0.25], "diagnostics_paths": 1, "snapshot_paths": 1, "snapshot_every": 2}
    out = tmp_path / "diag"
    assert main(["rate", "--config", write_config(payload), "--out", str(out)]) == EXIT_OK
    diagnostics = sorted(out.glob("*_diagnostics.csv"))
    assert len(diagnostics) == 3
    rows = read_rows(diagnostics[0])
    assert rows[0] == ["step", "time", "lp_norm", "mean", "error_norm"]
    assert len(rows) == 1 + 4
    assert len(list(out.glob("*.fld"))) == 3 * 2 * 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert all(str(p) in manifest["artifacts"] for p in diagnostics)


@pytest.mark.integration
def test_noise_validate_small_grid(write_config, tmp_path):
    """Test the noise report on a coarse lattice"""
    out = tmp_path / "noise"
    path = write_config({"N": 32, "ell_grid": [0.5], "samples": 200, "divergence_samples": 8})
    main(["noise-validate", "--config", path, "--out", str(out)])

    report = json.loads((out / "noise_report.json").read_text())
    spectrum = report["spectra"][0]
    checks = {c["name"]: c for c in spectrum["checks"]}
    assert spectrum["n_modes"] > 0
    for name in ("kappa", "divergence", "orthogonality-diagonal", "orthogonality-off-diagonal", "isotropy"):
        assert checks[name]["passed"], name
    assert (out / "manifest.json").exists()


@pytest.mark.integration
def test_props_dense_oracle(tmp_path):
    """Test a property suite through the command line"""
    out = tmp_path / "props"
    assert main(["props", "dense-oracle", "--out", str(out), "--seed", "2"]) == EXIT_OK
    report = json.loads((out / "props_dense-oracle.json").read_text())
    assert report["passed"]
    assert report["parameters"]["seed"] == 2
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["command"] == "props dense-oracle"
