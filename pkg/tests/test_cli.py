import argparse
import json

import pytest

from hybridcr import cli, harness
from hybridcr.harness import CSV_COLUMNS, SweepSpec
from hybridcr.errors import NumericalError

from _scenarios import small_config


@pytest.fixture
def spec_file(tmp_path):
    spec = SweepSpec(config=small_config(), snr_grid_db=(0.0,), num_trials=1)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_dict()))
    return path


def test_parse_snr_range():
    assert cli.parse_snr_range("-10:15:5") == (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0)
    assert cli.parse_snr_range("3") == (3.0,)
    for bad in ("1:0:1", "0:1:0", "a:b:c", "0:1"):
        with pytest.raises(argparse.ArgumentTypeError):
            cli.parse_snr_range(bad)


def test_parse_methods():
    assert cli.parse_methods("digital, hybrid-mi") == ("digital", "hybrid-mi")
    with pytest.raises(argparse.ArgumentTypeError):
        cli.parse_methods("digital,magic")


def test_sweep_writes_csv(spec_file, tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["sweep", "--config", str(spec_file), "--out", str(out),
                     "--snr", "0:10:10", "--trials", "2", "--methods", "digital,hybrid-frob"])
    assert code == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 2 * 2 * 2
    assert "failed trials: 0" in capsys.readouterr().out


def test_sweep_json(spec_file, tmp_path):
    assert cli.main(["sweep", "--config", str(spec_file), "--out", str(tmp_path),
                     "--format", "json", "--methods", "digital"]) == 0
    data = json.loads((tmp_path / "sweep.json").read_text())
    assert set(data) >= {"spec", "records", "provenance", "summary"}


def test_single_prints_report_and_trace(spec_file, capsys):
    assert cli.main(["single", "--config", str(spec_file), "--seed", "4", "--snr", "5",
                     "--method", "hybrid-mi"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["report"]["spectral_efficiency"] > 0
    assert out["trace"]["termination"] in ("tolerances-met", "n_max-reached")


def test_bad_config_exits_2(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"num_trials": 0}))
    assert cli.main(["sweep", "--config", str(path)]) == 2
    assert "configuration error" in capsys.readouterr().err


def test_failed_trials_give_nonzero_exit(spec_file, tmp_path, monkeypatch):
    def boom(*a, **k):
        raise NumericalError("synthetic")
    monkeypatch.setattr(harness, "solve_hybrid_frobenius", boom)
    assert cli.main(["sweep", "--config", str(spec_file), "--out", str(tmp_path)]) == 1
