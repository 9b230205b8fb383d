import json

import numpy as np
import pytest

from hybridcr import harness
from hybridcr.channel import SystemConfig
from hybridcr.errors import ConfigurationError, NumericalError
from hybridcr.harness import (CSV_COLUMNS, SweepResult, SweepSpec, load_json, load_spec,
                              run_sweep, to_csv, trial_seed)

from _scenarios import small_config

TINY = dict(config=small_config(), snr_grid_db=(0.0, 10.0), num_trials=2)


def test_spec_validation():
    with pytest.raises(ConfigurationError):
        SweepSpec(snr_grid_db=())
    with pytest.raises(ConfigurationError):
        SweepSpec(num_trials=0)
    with pytest.raises(ConfigurationError):
        SweepSpec(methods=("analog",))
    with pytest.raises(ConfigurationError):
        SweepSpec(receiver="zf")
    with pytest.raises(ConfigurationError):
        SweepSpec.from_dict({"trials": 3})


def test_spec_file_roundtrip(tmp_path):
    spec = SweepSpec(**TINY, seed=9)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec.to_dict()))
    assert load_spec(path) == spec
    assert load_spec(path).digest() == spec.digest()
    path.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_spec(path)
    with pytest.raises(ConfigurationError):
        load_spec(tmp_path / "missing.json")


def test_trial_seed_is_stable_and_distinct():
    seeds = [trial_seed(7, t) for t in range(1000)]
    assert len(set(seeds)) == 1000
    assert trial_seed(7, 3) == trial_seed(7, 3)
    assert trial_seed(0, 3) ^ trial_seed(7, 3) == 7


def test_single_digital_record():
    spec = SweepSpec(config=small_config(), snr_grid_db=(5.0,), num_trials=1,
                     methods=("digital",))
    result = run_sweep(spec)
    assert len(result.records) == 1
    rec = result.records[0]
    assert rec.termination == "closed-form" and not rec.failed
    assert rec.report.spectral_efficiency > 0


def test_records_and_csv_shape():
    spec = SweepSpec(**TINY)
    result = run_sweep(spec)
    assert len(result.records) == 3 * 2 * 2
    keys = [(r.method, r.snr_db, r.trial) for r in result.records]
    assert keys == [(m, s, t) for m in spec.methods for s in spec.snr_grid_db for t in range(2)]
    lines = to_csv(result).splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 1 + 12
    for r in result.records:
        assert max(r.report.constraint_violations) <= 1e-9


def test_paired_channels_across_methods():
    result = run_sweep(SweepSpec(**TINY))
    for t in range(2):
        assert len({r.seed for r in result.records if r.trial == t}) == 1


def test_empty_records_give_header_only_csv():
    result = SweepResult(spec=SweepSpec(**TINY), records=(), provenance={})
    assert to_csv(result) == ",".join(CSV_COLUMNS) + "\n"


def test_determinism(tmp_path):
    spec = SweepSpec(**TINY)
    a = harness.export(run_sweep(spec), tmp_path / "a.csv")
    b = harness.export(run_sweep(spec), tmp_path / "b.csv")
    assert open(a, "rb").read() == open(b, "rb").read()


def test_parallel_matches_serial():
    spec = SweepSpec(**TINY)
    assert to_csv(run_sweep(spec)) == to_csv(run_sweep(spec.replace(workers=2)))


def test_json_roundtrip(tmp_path):
    result = run_sweep(SweepSpec(**TINY))
    path = harness.export(result, tmp_path / "r.json", "json")
    back = load_json(path)
    assert back == result
    assert back.provenance["spec_hash"] == result.spec.digest()


def test_summary_recomputable_from_records():
    result = run_sweep(SweepSpec(**TINY))
    for row in result.summary():
        se = [r.report.spectral_efficiency for r in result.select(row["method"], row["snr_db"])]
        assert row["mean_se"] == pytest.approx(np.mean(se), rel=0, abs=0)
        assert row["stderr_se"] == pytest.approx(np.std(se, ddof=1) / np.sqrt(len(se)))


def test_solver_failure_is_recorded(monkeypatch):
    def boom(*a, **k):
        raise NumericalError("synthetic failure")
    monkeypatch.setattr(harness, "solve_hybrid_mi", boom)
    result = run_sweep(SweepSpec(**TINY))
    failed = [r for r in result.records if r.failed]
    assert result.failures == len(failed) == 4
    assert all(r.method == "hybrid-mi" and r.termination == "failed" for r in failed)
    assert "synthetic failure" in failed[0].error
    row = next(line for line in to_csv(result).splitlines() if "hybrid-mi" in line)
    assert ",,,,," in row


def test_export_rejects_unknown_format(tmp_path):
    with pytest.raises(ConfigurationError):
        harness.export(run_sweep(SweepSpec(**TINY, methods=("digital",))), tmp_path / "x", "xml")


def test_export_surfaces_path(tmp_path):
    result = SweepResult(spec=SweepSpec(**TINY), records=(), provenance={})
    bad = tmp_path / "missing" / "out.csv"
    with pytest.raises(OSError, match="missing"):
        harness.export(result, bad)


@pytest.mark.slow
def test_mean_se_nondecreasing_in_snr():
    cfg = SystemConfig(T_s=64, R_s=16, N_st=4, N_sr=4, L_s=4, L_p=4, P_max=1.0, I_max=1.0)
    spec = SweepSpec(config=cfg, num_trials=50, seed=11)
    result = run_sweep(spec)
    assert result.failures == 0
    for method in spec.methods:
        means = [row["mean_se"] for row in result.summary() if row["method"] == method]
        assert np.all(np.diff(means) >= 0), (method, means)
