"""Seeded Monte Carlo sweeps over SNR.

Trial ``t`` draws its channels from ``trial_seed(base_seed, t)``, which
does not depend on the method or the SNR point, so every method sees the
same channels and comparisons are paired. SNR is ``P_max / sigma_n^2``
with unit symbol variance.
"""
import csv
import dataclasses
import hashlib
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__, _accel
from .channel import SystemConfig, build_scenario, snr_to_noise
from .diagnostics import audit_convergence
from .digital import digital_mmse_postcoder, solve_digital_precoder
from .errors import ConfigurationError, HybridCRError
from .hybrid_frob import FrobConfig, solve_hybrid_frobenius
from .hybrid_mi import AdmmConfig, solve_hybrid_mi
from .hybrid_rx import solve_hybrid_postcoder
from .metrics import LinkReport, link_report

METHODS = ("digital", "hybrid-mi", "hybrid-frob")
RECEIVERS = ("digital-mmse", "hybrid-mmse")
CSV_COLUMNS = ("method", "snr_db", "trial", "seed", "spectral_efficiency", "tx_power",
               "interference_power", "power_violation", "interference_violation",
               "iterations", "termination")


@dataclass(frozen=True)
class RxConfig:
    beta: float = 1.0
    eps_g: float = 1e-3
    eps_p2: float = 1e-4
    n_max: int = 500


@dataclass(frozen=True)
class SweepSpec:
    """One sweep. ``digital_rank_cap`` limits the digital benchmark to
    ``L_s`` streams, the fair comparison for ``L_s``-stream hybrids."""

    config: SystemConfig = field(default_factory=SystemConfig)
    snr_grid_db: tuple = (-10.0, -5.0, 0.0, 5.0, 10.0, 15.0)
    num_trials: int = 100
    methods: tuple = METHODS
    receiver: str = "hybrid-mmse"
    seed: int = 0
    admm: AdmmConfig = field(default_factory=AdmmConfig)
    frob: FrobConfig = field(default_factory=FrobConfig)
    rx: RxConfig = field(default_factory=RxConfig)
    digital_rank_cap: bool = True
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "snr_grid_db", tuple(float(s) for s in self.snr_grid_db))
        object.__setattr__(self, "methods", tuple(self.methods))
        if not self.snr_grid_db:
            raise ConfigurationError("snr_grid_db must not be empty")
        if not self.methods:
            raise ConfigurationError("methods must not be empty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigurationError(f"unknown methods {sorted(unknown)}; choose from {METHODS}")
        if len(set(self.methods)) != len(self.methods):
            raise ConfigurationError("methods must not repeat")
        if self.receiver not in RECEIVERS:
            raise ConfigurationError(f"receiver must be one of {RECEIVERS}")
        if int(self.num_trials) != self.num_trials or self.num_trials < 1:
            raise ConfigurationError("num_trials must be a positive integer")
        if self.workers < 1:
            raise ConfigurationError("workers must be at least 1")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["snr_grid_db"] = list(self.snr_grid_db)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown sweep fields {sorted(unknown)}")
        nested = {"config": SystemConfig, "admm": AdmmConfig, "frob": FrobConfig,
                  "rx": RxConfig}
        for key, kind in nested.items():
            if key in data:
                data[key] = _build(kind, data[key], key)
        return cls(**data)

    def digest(self):
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _build(kind, values, where):
    names = {f.name for f in dataclasses.fields(kind)}
    unknown = set(values) - names
    if unknown:
        raise ConfigurationError(f"unknown {where} fields {sorted(unknown)}")
    try:
        return kind(**values)
    except TypeError as exc:
        raise ConfigurationError(f"bad {where} section: {exc}") from exc


def load_spec(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path} is not valid JSON: {exc}") from exc
    return SweepSpec.from_dict(data)


def trial_seed(base_seed, trial):
    """``base_seed XOR h(trial)`` with a 32-bit BLAKE2b hash of the index."""
    h = hashlib.blake2b(str(int(trial)).encode(), digest_size=4).digest()
    return int(base_seed) ^ int.from_bytes(h, "little")


@dataclass(frozen=True)
class TrialRecord:
    method: str
    snr_db: float
    trial: int
    seed: int
    report: LinkReport = None
    iterations: int = 0
    termination: str = ""
    receiver_iterations: int = 0
    audit: dict = None
    error: str = None

    @property
    def failed(self):
        return self.error is not None

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["report"] = None if self.report is None else self.report.to_dict()
        return d

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        rep = data.get("report")
        if rep is not None:
            rep = dict(rep)
            rep["constraint_violations"] = tuple(rep["constraint_violations"])
            data["report"] = LinkReport(**rep)
        return cls(**data)


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    records: tuple
    provenance: dict

    @property
    def failures(self):
        return sum(r.failed for r in self.records)

    def select(self, method, snr_db):
        return [r for r in self.records if r.method == method and r.snr_db == snr_db]

    def summary(self):
        """Mean and standard error of the spectral efficiency per
        ``(method, snr)`` over the successful trials."""
        rows = []
        for method in self.spec.methods:
            for snr in self.spec.snr_grid_db:
                recs = self.select(method, snr)
                se = np.array([r.report.spectral_efficiency for r in recs if not r.failed])
                n = se.size
                mean = float(se.mean()) if n else math.nan
                stderr = float(se.std(ddof=1) / math.sqrt(n)) if n > 1 else math.nan
                rows.append({"method": method, "snr_db": snr, "trials": len(recs),
                             "succeeded": n, "mean_se": mean, "stderr_se": stderr})
        return rows

    def to_dict(self):
        return {"spec": self.spec.to_dict(), "provenance": dict(self.provenance),
                "records": [r.to_dict() for r in self.records],
                "summary": self.summary()}

    @classmethod
    def from_dict(cls, data):
        return cls(spec=SweepSpec.from_dict(data["spec"]),
                   records=tuple(TrialRecord.from_dict(r) for r in data["records"]),
                   provenance=dict(data["provenance"]))


def build_id():
    return f"hybridcr {__version__}; numpy {np.__version__}; backend {_accel.backend_name()}"


def _failed(method, snr, trial, seed, exc):
    return TrialRecord(method=method, snr_db=snr, trial=trial, seed=seed,
                       termination="failed", error=f"{type(exc).__name__}: {exc}")


def _hybrid_receiver(spec, scenario, precoder, seed):
    if spec.receiver == "digital-mmse":
        return digital_mmse_postcoder(scenario, precoder.matrix), 0
    rx = spec.rx
    post, trace = solve_hybrid_postcoder(scenario, precoder, beta=rx.beta, eps_g=rx.eps_g,
                                         eps_p2=rx.eps_p2, n_max=rx.n_max, rng_seed=seed)
    return post.matrix, trace.iterations


def run_trial(spec, trial, snr_db):
    """All methods for one (trial, SNR) pair, on shared channels."""
    seed = trial_seed(spec.seed, trial)
    c = spec.config.replace(sigma_n_sq=snr_to_noise(snr_db, spec.config.P_max))
    scenario = build_scenario(c, seed)
    records = []
    digital = None
    digital_error = None
    if "digital" in spec.methods or "hybrid-frob" in spec.methods:
        try:
            digital = solve_digital_precoder(
                scenario, c.L_s if spec.digital_rank_cap else None)
        except (HybridCRError, np.linalg.LinAlgError) as exc:
            digital_error = exc

    for method in spec.methods:
        try:
            if method == "digital":
                if digital_error is not None:
                    raise digital_error
                f = digital.f_d
                w = digital_mmse_postcoder(scenario, f)
                records.append(TrialRecord(
                    method, snr_db, trial, seed, report=link_report(scenario, f, w),
                    termination="closed-form"))
                continue
            if method == "hybrid-mi":
                pre, trace = solve_hybrid_mi(scenario, spec.admm, rng_seed=seed)
            else:
                if digital_error is not None:
                    raise digital_error
                pre, trace = solve_hybrid_frobenius(scenario, digital, spec.frob, rng_seed=seed)
            w, rx_iters = _hybrid_receiver(spec, scenario, pre, seed)
            records.append(TrialRecord(
                method, snr_db, trial, seed, report=link_report(scenario, pre.matrix, w),
                iterations=trace.iterations, termination=trace.termination,
                receiver_iterations=rx_iters,
                audit=audit_convergence(trace).verdicts()))
        except (HybridCRError, np.linalg.LinAlgError) as exc:
            records.append(_failed(method, snr_db, trial, seed, exc))
    return records


def _run_trial_all_snr(args):
    spec, trial = args
    out = []
    for snr in spec.snr_grid_db:
        out.extend(run_trial(spec, trial, snr))
    return out


def run_sweep(spec):
    """Run every (trial, SNR, method) combination. Records come back sorted
    by method order, SNR order, then trial index."""
    jobs = [(spec, t) for t in range(spec.num_trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            chunks = list(pool.map(_run_trial_all_snr, jobs))
    else:
        chunks = [_run_trial_all_snr(j) for j in jobs]
    method_rank = {m: i for i, m in enumerate(spec.methods)}
    snr_rank = {s: i for i, s in enumerate(spec.snr_grid_db)}
    records = sorted((r for chunk in chunks for r in chunk),
                     key=lambda r: (method_rank[r.method], snr_rank[r.snr_db], r.trial))
    prov = {"spec_hash": spec.digest(), "seed": spec.seed, "build": build_id()}
    return SweepResult(spec=spec, records=tuple(records), provenance=prov)


def _csv_value(x):
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def to_csv(result):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in result.records:
        rep = r.report
        row = [r.method, r.snr_db, r.trial, r.seed,
               None if rep is None else rep.spectral_efficiency,
               None if rep is None else rep.tx_power,
               None if rep is None else rep.interference_power,
               None if rep is None else rep.constraint_violations[0],
               None if rep is None else rep.constraint_violations[1],
               r.iterations, r.termination]
        writer.writerow([_csv_value(v) for v in row])
    return buf.getvalue()


def to_json(result):
    return json.dumps(result.to_dict(), indent=2, sort_keys=True, allow_nan=True) + "\n"


def export(result, path, fmt="csv"):
    """Write ``result`` as CSV or JSON to ``path``."""
    if fmt not in ("csv", "json"):
        raise ConfigurationError(f"unknown export format {fmt!r}")
    text = to_csv(result) if fmt == "csv" else to_json(result)
    try:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
    return path


def load_json(path):
    with open(path) as fh:
        return SweepResult.from_dict(json.load(fh))
