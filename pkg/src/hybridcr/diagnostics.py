"""Convergence bookkeeping shared by the three ADMM solvers.

The convergence theorem for the hybrid precoder assumes a bounded,
square-summable multiplier sequence and concludes that the primal residual
vanishes. None of that is guaranteed for a non-convex problem, so every
solver records a trace and :func:`audit_convergence` checks those
hypotheses and consequences empirically. The thresholds are flagging
heuristics, not theory.
"""
from dataclasses import dataclass, field, asdict

import numpy as np

TERMINATIONS = ("tolerances-met", "n_max-reached")

BOUND_RATIO = 1e3
DECILE_SHARE = 0.05
TREND_SHARE = 0.05
TREND_MIN_LENGTH = 10


@dataclass
class AdmmTrace:
    """Per-iteration record of one ADMM run.

    ``aux_change`` is the change of the auxiliary variable (Z, G or T),
    ``multiplier_change`` the Frobenius norm of the multiplier step.
    ``tolerance`` is the primal-residual tolerance the solver stopped on.
    """

    primal_residual: list = field(default_factory=list)
    aux_change: list = field(default_factory=list)
    lagrangian: list = field(default_factory=list)
    multiplier_norm: list = field(default_factory=list)
    multiplier_change: list = field(default_factory=list)
    inner_iterations: list = field(default_factory=list)
    termination: str = ""
    tolerance: float = 0.0
    method: str = ""

    def record(self, residual, change, lagrangian, mult_norm, mult_change, inner=0):
        self.primal_residual.append(float(residual))
        self.aux_change.append(float(change))
        self.lagrangian.append(float(lagrangian))
        self.multiplier_norm.append(float(mult_norm))
        self.multiplier_change.append(float(mult_change))
        self.inner_iterations.append(int(inner))

    @property
    def iterations(self):
        return len(self.primal_residual)

    @property
    def converged(self):
        return self.termination == "tolerances-met"

    def validate(self):
        n = self.iterations
        series = (self.aux_change, self.lagrangian, self.multiplier_norm,
                  self.multiplier_change, self.inner_iterations)
        if any(len(s) != n for s in series):
            raise ValueError("trace series lengths differ")
        if self.termination not in TERMINATIONS:
            raise ValueError(f"unknown termination reason {self.termination!r}")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, data):
        return cls(**data)


@dataclass(frozen=True)
class ConvergenceAudit:
    multiplier_norm_series: np.ndarray
    multiplier_diff_sq_cumsum: np.ndarray
    primal_residual_series: np.ndarray
    lagrangian_series: np.ndarray
    bounded_multiplier: bool
    summable_diffs: bool
    residual_vanishing: bool

    @property
    def all_ok(self):
        return self.bounded_multiplier and self.summable_diffs and self.residual_vanishing

    def verdicts(self):
        return {"bounded_multiplier": self.bounded_multiplier,
                "summable_diffs": self.summable_diffs,
                "residual_vanishing": self.residual_vanishing}


def _tail(n):
    """Length of the last decile, at least one sample."""
    return max(1, int(np.ceil(n / 10)))


def bounded_series(norms):
    """Heuristic boundedness of a norm sequence.

    The peak must stay within ``BOUND_RATIO`` times the median. A series
    that keeps rising at the end is also flagged: on sequences of
    ``TREND_MIN_LENGTH`` or more, the rise over the last decile may not
    exceed ``TREND_SHARE`` of the peak. The median rule alone would accept
    steady linear growth, which is the textbook unbounded case.
    """
    norms = np.asarray(norms, dtype=float)
    if norms.size == 0:
        return True
    peak = norms.max()
    if peak > BOUND_RATIO * np.median(norms):
        return False
    if norms.size >= TREND_MIN_LENGTH:
        k = _tail(norms.size)
        rise = norms[-1] - norms[-k - 1]
        if rise > TREND_SHARE * peak:
            return False
    return True


def summable_series(diffs):
    """True when the last decile contributes at most ``DECILE_SHARE`` of
    the running sum of squared multiplier steps (or the sum is zero)."""
    sq = np.asarray(diffs, dtype=float) ** 2
    total = sq.sum()
    if total == 0:
        return True
    return sq[-_tail(sq.size):].sum() <= DECILE_SHARE * total


def audit_convergence(trace):
    """Check the convergence hypotheses on a finished trace."""
    if trace.iterations == 0:
        raise ValueError("cannot audit an empty trace")
    norms = np.asarray(trace.multiplier_norm, dtype=float)
    diffs = np.asarray(trace.multiplier_change, dtype=float)
    residual = np.asarray(trace.primal_residual, dtype=float)
    return ConvergenceAudit(
        multiplier_norm_series=norms,
        multiplier_diff_sq_cumsum=np.cumsum(diffs ** 2),
        primal_residual_series=residual,
        lagrangian_series=np.asarray(trace.lagrangian, dtype=float),
        bounded_multiplier=bool(bounded_series(norms)),
        summable_diffs=bool(summable_series(diffs)),
        residual_vanishing=bool(residual[-1] <= trace.tolerance),
    )
