"""Hybrid precoder approximating the digital optimum in Frobenius norm.

Minimizes ``||F_D - F_RF F_BB||_F`` under the power/interference limits by
ADMM over an auxiliary ``T = F_RF F_BB`` with multiplier ``K``. Each update
is closed form:

* ``T = Pi_S((F_D - K + delta F_RF F_BB) / (delta + 1))``
* ``F_RF``, ``F_BB``: least squares, phase projection on ``F_RF``
* ``K += delta (T - F_RF F_BB)``
"""
from dataclasses import dataclass

import numpy as np

from . import _admm
from .diagnostics import AdmmTrace
from .errors import ConfigurationError
from .numerics import fro2
from .projections import TraceConstraintSet, project_onto_S


@dataclass(frozen=True)
class FrobConfig:
    delta: float = 10.0
    eps_t: float = 1e-3
    eps_p3: float = 1e-4
    n_max: int = 500

    def __post_init__(self):
        if not (self.delta > 0 and self.eps_t > 0 and self.eps_p3 > 0):
            raise ConfigurationError("delta and tolerances must be positive")
        if self.n_max < 1:
            raise ConfigurationError("n_max must be at least 1")


def target_columns(f_d, streams):
    """Exactly ``streams`` columns of ``f_d``: the strongest ones (columns come
    sorted by eigenvalue) or zero padding."""
    f_d = np.asarray(f_d, dtype=np.complex128)
    out = np.zeros((f_d.shape[0], streams), dtype=np.complex128)
    k = min(streams, f_d.shape[1])
    out[:, :k] = f_d[:, :k]
    return out


def solve_hybrid_frobenius(scenario, digital, frob_config=None, rng_seed=0):
    """Returns ``(HybridPrecoder, AdmmTrace)``; ``digital`` is a
    :class:`~hybridcr.digital.DigitalSolution` or a ``T_s x L`` matrix."""
    cfg = frob_config or FrobConfig()
    c = scenario.config
    f_d = target_columns(getattr(digital, "f_d", digital), c.L_s)
    rng = np.random.default_rng(rng_seed)
    cs = TraceConstraintSet(scenario.H_ps, c.P_max, c.I_max)
    delta = cfg.delta

    f_rf, f_bb = _admm.random_factors(rng, c.T_s, c.N_st, c.L_s, c.P_max)
    t = _admm.scaled_gaussian(rng, (c.T_s, c.L_s), c.P_max)
    k = np.zeros_like(t)
    trace = AdmmTrace(tolerance=cfg.eps_p3, method="hybrid-frob")

    for _ in range(cfg.n_max):
        t_prev = t
        t = project_onto_S((f_d - k + delta * (f_rf @ f_bb)) / (delta + 1.0), cs)
        m = k + delta * t
        f_rf = _admm.analog_update(m, f_bb, delta)
        f_bb = _admm.digital_update(m, f_rf, delta)
        r = t - f_rf @ f_bb
        step = delta * r
        k = k + step

        residual = np.sqrt(fro2(r))
        change = np.sqrt(fro2(t - t_prev))
        lagr = 0.5 * fro2(f_d - t) + float(np.vdot(k, r).real) + 0.5 * delta * fro2(r)
        trace.record(residual, change, lagr, np.sqrt(fro2(k)), np.sqrt(fro2(step)))
        if change <= cfg.eps_t and residual <= cfg.eps_p3:
            trace.termination = "tolerances-met"
            break
    else:
        trace.termination = "n_max-reached"

    return _admm.finalize_precoder(scenario, f_rf, f_bb), trace
