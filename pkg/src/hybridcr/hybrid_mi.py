"""Mutual-information-maximizing hybrid precoder (ADMM).

Splits ``max log2 det(I + Hw F F^H Hw^H)`` over ``F = F_RF F_BB`` with the
auxiliary copy ``Z = F_RF F_BB`` and alternates

1. ``Z``: projected gradient on the augmented Lagrangian, every iterate
   projected onto the power/interference set,
2. ``F_RF``: least squares against the previous ``F_BB``, then phase
   projection,
3. ``F_BB``: least squares against the new ``F_RF``,
4. ``Lambda += alpha (Z - F_RF F_BB)``.

The returned digital part is finally projected so ``F_RF F_BB`` meets both
limits.
"""
from dataclasses import dataclass

import numpy as np

from . import _admm, kernels
from ._admm import HybridPrecoder  # noqa: F401  (public re-export)
from .diagnostics import AdmmTrace
from .errors import ConfigurationError, NumericalError
from .numerics import fro2, solve_linear
from .projections import TraceConstraintSet, project_onto_S

LN2 = np.log(2.0)


@dataclass(frozen=True)
class AdmmConfig:
    alpha: float = 10.0
    mu: float = 1e-3
    eps_z: float = 1e-3
    eps_p: float = 1e-4
    eps_gd_initial: float = 1e-2
    n_max: int = 500
    gd_max_iters: int = 2000
    eps_gd_floor: float = 1e-8

    def __post_init__(self):
        for name in ("alpha", "mu", "eps_z", "eps_p", "eps_gd_initial", "eps_gd_floor"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.n_max < 1 or self.gd_max_iters < 1:
            raise ConfigurationError("iteration caps must be at least 1")


def whitened_gram(scenario):
    """``K = Hw^H Hw = H_ss^H Q^{-1} H_ss`` for the whitened channel."""
    H = scenario.H_ss
    K = H.conj().T @ solve_linear(scenario.interference_plus_noise(), H)
    return np.ascontiguousarray(0.5 * (K + K.conj().T))


def mutual_information(z, K):
    """``log2 det(I + Z^H K Z)`` (equal to the log-det over the receive
    dimension by Sylvester's identity)."""
    M = np.eye(z.shape[1]) + z.conj().T @ K @ z
    _, logdet = np.linalg.slogdet(M)
    return float(logdet / LN2)


def augmented_lagrangian(z, target, lam, K, alpha):
    d = z - target
    return (-mutual_information(z, K) + float(np.vdot(lam, d).real)
            + 0.5 * alpha * fro2(d))


def z_gradient(z, target, lam, K, alpha):
    """Gradient of the augmented Lagrangian's smooth part with respect to Z."""
    return -kernels.logdet_gradient(z, K) + lam + alpha * (z - target)


def _constraint_set(scenario):
    c = scenario.config
    return TraceConstraintSet(scenario.H_ps, c.P_max, c.I_max)


def _run_inner(z0, target, lam, K, cs, alpha, mu, eps_gd, cap):
    U, d = cs.eigenbasis
    z, steps, status = kernels.inner_projected_gradient(
        np.ascontiguousarray(z0), K, U, d, float(cs.p_max), float(cs.i_max),
        np.ascontiguousarray(target), np.ascontiguousarray(lam),
        float(alpha), float(mu), float(eps_gd), int(cap))
    if status < 0:
        raise NumericalError("projection failed inside the Z-update",
                             {"status": int(status)})
    return z, int(steps)


def inner_projected_gradient(z_init, f_rf, f_bb, lam, scenario, mu, eps_gd, cap,
                             alpha=10.0, full_output=False):
    """Projected gradient descent for the Z-block.

    Iterates ``Z <- Pi_S(Z - mu * grad)`` from ``z_init`` until the squared
    step norm drops below ``eps_gd`` or ``cap`` steps are taken. With
    ``full_output`` returns ``(Z, steps)``.
    """
    z0 = np.asarray(z_init, dtype=np.complex128)
    target = np.asarray(f_rf, dtype=np.complex128) @ np.asarray(f_bb, dtype=np.complex128)
    lam = np.asarray(lam, dtype=np.complex128)
    if z0.shape != target.shape or lam.shape != target.shape:
        raise ValueError(f"shape mismatch: Z {z0.shape}, F_RF F_BB {target.shape}, "
                         f"Lambda {lam.shape}")
    z, steps = _run_inner(z0, target, lam, whitened_gram(scenario),
                          _constraint_set(scenario), alpha, mu, eps_gd, cap)
    return (z, steps) if full_output else z


def solve_hybrid_mi(scenario, admm_config=None, rng_seed=0, return_state=False):
    """Hybrid precoder maximizing the mutual information.

    Returns ``(HybridPrecoder, AdmmTrace)``; with ``return_state`` a third
    item holds the final ADMM iterates ``z``, ``lam`` and the unprojected
    ``f_bb``.
    """
    cfg = admm_config or AdmmConfig()
    c = scenario.config
    rng = np.random.default_rng(rng_seed)
    K = whitened_gram(scenario)
    cs = _constraint_set(scenario)

    f_rf, f_bb = _admm.random_factors(rng, c.T_s, c.N_st, c.L_s, c.P_max)
    z = _admm.scaled_gaussian(rng, (c.T_s, c.L_s), c.P_max)
    lam = np.zeros_like(z)
    alpha = cfg.alpha
    eps_gd = cfg.eps_gd_initial
    trace = AdmmTrace(tolerance=cfg.eps_p, method="hybrid-mi")

    for _ in range(cfg.n_max):
        z_prev = z
        z, steps = _run_inner(z_prev, f_rf @ f_bb, lam, K, cs, alpha, cfg.mu,
                              eps_gd, cfg.gd_max_iters)
        m = lam + alpha * z
        f_rf = _admm.analog_update(m, f_bb, alpha)
        f_bb = _admm.digital_update(m, f_rf, alpha)
        r = z - f_rf @ f_bb
        lam_step = alpha * r
        lam = lam + lam_step

        residual = np.sqrt(fro2(r))
        change = np.sqrt(fro2(z - z_prev))
        trace.record(residual, change, augmented_lagrangian(z, f_rf @ f_bb, lam, K, alpha),
                     np.sqrt(fro2(lam)), np.sqrt(fro2(lam_step)), steps)
        if change <= cfg.eps_z and residual <= cfg.eps_p:
            trace.termination = "tolerances-met"
            break
        if change <= eps_gd and residual <= eps_gd:
            eps_gd = max(eps_gd / 10.0, cfg.eps_gd_floor)
    else:
        trace.termination = "n_max-reached"

    pre = _admm.finalize_precoder(scenario, f_rf, f_bb)
    if return_state:
        return pre, trace, {"z": z, "lam": lam, "f_bb": f_bb}
    return pre, trace


def stationarity_residual(scenario, z, lam, admm_config=None):
    """Fixed-point residual of the Z-stationarity condition,
    ``||Z - Pi_S(Z - mu (grad f(Z) + Lambda))||_F``, which vanishes exactly
    when ``0 in grad f(Z) + Lambda + N_S(Z)``."""
    cfg = admm_config or AdmmConfig()
    K = whitened_gram(scenario)
    g = -kernels.logdet_gradient(np.ascontiguousarray(z), K) + lam
    return float(np.sqrt(fro2(z - project_onto_S(z - cfg.mu * g, _constraint_set(scenario)))))
