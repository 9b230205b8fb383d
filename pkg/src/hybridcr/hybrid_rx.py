"""Hardware-constrained MMSE post-coder (ADMM).

With ``C = E{y y^H}`` the MSE of any post-coder ``W`` splits as
``MSE(W) = MSE(W_D) + ||C^{1/2} (W - W_D)||_F^2`` around the unconstrained
MMSE solution ``W_D = C^{-1} H_ss F``. The hybrid post-coder therefore
minimizes that weighted distance over ``W = W_RF W_BB`` with unit-modulus
``W_RF``, split with an auxiliary ``G = W_RF W_BB``:

* ``G = (C + beta I)^{-1} (C W_D - Pi + beta W_RF W_BB)``
* ``W_RF``, ``W_BB``: least squares, phase projection on ``W_RF``
* ``Pi += beta (G - W_RF W_BB)``
"""
from dataclasses import dataclass

import numpy as np

from . import _admm
from ._admm import HybridPostcoder  # noqa: F401  (public re-export)
from .diagnostics import AdmmTrace
from .errors import ConfigurationError
from .numerics import fro2, psd_power, solve_linear

INITS = ("random", "identity-phase")


@dataclass(frozen=True)
class RxCovariances:
    cov_ys: np.ndarray
    cov_ys_sqrt: np.ndarray
    w_d: np.ndarray


def _precoder_matrix(precoder):
    return np.asarray(getattr(precoder, "matrix", precoder), dtype=np.complex128)


def build_rx_covariances(scenario, precoder):
    """``C = H_ss F F^H H_ss^H + H_sp_tilde H_sp_tilde^H + sigma_n^2 I``, its
    square root and ``W_D = C^{-1} H_ss F``."""
    hf = scenario.H_ss @ _precoder_matrix(precoder)
    cov = hf @ hf.conj().T + scenario.interference_plus_noise()
    cov = 0.5 * (cov + cov.conj().T)
    return RxCovariances(cov_ys=cov, cov_ys_sqrt=psd_power(cov, 0.5),
                         w_d=solve_linear(cov, hf))


def closed_form_mse(scenario, precoder, postcoder):
    """``E||x - W^H y||^2 = L_s - 2 Re tr(W^H H_ss F) + tr(W^H C W)`` under
    unit symbol variance."""
    f = _precoder_matrix(precoder)
    w = np.asarray(getattr(postcoder, "matrix", postcoder), dtype=np.complex128)
    hf = scenario.H_ss @ f
    cov = hf @ hf.conj().T + scenario.interference_plus_noise()
    cross = np.vdot(w, hf).real
    quad = np.vdot(w, cov @ w).real
    return float(f.shape[1] - 2.0 * cross + quad)


def weighted_distance(cov_sqrt, w_d, w):
    """``||C^{1/2} (W_D - W)||_F^2``, the excess MSE of ``W`` over ``W_D``."""
    return fro2(cov_sqrt @ (w_d - w))


def dft_phases(rows, cols):
    """Unit-modulus DFT columns; full column rank when ``cols <= rows``."""
    r = np.arange(rows)[:, None]
    k = np.arange(cols)[None, :]
    return np.exp(-2j * np.pi * r * k / rows)


def solve_hybrid_postcoder(scenario, precoder, beta=1.0, eps_g=1e-3, eps_p2=1e-4,
                           n_max=500, rng_seed=0, init="random"):
    """Hybrid MMSE post-coder for a given precoder.

    ``init="identity-phase"`` starts ``W_RF`` from DFT phases instead of
    random ones. Returns ``(HybridPostcoder, AdmmTrace)``.
    """
    if not beta > 0 or not eps_g > 0 or not eps_p2 > 0 or n_max < 1:
        raise ConfigurationError("beta, tolerances and n_max must be positive")
    if init not in INITS:
        raise ConfigurationError(f"init must be one of {INITS}")
    c = scenario.config
    rng = np.random.default_rng(rng_seed)
    rx = build_rx_covariances(scenario, precoder)
    C, w_d = rx.cov_ys, rx.w_d
    L = w_d.shape[1]
    scale = max(fro2(w_d), np.finfo(float).tiny)

    w_rf, w_bb = _admm.random_factors(rng, c.R_s, c.N_sr, L, scale)
    if init == "identity-phase":
        w_rf = dft_phases(c.R_s, c.N_sr)
    g = _admm.scaled_gaussian(rng, (c.R_s, L), scale)
    pi = np.zeros_like(g)
    cw_d = C @ w_d
    lhs = C + beta * np.eye(c.R_s)
    trace = AdmmTrace(tolerance=eps_p2, method="hybrid-rx")

    for _ in range(n_max):
        g_prev = g
        g = solve_linear(lhs, cw_d - pi + beta * (w_rf @ w_bb))
        m = pi + beta * g
        w_rf = _admm.analog_update(m, w_bb, beta)
        w_bb = _admm.digital_update(m, w_rf, beta)
        r = g - w_rf @ w_bb
        step = beta * r
        pi = pi + step

        residual = np.sqrt(fro2(r))
        change = np.sqrt(fro2(g - g_prev))
        lagr = (0.5 * weighted_distance(rx.cov_ys_sqrt, w_d, g)
                + float(np.vdot(pi, r).real) + 0.5 * beta * fro2(r))
        trace.record(residual, change, lagr, np.sqrt(fro2(pi)), np.sqrt(fro2(step)))
        if change <= eps_g and residual <= eps_p2:
            trace.termination = "tolerances-met"
            break
    else:
        trace.termination = "n_max-reached"
    return HybridPostcoder(w_rf=w_rf, w_bb=w_bb), trace
