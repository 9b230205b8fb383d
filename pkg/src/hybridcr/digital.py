"""Fully digital benchmark.

The transmit covariance solves

    max  log2 det(I + Hw Ft Hw^H)   s.t.  tr(Ft) <= P_max,
                                         tr(H_ps Ft H_ps^H) <= I_max,  Ft >= 0

with the whitened channel ``Hw = Q^{-1/2} H_ss``. For fixed multipliers
``(l1, l2)`` the Lagrangian is maximized in closed form: with
``B = l1 I + l2 H_ps^H H_ps`` it is water-filling with unit water level on
the singular values of ``Hw B^{-1/2}``. The multipliers are then found by
the same active-set / nested bracketed search the projections use. Each
constraint value is monotone in its own multiplier because it is a partial
derivative of the convex dual function.
"""
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalError
from .numerics import fro2, hermitian_eig, psd_power, solve_linear

LN2 = np.log(2.0)
LAMBDA1_FLOOR = 1e-12
MAX_DOUBLINGS = 200


@dataclass(frozen=True)
class DigitalSolution:
    f_tilde: np.ndarray
    f_d: np.ndarray
    achieved_objective: float  # bits/s/Hz
    multipliers: tuple  # (power, interference), in bits per unit power
    q_matrix: np.ndarray
    duality_gap: float = 0.0  # relative


def waterfill(gains, power, max_streams=None):
    """Classical water-filling: maximize ``sum log(1 + g_k p_k)`` subject to
    ``sum p_k <= power``. Returns ``(p, level)`` with ``p_k = (level - 1/g_k)^+``.

    Only the ``max_streams`` strongest gains may receive power.
    """
    gains = np.asarray(gains, dtype=float)
    order = np.argsort(gains)[::-1]
    g = gains[order]
    usable = int(np.count_nonzero(g > 0))
    if max_streams is not None:
        usable = min(usable, int(max_streams))
    p_sorted = np.zeros_like(g)
    if usable == 0:
        return np.zeros_like(gains), np.inf
    inv = 1.0 / g[:usable]
    level = 0.0
    for k in range(usable, 0, -1):
        level = (power + inv[:k].sum()) / k
        if level > inv[k - 1]:
            p_sorted[:k] = level - inv[:k]
            break
    p = np.zeros_like(gains)
    p[order] = p_sorted
    return p, level


class _DualProblem:
    def __init__(self, Hw, H_ps, p_max, i_max, max_streams):
        self.Hw = Hw
        self.H_ps = H_ps
        self.P = p_max
        self.I = i_max
        self.cap = max_streams
        w, U = np.linalg.eigh(H_ps.conj().T @ H_ps)
        self.g = np.maximum(w, 0.0)
        self.U = U
        self.evaluations = 0

    def _coordinates(self, l1, l2):
        """Maximizer in the eigenbasis of ``H_ps^H H_ps`` (``Wm = U Y``) and
        the Lagrangian's maximal value in nats. Working in this basis keeps
        the interference of null-space directions exactly zero."""
        self.evaluations += 1
        b = max(l1, LAMBDA1_FLOOR) + l2 * self.g
        _, s, vh = np.linalg.svd((self.Hw @ self.U) * b ** -0.5, full_matrices=False)
        s2 = s ** 2
        p = np.where(s2 > 1.0, 1.0 - 1.0 / np.where(s2 > 0, s2, 1.0), 0.0)
        if self.cap is not None:
            p[self.cap:] = 0.0
        Y = (b ** -0.5)[:, None] * (vh.conj().T * np.sqrt(p))
        value = float(np.sum(np.log1p(s2 * p)) - p.sum())
        return Y, value

    def maximizer(self, l1, l2):
        """Lagrangian maximizer as a factor ``Wm`` (``Ft = Wm Wm^H``) plus the
        Lagrangian's maximal value in nats."""
        Y, value = self._coordinates(l1, l2)
        return self.U @ Y, value

    def values(self, l1, l2):
        Y, _ = self._coordinates(l1, l2)
        e = np.sum(np.abs(Y) ** 2, axis=1)
        return float(e.sum()), float(e @ self.g)

    def power_only(self):
        _, s, vh = np.linalg.svd(self.Hw, full_matrices=False)
        p, level = waterfill(s ** 2, self.P, self.cap)
        Wm = vh.conj().T * np.sqrt(p)
        return Wm, 1.0 / level


def _root_decreasing(fn, target, lo, what):
    """Smallest ``x >= lo`` with ``fn(x) <= target`` for nonincreasing fn."""
    hi = max(2.0 * lo, 1.0)
    for _ in range(MAX_DOUBLINGS):
        if fn(hi) <= target:
            break
        lo, hi = hi, 2.0 * hi
    else:
        raise NumericalError(f"could not bracket {what}", {"bracket": (lo, hi)})
    if fn(lo) <= target:
        return lo
    return brentq(lambda x: fn(x) - target, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)


def _solve_multipliers(dual):
    P, I = dual.P, dual.I
    Wm, l1 = dual.power_only()
    if fro2(dual.H_ps @ Wm) <= I:
        return l1, 0.0

    def l2_of(l1):
        if dual.values(l1, 0.0)[1] <= I:
            return 0.0
        return _root_decreasing(lambda x: dual.values(l1, x)[1], I, 0.0,
                                "interference multiplier")

    l2 = l2_of(LAMBDA1_FLOOR)
    if dual.values(LAMBDA1_FLOOR, l2)[0] <= P:
        return LAMBDA1_FLOOR, l2
    l1 = _root_decreasing(lambda x: dual.values(x, l2_of(x))[0], P, LAMBDA1_FLOOR,
                          "power multiplier")
    return l1, l2_of(l1)


def solve_digital_precoder(scenario, max_streams=None):
    """Capacity-optimal digital precoder under the power and interference caps.

    ``max_streams`` restricts water-filling to the strongest modes of every
    Lagrangian maximizer, yielding an ``F_D`` with exactly that many columns
    (zero-padded when fewer modes are active).
    """
    c = scenario.config
    Q = scenario.interference_plus_noise()
    Hw = psd_power(Q, -0.5) @ scenario.H_ss
    dual = _DualProblem(Hw, scenario.H_ps, c.P_max, c.I_max, max_streams)
    l1, l2 = _solve_multipliers(dual)
    if l2 == 0.0:
        Wm, _ = dual.power_only()
        lagr = None
    else:
        Wm, lagr = dual.maximizer(l1, l2)
    f_tilde = Wm @ Wm.conj().T
    f_tilde = 0.5 * (f_tilde + f_tilde.conj().T)

    # absorb residual root-finding error so both caps hold
    power = float(np.trace(f_tilde).real)
    intf = float(np.trace(scenario.H_ps @ f_tilde @ scenario.H_ps.conj().T).real)
    shrink = min(1.0, c.P_max / power if power > 0 else 1.0,
                 c.I_max / intf if intf > 0 else 1.0)
    f_tilde = f_tilde * shrink

    eig = hermitian_eig(f_tilde)
    lam = eig.eigenvalues
    keep = lam > 1e-12 * max(lam[0], 1e-300)
    n_cols = int(np.count_nonzero(keep)) if max_streams is None else int(max_streams)
    f_d = np.zeros((c.T_s, n_cols), dtype=np.complex128)
    k = min(n_cols, int(np.count_nonzero(keep)))
    f_d[:, :k] = eig.eigenvectors[:, :k] * np.sqrt(lam[:k])

    objective = logdet_capacity(Hw, f_d)
    if lagr is None:
        gap = 0.0
    else:
        dual_value = lagr + l1 * c.P_max + l2 * c.I_max
        gap = abs(dual_value - objective * LN2) / max(abs(objective * LN2), 1e-300)
    return DigitalSolution(f_tilde=f_tilde, f_d=f_d, achieved_objective=objective,
                           multipliers=(l1 / LN2, l2 / LN2), q_matrix=Q,
                           duality_gap=gap)


def logdet_capacity(Hw, f):
    """``log2 det(I + Hw F F^H Hw^H)`` evaluated in the stream domain."""
    HF = Hw @ f
    M = np.eye(f.shape[1]) + HF.conj().T @ HF
    sign, logdet = np.linalg.slogdet(M)
    return float(logdet / LN2)


def digital_mmse_postcoder(scenario, precoder):
    """Linear MMSE post-coder
    ``W = (H_ss F F^H H_ss^H + H_sp_tilde H_sp_tilde^H + sigma_n^2 I)^{-1} H_ss F``."""
    HF = scenario.H_ss @ np.asarray(precoder, dtype=np.complex128)
    cov = HF @ HF.conj().T + scenario.interference_plus_noise()
    return solve_linear(cov, HF)
