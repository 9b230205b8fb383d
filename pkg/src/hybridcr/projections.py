"""Projections used by the ADMM solvers.

* :func:`project_onto_F` - nearest unit-modulus matrix (phase of each entry).
* :func:`project_onto_S` - nearest matrix meeting the transmit power and
  PU interference limits.
* :func:`project_onto_S_prime` - the same two limits imposed on
  ``F_RF @ A`` for a fixed analog matrix, projecting the digital part ``A``.

Both constrained projections search their two Lagrange multipliers by
active-set enumeration: unconstrained, power-only, interference-only, then
a nested bracketed search where each residual is monotone in its own
multiplier.
"""
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import DimensionError, NumericalError
from .numerics import as_complex_matrix, fro2, solve_linear

MAX_DOUBLINGS = 200


def project_onto_F(a):
    """Elementwise phase: ``a/|a|``, with zero entries mapped to zero."""
    a = np.asarray(a, dtype=np.complex128)
    mag = np.abs(a)
    out = np.zeros_like(a)
    nz = mag > 0
    out[nz] = a[nz] / mag[nz]
    return out


@dataclass(frozen=True)
class TraceConstraintSet:
    """``{A : ||A||_F^2 <= p_max, ||h_ps A||_F^2 <= i_max}``."""

    h_ps: np.ndarray
    p_max: float
    i_max: float
    _eig: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.p_max > 0 and self.i_max > 0):
            raise ValueError("p_max and i_max must be positive")
        h = as_complex_matrix(self.h_ps, "h_ps")
        object.__setattr__(self, "h_ps", h)
        w, U = np.linalg.eigh(h.conj().T @ h)
        object.__setattr__(self, "_eig", (np.ascontiguousarray(U), np.maximum(w, 0.0)))

    @property
    def eigenbasis(self):
        """``(U, d)`` with ``h_ps^H h_ps = U diag(d) U^H``."""
        return self._eig

    def contains(self, a, rtol=0.0):
        return (fro2(a) <= self.p_max * (1 + rtol)
                and fro2(self.h_ps @ a) <= self.i_max * (1 + rtol))


@dataclass(frozen=True)
class HybridFeasibilitySet:
    """``{A : ||F_RF A||_F^2 <= p_max, ||h_ps F_RF A||_F^2 <= i_max}`` for a
    fixed unit-modulus ``F_RF``."""

    h_ps: np.ndarray
    f_rf_fixed: np.ndarray
    p_max: float
    i_max: float

    def __post_init__(self):
        if not (self.p_max > 0 and self.i_max > 0):
            raise ValueError("p_max and i_max must be positive")
        f = as_complex_matrix(self.f_rf_fixed, "f_rf_fixed")
        if not np.allclose(np.abs(f), 1.0, rtol=0, atol=1e-12):
            raise ValueError("f_rf_fixed must have unit-modulus entries")
        object.__setattr__(self, "f_rf_fixed", f)
        object.__setattr__(self, "h_ps", as_complex_matrix(self.h_ps, "h_ps"))

    def contains(self, a, rtol=0.0):
        x = self.f_rf_fixed @ a
        return (fro2(x) <= self.p_max * (1 + rtol)
                and fro2(self.h_ps @ x) <= self.i_max * (1 + rtol))


def project_onto_S(a, constraint_set, full_output=False):
    """Euclidean projection onto a :class:`TraceConstraintSet`.

    Returns ``a`` unchanged (a copy) when it is feasible, otherwise
    ``[(1 + l1) I + l2 h_ps^H h_ps]^{-1} a`` with the multipliers chosen by
    complementary slackness. With ``full_output`` also returns
    ``(l1, l2)``.
    """
    a = as_complex_matrix(a, "a")
    U, d = constraint_set.eigenbasis
    if a.shape[0] != U.shape[0]:
        raise DimensionError(f"a has {a.shape[0]} rows, set expects {U.shape[0]}")
    x, l1, l2, status = kernels.project_s_eig(
        a, U, d, float(constraint_set.p_max), float(constraint_set.i_max))
    if status < 0:
        raise NumericalError("multiplier search for the power/interference "
                             "projection did not converge",
                             {"lambda1": l1, "lambda2": l2, "status": status})
    return (x, (l1, l2)) if full_output else x


class _PrimeSystem:
    """Evaluates ``X(g1, g2) = [I + F^H (g1 I + g2 G) F]^{-1} A`` and the two
    constraint values ``||F X||^2`` and ``||H F X||^2``."""

    def __init__(self, a, cs):
        F = cs.f_rf_fixed
        HF = cs.h_ps @ F
        self.a = a
        self.M1 = F.conj().T @ F
        self.M2 = HF.conj().T @ HF
        self.eye = np.eye(F.shape[1])
        self.p_max = cs.p_max
        self.i_max = cs.i_max

    def x(self, g1, g2):
        if g1 == 0 and g2 == 0:
            return self.a
        return solve_linear(self.eye + g1 * self.M1 + g2 * self.M2, self.a)

    def values(self, g1, g2):
        x = self.x(g1, g2)
        p = float(np.vdot(x, self.M1 @ x).real)
        q = float(np.vdot(x, self.M2 @ x).real)
        return p, q


def _root_decreasing(fn, target, what):
    """Smallest ``g >= 0`` with ``fn(g) <= target`` for nonincreasing
    ``fn`` with ``fn(0) > target``. Bracket by doubling, then Brent."""
    hi = 1.0
    for _ in range(MAX_DOUBLINGS):
        if fn(hi) <= target:
            break
        hi *= 2.0
    else:
        raise NumericalError(f"could not bracket {what}", {"bracket": (0.0, hi)})
    lo = 0.0 if hi == 1.0 else hi / 2.0
    g = brentq(lambda t: fn(t) - target, lo, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    # step onto the feasible side if Brent stopped just short
    step = max(abs(g), 1e-300) * 1e-15
    for _ in range(200):
        if fn(g) <= target * (1 + 1e-12):
            return g
        g += step
        step *= 2.0
    raise NumericalError(f"{what} search ended infeasible", {"bracket": (lo, hi), "value": g})


def project_onto_S_prime(a, constraint_set, full_output=False):
    """Projection of a digital precoder onto a :class:`HybridFeasibilitySet`.

    Feasible input is returned unchanged; otherwise
    ``[I + F_RF^H (g1 I + g2 h_ps^H h_ps) F_RF]^{-1} a``.
    """
    a = as_complex_matrix(a, "a")
    cs = constraint_set
    if a.shape[0] != cs.f_rf_fixed.shape[1]:
        raise DimensionError(
            f"a has {a.shape[0]} rows, F_RF has {cs.f_rf_fixed.shape[1]} columns")
    sysm = _PrimeSystem(a, cs)
    P, I = cs.p_max, cs.i_max

    def done(g1, g2):
        x = sysm.x(g1, g2).copy()
        return (x, (g1, g2)) if full_output else x

    p0, q0 = sysm.values(0.0, 0.0)
    if p0 <= P and q0 <= I:
        return done(0.0, 0.0)

    def g2_of(g1):
        if sysm.values(g1, 0.0)[1] <= I:
            return 0.0
        return _root_decreasing(lambda g: sysm.values(g1, g)[1], I, "interference multiplier")

    if p0 > P:
        g1 = _root_decreasing(lambda g: sysm.values(g, 0.0)[0], P, "power multiplier")
        if sysm.values(g1, 0.0)[1] <= I * (1 + 1e-12):
            return done(g1, 0.0)
    g2 = g2_of(0.0)
    if sysm.values(0.0, g2)[0] <= P * (1 + 1e-12):
        return done(0.0, g2)
    # both active; power along the interference-optimal curve is
    # nonincreasing in g1 (derivative of a concave dual function)
    g1 = _root_decreasing(lambda g: sysm.values(g, g2_of(g))[0], P, "nested power multiplier")
    return done(g1, g2_of(g1))
