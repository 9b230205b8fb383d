"""Pieces shared by the factorization ADMM solvers.

All three solvers split a target ``X`` into ``A @ B`` with a unit-modulus
analog part ``A`` and a small digital part ``B``. Given the scaled target
``M = multiplier + rho * aux`` both factor updates are least-squares
solutions, the analog one followed by the phase projection.
"""
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, SingularityError
from .numerics import fro2, solve_linear
from .projections import HybridFeasibilitySet, project_onto_S_prime

RIDGE = 1e-10
UNIT_MODULUS_ATOL = 1e-12
FEASIBILITY_RTOL = 1e-9


@dataclass(frozen=True)
class HybridPrecoder:
    """``F = f_rf @ f_bb`` with a unit-modulus analog part."""

    f_rf: np.ndarray
    f_bb: np.ndarray

    @property
    def matrix(self):
        return self.f_rf @ self.f_bb

    def unit_modulus_error(self):
        return float(np.max(np.abs(np.abs(self.f_rf) - 1.0)))


@dataclass(frozen=True)
class HybridPostcoder:
    """``W = w_rf @ w_bb`` with a unit-modulus analog part."""

    w_rf: np.ndarray
    w_bb: np.ndarray

    @property
    def matrix(self):
        return self.w_rf @ self.w_bb

    def unit_modulus_error(self):
        return float(np.max(np.abs(np.abs(self.w_rf) - 1.0)))


def gram_solve(gram, rhs):
    """Solve ``gram @ X = rhs``; on a singular Gram matrix retry once with a
    ridge of ``1e-10 * trace/N``."""
    try:
        return solve_linear(gram, rhs)
    except SingularityError:
        n = gram.shape[0]
        ridge = RIDGE * max(float(np.trace(gram).real) / n, np.finfo(float).tiny)
        return solve_linear(gram + ridge * np.eye(n), rhs)


def unit_phase(a):
    """Phase projection that maps exact zeros to phase 0 (value 1), keeping
    the analog matrix on the unit-modulus set."""
    mag = np.abs(a)
    out = np.ones_like(a)
    nz = mag > 0
    out[nz] = a[nz] / mag[nz]
    return out


def analog_update(m, b_prev, rho):
    """``Pi_F(M B^H (B B^H)^{-1} / rho)`` with the previous digital factor."""
    # X (B B^H)^{-1} = ((B B^H)^{-1} X^H)^H since B B^H is Hermitian
    x = gram_solve(b_prev @ b_prev.conj().T, (m @ b_prev.conj().T).conj().T)
    return unit_phase(x.conj().T / rho)


def digital_update(m, a, rho):
    """``(A^H A)^{-1} A^H M / rho``."""
    return gram_solve(a.conj().T @ a, a.conj().T @ m) / rho


def random_unit_modulus(rng, shape):
    return np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, shape))


def complex_gaussian(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_factors(rng, rows, rf_chains, streams, power):
    """Random start: uniform-phase analog part and a Gaussian digital part
    scaled so ``||A B||_F^2 = power``."""
    a = random_unit_modulus(rng, (rows, rf_chains))
    b = complex_gaussian(rng, (rf_chains, streams))
    b *= np.sqrt(power / max(fro2(a @ b), np.finfo(float).tiny))
    return a, b


def scaled_gaussian(rng, shape, power):
    z = complex_gaussian(rng, shape)
    return z * np.sqrt(power / fro2(z))


def finalize_precoder(scenario, f_rf, f_bb):
    """Project ``f_bb`` onto the hybrid feasibility set of ``f_rf`` and check
    the result. Every hybrid precoder a solver returns passes through here."""
    c = scenario.config
    cs = HybridFeasibilitySet(scenario.H_ps, f_rf, c.P_max, c.I_max)
    f_bb = project_onto_S_prime(f_bb, cs)
    pre = HybridPrecoder(f_rf=f_rf, f_bb=f_bb)
    check_precoder(scenario, pre)
    return pre


def check_precoder(scenario, pre, rtol=FEASIBILITY_RTOL):
    c = scenario.config
    f = pre.matrix
    power = fro2(f)
    intf = fro2(scenario.H_ps @ f)
    if (pre.unit_modulus_error() > UNIT_MODULUS_ATOL or power > c.P_max * (1 + rtol)
            or intf > c.I_max * (1 + rtol)):
        raise NumericalError("returned precoder is infeasible",
                             {"power": power, "interference": intf,
                              "unit_modulus_error": pre.unit_modulus_error()})
