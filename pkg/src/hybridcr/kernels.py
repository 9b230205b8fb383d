"""Hot inner loops.

Every kernel is written once in numba-compatible numpy and instantiated
twice by :func:`_build`: ``NUMPY`` runs under the interpreter with
vectorized reductions, ``NUMBA`` is the ``@njit`` compilation of the same
call tree with explicit loops. Module-level names point at the backend
:mod:`hybridcr._accel` selected (``HYBRIDCR_NUMBA=0`` forces numpy).

The power/interference set is handled in the eigenbasis of
``H_ps^H H_ps = U diag(d) U^H``. With ``B = U^H A`` and row energies
``e_i = ||B_i||^2`` the projection is ``U diag(1/(1 + l1 + l2 d)) B`` and
both constraint values are rational sums in the multipliers, which makes
the two-multiplier search cheap.
"""
from types import SimpleNamespace

import numpy as np

from . import _accel

ROOT_RTOL = 1e-13
MAX_ROOT_ITERS = 200
MAX_DOUBLINGS = 200
LOG2_SCALE = 2.0 / np.log(2.0)

# projection status codes
FEASIBLE, POWER_ONLY, INTERFERENCE_ONLY, BOTH_ACTIVE = 0, 1, 2, 3


def _build(jit, loops):
    if loops:
        @jit
        def rational_sum(w, c, s, x):
            f = 0.0
            df = 0.0
            for k in range(w.shape[0]):
                den = c[k] + s[k] * x
                t = w[k] / (den * den)
                f += t
                df -= 2.0 * t * s[k] / den
            return f, df

        @jit
        def power_interference(e, d, l1, l2):
            p = 0.0
            q = 0.0
            for k in range(e.shape[0]):
                den = 1.0 + l1 + l2 * d[k]
                t = e[k] / (den * den)
                p += t
                q += d[k] * t
            return p, q

        @jit
        def row_energy(B):
            n, m = B.shape
            e = np.zeros(n)
            for i in range(n):
                acc = 0.0
                for j in range(m):
                    v = B[i, j]
                    acc += v.real * v.real + v.imag * v.imag
                e[i] = acc
            return e

        @jit
        def scale_rows(B, l1, l2, d):
            n, m = B.shape
            for i in range(n):
                scale = 1.0 / (1.0 + l1 + l2 * d[i])
                for j in range(m):
                    B[i, j] *= scale
            return B
    else:
        def rational_sum(w, c, s, x):
            den = c + s * x
            t = w / (den * den)
            return float(t.sum()), float(-2.0 * (t * s / den).sum())

        def power_interference(e, d, l1, l2):
            den = 1.0 + l1 + l2 * d
            t = e / (den * den)
            return float(t.sum()), float((d * t).sum())

        def row_energy(B):
            return (B.real ** 2 + B.imag ** 2).sum(axis=1)

        def scale_rows(B, l1, l2, d):
            return B / (1.0 + l1 + l2 * d)[:, None]

    @jit
    def rational_root(w, c, s, target):
        # Smallest x >= 0 with sum w/(c + s x)^2 <= target, assuming
        # f(0) > target. Safeguarded Newton on f^(-1/2) (exactly linear for a
        # single term) with bisection whenever the step leaves the bracket.
        lo = 0.0
        hi = 1.0
        f_hi, _ = rational_sum(w, c, s, hi)
        n = 0
        while f_hi > target:
            lo = hi
            hi *= 2.0
            f_hi, _ = rational_sum(w, c, s, hi)
            n += 1
            if n > MAX_DOUBLINGS:
                return hi, False
        x = lo
        f, df = rational_sum(w, c, s, x)
        for _ in range(MAX_ROOT_ITERS):
            if abs(f - target) <= ROOT_RTOL * target:
                return x, True
            if f > target:
                lo = x
            else:
                hi = x
            g = 1.0 / np.sqrt(f) - 1.0 / np.sqrt(target)
            dg = -0.5 * df / (f * np.sqrt(f))
            x_new = x - g / dg if dg > 0.0 else -1.0
            if not (lo < x_new < hi):
                x_new = 0.5 * (lo + hi)
            if x_new == x or hi - lo <= 1e-16 * hi:
                break
            x = x_new
            f, df = rational_sum(w, c, s, x)
        # bracket collapsed; hi is on the feasible side
        return hi, True

    @jit
    def lam2_given_lam1(e, d, l1, i_max):
        _, q0 = power_interference(e, d, l1, 0.0)
        if q0 <= i_max:
            return 0.0, True
        c = np.full(e.shape[0], 1.0 + l1)
        return rational_root(d * e, c, d, i_max)

    @jit
    def s_multipliers(e, d, p_max, i_max):
        """Multipliers ``(l1, l2, status)`` of the projection onto
        ``{||X||^2 <= p_max, ||H_ps X||^2 <= i_max}``.

        ``status``: 0 feasible input, 1 power only, 2 interference only,
        3 both active, negative on search failure.
        """
        p0, q0 = power_interference(e, d, 0.0, 0.0)
        if p0 <= p_max and q0 <= i_max:
            return 0.0, 0.0, 0
        if p0 > p_max:
            s = np.sqrt(p0 / p_max)
            if q0 / (s * s) <= i_max:
                return s - 1.0, 0.0, 1
            l1_hi = s - 1.0
        else:
            l1_hi = 0.0
        l2, ok = lam2_given_lam1(e, d, 0.0, i_max)
        if not ok:
            return 0.0, l2, -2
        p, _ = power_interference(e, d, 0.0, l2)
        if p <= p_max * (1.0 + ROOT_RTOL):
            return 0.0, l2, 2
        # both active: phi(l1) = power(l1, l2*(l1)) - p_max is nonincreasing
        # (derivative of a concave dual), phi(0) > 0 >= phi(l1_hi).
        # Illinois false position.
        a = 0.0
        fa = p - p_max
        b = l1_hi
        l2b, ok = lam2_given_lam1(e, d, b, i_max)
        pb, _ = power_interference(e, d, b, l2b)
        fb = pb - p_max
        side = 0
        for _ in range(MAX_ROOT_ITERS):
            if b - a <= 1e-16 * b:
                break
            x = (a * fb - b * fa) / (fb - fa)
            if not (a < x < b):
                x = 0.5 * (a + b)
            l2x, ok = lam2_given_lam1(e, d, x, i_max)
            px, _ = power_interference(e, d, x, l2x)
            fx = px - p_max
            if abs(fx) <= ROOT_RTOL * p_max:
                return x, l2x, 3
            if fx > 0.0:
                a = x
                fa = fx
                if side == 1:
                    fb *= 0.5
                side = 1
            else:
                b = x
                fb = fx
                if side == -1:
                    fa *= 0.5
                side = -1
        l2b, ok = lam2_given_lam1(e, d, b, i_max)
        pb, _ = power_interference(e, d, b, l2b)
        if pb <= p_max * (1.0 + 1e-9):
            return b, l2b, 3
        return b, l2b, -3

    @jit
    def project_s_eig(A, U, d, p_max, i_max):
        """Projection onto the power/interference set given the eigenbasis
        ``(U, d)`` of ``H_ps^H H_ps``. Returns ``(X, l1, l2, status)``."""
        B = U.conj().T @ A
        e = row_energy(B)
        l1, l2, status = s_multipliers(e, d, p_max, i_max)
        if status == 0:
            return A.copy(), 0.0, 0.0, 0
        return U @ scale_rows(B, l1, l2, d), l1, l2, status

    @jit
    def logdet_gradient(Z, K):
        """Real gradient of ``log2 det(I + Z^H K Z)`` with respect to ``Z``:
        ``(2/ln 2) K Z (I + Z^H K Z)^{-1}``, the push-through form of
        ``(2/ln 2) H^H (I + H Z Z^H H^H)^{-1} H Z`` with ``K = H^H H``."""
        L = Z.shape[1]
        KZ = K @ Z
        M = Z.conj().T @ KZ
        for i in range(L):
            M[i, i] += 1.0
        # X M = KZ  <=>  M^T X^T = KZ^T
        X = np.linalg.solve(M.T.copy(), KZ.T.copy())
        return LOG2_SCALE * X.T.copy()

    @jit
    def inner_projected_gradient(Z0, K, U, d, p_max, i_max, target, lam,
                                 alpha, mu, eps_gd, cap):
        """Projected gradient descent on the Z-block of the augmented
        Lagrangian: ``Z <- Pi_S(Z - mu grad)`` until the squared step norm
        drops below ``eps_gd`` or ``cap`` steps. Returns
        ``(Z, steps, status)``; negative status means a multiplier search
        failed somewhere along the way."""
        Z = Z0.copy()
        steps = 0
        worst = 0
        while steps < cap:
            G = -logdet_gradient(Z, K) + lam + alpha * (Z - target)
            Znew, _, _, status = project_s_eig(Z - mu * G, U, d, p_max, i_max)
            if status < 0:
                worst = status
            step2 = row_energy(Znew - Z).sum()
            Z = Znew
            steps += 1
            if step2 < eps_gd:
                break
        return Z, steps, worst

    return SimpleNamespace(
        s_multipliers=s_multipliers,
        project_s_eig=project_s_eig,
        logdet_gradient=logdet_gradient,
        inner_projected_gradient=inner_projected_gradient,
        power_interference=power_interference,
        row_energy=row_energy,
    )


NUMPY = _build(lambda f: f, loops=False)
NUMBA = _build(_accel.njit, loops=True) if _accel.NUMBA_AVAILABLE else None

ACTIVE = NUMBA if _accel.NUMBA_ENABLED else NUMPY

s_multipliers = ACTIVE.s_multipliers
project_s_eig = ACTIVE.project_s_eig
logdet_gradient = ACTIVE.logdet_gradient
inner_projected_gradient = ACTIVE.inner_projected_gradient
