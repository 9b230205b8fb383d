"""Dense complex linear algebra used by every solver.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128``; this
module is the only place that talks to LAPACK directly.
"""
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, DomainError, SingularityError

HERMITIAN_RTOL = 1e-10
PSD_CLAMP_RTOL = 1e-12
PSD_FLOOR_RTOL = 1e-10
COND_LIMIT = 1e12


class HermitianEig(NamedTuple):
    eigenvalues: np.ndarray  # real, descending
    eigenvectors: np.ndarray  # orthonormal columns


def as_complex_matrix(a, name="matrix"):
    """Return ``a`` as a 2-D complex128 array, rejecting NaN/Inf."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite entries")
    return arr


def fro2(a):
    """Squared Frobenius norm."""
    a = np.asarray(a)
    return float(np.vdot(a, a).real)


def _check_square(a, name="matrix"):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got shape {a.shape}")


def hermitian_part(a):
    return 0.5 * (a + a.conj().T)


def hermitian_eig(a):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    The input is symmetrized as ``(A + A^H)/2`` to absorb round-off before
    calling LAPACK ``heevd``.
    """
    a = as_complex_matrix(a)
    _check_square(a)
    skew = np.linalg.norm(a - a.conj().T)
    if skew > HERMITIAN_RTOL * max(1.0, np.linalg.norm(a)):
        raise DomainError(f"matrix is not Hermitian (skew norm {skew:.3e})")
    w, v = np.linalg.eigh(hermitian_part(a))
    return HermitianEig(w[::-1].copy(), v[:, ::-1].copy())


def psd_power(a, p):
    """Matrix power ``A^p`` of a Hermitian PSD matrix for p in {1/2, -1/2, -1}.

    Eigenvalues down to ``-1e-12 ||A||_F`` are treated as round-off and
    clamped to zero. For negative exponents every eigenvalue must be at least
    ``1e-10 trace(A)/n``; smaller ones raise :class:`SingularityError`.
    """
    if p not in (0.5, -0.5, -1.0, -1):
        raise DomainError(f"unsupported exponent {p}; use 1/2, -1/2 or -1")
    w, v = hermitian_eig(a)
    scale = np.linalg.norm(a)
    if w[-1] < -PSD_CLAMP_RTOL * scale:
        raise DomainError(f"matrix is not PSD (eigenvalue {w[-1]:.3e})")
    w = np.maximum(w, 0.0)
    if p < 0:
        n = w.size
        floor = PSD_FLOOR_RTOL * float(np.trace(a).real) / n
        if w[-1] < floor or w[-1] <= 0.0:
            raise SingularityError(
                f"eigenvalue {w[-1]:.3e} below floor {floor:.3e}; "
                f"cannot raise to power {p}")
    wp = w ** p
    out = (v * wp) @ v.conj().T
    return hermitian_part(out)


def solve_linear(a, b):
    """Solve ``a x = b`` without forming an inverse.

    Raises :class:`SingularityError` when ``a`` is numerically rank
    deficient (condition number above 1e12).
    """
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionError(f"coefficient matrix must be 2-D, got {a.shape}")
    _check_square(a, "coefficient matrix")
    b = np.asarray(b, dtype=np.complex128)
    if b.shape[0] != a.shape[0]:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.shape[0] == 0:
        return b.copy()
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise SingularityError(f"matrix is singular to working precision (cond={cond:.3e})")
    return np.linalg.solve(a, b)
