"""Link-level figures of merit: spectral efficiency and constraint audits."""
from dataclasses import dataclass, asdict

import numpy as np

from .numerics import as_complex_matrix, fro2

LN2 = np.log(2.0)
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class LinkReport:
    spectral_efficiency: float
    tx_power: float
    interference_power: float
    constraint_violations: tuple  # (power, interference), relative excess
    receiver_rank_deficient: bool = False

    def to_dict(self):
        d = asdict(self)
        d["constraint_violations"] = list(self.constraint_violations)
        return d


def _column_space(w):
    """Orthonormal basis of ``range(W)`` and whether ``W`` lost rank."""
    u, s, _ = np.linalg.svd(w, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return u[:, :0], True
    r = int(np.count_nonzero(s > RANK_RTOL * s[0]))
    return u[:, :r], r < w.shape[1]


def spectral_efficiency(scenario, f, w, full_output=False):
    """``log2 det(I + R_n^{-1} W^H H F F^H H^H W)`` with
    ``R_n = W^H (H_sp_tilde H_sp_tilde^H + sigma_n^2 I) W``.

    A rank-deficient ``W`` is replaced by an orthonormal basis of its column
    space; the value only depends on that space. With ``full_output`` also
    returns whether that substitution happened.
    """
    f = as_complex_matrix(f, "f")
    w = as_complex_matrix(w, "w")
    basis, deficient = _column_space(w)
    if basis.shape[1] == 0:
        return (0.0, True) if full_output else 0.0
    if deficient:
        w = basis
    Q = scenario.interference_plus_noise()
    rn = w.conj().T @ Q @ w
    s = w.conj().T @ (scenario.H_ss @ f)
    # det(I + Rn^{-1} S S^H) = det(Rn + S S^H) / det(Rn)
    _, ld_total = np.linalg.slogdet(rn + s @ s.conj().T)
    _, ld_noise = np.linalg.slogdet(rn)
    se = max(float((ld_total - ld_noise) / LN2), 0.0)
    return (se, deficient) if full_output else se


def audit(scenario, precoder):
    """Transmit power, interference at the PU, and relative violations
    ``max(0, value/limit - 1)``; the spectral efficiency is left as
    ``None``. ``precoder`` may be a matrix or any object with a ``matrix``
    attribute."""
    f = getattr(precoder, "matrix", precoder)
    f = np.asarray(f, dtype=np.complex128)
    c = scenario.config
    power = fro2(f)
    intf = fro2(scenario.H_ps @ f)
    viol = (max(0.0, power / c.P_max - 1.0), max(0.0, intf / c.I_max - 1.0))
    return LinkReport(spectral_efficiency=None, tx_power=power,
                      interference_power=intf, constraint_violations=viol)


def link_report(scenario, f, w):
    """:func:`audit` plus the spectral efficiency for post-coder ``w``."""
    f = getattr(f, "matrix", f)
    w = getattr(w, "matrix", w)
    base = audit(scenario, f)
    se, deficient = spectral_efficiency(scenario, f, w, full_output=True)
    return LinkReport(spectral_efficiency=se, tx_power=base.tx_power,
                      interference_power=base.interference_power,
                      constraint_violations=base.constraint_violations,
                      receiver_rank_deficient=deficient)
