"""Geometric mmWave channels and the primary/secondary link scenario.

Random draws use numpy's PCG64 bit generator seeded through
``numpy.random.SeedSequence``, so a given integer seed reproduces the same
channels on every platform numpy supports.
"""
import dataclasses
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class SystemConfig:
    """Antenna, RF-chain and power parameters of the PU/SU pair.

    Variances and power limits are linear. Symbol variances are fixed to 1
    by the solvers; SNR is varied through ``sigma_n_sq``.
    """

    T_s: int = 64
    R_s: int = 16
    T_p: int = 16
    R_p: int = 16
    N_st: int = 4
    N_sr: int = 4
    L_s: int = 4
    L_p: int = 4
    sigma_s_sq: float = 1.0
    sigma_p_sq: float = 1.0
    sigma_n_sq: float = 0.1
    P_max: float = 1.0
    I_max: float = 1.0
    N_p: int = 15
    d_over_lambda: float = 0.5

    def __post_init__(self):
        counts = dict(T_s=self.T_s, R_s=self.R_s, T_p=self.T_p, R_p=self.R_p,
                      N_st=self.N_st, N_sr=self.N_sr, L_s=self.L_s,
                      L_p=self.L_p, N_p=self.N_p)
        for name, value in counts.items():
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value}")
        for name in ("sigma_s_sq", "sigma_p_sq", "sigma_n_sq", "P_max", "I_max"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if self.sigma_s_sq != 1.0 or self.sigma_p_sq != 1.0:
            raise ConfigurationError("symbol variances are normalized to 1; "
                                     "sweep SNR through sigma_n_sq")
        if self.L_s > min(self.N_st, self.N_sr):
            raise ConfigurationError("L_s must not exceed min(N_st, N_sr)")
        if self.N_st > self.T_s or self.N_sr > self.R_s:
            raise ConfigurationError("RF chains cannot exceed antenna counts")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class LinkDraw:
    """One geometric channel matrix with the path parameters behind it."""

    H: np.ndarray
    gains: np.ndarray
    angles_rx: np.ndarray
    angles_tx: np.ndarray


@dataclass(frozen=True)
class ChannelRealization:
    H_ss: np.ndarray
    H_ps: np.ndarray
    H_sp: np.ndarray
    H_pp: np.ndarray
    paths: dict = field(default_factory=dict, repr=False)


@dataclass(frozen=True)
class ScenarioChannels:
    """Everything the SU solvers need: ``H_ss``, ``H_ps`` and the effective
    PU-to-SU matrix ``H_sp_tilde = H_sp F_p``."""

    H_ss: np.ndarray
    H_ps: np.ndarray
    H_sp_tilde: np.ndarray
    F_p: np.ndarray
    config: SystemConfig
    realization: ChannelRealization = field(default=None, repr=False, compare=False)

    @property
    def sigma_n_sq(self):
        return self.config.sigma_n_sq

    def with_config(self, **changes):
        return dataclasses.replace(self, config=self.config.replace(**changes))

    def with_noise(self, sigma_n_sq):
        return self.with_config(sigma_n_sq=float(sigma_n_sq))

    def interference_plus_noise(self):
        """``Q = H_sp_tilde H_sp_tilde^H + sigma_n^2 I``."""
        Hsp = self.H_sp_tilde
        return Hsp @ Hsp.conj().T + self.sigma_n_sq * np.eye(self.config.R_s)

    def digest(self):
        """SHA-256 over the channel matrices, for reproducibility checks."""
        h = hashlib.sha256()
        for m in (self.H_ss, self.H_ps, self.H_sp_tilde, self.F_p):
            h.update(np.ascontiguousarray(m, dtype=np.complex128).tobytes())
        return h.hexdigest()


def _rng(seed):
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def ula_response(num_elements, phi, d_over_lambda=0.5):
    """Unit-norm ULA steering vector ``exp(j t 2 pi d/lambda sin(phi)) / sqrt(T)``."""
    t = np.arange(num_elements)
    phase = 2.0 * np.pi * d_over_lambda * np.sin(phi)
    return np.exp(1j * t * phase) / np.sqrt(num_elements)


def draw_link(t_antennas, r_antennas, n_paths, d_over_lambda, rng):
    """Draw ``H = sqrt(T R / N_p) sum_l alpha_l a_r(phi_r) a_t(phi_t)^H``."""
    if n_paths < 1:
        raise ConfigurationError("n_paths must be at least 1")
    rng = _rng(rng)
    gains = (rng.standard_normal(n_paths) + 1j * rng.standard_normal(n_paths)) / np.sqrt(2.0)
    angles_rx = rng.uniform(0.0, 2.0 * np.pi, n_paths)
    angles_tx = rng.uniform(0.0, 2.0 * np.pi, n_paths)
    t = np.arange(t_antennas)[:, None]
    r = np.arange(r_antennas)[:, None]
    k = 2.0 * np.pi * d_over_lambda
    A_t = np.exp(1j * k * t * np.sin(angles_tx)) / np.sqrt(t_antennas)
    A_r = np.exp(1j * k * r * np.sin(angles_rx)) / np.sqrt(r_antennas)
    H = np.sqrt(t_antennas * r_antennas / n_paths) * (A_r * gains) @ A_t.conj().T
    return LinkDraw(H, gains, angles_rx, angles_tx)


def draw_channel(t_antennas, r_antennas, n_paths, d_over_lambda=0.5, rng_seed=0):
    """Single-link channel matrix (``r_antennas x t_antennas``)."""
    return draw_link(t_antennas, r_antennas, n_paths, d_over_lambda, rng_seed).H


def pu_precoder(H_pp, n_streams, power):
    """Eigen-beamforming PU precoder: top right singular vectors of ``H_pp``
    with equal power, ``||F_p||_F^2 = power``."""
    _, _, vh = np.linalg.svd(H_pp)
    V = vh.conj().T[:, :n_streams]
    return V * np.sqrt(power / n_streams)


def build_scenario(config, rng_seed=0):
    """Draw ``H_ss``, ``H_ps``, ``H_sp``, ``H_pp`` independently and assemble
    the scenario.

    Each link gets its own child of ``SeedSequence(rng_seed)``, so changing
    one antenna count does not reshuffle the other links.
    """
    c = config
    if c.L_p > min(c.T_p, c.R_p, c.N_p):
        raise ConfigurationError(
            f"L_p={c.L_p} exceeds the attainable PU rank min(T_p, R_p, N_p)="
            f"{min(c.T_p, c.R_p, c.N_p)}")
    children = np.random.SeedSequence(rng_seed).spawn(4)
    gens = [np.random.Generator(np.random.PCG64(s)) for s in children]
    ss = draw_link(c.T_s, c.R_s, c.N_p, c.d_over_lambda, gens[0])
    ps = draw_link(c.T_s, c.R_p, c.N_p, c.d_over_lambda, gens[1])
    sp = draw_link(c.T_p, c.R_s, c.N_p, c.d_over_lambda, gens[2])
    pp = draw_link(c.T_p, c.R_p, c.N_p, c.d_over_lambda, gens[3])
    real = ChannelRealization(ss.H, ps.H, sp.H, pp.H,
                              paths={"ss": ss, "ps": ps, "sp": sp, "pp": pp})
    F_p = pu_precoder(pp.H, c.L_p, c.P_max)
    return ScenarioChannels(H_ss=ss.H, H_ps=ps.H, H_sp_tilde=sp.H @ F_p,
                            F_p=F_p, config=c, realization=real)


def snr_to_noise(snr_db, p_max):
    """Noise variance for ``SNR = P_max / sigma_n^2`` (dB)."""
    return p_max * 10.0 ** (-snr_db / 10.0)
