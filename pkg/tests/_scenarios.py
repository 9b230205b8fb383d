"""Scenario builders shared by several test modules."""
from hybridcr.channel import SystemConfig, build_scenario, snr_to_noise


def small_config(**kw):
    base = dict(T_s=8, R_s=4, T_p=4, R_p=4, N_st=2, N_sr=2, L_s=2, L_p=2, N_p=6)
    base.update(kw)
    return SystemConfig(**base)


def scenario_at(config, seed, snr_db=10.0):
    return build_scenario(config.replace(sigma_n_sq=snr_to_noise(snr_db, config.P_max)), seed)
