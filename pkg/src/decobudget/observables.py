"""Experiment-facing quantities derived from a decoherence rate."""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError
from .mission import MissionConfig, load_mission, load_missions  # noqa: F401

BACKGROUND_FREE = "background-free"
BACKGROUND_LIMITED = "background-limited"
REGIMES = (BACKGROUND_FREE, BACKGROUND_LIMITED)


@dataclass(frozen=True)
class Observables:
    s: float
    V: float
    dV: float
    sigma_qnl: float
    snr_shot: float
    n_meas: int
    phi: float = 0.0


def decoherence_per_object(gamma_tot, t_shot, n_ind):
    """s = t_shot Gamma / N_ind."""
    if gamma_tot < 0 or t_shot <= 0 or n_ind < 1:
        raise DomainError("need gamma >= 0, t_shot > 0 and N_ind >= 1")
    return t_shot * gamma_tot / n_ind


def visibility(s):
    """Return (V, dV) with V = exp(-s); dV by series for tiny s."""
    if s < 0:
        raise DomainError("decoherence exponent must be >= 0")
    V = math.exp(-s)
    dV = s - 0.5 * s * s if s < 1e-8 else -math.expm1(-s)
    return V, dV


def qnl_sigma(n_ind):
    if n_ind < 1:
        raise DomainError("N_ind must be >= 1")
    return 1.0 / (2.0 * math.sqrt(n_ind))


def snr_shot(dV, sigma_v):
    if sigma_v <= 0:
        raise DomainError("sigma_V must be > 0")
    return abs(dV) / sigma_v


def n_measurements(t_exp, t_shot):
    if t_exp <= 0 or t_shot <= 0:
        raise DomainError("times must be positive")
    return int(math.floor(t_exp / t_shot))


def multi_shot_snr(snr, n_meas, regime=BACKGROUND_LIMITED):
    if n_meas < 1:
        raise DomainError("N_meas must be >= 1")
    if regime == BACKGROUND_FREE:
        return snr * n_meas
    if regime == BACKGROUND_LIMITED:
        return snr * math.sqrt(n_meas)
    raise ConfigError(f"unknown regime {regime!r}")


def port_statistics(s, phi, n_ind):
    """(p_I, mean, variance) of the binomial count in port I."""
    if s < 0 or n_ind < 1:
        raise DomainError("need s >= 0 and N_ind >= 1")
    p = 0.5 * (1.0 + math.exp(-s) * math.cos(phi))
    p = min(max(p, 0.0), 1.0)
    return p, n_ind * p, n_ind * p * (1.0 - p)


def observables(gamma_tot, mission):
    s = decoherence_per_object(gamma_tot, mission.t_shot, mission.n_ind)
    V, dV = visibility(s)
    sig = qnl_sigma(mission.n_ind)
    return Observables(s, V, dV, sig, snr_shot(dV, sig), n_measurements(mission.t_exp, mission.t_shot))


def round_sig(x, digits=1):
    """Round to `digits` significant figures (used for table comparisons)."""
    if x == 0 or not np.isfinite(x):
        return x
    return float(f"{x:.{digits - 1}e}")
