"""Elastic two-body kinematics in the laboratory frame (target at rest).

All energies and momenta are in eV.  Functions accept scalars or numpy
arrays and return the same shape.
"""

from dataclasses import dataclass, field

import numpy as np

from . import units
from .errors import DomainError


@dataclass(frozen=True)
class ParticleSpecies:
    label: str
    mass: float  # eV
    charge_number: int = 0

    def __post_init__(self):
        if self.mass < 0:
            raise DomainError(f"{self.label}: negative mass")

    @property
    def massless(self):
        return self.mass == 0.0


PHOTON = ParticleSpecies("photon", 0.0, 0)
NEUTRINO = ParticleSpecies("neutrino", 0.0, 0)
PROTON = ParticleSpecies("proton", units.PROTON_MASS, 1)
ELECTRON = ParticleSpecies("electron", units.ELECTRON_MASS, -1)


@dataclass(frozen=True)
class TargetSpec:
    """Scattering target: an atom, or a molecule treated as one unit."""

    name: str
    A: int
    Z: int
    polarizability_volume: float  # Angstrom^3
    mass: float = field(default=None)  # eV; defaults to A nucleon masses
    r_atom: float = 5e-11  # m

    def __post_init__(self):
        if self.mass is None:
            object.__setattr__(self, "mass", self.A * units.NUCLEON_MASS)
        if self.mass <= 0:
            raise DomainError("target mass must be positive")
        if not 0 <= self.Z <= self.A:
            raise DomainError(f"{self.name}: need 0 <= Z <= A")
        if self.r_atom <= 0 or self.polarizability_volume <= 0:
            raise DomainError(f"{self.name}: r_atom and polarizability must be > 0")

    @property
    def n_neutrons(self):
        return self.A - self.Z


@dataclass(frozen=True)
class KinematicPoint:
    omega: float
    K: float
    q: float


def _check_positive_mass(M):
    if np.any(np.asarray(M) <= 0):
        raise DomainError("target mass must be positive")


def q_max(m, M, K):
    """Largest momentum transfer for a projectile of mass m and kinetic energy K."""
    _check_positive_mass(M)
    K = np.asarray(K, dtype=float)
    if np.any(K < 0) or np.any(np.asarray(m) < 0):
        raise DomainError("q_max needs m >= 0 and K >= 0")
    p = np.sqrt(K * K + 2.0 * m * K)
    out = 2.0 * M * p * (M + m + K) / ((M + m) ** 2 + 2.0 * M * K)
    return out if out.ndim else float(out)


def recoil_energy(q, M):
    """sqrt(M^2 + q^2) - M, written without cancellation."""
    _check_positive_mass(M)
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise DomainError("momentum transfer must be >= 0")
    out = q * q / (np.sqrt(M * M + q * q) + M)
    return out if out.ndim else float(out)


def mandelstam_lab(m, M, omega, q):
    """Return (s, t) for the lab-frame configuration."""
    omega = np.asarray(omega, dtype=float)
    q = np.asarray(q, dtype=float)
    if np.any(omega < m):
        raise DomainError("omega below the projectile mass")
    K = np.maximum(omega - m, 0.0)
    # K = omega - m carries a rounding error of ~eps*omega
    slack = 1e-12 + 4e-16 * omega / np.maximum(K, 1e-300)
    if np.any(q > q_max(m, M, K) * (1 + slack)):
        raise DomainError("q beyond the kinematic limit")
    s = M * M + m * m + 2.0 * omega * M
    t = -2.0 * M * np.asarray(recoil_energy(q, M))
    if s.ndim == 0 and t.ndim == 0:
        return float(s), float(t)
    return s, t


def speed(m, K):
    """Velocity (units of c) of a particle with mass m and kinetic energy K."""
    K = np.asarray(K, dtype=float)
    if m == 0:
        return np.ones_like(K) if K.ndim else 1.0
    omega = m + K
    out = np.sqrt(K * (K + 2.0 * m)) / omega
    return out if out.ndim else float(out)


def kinetic_from_speed(m, v):
    """Inverse of speed(); v in units of c."""
    if not 0 <= v < 1:
        raise DomainError("speed must lie in [0, 1)")
    return m * (1.0 / np.sqrt(1.0 - v * v) - 1.0)


def flux_to_density(spectral_flux, m, omega):
    """dn/domega = dPhi/domega / v."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= m):
        raise DomainError("flux_to_density needs omega > m (zero-velocity divergence)")
    if m == 0:
        return spectral_flux
    return spectral_flux * omega / np.sqrt(omega * omega - m * m)


def cm_backscatter_t(m, M, K):
    """t for pi scattering in the centre-of-momentum frame, i.e. -4 p_cm^2."""
    omega = m + K
    s = M * M + m * m + 2.0 * omega * M
    p_lab2 = K * (K + 2.0 * m)
    p_cm2 = p_lab2 * M * M / s
    return -4.0 * p_cm2
