"""Target response: decoherence factor, form factors and structure functions."""

from dataclasses import dataclass

import numpy as np

from . import units
from .errors import ConfigError, DomainError

COLD_ATOM = "cold-atom-1body"
MATTER_COHERENT = "matter-coherent"
BASES = ("atoms", "protons", "neutrons-coherent")

HELM_RADIUS_COEFF = 1.14  # fm
HELM_SKIN = 0.9  # fm


@dataclass(frozen=True)
class StructureMode:
    kind: str
    n_atoms: float

    def __post_init__(self):
        if self.kind not in (COLD_ATOM, MATTER_COHERENT):
            raise ConfigError(f"unknown structure mode {self.kind!r}")
        if self.n_atoms < 1:
            raise DomainError("n_atoms must be >= 1")

    @property
    def coherent(self):
        return self.kind == MATTER_COHERENT


@dataclass(frozen=True)
class FormFactorParams:
    r_cloud: float  # eV^-1
    r_n: float  # eV^-1
    s_p: float = HELM_SKIN * units.FM

    @classmethod
    def for_target(cls, r_cloud_m, A):
        return cls(r_cloud_m * units.METER, helm_radius(A))


def helm_radius(A):
    return HELM_RADIUS_COEFF * A ** (1.0 / 3.0) * units.FM


# Taylor coefficients of (x - sin x)/x in powers of x^2: x^2/3!, -x^4/5!, ...
_SINC_SERIES = [(-1) ** k / float(np.prod(np.arange(1, 2 * k + 4))) for k in range(8)]


def decoherence_factor(q, dx):
    """1 - sin(q dx)/(q dx), the angle-averaged path-resolution probability."""
    x = np.abs(np.asarray(q, dtype=float) * dx)
    out = np.empty_like(x)
    tiny = x < 1e-4
    mid = (~tiny) & (x < 0.5)
    big = x >= 0.5
    xt = x[tiny] ** 2
    out[tiny] = xt / 6.0 - xt * xt / 120.0
    x2 = x[mid] ** 2
    acc = np.zeros_like(x2)
    for c in reversed(_SINC_SERIES):
        acc = acc * x2 + c
    out[mid] = acc * x2
    out[big] = 1.0 - np.sin(x[big]) / x[big]
    return out if out.ndim else float(out)


def uniform_sphere_ff(x):
    """3 j1(x)/x, the form factor of a uniform ball."""
    x = np.abs(np.asarray(x, dtype=float))
    out = np.empty_like(x)
    small = x < 0.05
    xs = x[small] ** 2
    out[small] = 1.0 - xs / 10.0 + xs**2 / 280.0 - xs**3 / 15120.0
    xb = x[~small]
    out[~small] = 3.0 * (np.sin(xb) - xb * np.cos(xb)) / xb**3
    return out if out.ndim else float(out)


def helm_ff(q, A, r_n=None, s_p=HELM_SKIN * units.FM):
    if A < 1:
        raise DomainError("A must be >= 1")
    if r_n is None:
        r_n = helm_radius(A)
    q = np.asarray(q, dtype=float)
    out = uniform_sphere_ff(q * r_n) * np.exp(-0.5 * (q * s_p) ** 2)
    return out if np.ndim(out) else float(out)


def cloud_ff(q, mode, r_cloud):
    """F_AI: zero for one-body read-out of atom clouds."""
    q = np.asarray(q, dtype=float)
    if not mode.coherent:
        return np.zeros_like(q)
    return uniform_sphere_ff(q * r_cloud)


def cloud_ff_sq(q, mode, r_cloud, average_above=np.inf):
    """F_AI^2, replaced by its period average 9(1+x^2)/(2x^6) for x > average_above."""
    q = np.asarray(q, dtype=float)
    if not mode.coherent:
        return np.zeros_like(q)
    x = q * r_cloud
    f = uniform_sphere_ff(x)
    out = f * f
    far = x > average_above
    if np.any(far):
        xf = x[far]
        out[far] = 4.5 * (1.0 + xf * xf) / xf**6
    return out


def weak_charge_sq(A, Z, weak_charge="approx"):
    if weak_charge == "approx":
        return float(A - Z) ** 2
    if weak_charge == "full":
        return (Z * (4 * units.SIN2_THETA_W - 1) + (A - Z)) ** 2
    raise ConfigError(f"unknown weak-charge option {weak_charge!r}")


def structure_function(q, mode, basis, A, Z, params, weak_charge="approx",
                       average_above=np.inf):
    """S(q) for the chosen multiplicity basis.

    atoms:             N + N^2 F_AI^2
    protons:           N Z (1 + Z F_N^2)
    neutrons-coherent: N Qw^2 (F_N^2 + N F_AI^2),  Qw^2 = (A-Z)^2 by default

    Beyond q r_cloud = average_above the cloud term uses its period average.
    """
    q = np.asarray(q, dtype=float)
    N = mode.n_atoms
    if basis == "atoms":
        return N + N * N * cloud_ff_sq(q, mode, params.r_cloud, average_above)
    if basis == "protons":
        fn = helm_ff(q, A, params.r_n, params.s_p)
        return N * Z * (1.0 + Z * fn * fn)
    if basis == "neutrons-coherent":
        fn = helm_ff(q, A, params.r_n, params.s_p)
        f2 = cloud_ff_sq(q, mode, params.r_cloud, average_above)
        return N * weak_charge_sq(A, Z, weak_charge) * (fn * fn + N * f2)
    raise ConfigError(f"unknown structure basis {basis!r}")
