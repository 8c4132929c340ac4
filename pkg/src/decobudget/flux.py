"""Background spectra: solar photons, solar wind, cosmic rays, solar neutrinos, dust.

A FluxSpectrum maps kinetic energy K [eV] to the isotropic spectral number
flux dPhi/dK [cm^-2 s^-1 eV^-1].  Outside its support it is exactly zero.
"""

import csv
import hashlib
import json
import math
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad

from . import units
from .errors import DomainError, ParseError, SupportError, UnitError
from .kinematics import NEUTRINO, PHOTON, PROTON, ParticleSpecies, speed

DATA_PACKAGE = "decobudget.data"

SOLAR_CONSTANT = 1366.1  # W/m^2
SUN_TEFF = 5772.0  # K
SOLAR_WIND_DENSITY = 5.74  # cm^-3
SOLAR_WIND_BAND = (300.0, 3000.0)  # eV
SOLAR_WIND_SPEED = 398.0  # km/s
CR_CUTOFF = 100e9  # eV

GRUN_MASS_RANGE = (1e-18, 1.0)  # g
DUST_RHO = 3.0  # g/cm^3
DUST_V0 = 20.0  # km/s
DUST_R0 = 1.0  # AU


def data_path(name):
    return resources.files(DATA_PACKAGE).joinpath(name)


def file_sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def gauss_legendre(n):
    return _GL_CACHE.setdefault(n, np.polynomial.legendre.leggauss(n))


_GL_CACHE = {}


def log_panel_nodes(edges, n):
    """Gauss-Legendre nodes in ln(K) on consecutive panels.

    Returns nodes K and weights w such that sum(w f(K)) ~ integral f dK.
    """
    x, w = gauss_legendre(n)
    lo = np.log(edges[:-1])[:, None]
    hi = np.log(edges[1:])[:, None]
    half = 0.5 * (hi - lo)
    t = 0.5 * (hi + lo) + half * x
    K = np.exp(t)
    return K.ravel(), (half * w * K).ravel()


def refine_edges(breaks, per_decade):
    """Split each [b_i, b_{i+1}] into log-uniform panels."""
    breaks = np.unique(np.asarray(breaks, dtype=float))
    edges = [breaks[:1]]
    for a, b in zip(breaks[:-1], breaks[1:]):
        n = max(1, int(math.ceil(math.log10(b / a) * per_decade)))
        edges.append(np.geomspace(a, b, n + 1)[1:])
    return np.concatenate(edges)


@dataclass(frozen=True)
class FluxSpectrum:
    species: ParticleSpecies
    k_min: float
    k_max: float
    fn: Callable = field(repr=False, compare=False)
    provenance: str = "analytic"
    breakpoints: tuple = ()
    scale: float = 1.0

    def __post_init__(self):
        if not 0 < self.k_min < self.k_max:
            raise DomainError("spectrum support must satisfy 0 < K_min < K_max")

    def evaluate(self, K):
        K = np.asarray(K, dtype=float)
        inside = (K >= self.k_min) & (K <= self.k_max)
        out = np.zeros_like(K)
        if np.any(inside):
            out[inside] = np.maximum(self.fn(K[inside]), 0.0) * self.scale
        return out if out.ndim else float(out)

    __call__ = evaluate

    def scaled(self, factor):
        return replace(self, scale=self.scale * factor)

    def truncated(self, k_max):
        k_max = min(k_max, self.k_max)
        bps = tuple(b for b in self.breakpoints if b < k_max)
        return replace(self, k_max=k_max, breakpoints=bps)

    def panel_breaks(self, extra=()):
        pts = [self.k_min, self.k_max]
        pts += [b for b in self.breakpoints if self.k_min < b < self.k_max]
        pts += [b for b in extra if self.k_min < b < self.k_max]
        return np.unique(pts)

    def integrate(self, weight=None, per_decade=8, nodes=8):
        """integral of weight(K) dPhi/dK dK over the support [cm^-2 s^-1 x weight]."""
        K, w = log_panel_nodes(refine_edges(self.panel_breaks(), per_decade), nodes)
        f = self.evaluate(K)
        if weight is not None:
            f = f * weight(K)
        return float(np.sum(w * f))

    def total_flux(self):
        return self.integrate()

    def energy_flux(self):
        """Kinetic-energy flux in W/m^2."""
        return self.integrate(lambda K: K) * units.EV_J * 1e4

    def number_density(self):
        """Total number density [cm^-3]."""
        v = lambda K: 1.0 / (np.asarray(speed(self.species.mass, K)) * units.C_CM_S)
        return self.integrate(v)


def _loglog_interpolator(x, y):
    """Piecewise power-law interpolation; linear where a node is zero."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lx = np.log(x)
    if np.all(y > 0):
        ly = np.log(y)
        return lambda K: np.exp(np.interp(np.log(K), lx, ly))
    return lambda K: np.interp(np.log(K), lx, y)


def tabulated_spectrum(K, flux, species, provenance):
    K = np.asarray(K, dtype=float)
    flux = np.asarray(flux, dtype=float)
    order = np.argsort(K)
    K, flux = K[order], flux[order]
    if K.size < 2:
        raise ParseError("a tabulated spectrum needs at least two rows")
    if np.any(np.diff(K) <= 0):
        raise ParseError("duplicate abscissa values in table")
    if np.any(flux < 0):
        raise ParseError("negative spectral flux in table")
    return FluxSpectrum(
        species,
        float(K[0]),
        float(K[-1]),
        _loglog_interpolator(K, flux),
        provenance,
        breakpoints=tuple(K[1:-1]),
    )


# --- table parsing -------------------------------------------------------

_HEADER_RE = re.compile(r"^\s*([^\[\]]+?)\s*\[([^\]]*)\]\s*$")
_FLUX_RE = re.compile(
    r"^1/\((cm\^2|m\^2)\s+s\s+(sr\s+)?(eV|keV|MeV|GeV)\)$"
)
_IRRADIANCE_RE = re.compile(r"^W/\((m\^2)\s+(um|nm)\)$")


@dataclass(frozen=True)
class Table:
    names: tuple
    units: tuple
    columns: tuple  # tuple of numpy arrays
    path: Optional[str] = None


def read_table(path, positive_abscissa=True):
    """Read a '#'-commented CSV/TSV with a 'name[unit]' header row."""
    path = Path(path)
    if not path.exists():
        raise ParseError("file not found", path)
    text = path.read_text()
    rows = []
    header = None
    header_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        delim = "\t" if "\t" in line else ","
        cells = [c.strip() for c in next(csv.reader([line], delimiter=delim))]
        if header is None:
            try:
                [float(c) for c in cells]
            except ValueError:
                header, header_line = cells, lineno
                continue
            raise ParseError("missing header row with column units", path, lineno)
        try:
            values = [float(c) for c in cells]
        except ValueError:
            raise ParseError(f"non-numeric value in row {cells}", path, lineno) from None
        if len(values) != len(header):
            raise ParseError(
                f"expected {len(header)} columns, found {len(values)}", path, lineno
            )
        rows.append((lineno, values))
    if header is None or not rows:
        raise ParseError("empty table", path)
    names, unit_strs = [], []
    for cell in header:
        m = _HEADER_RE.match(cell)
        if m is None:
            raise ParseError(f"header cell {cell!r} lacks a [unit]", path, header_line)
        names.append(m.group(1).strip())
        unit_strs.append(m.group(2).strip())
    for lineno, values in rows:
        if positive_abscissa and values[0] <= 0:
            raise ParseError("non-positive abscissa", path, lineno)
    cols = tuple(np.array([r[1][i] for r in rows]) for i in range(len(header)))
    return Table(tuple(names), tuple(unit_strs), cols, str(path))


def convert_columns(x, x_unit, y, y_unit):
    """Return (K [eV], dPhi/dK [cm^-2 s^-1 eV^-1]) from declared units."""
    y_unit = y_unit.strip()
    if x_unit in units.ENERGY_UNITS:
        m = _FLUX_RE.match(y_unit)
        if m is None:
            raise UnitError(f"unsupported flux unit {y_unit!r}")
        area, sr, e_unit = m.groups()
        factor = 1.0 / units.AREA_UNITS[area] / units.ENERGY_UNITS[e_unit]
        if sr:
            factor *= 4.0 * math.pi
        return x * units.ENERGY_UNITS[x_unit], y * factor
    if x_unit in units.WAVELENGTH_UNITS:
        m = _IRRADIANCE_RE.match(y_unit)
        if m is None:
            raise UnitError(f"unsupported irradiance unit {y_unit!r}")
        lam_um = x * units.WAVELENGTH_UNITS[x_unit]
        # W m^-2 per wavelength unit -> eV cm^-2 s^-1 um^-1
        i_lam = y / units.WAVELENGTH_UNITS[m.group(2)] / units.EV_J * 1e-4
        E = units.HC_EV_UM / lam_um
        dphi_de = i_lam * lam_um**3 / units.HC_EV_UM**2
        return E, dphi_de
    raise UnitError(f"unsupported abscissa unit {x_unit!r}")


def load_tabulated_spectrum(path, column_spec=(0, 1), unit_spec=None, species=PROTON):
    """Load a two-column spectrum file into canonical units.

    unit_spec, if given, is (x_unit, y_unit) and overrides the header.
    """
    table = read_table(path)
    ix, iy = column_spec
    try:
        x, y = table.columns[ix], table.columns[iy]
    except IndexError:
        raise ParseError(f"column spec {column_spec} out of range", path) from None
    x_unit, y_unit = unit_spec or (table.units[ix], table.units[iy])
    K, flux = convert_columns(x, x_unit, y, y_unit)
    return tabulated_spectrum(K, flux, species, f"table:{Path(path).name}")


def canonical_text(spectrum, n_per_decade=50, comment=None):
    """Render a spectrum as 'K[eV], flux[1/(cm^2 s eV)]' CSV text."""
    if spectrum.provenance.startswith("table"):
        K = spectrum.panel_breaks()
    else:
        n = int(math.ceil(math.log10(spectrum.k_max / spectrum.k_min) * n_per_decade))
        K = np.geomspace(spectrum.k_min, spectrum.k_max, n + 1)
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    lines.append(f"# species: {spectrum.species.label}")
    lines.append("K[eV], flux[1/(cm^2 s eV)]")
    lines += [f"{k:.10e}, {f:.10e}" for k, f in zip(K, spectrum.evaluate(K))]
    return "\n".join(lines) + "\n"


# --- solar photons ---------------------------------------------------------


def _renormalize(spectrum, solar_constant):
    total = spectrum.energy_flux()
    if not total > 0:
        raise DomainError("photon table integrates to zero energy flux")
    return spectrum.scaled(solar_constant / total)


def blackbody_photon_spectrum(temperature=SUN_TEFF, solar_constant=SOLAR_CONSTANT):
    kT = units.K_B_EV * temperature
    shape = lambda E: E * E / np.expm1(E / kT)
    spec = FluxSpectrum(
        PHOTON, 1e-3 * kT, 40.0 * kT, shape, f"blackbody:{temperature:g}K",
        breakpoints=(0.1 * kT, kT, 10 * kT),
    )
    return _renormalize(spec, solar_constant)


def solar_photon_spectrum(source="blackbody", temperature=SUN_TEFF,
                          solar_constant=SOLAR_CONSTANT):
    """Photon spectrum with total energy flux fixed to the solar constant.

    source is "blackbody" or a path to a zero-air-mass irradiance table
    in (um, W m^-2 um^-1).
    """
    if source == "blackbody":
        return blackbody_photon_spectrum(temperature, solar_constant)
    spec = load_tabulated_spectrum(source, species=PHOTON)
    return _renormalize(spec, solar_constant)


# --- solar wind --------------------------------------------------------------


def solar_wind_spectrum(n=SOLAR_WIND_DENSITY, band=SOLAR_WIND_BAND, species=PROTON):
    """Flat dn/dK over the band; dPhi/dK = dn/dK v(K)."""
    k_min, k_max = band
    if n <= 0 or not 0 < k_min < k_max:
        raise DomainError("solar wind needs n > 0 and 0 < K_min < K_max")
    dn_dk = n / (k_max - k_min)
    m = species.mass
    fn = lambda K: dn_dk * np.asarray(speed(m, K)) * units.C_CM_S
    return FluxSpectrum(species, k_min, k_max, fn, f"solar-wind:n={n:g}")


# --- cosmic rays -------------------------------------------------------------


def lis_proton_intensity(K):
    """Parametrized proton local interstellar spectrum.

    j = 2.70 E^1.12 / beta^2 ((E + 0.67)/1.67)^-3.93  [m^-2 s^-1 sr^-1 MeV^-1],
    E in GeV (Vos & Potgieter 2015 functional form).
    """
    K = np.asarray(K, dtype=float)
    E = K / 1e9
    beta2 = np.asarray(speed(units.PROTON_MASS, K)) ** 2
    return 2.70 * E**1.12 / beta2 * ((E + 0.67) / 1.67) ** -3.93


def cosmic_ray_spectrum(source=None, cutoff=CR_CUTOFF):
    """Galactic cosmic-ray protons, isotropic, truncated at `cutoff`."""
    if source is None:
        source = data_path("cosmic_rays_proton_lis.csv")
    spec = load_tabulated_spectrum(source, species=PROTON)
    if cutoff is not None:
        spec = spec.truncated(cutoff)
    return spec


# --- solar neutrinos ---------------------------------------------------------

NEUTRINO_COMPONENTS = ("pp", "pep", "7Be", "8B", "hep")
LINE_WIDTH = 1e-4  # relative width of the box representing a monochromatic line


def load_neutrino_model(path=None):
    if path is None:
        path = data_path("solar_neutrinos.json")
    with open(path) as fh:
        return json.load(fh)


def beta_shape(E, Q):
    """Allowed beta-decay neutrino spectrum shape (unnormalized), E and Q in eV."""
    me = units.ELECTRON_MASS
    W = Q + me - E
    out = np.zeros_like(E)
    ok = (E > 0) & (W > me)
    out[ok] = E[ok] ** 2 * W[ok] * np.sqrt(W[ok] ** 2 - me**2)
    return out


def _continuum(flux, Q):
    norm = quad(lambda E: beta_shape(np.array([E]), Q)[0], 0.0, Q, limit=200, epsrel=1e-12)[0]
    return lambda E: flux * beta_shape(E, Q) / norm


def solar_neutrino_spectrum(components=NEUTRINO_COMPONENTS, model=None):
    if model is None:
        model = load_neutrino_model()
    comps = model["components"]
    unknown = set(components) - set(comps)
    if unknown:
        raise DomainError(f"unknown neutrino component(s): {sorted(unknown)}")
    pieces, bps = [], []
    k_lo, k_hi = 1e3, 1e3 * 1.0001
    for name in sorted(components, key=NEUTRINO_COMPONENTS.index):
        c = comps[name]
        if c["kind"] == "continuum":
            Q = c["endpoint_MeV"] * 1e6
            pieces.append((0.0, Q, _continuum(c["flux"], Q)))
            k_hi = max(k_hi, Q)
            # geometric grading toward the sqrt edge at the endpoint
            bps += [Q * (1 - 10.0**-j) for j in range(1, 8)] + [Q]
        else:
            for E_mev, frac in c["lines"]:
                E = E_mev * 1e6
                w = LINE_WIDTH * E
                lo, hi = E - w / 2, E + w / 2
                height = c["flux"] * frac / w
                pieces.append((lo, hi, lambda K, h=height: np.full_like(K, h)))
                bps += [lo, hi]
                k_hi = max(k_hi, hi)

    def fn(K):
        out = np.zeros_like(K)
        for lo, hi, f in pieces:
            sel = (K >= lo) & (K < hi)
            if np.any(sel):
                out[sel] += f(K[sel])
        return out

    label = "+".join(sorted(components, key=NEUTRINO_COMPONENTS.index)) or "none"
    spec = FluxSpectrum(NEUTRINO, k_lo, k_hi, fn, f"ssm:{model.get('model', '?')}:{label}",
                        breakpoints=tuple(sorted(b for b in bps if k_lo < b < k_hi)))
    if not pieces:
        spec = spec.scaled(0.0)
    return spec


# --- zodiacal dust -----------------------------------------------------------


@dataclass(frozen=True)
class DustDistribution:
    """dn/dlog10(m) [cm^-3 per decade] at 1 AU, tabulated in log10(m [g])."""

    log10_m: np.ndarray = field(repr=False)
    dn_dlogm: np.ndarray = field(repr=False)
    rho: float = DUST_RHO
    v0: float = DUST_V0
    r0: float = DUST_R0
    provenance: str = "table"
    scale: float = 1.0

    @property
    def mass_range(self):
        return 10.0 ** self.log10_m[0], 10.0 ** self.log10_m[-1]

    def evaluate(self, log10_m):
        lm = np.asarray(log10_m, dtype=float)
        inside = (lm >= self.log10_m[0]) & (lm <= self.log10_m[-1])
        y = self.dn_dlogm
        if np.all(y > 0):
            val = np.exp(np.interp(lm, self.log10_m, np.log(y)))
        else:
            val = np.interp(lm, self.log10_m, y)
        return np.where(inside, val * self.scale, 0.0)

    def grain_radius(self, m):
        """Radius [cm] of a grain of mass m [g]."""
        return (3.0 * np.asarray(m) / (4.0 * math.pi * self.rho)) ** (1.0 / 3.0)

    def speed(self, r_au=1.0):
        """v0 sqrt(r/r0) in km/s."""
        if r_au <= 0:
            raise DomainError("orbital radius must be positive")
        return self.v0 * math.sqrt(r_au / self.r0)

    def scaled(self, factor):
        return replace(self, scale=self.scale * factor)


def grun_cumulative_flux(m):
    """Interplanetary meteoroid flux on a spinning flat plate at 1 AU.

    Grun et al. (1985) fit: particles with mass > m [g], per m^2 per s.
    """
    m = np.asarray(m, dtype=float)
    return (
        (2.2e3 * m**0.306 + 15.0) ** -4.38
        + 1.3e-9 * (m + 1e11 * m**2 + 1e27 * m**4) ** -0.36
        + 1.3e-16 * (m + 1e6 * m**2) ** -0.85
    )


def dust_distribution(source=None, rho=DUST_RHO, v0=DUST_V0, r0=DUST_R0,
                      mass_range=GRUN_MASS_RANGE):
    """Load a (log10 m [g], dn/dlog m [cm^-3]) table."""
    if source is None:
        source = data_path("dust_grun1985.csv")
    table = read_table(source, positive_abscissa=False)
    lm, dn = table.columns[0], table.columns[1]
    if table.units[0] not in ("g", "log10 g") or table.units[1] != "cm^-3":
        raise UnitError(f"dust table units must be [log10 g], [cm^-3]; got {table.units}")
    if np.any(np.diff(lm) <= 0):
        raise ParseError("log10 m column must increase", source)
    if np.any(dn < 0):
        raise ParseError("negative dust density", source)
    lo, hi = mass_range
    if lm[0] < math.log10(lo) - 1e-9 or lm[-1] > math.log10(hi) + 1e-9:
        raise SupportError(
            f"dust masses 1e{lm[0]:.1f}..1e{lm[-1]:.1f} g outside allowed range {mass_range}"
        )
    return DustDistribution(lm, dn, rho, v0, r0, f"table:{Path(str(source)).name}")
