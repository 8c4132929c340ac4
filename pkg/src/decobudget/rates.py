"""Decoherence rates: nested quadrature of the master formula over (omega, q).

The outer integral runs over ln K on panels that break at spectrum nodes and at
kinematic kinks.  The inner integral over q uses uniform panels no wider than
half an oscillation period of the sinc and cloud form factors, then log panels
once those oscillations are replaced by their averages.  Both grids are refined
together by doubling until two successive levels agree to rel_tol.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import units
from .errors import ConfigError, DomainError
from .flux import DustDistribution, FluxSpectrum, gauss_legendre, log_panel_nodes, refine_edges
from .kinematics import q_max, recoil_energy
from .response import decoherence_factor, structure_function

PHOTON_BG = "solar-photons"
WIND_BG = "solar-wind"
CR_BG = "cosmic-rays"
NEUTRINO_BG = "solar-neutrinos"
DUST_BG = "dust"
BACKGROUNDS = (PHOTON_BG, WIND_BG, CR_BG, NEUTRINO_BG, DUST_BG)

LOWQ = "lowq"
HIGHQ = "highq"
INTERMEDIATE = "intermediate"


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-4
    max_subdivisions: int = 7  # number of grid doublings before giving up
    nodes: int = 8  # Gauss-Legendre nodes per panel
    panels_per_decade: int = 4
    sinc_policy: str = "asymptotic"  # or "subdivide"
    sinc_threshold: float = 1e3
    chunk: int = 128  # outer nodes evaluated per vectorized block

    def __post_init__(self):
        if not 0 < self.rel_tol <= 0.1:
            raise ConfigError("rel_tol must lie in (0, 0.1]")
        if self.sinc_policy not in ("asymptotic", "subdivide"):
            raise ConfigError(f"unknown sinc policy {self.sinc_policy!r}")
        if self.max_subdivisions < 1 or self.nodes < 2 or self.panels_per_decade < 1:
            raise ConfigError("quadrature sizes must be positive")

    @property
    def threshold(self):
        return self.sinc_threshold if self.sinc_policy == "asymptotic" else math.inf


@dataclass(frozen=True)
class RateResult:
    gamma_tot: float  # s^-1
    background: str
    mission: str
    breakdown: dict = field(default_factory=dict)
    quadrature_error: float = 0.0
    converged: bool = True
    omitted: tuple = ()
    level: int = 0

    def __post_init__(self):
        if self.gamma_tot < 0:
            raise DomainError("negative rate")

    @property
    def regime(self):
        return "+".join(self.breakdown) if len(self.breakdown) != 1 else next(iter(self.breakdown))


def gauss_fermi(measured=False):
    """G_F from the tree-level electroweak relation, or the measured value."""
    if measured:
        return units.G_FERMI_MEASURED
    s2 = units.SIN2_THETA_W
    return 4 * math.pi * units.ALPHA_EM / (math.sqrt(2) * units.Z_BOSON_MASS**2 * 4 * s2 * (1 - s2))


# --- quadrature core ---------------------------------------------------------


def _uniform_nodes(lo, hi, n, x, w):
    """n equal panels on [lo_i, hi_i] for each row; returns (nodes, weights)."""
    h = (hi - lo)[:, None] / n
    starts = lo[:, None] + h * np.arange(n)
    q = starts[:, :, None] + 0.5 * h[:, :, None] * (1 + x)
    wq = np.broadcast_to(0.5 * h[:, :, None] * w, q.shape)
    return q.reshape(len(lo), -1), wq.reshape(len(lo), -1)


def _log_nodes(lo, hi, n, x, w):
    llo, lhi = np.log(lo), np.log(hi)
    q, wl = _uniform_nodes(llo, lhi, n, x, w)
    q = np.exp(q)
    return q, wl * q


def _inner_grid(qa, qb, scales, level, cfg):
    """Inner quadrature nodes for each row (one row per outer node).

    scales: oscillation lengths in decreasing order.  Region i of q sits
    between T/scales[i-1] and T/scales[i] and uses panels of width pi/scales[i].
    """
    x, w = gauss_legendre(cfg.nodes)
    T = cfg.threshold
    mult = 2**level
    qs, ws = [], []
    lo = qa.copy()
    for L in scales:
        hi = np.clip(T / L, qa, qb) if np.isfinite(T) else qb.copy()
        width = hi - lo
        if np.any(width > 0):
            n = int(max(8, math.ceil(width.max() * L / math.pi))) * mult
            if n * cfg.nodes * len(qa) > 5e7:
                raise DomainError("inner grid too large; raise sinc_threshold policy or chunk smaller")
            q, wq = _uniform_nodes(lo, hi, n, x, w)
            qs.append(q)
            ws.append(wq)
        lo = np.maximum(lo, hi)
    width = qb - lo
    if np.any(width > 0):
        safe_lo = np.where(width > 0, lo, 1.0)
        safe_hi = np.where(width > 0, qb, 1.0)
        dec = np.log10(safe_hi / safe_lo).max()
        n = int(max(2, math.ceil(dec * cfg.panels_per_decade))) * mult
        q, wq = _log_nodes(safe_lo, safe_hi, n, x, w)
        wq = np.where((width > 0)[:, None], wq, 0.0)
        qs.append(q)
        ws.append(wq)
    if not qs:
        return np.zeros((len(qa), 1)), np.zeros((len(qa), 1))
    return np.concatenate(qs, axis=1), np.concatenate(ws, axis=1)


@dataclass(frozen=True)
class _Problem:
    """Everything the core needs: outer weight, inner integrand and q limits."""

    spectrum: FluxSpectrum
    outer: callable  # (K, omega, p, flux_nat) -> outer weight
    inner: callable  # (omega[:,None], p[:,None], q) -> integrand (no outer weight)
    q_limits: callable  # (omega, p) -> (qa, qb)
    scales: tuple  # oscillation lengths [eV^-1]
    kinks: tuple = ()


def _evaluate(problem, level, cfg):
    spec = problem.spectrum
    m = spec.species.mass
    edges = refine_edges(spec.panel_breaks(problem.kinks), cfg.panels_per_decade * 2**level)
    K, wK = log_panel_nodes(edges, cfg.nodes)
    flux = units.flux_to_natural(spec.evaluate(K))
    keep = flux > 0
    K, wK, flux = K[keep], wK[keep], flux[keep]
    total = 0.0
    for start in range(0, len(K), cfg.chunk):
        sl = slice(start, start + cfg.chunk)
        Kc = K[sl]
        omega = m + Kc
        p = np.sqrt(Kc * (Kc + 2 * m))
        qa, qb = problem.q_limits(omega, p)
        qa = np.asarray(qa, dtype=float) * np.ones_like(Kc)
        qb = np.maximum(np.asarray(qb, dtype=float) * np.ones_like(Kc), qa)
        q, wq = _inner_grid(qa, qb, problem.scales, level, cfg)
        f = problem.inner(omega[:, None], p[:, None], q)
        inner = np.sum(wq * f, axis=1)
        total += float(np.sum(wK[sl] * problem.outer(Kc, omega, p, flux[sl]) * inner))
    return total


def _converge(problem, cfg):
    """Returns (value [eV], rel_err, converged, level)."""
    prev = _evaluate(problem, 0, cfg)
    err = math.inf
    for level in range(1, cfg.max_subdivisions + 1):
        val = _evaluate(problem, level, cfg)
        if val == 0.0 and prev == 0.0:
            return 0.0, 0.0, True, level
        err = abs(val - prev) / abs(val) if val != 0 else math.inf
        if err <= cfg.rel_tol:
            return val, err, True, level
        prev = val
    return val, err, False, cfg.max_subdivisions


def _find_kink(spectrum, M, q_target):
    """Kinetic energy where q_max(K) crosses q_target inside the support."""
    m = spectrum.species.mass
    lo, hi = spectrum.k_min, spectrum.k_max
    g = lambda lk: q_max(m, M, math.exp(lk)) - q_target
    if g(math.log(lo)) >= 0 or g(math.log(hi)) <= 0:
        return ()
    return (math.exp(brentq(g, math.log(lo), math.log(hi), xtol=1e-14, rtol=1e-14)),)


def _osc_scales(mission):
    r_cloud, dx = mission.natural()
    scales = [dx] + ([r_cloud] if mission.mode.coherent else [])
    return tuple(sorted(scales, reverse=True))


def _decoherence(q, dx, cfg):
    d = decoherence_factor(q, dx)
    if np.isfinite(cfg.threshold):
        d = np.where(q * dx > cfg.threshold, 1.0, d)
    return d


def make_structure(mission, basis, cfg=None, weak_charge="approx"):
    """S(q) for a mission, with the cloud oscillation averaged past threshold."""
    cfg = cfg or QuadratureConfig()
    t = mission.target
    params = mission.ff_params()
    mode = mission.mode
    thr = cfg.threshold
    return lambda q: structure_function(q, mode, basis, t.A, t.Z, params, weak_charge, thr)


def _result(val, err, ok, level, background, mission, regime, omitted=()):
    gamma = units.rate_to_per_second(max(val, 0.0))
    return RateResult(gamma, background, mission.name, {regime: gamma}, err, ok, omitted, level)


def _zero(background, mission, regime, omitted=()):
    return RateResult(0.0, background, mission.name, {regime: 0.0}, 0.0, True, omitted, 0)


def _dn_domega(K, omega, p, flux):
    return flux * omega / p


def _dphi(K, omega, p, flux):
    return flux


def _check_species(spectrum, massless, what):
    if spectrum.species.massless != massless:
        raise DomainError(f"{what} needs a {'massless' if massless else 'massive'} spectrum")


# --- unit-normalized matrix elements, |M|^2 with unity-normalized states ------


def photon_matrix_element(mission):
    a2 = mission.alpha_n**2
    M = mission.M
    return lambda omega, q: a2 * omega * (omega - recoil_energy(q, M)) / 16.0


def lowq_matrix_element(mission, z_ion):
    c = math.pi**2 * z_ion**4 * mission.alpha_n**2 * units.ALPHA_EM**2 / 64.0
    return lambda omega, q: c * q * q


def highq_matrix_element(mission, z_ion):
    """Coulomb scattering off target protons, with E_f -> M."""
    c = 16 * math.pi**2 * z_ion**2 * units.ALPHA_EM**2
    M = mission.M
    return lambda omega, q: c * omega / ((omega - recoil_energy(q, M)) * q**4)


def _nu_kinematic(omega, q, M):
    return 1.0 - q * q / (4 * omega * omega) * (2 * omega / M + 1) + q**4 / (8 * omega**2 * M**2)


def neutrino_matrix_element(mission, measured_gf=False):
    g2 = gauss_fermi(measured_gf) ** 2
    M = mission.M
    return lambda omega, q: (
        0.5 * g2 * omega / (omega - recoil_energy(q, M)) * _nu_kinematic(omega, q, M)
    )


def to_standard(matrix_element, M):
    """|M|^2_std = 16 omega omega' M E_f |M|^2_unit."""

    def std(omega, q):
        ef = M + recoil_energy(q, M)
        omega_p = omega - recoil_energy(q, M)
        return 16.0 * omega * omega_p * M * ef * matrix_element(omega, q)

    return std


# --- generic engine ----------------------------------------------------------


def master_rate(spectrum, matrix_element, structure, mission, q_limits, config=None,
                background="custom", regime="total", kinks=()):
    """Gamma = (1/2pi) int domega dn/domega int dq q (omega'/p) |M|^2 S(q) (1 - sinc(q dx)).

    matrix_element(omega, q) is unit-normalized; q_limits(omega, p) -> (q_lo, q_hi).
    """
    cfg = config or QuadratureConfig()
    r_cloud, dx = mission.natural()
    if dx == 0:
        return _zero(background, mission, regime)
    M = mission.M

    def inner(omega, p, q):
        omega_p = omega - recoil_energy(q, M)
        return q * omega_p / p * matrix_element(omega, q) * structure(q) * _decoherence(q, dx, cfg)

    outer = lambda K, omega, p, flux: _dn_domega(K, omega, p, flux) / (2 * math.pi)
    prob = _Problem(spectrum, outer, inner, q_limits, _osc_scales(mission), tuple(kinks))
    return _result(*_converge(prob, cfg), background, mission, regime)


def xsec_rate(spectrum, matrix_element, structure, mission, q_limits, config=None,
              background="custom", regime="total", kinks=()):
    """Cross-section route: 1/(32 pi M) int dPhi/(omega^2-m^2) int dq q |M|^2_std S (1-sinc)/E_f."""
    cfg = config or QuadratureConfig()
    r_cloud, dx = mission.natural()
    if dx == 0:
        return _zero(background, mission, regime)
    M = mission.M
    std = to_standard(matrix_element, M)

    def inner(omega, p, q):
        ef = M + recoil_energy(q, M)
        return q * std(omega, q) / ef * structure(q) * _decoherence(q, dx, cfg)

    outer = lambda K, omega, p, flux: flux / (32 * math.pi * M * p * p)
    prob = _Problem(spectrum, outer, inner, q_limits, _osc_scales(mission), tuple(kinks))
    return _result(*_converge(prob, cfg), background, mission, regime)


# --- q domains -----------------------------------------------------------------


def photon_limits(mission):
    M = mission.M
    return lambda omega, p: (np.zeros_like(omega), q_max(0.0, M, omega))


def lowq_limits(mission, spectrum, q_cut):
    M, m = mission.M, spectrum.species.mass
    return lambda omega, p: (np.zeros_like(omega), np.minimum(q_cut, q_max(m, M, omega - m)))


def highq_limits(mission, spectrum, q_high):
    M, m = mission.M, spectrum.species.mass
    return lambda omega, p: (np.full_like(omega, q_high), q_max(m, M, omega - m))


def neutrino_limits():
    return lambda omega, p: (np.zeros_like(omega), 2.0 * omega)


def default_q_cut(mission):
    return 1.0 / (10.0 * mission.r_atom)


def default_q_high(mission):
    return 10.0 / mission.r_atom


# --- background-specific rates -------------------------------------------------


def rate_solar_photons(mission, spectrum, config=None):
    _check_species(spectrum, True, "photon rate")
    cfg = config or QuadratureConfig()
    r_cloud, dx = mission.natural()
    if dx == 0:
        return _zero(PHOTON_BG, mission, "total")
    c = mission.alpha_n**2 / (32 * math.pi)
    M = mission.M
    S = make_structure(mission, "atoms", cfg)

    def inner(omega, p, q):
        return c * omega * (omega - recoil_energy(q, M)) * q * S(q) * _decoherence(q, dx, cfg)

    prob = _Problem(spectrum, _dn_domega, inner, photon_limits(mission), _osc_scales(mission))
    return _result(*_converge(prob, cfg), PHOTON_BG, mission, "total")


def rate_charged_lowq(mission, spectrum, z_ion=1, q_cut=None, config=None, background=WIND_BG):
    _check_species(spectrum, False, "charged-particle rate")
    cfg = config or QuadratureConfig()
    r_cloud, dx = mission.natural()
    if dx == 0 or z_ion == 0:
        return _zero(background, mission, LOWQ)
    q_cut = default_q_cut(mission) if q_cut is None else q_cut
    c = math.pi / 128 * z_ion**4 * units.ALPHA_EM**2 * mission.alpha_n**2
    M = mission.M
    S = make_structure(mission, "atoms", cfg)

    def inner(omega, p, q):
        return c / p * (omega - recoil_energy(q, M)) * q**3 * S(q) * _decoherence(q, dx, cfg)

    kinks = _find_kink(spectrum, M, q_cut)
    prob = _Problem(spectrum, _dn_domega, inner, lowq_limits(mission, spectrum, q_cut),
                    _osc_scales(mission), kinks)
    return _result(*_converge(prob, cfg), background, mission, LOWQ)


def rate_charged_highq(mission, spectrum, z_ion=1, q_high=None, config=None, background=WIND_BG):
    _check_species(spectrum, False, "charged-particle rate")
    cfg = config or QuadratureConfig()
    r_cloud, dx = mission.natural()
    if dx == 0 or z_ion == 0:
        return _zero(background, mission, HIGHQ)
    q_high = default_q_high(mission) if q_high is None else q_high
    M, m = mission.M, spectrum.species.mass
    if q_max(m, M, spectrum.k_max) <= q_high:
        return _zero(background, mission, HIGHQ)
    c = 8 * math.pi * z_ion**2 * units.ALPHA_EM**2
    S = make_structure(mission, "protons", cfg)

    def inner(omega, p, q):
        return c * omega**2 / p**2 * S(q) / q**3 * _decoherence(q, dx, cfg)

    kinks = _find_kink(spectrum, M, q_high)
    prob = _Problem(spectrum, _dphi, inner, highq_limits(mission, spectrum, q_high),
                    _osc_scales(mission), kinks)
    return _result(*_converge(prob, cfg), background, mission, HIGHQ)


def rate_charged_combined(mission, spectrum, z_ion=1, config=None, background=WIND_BG):
    """Low-q plus high-q; the intermediate window is omitted and flagged."""
    lo = rate_charged_lowq(mission, spectrum, z_ion, config=config, background=background)
    hi = rate_charged_highq(mission, spectrum, z_ion, config=config, background=background)
    return RateResult(
        lo.gamma_tot + hi.gamma_tot,
        background,
        mission.name,
        {LOWQ: lo.gamma_tot, HIGHQ: hi.gamma_tot},
        max(lo.quadrature_error, hi.quadrature_error),
        lo.converged and hi.converged,
        (INTERMEDIATE,),
        max(lo.level, hi.level),
    )


def rate_neutrino(mission, spectrum, config=None, weak_charge="approx", measured_gf=False):
    _check_species(spectrum, True, "neutrino rate")
    cfg = config or QuadratureConfig()
    r_cloud, dx = mission.natural()
    if dx == 0:
        return _zero(NEUTRINO_BG, mission, "total")
    c = gauss_fermi(measured_gf) ** 2 / (4 * math.pi)
    M = mission.M
    S = make_structure(mission, "neutrons-coherent", cfg, weak_charge)

    def inner(omega, p, q):
        return c * q * _nu_kinematic(omega, q, M) * S(q) * _decoherence(q, dx, cfg)

    prob = _Problem(spectrum, _dphi, inner, neutrino_limits(), _osc_scales(mission))
    return _result(*_converge(prob, cfg), NEUTRINO_BG, mission, "total")


DUST_K = 4.0
DUST_N_CLOUDS = 2


def rate_dust(mission, dust, r_orbit=1.0, config=None, k=DUST_K, n_clouds=DUST_N_CLOUDS):
    """Geometric contact rate: int dlog10 m (dn/dlog m)(v/k) pi (r_cloud + a)^2 N_clouds."""
    if not isinstance(dust, DustDistribution):
        raise DomainError("rate_dust needs a DustDistribution")
    cfg = config or QuadratureConfig()
    v = dust.speed(r_orbit) * 1e5  # cm/s
    r_cm = mission.r_cloud * 100.0
    lm = dust.log10_m
    x, w = gauss_legendre(cfg.nodes)

    def evaluate(level):
        edges = np.concatenate(
            [np.linspace(a, b, 2**level + 1)[:-1] for a, b in zip(lm[:-1], lm[1:])] + [lm[-1:]]
        )
        h = np.diff(edges)[:, None] / 2
        t = (edges[:-1, None] + h * (1 + x)).ravel()
        wt = (h * w).ravel()
        a = dust.grain_radius(10.0**t)
        f = dust.evaluate(t) * v / k * math.pi * (r_cm + a) ** 2 * n_clouds
        return float(np.sum(wt * f))

    prev = evaluate(0)
    val, err, ok, level = prev, math.inf, False, 0
    for level in range(1, cfg.max_subdivisions + 1):
        val = evaluate(level)
        err = abs(val - prev) / abs(val) if val else 0.0
        if err <= cfg.rel_tol:
            ok = True
            break
        prev = val
    if val == 0.0:
        err, ok = 0.0, True
    return RateResult(val, DUST_BG, mission.name, {"total": val}, err, ok, (), level)


# --- dispatch ------------------------------------------------------------------


def background_problem(background, mission, spectrum, regime=None, config=None):
    """(matrix element, structure, q limits, kinks) for the master-formula route."""
    cfg = config or QuadratureConfig()
    if background == "photon":
        return (photon_matrix_element(mission), make_structure(mission, "atoms", cfg),
                photon_limits(mission), ())
    if background == "charged-lowq":
        qc = default_q_cut(mission)
        z = spectrum.species.charge_number
        return (lowq_matrix_element(mission, z), make_structure(mission, "atoms", cfg),
                lowq_limits(mission, spectrum, qc), _find_kink(spectrum, mission.M, qc))
    if background == "charged-highq":
        qh = default_q_high(mission)
        z = spectrum.species.charge_number
        return (highq_matrix_element(mission, z), make_structure(mission, "protons", cfg),
                highq_limits(mission, spectrum, qh), _find_kink(spectrum, mission.M, qh))
    if background == "neutrino":
        return (neutrino_matrix_element(mission), make_structure(mission, "neutrons-coherent", cfg),
                neutrino_limits(), ())
    raise ConfigError(f"no matrix element for background {background!r}")


def compute_rate(background, mission, source, config=None):
    """Rate for one of BACKGROUNDS, given its spectrum or dust distribution."""
    if background == PHOTON_BG:
        return rate_solar_photons(mission, source, config)
    if background in (WIND_BG, CR_BG):
        z = source.species.charge_number
        return rate_charged_combined(mission, source, z, config, background)
    if background == NEUTRINO_BG:
        return rate_neutrino(mission, source, config)
    if background == DUST_BG:
        return rate_dust(mission, source, config=config)
    raise ConfigError(f"unknown background {background!r}")
