"""Independent validators for the rate engine.

Random numbers come from numpy's PCG64 generator.  A run of n samples is cut
into fixed-size chunks whose seeds are spawned from one SeedSequence, and the
chunk sums are reduced in chunk order, so results do not depend on how many
workers evaluate the chunks.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import units
from .errors import ConfigError, DomainError
from .flux import refine_edges
from .kinematics import recoil_energy
from .rates import QuadratureConfig, background_problem, master_rate, xsec_rate
from .response import decoherence_factor

DEFAULT_SEED = 20240611
CHUNK = 1 << 15
RNG_NAME = "PCG64"
XSEC_BACKGROUNDS = ("photon", "charged-lowq", "charged-highq", "neutrino")


@dataclass(frozen=True)
class OracleReport:
    quantity: str
    analytic_value: float
    oracle_value: float
    mc_error: float = 0.0
    passed: bool = False
    samples: int = 0
    seed: int = None
    tolerance: float = 0.0
    note: str = ""

    @property
    def rel_diff(self):
        a, o = self.analytic_value, self.oracle_value
        if a == o:
            return 0.0
        return abs(a - o) / max(abs(a), abs(o))

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        seed = "-" if self.seed is None else str(self.seed)
        s = (f"{status} {self.quantity} analytic={self.analytic_value:.10e} "
             f"oracle={self.oracle_value:.10e} mc_error={self.mc_error:.3e} "
             f"rel_diff={self.rel_diff:.3e} tol={self.tolerance:.1e} "
             f"samples={self.samples} seed={seed} rng={RNG_NAME}")
        return s + (f" note={self.note}" if self.note else "")


def _judge(analytic, oracle, mc_error, tol):
    """pass <=> |analytic - oracle| <= max(tol |analytic|, 3 mc_error)."""
    return abs(analytic - oracle) <= max(tol * abs(analytic), 3.0 * mc_error)


def _chunked_mean(n_samples, seed, kernel, jobs=1):
    """Mean and standard error of kernel(rng, n) summed over deterministic chunks."""
    sizes = [CHUNK] * (n_samples // CHUNK)
    if n_samples % CHUNK:
        sizes.append(n_samples % CHUNK)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        x = kernel(np.random.Generator(np.random.PCG64(seqs[i])), sizes[i])
        return float(np.sum(x)), float(np.sum(x * x))

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(run, range(len(sizes))))
    else:
        parts = [run(i) for i in range(len(sizes))]
    s1 = s2 = 0.0
    for a, b in parts:  # fixed reduction order
        s1 += a
        s2 += b
    mean = s1 / n_samples
    var = max(s2 / n_samples - mean * mean, 0.0)
    return mean, math.sqrt(var / n_samples)


def _isotropic(rng, n):
    mu = rng.uniform(-1.0, 1.0, n)
    phi = rng.uniform(0.0, 2 * math.pi, n)
    return mu, phi


def _angular_pdec(rng, n, qdx):
    """Re{1 - exp(i q.dx)} with isotropic p and q at angle alpha from p; dx along z."""
    cos_tp, phi_p = _isotropic(rng, n)
    cos_a, gam = _isotropic(rng, n)
    sin_tp = np.sqrt(1 - cos_tp**2)
    sin_a = np.sqrt(1 - cos_a**2)
    # z-component of q_hat built in the frame whose z axis is p_hat
    qz = cos_a * cos_tp - sin_a * np.cos(gam) * sin_tp
    del phi_p  # the azimuth of p drops out of the z component
    return 1.0 - np.cos(qdx * qz)


def mc_angular_factor(q, dx, n_samples=10**6, seed=DEFAULT_SEED, jobs=1, tolerance=0.0):
    """Monte-Carlo average of the angular decoherence probability vs 1 - sinc(q dx)."""
    if n_samples < 1000:
        raise DomainError("n_samples must be >= 1000")
    qdx = float(q) * float(dx)
    mean, err = _chunked_mean(n_samples, seed, lambda rng, n: _angular_pdec(rng, n, qdx), jobs)
    analytic = float(decoherence_factor(q, dx))
    return OracleReport(f"angular[qdx={qdx:g}]", analytic, mean, err,
                        _judge(analytic, mean, err, tolerance), n_samples, seed, tolerance)


def xsec_rate_check(background, mission, spectrum, n_nodes=12, tolerance=1e-4, rel_tol=1e-7):
    """Cross-section formalism vs master formula on independent node sets."""
    if background not in XSEC_BACKGROUNDS:
        raise ConfigError(f"background {background!r} has no cross-section form")
    base = QuadratureConfig(rel_tol=rel_tol, max_subdivisions=8)
    problem = background_problem(background, mission, spectrum, config=base)
    me, structure, limits, kinks = problem
    a = master_rate(spectrum, me, structure, mission, limits, base, background, kinks=kinks)
    o = xsec_rate(spectrum, me, structure, mission, limits, replace(base, nodes=n_nodes),
                  background, kinks=kinks)
    rep = OracleReport(f"xsec[{background}/{mission.name}]", a.gamma_tot, o.gamma_tot, 0.0,
                       False, 0, None, tolerance)
    ok = a.converged and o.converged and rep.rel_diff <= tolerance
    return replace(rep, passed=ok)


_Q_POWER = {"photon": 1.0, "charged-lowq": 3.0, "charged-highq": -3.0, "neutrino": 1.0}


class _LogSampler:
    """Piecewise log-uniform sampler with density proportional to K dPhi/dK."""

    def __init__(self, spectrum, per_decade=64):
        edges = refine_edges(spectrum.panel_breaks(), per_decade)
        mid = np.sqrt(edges[:-1] * edges[1:])
        dl = np.log(edges[1:] / edges[:-1])
        w = spectrum.evaluate(mid) * mid * dl
        w = np.where(w > 0, w, 0.0)
        # keep a floor so no part of the support has zero density
        w = w + 1e-6 * w.sum() * dl / dl.sum()
        self.edges, self.dl = edges, dl
        self.p = w / w.sum()
        self.cdf = np.cumsum(self.p)

    def sample(self, rng, n):
        i = np.minimum(np.searchsorted(self.cdf, rng.uniform(0, 1, n)), len(self.p) - 1)
        lk = np.log(self.edges[i]) + rng.uniform(0, 1, n) * self.dl[i]
        K = np.exp(lk)
        return K, self.p[i] / (self.dl[i] * K)


def _power_sample(rng, n, a, b, beta):
    u = rng.uniform(0, 1, n)
    if abs(beta + 1) < 1e-12:
        return a * (b / a) ** u
    e = beta + 1
    return (a**e + u * (b**e - a**e)) ** (1 / e)


def _power_pdf(q, a, b, beta):
    if abs(beta + 1) < 1e-12:
        return 1 / (q * np.log(b / a))
    e = beta + 1
    return e * q**beta / (b**e - a**e)


def mc_rate_spotcheck(background, mission, spectrum, n_samples=10**5, seed=DEFAULT_SEED,
                      config=None, jobs=1, tolerance=0.0):
    """Monte-Carlo estimate over (omega, q, angles) vs the quadrature rate."""
    if n_samples < 10**5:
        raise DomainError("n_samples must be >= 1e5")
    if background not in XSEC_BACKGROUNDS:
        raise ConfigError(f"unsupported background {background!r}")
    cfg = config or QuadratureConfig()
    me, structure, limits, kinks = background_problem(background, mission, spectrum, config=cfg)
    analytic = master_rate(spectrum, me, structure, mission, limits, cfg, background,
                           kinks=kinks).gamma_tot
    if analytic == 0.0 and spectrum.integrate() == 0.0:
        return OracleReport(f"mc[{background}/{mission.name}]", 0.0, 0.0, 0.0, True,
                            n_samples, seed, tolerance)
    r_cloud, dx = mission.natural()
    M, m = mission.M, spectrum.species.mass
    sampler = _LogSampler(spectrum)
    beta = _Q_POWER[background]

    def kernel(rng, n):
        K, pk = sampler.sample(rng, n)
        omega = m + K
        p = np.sqrt(K * (K + 2 * m))
        qa, qb = limits(omega, p)
        qa = np.broadcast_to(qa, K.shape).astype(float)
        qb = np.broadcast_to(qb, K.shape).astype(float)
        ok = qb > qa
        qa_s = np.where(ok, qa, 1.0)
        qb_s = np.where(ok, qb, 2.0)
        lo_log = np.maximum(qa_s, qb_s * 1e-12)
        use_pow = rng.uniform(0, 1, n) < 0.5
        q_pow = _power_sample(rng, n, qa_s, qb_s, beta)
        q_log = _power_sample(rng, n, lo_log, qb_s, -1.0)
        q = np.where(use_pow, q_pow, q_log)
        pq = 0.5 * _power_pdf(q, qa_s, qb_s, beta)
        pq = pq + np.where(q >= lo_log, 0.5 * _power_pdf(q, lo_log, qb_s, -1.0), 0.0)
        mu = rng.uniform(-1.0, 1.0, n)  # cosine between q and dx, isotropic
        pdec = 1.0 - np.cos(q * dx * mu)
        flux = units.flux_to_natural(spectrum.evaluate(K))
        dn = flux * omega / p
        omega_p = omega - recoil_energy(q, M)
        f = dn / (2 * math.pi) * q * omega_p / p * me(omega, q) * structure(q) * pdec
        return np.where(ok, f / (pk * pq), 0.0)

    mean, err = _chunked_mean(n_samples, seed, kernel, jobs)
    mean = units.rate_to_per_second(mean)
    err = units.rate_to_per_second(err)
    note = "variance-not-converged" if mean and err / abs(mean) > 0.1 else ""
    passed = _judge(analytic, mean, err, tolerance) and not note
    return OracleReport(f"mc[{background}/{mission.name}]", analytic, mean, err, passed,
                        n_samples, seed, tolerance, note)


SLOPE_SAMPLES = (10**3, 10**4, 10**5, 10**6, 10**7)


def angular_error_slope(dx_q=1.0, ns=SLOPE_SAMPLES, seed=DEFAULT_SEED, jobs=1):
    """Fitted log-log slope of the MC standard error vs sample count."""
    errs = [mc_angular_factor(dx_q, 1.0, n, seed, jobs).mc_error for n in ns]
    return float(np.polyfit(np.log(ns), np.log(errs), 1)[0]), errs


# --- suites driven by the `validate` subcommand ------------------------------

ANGULAR_POINTS = (0.1, 1.0, 10.0, 50.0, 1e3)
SUITES = ("angular", "xsec", "mc", "all")


def _suite_spectra():
    from .flux import cosmic_ray_spectrum, solar_neutrino_spectrum, solar_photon_spectrum, \
        solar_wind_spectrum

    return {
        "photon": solar_photon_spectrum(),
        "charged-lowq": solar_wind_spectrum(),
        "charged-highq": cosmic_ray_spectrum(),
        "neutrino": solar_neutrino_spectrum(),
    }


def run_suite(suite, seed=DEFAULT_SEED, jobs=1, tolerance=None, missions=None, samples=None):
    """Yield OracleReports for the chosen suite."""
    from .mission import load_missions

    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    missions = missions or load_missions("all")
    if suite in ("angular", "all"):
        n = samples or 10**6
        tol = 0.0 if tolerance is None else tolerance
        for x in ANGULAR_POINTS:
            yield mc_angular_factor(x, 1.0, n, seed, jobs, tol)
        slope, _ = angular_error_slope(seed=seed, jobs=jobs)
        stol = 0.1 if tolerance is None else tolerance
        yield OracleReport("angular[error-slope]", -0.5, slope, 0.0, abs(slope + 0.5) <= stol,
                           sum(SLOPE_SAMPLES), seed, stol)
    if suite in ("xsec", "all"):
        spectra = _suite_spectra()
        tol = 1e-4 if tolerance is None else tolerance
        for m in missions:
            for bg in XSEC_BACKGROUNDS:
                yield xsec_rate_check(bg, m, spectra[bg], tolerance=tol)
    if suite in ("mc", "all"):
        spectra = _suite_spectra()
        spectra["charged-highq"] = spectra["charged-lowq"]
        by_name = {m.name.upper(): m for m in load_missions("all")}
        tol = 0.0 if tolerance is None else tolerance
        checks = [("charged-lowq", "BECCAL", 10**5), ("photon", "MAQRO", 10**6),
                  ("charged-highq", "GDM", 10**5), ("photon", "AEDGE", 10**5)]
        for bg, name, n in checks:
            yield mc_rate_spotcheck(bg, by_name[name], spectra[bg], samples or n, seed,
                                    jobs=jobs, tolerance=tol)
