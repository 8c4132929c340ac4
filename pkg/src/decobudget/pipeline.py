"""Shared plumbing for the CLI and scripts: data lookup, tables, scans, manifests."""

import datetime as _dt
import io
import json
import math
import os
import subprocess
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from . import flux as fx
from .errors import ConfigError, DataError
from .observables import BACKGROUND_LIMITED, multi_shot_snr, observables
from .rates import (BACKGROUNDS, CR_BG, DUST_BG, HIGHQ, LOWQ, NEUTRINO_BG, PHOTON_BG, WIND_BG,
                    QuadratureConfig, compute_rate, rate_charged_highq, rate_charged_lowq,
                    rate_solar_photons)

ENV_VAR = "DECOBUDGET_DATA"
SPEC_REVISION = "decobudget-1"
TABLE_NEUTRINO_COMPONENTS = ("pp",)

ALIASES = {
    "photons": PHOTON_BG, "photon": PHOTON_BG, "wind": WIND_BG, "sw": WIND_BG,
    "cr": CR_BG, "cosmic": CR_BG, "neutrinos": NEUTRINO_BG, "nu": NEUTRINO_BG,
}

DATA_FILES = {
    PHOTON_BG: "solar_photons.csv",
    CR_BG: "cosmic_rays_proton_lis.csv",
    NEUTRINO_BG: "solar_neutrinos.json",
    DUST_BG: "dust_grun1985.csv",
}


def parse_backgrounds(spec):
    names = [s.strip() for s in spec.split(",") if s.strip()] if isinstance(spec, str) else list(spec)
    if names == ["all"]:
        return list(BACKGROUNDS)
    out = []
    for n in names:
        n = ALIASES.get(n, n)
        if n not in BACKGROUNDS:
            raise ConfigError(f"unknown background {n!r}; choose from {', '.join(BACKGROUNDS)}")
        out.append(n)
    if not out:
        raise ConfigError("empty background list")
    return out


def _stream(notify):
    # resolved at call time so redirected stderr is honoured
    return sys.stderr if notify is True else notify


def resolve_data_dir(data_dir=None, notify=True):
    """--data-dir, then $DECOBUDGET_DATA, then None (built-in data)."""
    notify = _stream(notify)
    d = data_dir or os.environ.get(ENV_VAR)
    if d:
        p = Path(d)
        if not p.is_dir():
            raise DataError(f"data directory {p} does not exist")
        return p
    if notify is not None:
        print("notice: no data directory given; using built-in models and tables", file=notify)
    return None


@dataclass
class Sources:
    """Spectra per background plus the files they came from."""

    spectra: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)  # background -> path or model tag


def load_sources(backgrounds, data_dir=None, photon_source=None,
                 nu_components=TABLE_NEUTRINO_COMPONENTS, notify=True):
    notify = _stream(notify)
    src = Sources()

    def pick(bg):
        if data_dir is not None:
            p = Path(data_dir) / DATA_FILES[bg]
            if p.exists():
                return p
            if notify is not None:
                print(f"notice: {p.name} not in {data_dir}; using built-in {bg} model", file=notify)
        return None

    for bg in backgrounds:
        if bg == PHOTON_BG:
            path = Path(photon_source) if photon_source not in (None, "blackbody") else pick(bg)
            if path is not None and not path.exists():
                raise DataError(f"photon table {path} not found")
            src.spectra[bg] = fx.solar_photon_spectrum(path if path else "blackbody")
            src.files[bg] = str(path) if path else src.spectra[bg].provenance
        elif bg == WIND_BG:
            src.spectra[bg] = fx.solar_wind_spectrum()
            src.files[bg] = src.spectra[bg].provenance
        elif bg == CR_BG:
            path = pick(bg) or fx.data_path(DATA_FILES[bg])
            src.spectra[bg] = fx.cosmic_ray_spectrum(path)
            src.files[bg] = str(path)
        elif bg == NEUTRINO_BG:
            path = pick(bg) or fx.data_path(DATA_FILES[bg])
            model = fx.load_neutrino_model(path)
            src.spectra[bg] = fx.solar_neutrino_spectrum(tuple(nu_components), model)
            src.files[bg] = str(path)
        elif bg == DUST_BG:
            path = pick(bg) or fx.data_path(DATA_FILES[bg])
            src.spectra[bg] = fx.dust_distribution(path)
            src.files[bg] = str(path)
    return src


def _rows_for(mission, bg, res, regime):
    rows = []
    parts = [(k, v) for k, v in res.breakdown.items()]
    if len(parts) > 1:
        parts.append(("total", res.gamma_tot))
    for reg, gamma in parts:
        obs = observables(gamma, mission)
        rows.append({
            "mission": mission.name, "background": bg, "regime": reg,
            "gamma_tot": gamma, "s": obs.s, "dV": obs.dV, "sigma_qnl": obs.sigma_qnl,
            "snr_shot": obs.snr_shot, "n_meas": obs.n_meas,
            "snr_total": multi_shot_snr(obs.snr_shot, obs.n_meas, regime),
            "quad_err": res.quadrature_error, "converged": res.converged,
            "omitted": "|".join(res.omitted),
        })
    return rows


def table_rows(missions, backgrounds, sources, config=None, jobs=1, regime=BACKGROUND_LIMITED):
    cells = [(m, bg) for m in missions for bg in backgrounds]

    def run(cell):
        m, bg = cell
        return compute_rate(bg, m, sources.spectra[bg], config)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            results = list(ex.map(run, cells))
    else:
        results = [run(c) for c in cells]
    rows = []
    for (m, bg), res in zip(cells, results):
        rows += _rows_for(m, bg, res, regime)
    return rows, results


TABLE_COLUMNS = ("mission", "background", "regime", "gamma_tot", "s", "dV", "sigma_qnl",
                 "snr_shot", "n_meas", "snr_total", "quad_err", "converged", "omitted")
TABLE_HEADER = ("mission", "background", "regime", "gamma_tot[1/s]", "s", "dV", "sigma_V_qnl",
                "snr_shot", "n_meas", "snr_total", "quadrature_rel_err", "converged", "omitted")


def _fmt(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, float):
        return f"{v:.6e}"
    return str(v)


def git_revision():
    try:
        out = subprocess.run(["git", "rev-parse", "--short", "HEAD"], capture_output=True,
                             text=True, cwd=Path(__file__).parent, timeout=5)
        return out.stdout.strip() or "unknown"
    except (OSError, subprocess.SubprocessError):
        return "unknown"


def timestamp():
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    t = _dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch else \
        _dt.datetime.now(_dt.timezone.utc)
    return t.strftime("%Y-%m-%dT%H:%M:%SZ")


def manifest_lines(command, config_paths, data_files, seed, missions, extra=None):
    lines = [
        f"decobudget {__version__} {command}",
        f"spec_revision: {SPEC_REVISION}",
        f"code_revision: {git_revision()}",
        f"seed: {seed}",
        f"timestamp: {timestamp()}",
    ]
    for p in config_paths:
        lines.append(f"config: {p}")
    for tag, p in sorted(data_files.items()):
        path = Path(str(p))
        digest = fx.file_sha256(path) if path.is_file() else "analytic"
        lines.append(f"data: {tag} {p} sha256={digest}")
    for m in missions:
        lines.append("mission: " + json.dumps(m.to_dict(), sort_keys=True, default=str))
    for k, v in (extra or {}).items():
        lines.append(f"{k}: {v}")
    return ["# " + ln for ln in lines]


def render_csv(header, rows, columns, manifest):
    buf = io.StringIO()
    for ln in manifest:
        buf.write(ln + "\n")
    buf.write(",".join(header) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(r[c]) for c in columns) + "\n")
    return buf.getvalue()


def strip_timestamp(text):
    return "\n".join(ln for ln in text.splitlines() if not ln.startswith("# timestamp:"))


# --- scans -------------------------------------------------------------------

SCAN_PARAMETERS = ("r_cloud", "dx", "n_atoms")


def parse_range(spec):
    """'lo:hi:n' -> log-spaced values."""
    try:
        lo, hi, n = spec.split(":")
        lo, hi, n = float(lo), float(hi), int(n)
    except ValueError:
        raise ConfigError(f"range must look like lo:hi:n, got {spec!r}") from None
    if n < 8:
        raise ConfigError("a scan needs at least 8 points")
    if not 0 < lo < hi:
        raise ConfigError("scan range must satisfy 0 < lo < hi")
    return np.geomspace(lo, hi, n)


def scan_rate(mission, background, spectrum, q_regime="total", config=None):
    if background == PHOTON_BG:
        return rate_solar_photons(mission, spectrum, config)
    if background in (WIND_BG, CR_BG):
        z = spectrum.species.charge_number
        if q_regime == LOWQ:
            return rate_charged_lowq(mission, spectrum, z, config=config, background=background)
        if q_regime == HIGHQ:
            return rate_charged_highq(mission, spectrum, z, config=config, background=background)
        return compute_rate(background, mission, spectrum, config)
    return compute_rate(background, mission, spectrum, config)


def scan_rows(base, parameter, values, background, spectrum, q_regime="total", config=None,
              jobs=1):
    if parameter not in SCAN_PARAMETERS:
        raise ConfigError(f"scan parameter must be one of {SCAN_PARAMETERS}")

    def run(v):
        m = base.with_(**{parameter: float(v)})
        res = scan_rate(m, background, spectrum, q_regime, config)
        obs = observables(res.gamma_tot, m)
        return {"value": float(v), "gamma_tot": res.gamma_tot, "snr_shot": obs.snr_shot,
                "quad_err": res.quadrature_error, "converged": res.converged}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(run, values))
    return [run(v) for v in values]


def loglog_slope(x, y):
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = (x > 0) & (y > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])
