"""Regenerate the shipped data tables in src/decobudget/data/.

    python3 scripts/make_data.py
"""

import json
from pathlib import Path

import numpy as np

from decobudget.flux import grun_cumulative_flux, lis_proton_intensity

DATA = Path(__file__).resolve().parents[1] / "src" / "decobudget" / "data"


def cosmic_rays(path, k_min=1e6, k_max=1e12, per_decade=20):
    n = int(round(np.log10(k_max / k_min) * per_decade))
    K = np.geomspace(k_min, k_max, n + 1)
    j = lis_proton_intensity(K)
    lines = [
        "# Galactic cosmic-ray proton local interstellar spectrum (Voyager-era fit).",
        "# j = 2.70 E^1.12 / beta^2 ((E + 0.67)/1.67)^-3.93, E in GeV",
        "# Tabulated to 1 TeV; the loader truncates at the configured cutoff.",
        "K[MeV], intensity[1/(m^2 s sr MeV)]",
    ]
    lines += [f"{k / 1e6:.8e}, {v:.8e}" for k, v in zip(K, j)]
    path.write_text("\n".join(lines) + "\n")


def dust(path, lm_min=-18.0, lm_max=0.0, step=0.05, v0=20e3):
    lm = np.round(np.arange(lm_min, lm_max + step / 2, step), 10)
    # |dF/dlog10 m| from a fine central difference of the cumulative flux
    h = 1e-4
    dF = (grun_cumulative_flux(10 ** (lm - h)) - grun_cumulative_flux(10 ** (lm + h))) / (2 * h)
    # isotropic density from a flat-plate flux: n = 4 F / v; m^-3 -> cm^-3
    n = 4.0 * dF / v0 * 1e-6
    lines = [
        "# Interplanetary meteoroid number density at 1 AU per decade of mass.",
        "# Derived from the Grun et al. (1985) cumulative flux with v0 = 20 km/s.",
        "log10_m[log10 g], dn_dlogm[cm^-3]",
    ]
    lines += [f"{a:.2f}, {b:.8e}" for a, b in zip(lm, n)]
    path.write_text("\n".join(lines) + "\n")


def neutrinos(path):
    model = {
        "model": "B16-GS98",
        "units": "flux in cm^-2 s^-1",
        "components": {
            "pp": {"kind": "continuum", "flux": 5.98e10, "endpoint_MeV": 0.42341},
            "pep": {"kind": "lines", "flux": 1.44e8, "lines": [[1.442, 1.0]]},
            "7Be": {"kind": "lines", "flux": 4.93e9, "lines": [[0.8618, 0.9], [0.3843, 0.1]]},
            "8B": {"kind": "continuum", "flux": 5.46e6, "endpoint_MeV": 15.0},
            "hep": {"kind": "continuum", "flux": 7.98e3, "endpoint_MeV": 18.77},
        },
    }
    path.write_text(json.dumps(model, indent=2) + "\n")


if __name__ == "__main__":
    cosmic_rays(DATA / "cosmic_rays_proton_lis.csv")
    dust(DATA / "dust_grun1985.csv")
    neutrinos(DATA / "solar_neutrinos.json")
    print("wrote", ", ".join(p.name for p in sorted(DATA.glob("*.*"))))
