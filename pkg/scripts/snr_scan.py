"""SNR per shot against cloud radius and path separation, for both read-out modes.

    python3 scripts/snr_scan.py [--out results/] [--points 12]

Scans r_cloud and dx for BECCAL-like parameters under solar photons and the
solar wind, once as a cold-atom cloud and once as a single coherent object.
Each curve family is written to its own CSV; fitted log-log slopes are
printed.  No plotting is done here.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from decobudget.mission import load_mission
from decobudget.pipeline import (load_sources, loglog_slope, manifest_lines, render_csv,
                                 scan_rows)
from decobudget.rates import PHOTON_BG, WIND_BG
from decobudget.response import COLD_ATOM, MATTER_COHERENT

SCANS = {
    "r_cloud": (1e-7, 1e-3),
    "dx": (1e-9, 1e-1),
}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", default="results")
    ap.add_argument("--mission", default="beccal")
    ap.add_argument("--points", type=int, default=12)
    ap.add_argument("--jobs", type=int, default=4)
    args = ap.parse_args(argv)

    base = load_mission(args.mission)
    sources = load_sources([PHOTON_BG, WIND_BG])
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for kind in (COLD_ATOM, MATTER_COHERENT):
        m = base.with_(kind=kind)
        for bg in (PHOTON_BG, WIND_BG):
            for param, (lo, hi) in SCANS.items():
                values = np.geomspace(lo, hi, args.points)
                rows = scan_rows(m, param, values, bg, sources.spectra[bg], jobs=args.jobs)
                slope = loglog_slope(values, [r["snr_shot"] for r in rows])
                g_slope = loglog_slope(values, [r["gamma_tot"] for r in rows])
                tag = f"{kind}_{bg}_{param}"
                manifest = manifest_lines("snr_scan", [f"preset:{args.mission}"], sources.files,
                                          None, [m], {"parameter": param, "background": bg})
                header = (param, "gamma_tot[1/s]", "snr_shot", "quadrature_rel_err", "converged")
                cols = ("value", "gamma_tot", "snr_shot", "quad_err", "converged")
                (out / f"{tag}.csv").write_text(render_csv(header, rows, cols, manifest))
                print(f"{tag:48s} snr {rows[0]['snr_shot']:.2e} .. {rows[-1]['snr_shot']:.2e}"
                      f"  snr slope {slope:+.2f}  rate slope {g_slope:+.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
