"""Recompute the rate and visibility-loss tables for the four mission presets.

    python3 scripts/reproduce_tables.py [--out results/] [--jobs 4]

Writes rates.csv (one row per mission, background and q regime, with
manifest) and prints a compact rate grid plus the dV [SNR] grid.
"""

import argparse
import sys
from pathlib import Path

from decobudget.mission import load_missions
from decobudget.pipeline import (TABLE_COLUMNS, TABLE_HEADER, load_sources, manifest_lines,
                                 parse_backgrounds, render_csv, table_rows)
from decobudget.rates import BACKGROUNDS, QuadratureConfig


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--out", default="results", help="output directory")
    ap.add_argument("--jobs", type=int, default=4)
    ap.add_argument("--rel-tol", type=float, default=1e-4)
    ap.add_argument("--nu-components", default="pp")
    args = ap.parse_args(argv)

    missions = load_missions("all")
    backgrounds = parse_backgrounds("all")
    comps = tuple(args.nu_components.split(","))
    sources = load_sources(backgrounds, None, None, comps)
    cfg = QuadratureConfig(rel_tol=args.rel_tol)
    rows, _ = table_rows(missions, backgrounds, sources, cfg, args.jobs)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    manifest = manifest_lines("reproduce_tables", [f"preset:{m.name.lower()}" for m in missions],
                              sources.files, None, missions,
                              {"rel_tol": args.rel_tol, "neutrino_components": args.nu_components})
    (out / "rates.csv").write_text(render_csv(TABLE_HEADER, rows, TABLE_COLUMNS, manifest))

    names = [m.name for m in missions]
    cell = {(r["mission"], r["background"], r["regime"]): r for r in rows}
    print("Gamma_tot [1/s]")
    print(f"{'':24s}" + "".join(f"{n:>12s}" for n in names))
    for bg in BACKGROUNDS:
        regs = sorted({k[2] for k in cell if k[1] == bg}, key=["lowq", "highq", "total"].index)
        for reg in regs:
            label = bg if reg == "total" else f"{bg}/{reg}"
            print(f"{label:24s}" + "".join(f"{cell[(n, bg, reg)]['gamma_tot']:12.2e}" for n in names))
    print("\ndV [SNR per shot]")
    for n in names:
        parts = [f"{bg}: {cell[(n, bg, 'total')]['dV']:.1e} [{cell[(n, bg, 'total')]['snr_shot']:.1e}]"
                 for bg in BACKGROUNDS[:3]]
        print(f"{n:8s} " + "  ".join(parts))
    print(f"\nwrote {out / 'rates.csv'}", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
