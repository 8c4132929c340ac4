"""Command-line entry point.

    decobudget table --missions all --backgrounds all --out table.csv
    decobudget scan --parameter r_cloud --range 1e-7:1e-5:11 --mission beccal \
        --background solar-photons --kind matter-coherent
    decobudget validate --suite xsec
    decobudget ingest raw.csv --species proton --out canonical.csv

Exit codes: 0 ok, 1 configuration, 2 data, 3 numerical.
"""

import argparse
import sys
from pathlib import Path

from . import flux as fx
from .errors import DecoBudgetError, QuadratureError
from .kinematics import ELECTRON, NEUTRINO, PHOTON, PROTON
from .mission import PRESETS, load_mission, load_missions
from .observables import REGIMES, BACKGROUND_LIMITED
from .oracle import DEFAULT_SEED, SUITES, run_suite
from .pipeline import (SCAN_PARAMETERS, TABLE_COLUMNS, TABLE_HEADER, TABLE_NEUTRINO_COMPONENTS,
                       load_sources, loglog_slope, manifest_lines, parse_backgrounds, parse_range,
                       render_csv, resolve_data_dir, scan_rows, table_rows)
from .rates import QuadratureConfig

SPECIES = {"photon": PHOTON, "proton": PROTON, "electron": ELECTRON, "neutrino": NEUTRINO}


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _config(args):
    return QuadratureConfig(rel_tol=args.rel_tol, max_subdivisions=args.max_subdivisions)


def _mission_paths(missions, spec):
    names = [s.strip() for s in spec.split(",") if s.strip()]
    if names == ["all"]:
        names = list(PRESETS)
    return [f"preset:{n}" if n.lower() in PRESETS else str(Path(n).resolve()) for n in names]


def cmd_table(args):
    missions = load_missions(args.missions)
    backgrounds = parse_backgrounds(args.backgrounds)
    data_dir = resolve_data_dir(args.data_dir)
    comps = tuple(c for c in args.nu_components.split(",") if c)
    sources = load_sources(backgrounds, data_dir, args.photon_source, comps)
    rows, results = table_rows(missions, backgrounds, sources, _config(args), args.jobs,
                               args.regime)
    manifest = manifest_lines(
        "table", _mission_paths(missions, args.missions), sources.files, args.seed, missions,
        {"rel_tol": args.rel_tol, "max_subdivisions": args.max_subdivisions,
         "regime": args.regime, "neutrino_components": ",".join(comps)},
    )
    _emit(render_csv(TABLE_HEADER, rows, TABLE_COLUMNS, manifest), args.out)
    bad = [r for r in results if not r.converged]
    if bad:
        raise QuadratureError(
            "quadrature did not converge for " + ", ".join(f"{r.mission}/{r.background}" for r in bad)
        )
    return 0


def cmd_scan(args):
    base = load_mission(args.mission)
    changes = {}
    if args.kind:
        changes["kind"] = args.kind
    if args.t_shot:
        changes["t_shot"] = args.t_shot
    if args.n_atoms:
        changes["n_atoms"] = args.n_atoms
    if args.dx:
        changes["dx"] = args.dx
    if args.r_cloud:
        changes["r_cloud"] = args.r_cloud
    if changes:
        base = base.with_(**changes)
    background = parse_backgrounds(args.background)[0]
    values = parse_range(args.range)
    sources = load_sources([background], resolve_data_dir(args.data_dir), args.photon_source)
    rows = scan_rows(base, args.parameter, values, background, sources.spectra[background],
                     args.q_regime, _config(args), args.jobs)
    slope = loglog_slope([r["value"] for r in rows], [r["gamma_tot"] for r in rows])
    manifest = manifest_lines(
        "scan", _mission_paths([base], args.mission), sources.files, args.seed, [base],
        {"parameter": args.parameter, "range": args.range, "background": background,
         "q_regime": args.q_regime, "rel_tol": args.rel_tol,
         "max_subdivisions": args.max_subdivisions, "loglog_slope": f"{slope:.6f}"},
    )
    cols = ("value", "gamma_tot", "snr_shot", "quad_err", "converged")
    header = (args.parameter, "gamma_tot[1/s]", "snr_shot", "quadrature_rel_err", "converged")
    _emit(render_csv(header, rows, cols, manifest), args.out)
    if not all(r["converged"] for r in rows):
        raise QuadratureError("quadrature did not converge for some scan points")
    return 0


def cmd_validate(args):
    lines, failed = [], 0
    for rep in run_suite(args.suite, args.seed, args.jobs, args.tolerance, samples=args.samples):
        lines.append(rep.line())
        failed += not rep.passed
    lines.append(f"SUMMARY {len(lines) - failed}/{len(lines)} passed")
    _emit("\n".join(lines) + "\n", args.out)
    if failed:
        print(f"{failed} check(s) failed", file=sys.stderr)
        return 3
    return 0


def cmd_ingest(args):
    unit_spec = (args.x_unit, args.y_unit) if args.x_unit and args.y_unit else None
    spec = fx.load_tabulated_spectrum(args.path, (args.x_col, args.y_col), unit_spec,
                                      SPECIES[args.species])
    if args.species == "photon" and args.normalize:
        spec = fx.solar_photon_spectrum(args.path)
    manifest = manifest_lines("ingest", [], {"input": args.path}, args.seed, [])
    comment = "\n".join(ln[2:] for ln in manifest)
    _emit(fx.canonical_text(spec, comment=comment), args.out)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="decobudget", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--data-dir", default=None, help="directory with flux tables")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--rel-tol", type=float, default=1e-4)
        sp.add_argument("--max-subdivisions", type=int, default=QuadratureConfig.max_subdivisions,
                        help="grid doublings before a quadrature is declared unconverged")
        sp.add_argument("--seed", type=int, default=DEFAULT_SEED)
        sp.add_argument("--jobs", type=int, default=1, help="worker threads")
        sp.add_argument("--photon-source", default=None,
                        help="'blackbody' or a (um, W m^-2 um^-1) irradiance table")

    t = sub.add_parser("table", help="rates and observables per mission and background")
    common(t)
    t.add_argument("--missions", default="all")
    t.add_argument("--backgrounds", default="all")
    t.add_argument("--regime", choices=REGIMES, default=BACKGROUND_LIMITED,
                   help="multi-shot statistics for the snr_total column")
    t.add_argument("--nu-components", default=",".join(TABLE_NEUTRINO_COMPONENTS),
                   help="solar neutrino components, e.g. pp,pep,7Be,8B,hep")
    t.set_defaults(func=cmd_table)

    s = sub.add_parser("scan", help="log scan of one mission parameter")
    common(s)
    s.add_argument("--parameter", choices=SCAN_PARAMETERS, required=True)
    s.add_argument("--range", required=True, help="lo:hi:n, log-spaced, n >= 8")
    s.add_argument("--mission", default="beccal")
    s.add_argument("--background", default="solar-photons")
    s.add_argument("--regime", dest="q_regime", choices=("lowq", "highq", "total"),
                   default="total", help="momentum-transfer regime for charged backgrounds")
    s.add_argument("--kind", choices=("cold-atom-1body", "matter-coherent"), default=None)
    s.add_argument("--t-shot", type=float, default=None)
    s.add_argument("--n-atoms", type=float, default=None)
    s.add_argument("--dx", type=float, default=None)
    s.add_argument("--r-cloud", type=float, default=None)
    s.set_defaults(func=cmd_scan)

    v = sub.add_parser("validate", help="run oracle suites")
    v.add_argument("--suite", choices=SUITES, default="all")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--jobs", type=int, default=1)
    v.add_argument("--tolerance", type=float, default=None, help="override check tolerances")
    v.add_argument("--samples", type=int, default=None, help="override MC sample counts")
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("ingest", help="normalize a raw flux file into canonical units")
    g.add_argument("path")
    g.add_argument("--species", choices=sorted(SPECIES), default="proton")
    g.add_argument("--x-col", type=int, default=0)
    g.add_argument("--y-col", type=int, default=1)
    g.add_argument("--x-unit", default=None)
    g.add_argument("--y-unit", default=None)
    g.add_argument("--normalize", action="store_true",
                   help="photon tables: rescale to the solar constant")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED)
    g.add_argument("--out", default=None)
    g.set_defaults(func=cmd_ingest)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DecoBudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
