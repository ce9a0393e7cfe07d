"""Command-line entry point: exact sums, MC campaigns, gas analytics, bounds, fits.

Exit codes: 0 success, 2 parameter/validation error, 3 resource-guard refusal.
Data goes to stdout (or --output), diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from fractions import Fraction

from ._version import __version__
from . import analysis, exact, mc
from .analysis import werner_summary
from .lattice import bond_orbits, build_lattice, equivalent_neighbor_count

SCHEMA_VERSION = "1"

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RESOURCE = 3


def _fraction_str(fr: Fraction) -> str:
    return f"{fr.numerator}/{fr.denominator}"


def _envelope(command: str, rng_algorithm: str | None = None) -> dict:
    doc = {
        "schema": f"rvbent/{command}",
        "schema_version": SCHEMA_VERSION,
        "code_version": __version__,
        "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "command": command,
    }
    if rng_algorithm is not None:
        doc["rng_algorithm"] = rng_algorithm
    return doc


def _summary_dict(summary) -> dict:
    out = {
        "p": float(summary.p),
        "concurrence": float(summary.concurrence),
        "eof": summary.eof,
        "entangled": summary.entangled,
    }
    if isinstance(summary.p, Fraction):
        out["p_rational"] = _fraction_str(summary.p)
    if summary.bound_z is not None:
        out["bound_z"] = summary.bound_z
        out["bound_status"] = summary.bound_status.value
        out["bound_satisfied"] = summary.bound_satisfied
    return out


def _emit(doc: dict, rows: list[dict], args) -> None:
    if args.format == "csv":
        text = _csv_text(rows)
    else:
        text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        print(f"wrote {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)


def _csv_text(rows: list[dict]) -> str:
    if not rows:
        return "\n"
    cols = list(rows[0])
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_exact(args) -> int:
    lat = build_lattice(args.L, args.bc)
    enum = exact.enumerate_nn_coverings(lat)
    orbits = bond_orbits(lat)
    reps = [lat.bonds[o[0]] for o in orbits]
    corrs = exact.exact_nn_correlators(lat, reps)

    orbit_records = []
    for k, (orbit, rep) in enumerate(zip(orbits, reps)):
        corr = corrs[rep]
        z = equivalent_neighbor_count(lat, *rep)
        summary = werner_summary(corr, 0, z)
        p = summary.p
        orbit_records.append({
            "orbit_index": k,
            "size": len(orbit),
            "representative": list(rep),
            "representative_xy": [list(lat.site_xy(rep[0])), list(lat.site_xy(rep[1]))],
            "is_centermost": k == 0,
            "z": z,
            "value_rational": _fraction_str(corr),
            "value_decimal": float(corr),
            "p_rational": _fraction_str(p),
            "p_decimal": exact.fraction_decimal_str(p, 13),
            "werner": _summary_dict(summary),
        })

    doc = _envelope("exact")
    doc.update({
        "ensemble": exact.Ensemble.NN_LIQUID.value,
        "L": args.L,
        "bc": lat.bc.value,
        "covering_count": enum.count,
        "orbits": orbit_records,
    })
    rows = [{
        "L": args.L, "bc": lat.bc.value, "covering_count": enum.count,
        "orbit_index": r["orbit_index"], "size": r["size"], "z": r["z"],
        "value_rational": r["value_rational"], "value_decimal": r["value_decimal"],
        "p_decimal": r["p_decimal"], "eof": r["werner"]["eof"],
        "entangled": r["werner"]["entangled"], "bound_status": r["werner"]["bound_status"],
    } for r in orbit_records]
    _emit(doc, rows, args)
    return EXIT_OK


def cmd_mc(args) -> int:
    cfg = mc.McConfig(L=args.L, seed=args.seed, n_sweeps=args.sweeps,
                      n_therm=args.therm, n_bins=args.bins)
    cfg.validate()
    print(f"mc: L={cfg.L} seed={cfg.seed} sweeps={cfg.n_sweeps} "
          f"therm={cfg.n_therm} bins={cfg.n_bins}", file=sys.stderr)
    result = mc.run_chain(cfg)
    summary = werner_summary(result.corr_mean, result.corr_err, z=4)

    doc = _envelope("mc", rng_algorithm=mc.RNG_ALGORITHM)
    doc.update({
        "result": result.to_dict(),
        "werner": _summary_dict(summary),
    })

    output = args.output or f"mc_L{cfg.L}_seed{cfg.seed}.json"
    bins_csv = args.bins_csv or output.rsplit(".", 1)[0] + "_bins.csv"
    with open(output, "w") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    with open(bins_csv, "w") as fh:
        fh.write(result.bins_csv())
    print(f"wrote {output} and {bins_csv}", file=sys.stderr)

    print(f"p = {result.p_mean:.6f} +- {result.p_err:.6f} "
          f"(corr = {result.corr_mean:.6f} +- {result.corr_err:.6f})")
    print(f"acceptance: plaquette {result.acceptance_rates['plaquette']:.4f}, "
          f"winding {result.acceptance_rates['winding']:.4f}")
    print(f"sectors visited: {len(result.sector_histogram)}; "
          f"tau_int = {result.metadata['tau_int_sweeps']:.2f} sweeps")
    print(f"eof = {summary.eof:.6f}; entangled = {summary.entangled}; "
          f"bound(z=4) = {summary.bound_status.value}")
    return EXIT_OK


def cmd_gas(args) -> int:
    forms = analysis.gas_closed_forms(args.N)
    corr = exact.exact_gas_correlator(args.N, same_sublattice=False)
    if corr.value != forms.corr_opposite:
        raise RuntimeError("enumeration disagrees with the closed form")
    summary = werner_summary(forms.corr_opposite, 0, z=args.N)
    doc = _envelope("gas")
    doc.update({
        "ensemble": exact.Ensemble.BIPARTITE_GAS.value,
        "N": args.N,
        "n_pairings": exact.enumerate_bipartite_pairings(args.N).count,
        "corr_opposite_rational": _fraction_str(forms.corr_opposite),
        "corr_opposite_decimal": float(forms.corr_opposite),
        "corr_same_rational": _fraction_str(forms.corr_same) if forms.corr_same is not None else None,
        "p_rational": _fraction_str(forms.p),
        "p_decimal": exact.fraction_decimal_str(forms.p, 13),
        "werner": _summary_dict(summary),
    })
    rows = [{"N": args.N, "corr_opposite": _fraction_str(forms.corr_opposite),
             "p": _fraction_str(forms.p), "eof": summary.eof,
             "entangled": summary.entangled, "bound_status": summary.bound_status.value}]
    _emit(doc, rows, args)
    return EXIT_OK


def cmd_bound(args) -> int:
    bound = analysis.anderson_bound(args.z)
    status = analysis.check_bound(args.corr, args.err, args.z)
    doc = _envelope("bound")
    doc.update({
        "z": args.z,
        "corr": args.corr,
        "err": args.err,
        "corr_min_rational": _fraction_str(bound.corr_min),
        "corr_min_decimal": float(bound.corr_min),
        "p_max_rational": _fraction_str(bound.p_max),
        "p_max_decimal": float(bound.p_max),
        "status": status.value,
    })
    rows = [{"z": args.z, "corr": args.corr, "err": args.err,
             "corr_min": float(bound.corr_min), "p_max": float(bound.p_max),
             "status": status.value}]
    _emit(doc, rows, args)
    return EXIT_OK


def cmd_fit(args) -> int:
    points = analysis.read_fit_csv(args.input)
    fit = analysis.extrapolate(points)
    doc = _envelope("fit")
    doc.update({
        "input": str(args.input),
        "n_points": len(points),
        "p_infinity": fit.p_infinity,
        "p_infinity_err": fit.p_infinity_err,
        "coefficients": {"a": fit.coefficients[0], "b": fit.coefficients[1]},
        "l_min_used": fit.l_min_used,
        "chi2_per_dof": fit.chi2_per_dof,
    })
    rows = [{"p_infinity": fit.p_infinity, "p_infinity_err": fit.p_infinity_err,
             "a": fit.coefficients[0], "b": fit.coefficients[1],
             "l_min_used": fit.l_min_used, "chi2_per_dof": fit.chi2_per_dof}]
    _emit(doc, rows, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser and dispatch
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvbent",
        description="Two-spin entanglement in resonating-valence-bond states")
    parser.add_argument("--version", action="version", version=f"rvbent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--output", help="write the report here instead of stdout")

    p = sub.add_parser("exact", help="exact correlators by full enumeration")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--bc", default="periodic", help="periodic or open")
    add_common(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("mc", help="Monte Carlo estimate of the NN correlator")
    p.add_argument("--L", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--sweeps", type=int, required=True)
    p.add_argument("--therm", type=int, default=None)
    p.add_argument("--bins", type=int, default=64)
    p.add_argument("--output", help="result JSON path (default mc_L{L}_seed{seed}.json)")
    p.add_argument("--bins-csv", help="bin series CSV path (default alongside output)")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("gas", help="closed forms for the all-pairings superposition")
    p.add_argument("--N", type=int, required=True)
    add_common(p)
    p.set_defaults(func=cmd_gas)

    p = sub.add_parser("bound", help="check a correlator against the z-coordination bound")
    p.add_argument("--corr", type=float, required=True)
    p.add_argument("--err", type=float, default=0.0)
    p.add_argument("--z", type=int, required=True)
    add_common(p)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("fit", help="extrapolate p(L) data to infinite size")
    p.add_argument("--input", required=True, help="CSV with header L,p,p_err")
    add_common(p)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as err:
        return err.code if isinstance(err.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except exact.SizeLimitError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
