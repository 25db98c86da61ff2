"""Command-line entry point: cluster, solve, sweep, compare.

Every command writes its artifacts plus a run manifest with input/output
digests; identical command, inputs, and seed reproduce byte-identical output
files.  Exit codes: 0 success, 2 usage/parse error, 3 infeasible (or a failed
post-solve feasibility check), 4 gap/node limit without an incumbent.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, analysis, datafiles, milp, scenarios as scen_mod
from .datafiles import ParseError
from .formulation import piecewise_objective
from .system import validate_config, validate_scenarios

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_NO_INCUMBENT = 4


def _default_threads() -> int:
    env = os.environ.get("STOCHUC_THREADS", "")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stochuc",
        description="Two-stage stochastic unit commitment with carbon trading")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--verbose", action="store_true",
                        help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="reduce daily curves to typical scenarios")
    p.add_argument("--wind", required=True, help="wind curves CSV (day rows)")
    p.add_argument("--solar", required=True, help="solar curves CSV (day rows)")
    p.add_argument("--series", help="period CSV supplying the hydro column")
    p.add_argument("--k", default="auto",
                   help="cluster count, or 'auto' for the elbow rule")
    p.add_argument("--k-min", type=int, default=1)
    p.add_argument("--k-max", type=int, default=8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="scenario-set JSON to write")

    for name, extra in (("solve", "solve one two-stage instance"),
                        ("sweep", "re-solve across carbon prices"),
                        ("compare", "stochastic versus deterministic study")):
        p = sub.add_parser(name, help=extra)
        p.add_argument("--config", required=True)
        p.add_argument("--series", required=True)
        p.add_argument("--scenarios", required=True)
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--segments", type=int, default=None,
                       help="breakpoints per quadratic (default 8 or config value)")
        p.add_argument("--mip-gap", type=float, default=1e-4)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=_default_threads())
        if name == "sweep":
            p.add_argument("--prices", required=True,
                           help="comma-separated carbon prices")
    return parser


def _load_inputs(args):
    config, hydro, extras = datafiles.read_config(args.config, args.series)
    report = validate_config(config)
    if not report.ok:
        raise ParseError(args.config, f"invalid config:\n{report}")
    scenario_set = datafiles.read_scenarios(args.scenarios, hydro_fallback=hydro)
    sreport = validate_scenarios(scenario_set, config.horizon)
    if not sreport.ok:
        raise ParseError(args.scenarios, f"invalid scenarios:\n{sreport}")
    segments = args.segments or extras.get("segments") or 8
    return config, scenario_set, extras, int(segments)


def _solver_options(args) -> milp.SolveOptions:
    return milp.SolveOptions(mip_gap=args.mip_gap, threads=args.threads)


def _options_doc(args, segments: int | None = None) -> dict:
    doc = {k: v for k, v in vars(args).items()
           if k not in ("command", "verbose") and v is not None}
    if segments is not None:
        doc["segments"] = segments
    return doc


def cmd_cluster(args) -> int:
    wind = scen_mod.CurveSet(datafiles.read_curves(args.wind), label="wind")
    solar = scen_mod.CurveSet(datafiles.read_curves(args.solar), label="solar")
    if wind.periods != solar.periods:
        raise ParseError(args.solar, f"period count {solar.periods} does not "
                                     f"match wind ({wind.periods})")
    hydro = None
    if args.series:
        series = datafiles.read_series(args.series)
        if "hydro" in series:
            hydro = series["hydro"]
    start = time.monotonic()
    if args.k == "auto":
        k_wind = scen_mod.elbow_k(wind, args.k_min, args.k_max, args.seed)
        k_solar = scen_mod.elbow_k(solar, args.k_min, args.k_max, args.seed)
    else:
        try:
            k_wind = k_solar = int(args.k)
        except ValueError:
            raise ParseError("<args>", f"--k must be an integer or 'auto', "
                                       f"got {args.k!r}") from None
    wind_clusters = scen_mod.kmeans(wind, k_wind, args.seed)
    solar_clusters = scen_mod.kmeans(solar, k_solar, args.seed)
    hydro_curve = hydro if hydro is not None else np.zeros(wind.periods)
    joint = scen_mod.joint_scenarios(wind_clusters, solar_clusters, hydro_curve)
    meta = {"k_wind": k_wind, "k_solar": k_solar, "seed": args.seed,
            "wind_probabilities": [float(p) for p in wind_clusters.probabilities],
            "solar_probabilities": [float(p) for p in solar_clusters.probabilities],
            "hydro_embedded": hydro is not None}
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    datafiles.write_scenarios(out, joint, meta=meta)
    if hydro is None:
        _strip_hydro(out)
    inputs = [args.wind, args.solar] + ([args.series] if args.series else [])
    datafiles.write_manifest(out.with_suffix(".manifest.json"), "cluster",
                             args.seed, _options_doc(args), inputs, [out],
                             time.monotonic() - start, __version__)
    print(f"wrote {out} ({len(joint)} scenarios)")
    return EXIT_OK


def _strip_hydro(path) -> None:
    """Mark the hydro curves as absent so solve falls back to the series CSV."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    for s in doc["scenarios"]:
        s["hydro"] = None
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _write_solve_outputs(outdir: Path, config, scenario_set, outcome, segments):
    unit_names = [u.name for u in config.units]
    files = []
    commitment = outdir / "commitment.csv"
    datafiles.write_commitment(commitment, outcome.schedule, unit_names)
    files.append(commitment)
    dispatch = outdir / "dispatch.csv"
    datafiles.write_dispatch(dispatch, outcome.dispatch, unit_names)
    files.append(dispatch)
    report = outdir / "report.json"
    bound_per_term = [
        config.coal_price * u.fuel_quad + config.carbon.price * u.emis_quad
        for u in config.units]
    widths = [u.p_max / segments for u in config.units]
    lin_bound = sum(b * w * w / 4.0 * config.horizon * len(scenario_set)
                    for b, w in zip(bound_per_term, widths))
    datafiles.write_report(
        report, outcome.report,
        solver={"status": outcome.result.status,
                "objective": outcome.result.objective,
                "bound": outcome.result.bound,
                "gap": outcome.result.gap,
                "nodes": outcome.result.nodes},
        feasibility_ok=outcome.feasibility.ok,
        extras={"segments": segments,
                "linearization_error_bound": lin_bound,
                "model_objective_recomputed": piecewise_objective(
                    outcome.schedule, outcome.dispatch, config, scenario_set,
                    segments)})
    files.append(report)
    return files


def cmd_solve(args) -> int:
    config, scenario_set, extras, segments = _load_inputs(args)
    start = time.monotonic()
    outcome = analysis.solve_two_stage(
        config, scenario_set, _solver_options(args), segments=segments,
        initial_state=extras.get("initial_state"))
    if outcome.result.status == milp.INFEASIBLE:
        print("infeasible: no commitment satisfies every scenario", file=sys.stderr)
        return EXIT_INFEASIBLE
    if outcome.result.x is None:
        print(f"stopped at {outcome.result.status} without an incumbent",
              file=sys.stderr)
        return EXIT_NO_INCUMBENT
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    files = _write_solve_outputs(outdir, config, scenario_set, outcome, segments)
    datafiles.write_manifest(outdir / "manifest.json", "solve", args.seed,
                             _options_doc(args, segments),
                             [args.config, args.series, args.scenarios],
                             files, time.monotonic() - start, __version__)
    print(f"status={outcome.result.status} objective={outcome.result.objective:.6g} "
          f"gap={outcome.result.gap:.3g} nodes={outcome.result.nodes} "
          f"feasible={outcome.feasibility.ok}")
    if not outcome.feasibility.ok:
        print(str(outcome.feasibility), file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        prices = [float(p) for p in args.prices.split(",") if p.strip() != ""]
    except ValueError:
        print(f"--prices must be comma-separated numbers, got {args.prices!r}",
              file=sys.stderr)
        return EXIT_USAGE
    if not prices:
        print("--prices must list at least one price", file=sys.stderr)
        return EXIT_USAGE
    config, scenario_set, extras, segments = _load_inputs(args)
    start = time.monotonic()
    rows = analysis.carbon_price_sweep(config, scenario_set, prices,
                                       _solver_options(args), segments=segments,
                                       initial_state=extras.get("initial_state"),
                                       threads=args.threads)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    sweep_path = outdir / "sweep.csv"
    datafiles.write_sweep(sweep_path, rows)
    datafiles.write_manifest(outdir / "manifest.json", "sweep", args.seed,
                             _options_doc(args, segments),
                             [args.config, args.series, args.scenarios],
                             [sweep_path], time.monotonic() - start, __version__)
    good = sum(1 for r in rows if r.status == milp.OPTIMAL)
    for r in rows:
        print(f"price={r.carbon_price:g} total={r.total:.6g} "
              f"emissions={r.expected_emissions:.6g} status={r.status}")
    return EXIT_OK if good else EXIT_INFEASIBLE


def cmd_compare(args) -> int:
    config, scenario_set, extras, segments = _load_inputs(args)
    start = time.monotonic()
    comparison = analysis.compare_deterministic(
        config, scenario_set, _solver_options(args), segments=segments,
        initial_state=extras.get("initial_state"), threads=args.threads)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "comparison.csv"
    datafiles.write_comparison(path, comparison)
    datafiles.write_manifest(outdir / "manifest.json", "compare", args.seed,
                             _options_doc(args, segments),
                             [args.config, args.series, args.scenarios],
                             [path], time.monotonic() - start, __version__)
    print(f"stochastic={comparison.stochastic.total:.6g} "
          f"deterministic={comparison.deterministic.total:.6g} "
          f"vss={comparison.vss:.6g} "
          f"cycles={comparison.stochastic.start_stop_cycles}/"
          f"{comparison.deterministic.start_stop_cycles}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        logging.basicConfig(level=logging.INFO, stream=sys.stderr,
                            format="%(name)s %(message)s")
    handlers = {"cluster": cmd_cluster, "solve": cmd_solve,
                "sweep": cmd_sweep, "compare": cmd_compare}
    try:
        return handlers[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
