"""Command-line interface: ``msmcell solve | sweep | plot``.

Exit codes: 0 success, 2 configuration or input error, 3 solver error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from . import __version__
from .cellsolver import CLAMPED, FREE, elastic_system, geometry_data, solve_cell
from .config import ConfigError, load_config
from .demag import SpectralWorkspace, assemble_magnetization, dump_field, solve_periodic_potential
from .elastic import dump_fields, minimize_elastic
from .errors import MSMCellError, SchemaError
from .geometry import check_resolution
from .magnetic import unit_vectors
from .svgplot import plot_records
from .sweep import SweepTable, find_crossings, peak_work_output, read_csv, run_sweep, to_csv, cell_records

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER = 0, 2, 3


def _threads(value):
    if value is None:
        value = os.environ.get("MSMCELL_THREADS", "1")
    try:
        n = int(value)
    except ValueError:
        raise ConfigError(f"invalid thread count {value!r}", "--threads") from None
    if n < 0:
        raise ConfigError("thread count must be >= 0", "--threads")
    return n


def _load(args):
    cfg = load_config(args.config)
    spec = cfg.spec
    if args.resolution is not None:
        try:
            check_resolution(args.resolution)
        except MSMCellError as exc:
            raise ConfigError(str(exc), "--resolution") from None
        spec = replace(spec, resolution=args.resolution)
    if args.seed is not None:
        try:
            spec = replace(spec, seed=int(args.seed, 16))
        except ValueError:
            raise ConfigError(f"seed must be hexadecimal, got {args.seed!r}", "--seed") from None
    sweep = replace(cfg.sweep, base=spec) if cfg.sweep is not None else None
    return replace(cfg, spec=spec, sweep=sweep)


def _report(res) -> str:
    lines = [
        f"{'phases':>8} {'mode':>8} {'E_total':>13} {'E_elastic':>13} {'E_aniso':>13} "
        f"{'E_demag':>13} {'E_zeeman':>13} {'beta_xx':>11} {'beta_xy':>11} {'beta_yy':>11}"
    ]
    for phases in res.assignments():
        for mode in (FREE, CLAMPED):
            e = res.get(phases, mode)
            lines.append(
                f"{''.join(map(str, phases)):>8} {mode:>8} {e.total:13.6e} {e.elastic:13.6e} "
                f"{e.anisotropy:13.6e} {e.demag:13.6e} {e.zeeman:13.6e} "
                f"{e.beta[0, 0]:11.4e} {e.beta[0, 1]:11.4e} {e.beta[1, 1]:11.4e}"
            )
    fmt = lambda p: "".join(map(str, p)) if p else "-"  # noqa: E731
    lines += [
        f"untransformed assignment: {fmt(res.untransformed)}",
        f"transformed assignment:   {fmt(res.transformed)}",
        f"global minimizer:         {fmt(res.global_minimizer)}"
        + ("  (transformed)" if res.global_minimizer != res.untransformed else "  (untransformed)"),
        f"spontaneous strain along field: {res.spontaneous_strain:.6e}",
        f"work output: {res.work_output:.6e} MPa",
    ]
    return "\n".join(lines)


def _dump(res, cfg, out_dir):
    spec = res.spec
    raster, _ = geometry_data(spec.cell, spec.resolution)
    os.makedirs(out_dir, exist_ok=True)
    theta = res.get(res.global_minimizer).theta
    M = assemble_magnetization(raster, unit_vectors(theta))
    dump_field(os.path.join(out_dir, "demag_field"), solve_periodic_potential(M, SpectralWorkspace(raster.n)))
    if res.transformed is not None:
        system = elastic_system(spec)
        sol = minimize_elastic(system, res.transformed)
        dump_fields(os.path.join(out_dir, "transformed_free"), sol, system)


def cmd_solve(args) -> int:
    cfg = _load(args)
    res = solve_cell(cfg.spec)
    print(_report(res))
    csv_path = args.out or cfg.output.csv_path
    if csv_path:
        records = cell_records("polymer_E", cfg.spec.materials.polymer_E, res)
        table = SweepTable("polymer_E", (cfg.spec.materials.polymer_E,), records)
        with open(csv_path, "w", newline="") as fh:
            fh.write(to_csv(table))
    if cfg.output.debug_dumps:
        _dump(res, cfg, cfg.output.svg_dir or os.path.dirname(csv_path or "") or ".")
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    if cfg.sweep is None:
        raise ConfigError(cfg.sweep_error, "sweep")
    threads = _threads(args.threads)
    table = run_sweep(cfg.sweep, threads=threads)
    csv_path = args.out or cfg.output.csv_path or "sweep.csv"
    with open(csv_path, "w", newline="") as fh:
        fh.write(to_csv(table))
    crossings = find_crossings(table) if table.parameter == "polymer_E" else []
    peak = peak_work_output(table)
    cross = ", ".join(f"{c.modulus:.4g} MPa ({c.transformed} vs {c.untransformed})" for c in crossings) or "none"
    peak_txt = f"{peak[1]:.4e} MPa at {table.parameter} = {peak[0]:.4g}" if peak else "n/a"
    print(f"{len(table.records)} records -> {csv_path}; crossings: {cross}; peak work output: {peak_txt}")
    if cfg.output.svg_dir and table.records:
        plot_records(table.records, cfg.output.svg_dir)
    for i, value, msg in table.errors:
        print(f"point {i} ({table.parameter} = {value:.6g}) failed: {msg}", file=sys.stderr)
    return EXIT_SOLVER if table.errors else EXIT_OK


def cmd_plot(args) -> int:
    try:
        records = read_csv(args.csv)
    except OSError as exc:
        raise ConfigError(str(exc), "csv") from None
    if not records:
        raise SchemaError(f"{args.csv}: no data rows")
    out_dir = args.out or "."
    for path in plot_records(records, out_dir):
        print(path)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="msmcell", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, metavar="PATH")
        p.add_argument("--out", metavar="PATH", help="CSV output path")
        p.add_argument("--resolution", type=int, metavar="N", help="override grid resolution")
        p.add_argument("--seed", metavar="HEX", help="multi-start seed override")
        p.add_argument("--threads", metavar="N", help="worker threads, 0 = auto (env MSMCELL_THREADS)")

    common(sub.add_parser("solve", help="solve one cell problem"))
    common(sub.add_parser("sweep", help="run a parameter sweep and write CSV"))
    p = sub.add_parser("plot", help="render SVG plots from a sweep CSV")
    p.add_argument("csv", metavar="CSV")
    p.add_argument("--out", metavar="DIR", help="output directory for SVG files")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = {"solve": cmd_solve, "sweep": cmd_sweep, "plot": cmd_plot}[args.command]
    try:
        return handler(args)
    except (ConfigError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except MSMCellError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
