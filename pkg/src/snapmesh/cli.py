"""Command-line front end: generate, validate, export, methods.

Exit codes: 0 success, 1 configuration or load error, 2 the map holds only
the starting piece, 3 a --min-cbar/--min-armax threshold was missed,
4 the map has no walkable surface.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path
from typing import Sequence

from . import data
from .engine import generate
from .errors import NoWalkableSurfaceError, SnapMeshError
from .formats import (
    atomic_write,
    dump_map,
    export_obj,
    format_report,
    load_config,
    load_map,
    load_piece_library,
    write_report,
)
from .methods import registered_methods
from .validation import NavConfig, validate_map

EXIT_OK = 0
EXIT_LOAD = 1
EXIT_DEGENERATE = 2
EXIT_THRESHOLD = 3
EXIT_NO_WALKABLE = 4


def _library(paths: Sequence[str] | None):
    return load_piece_library(paths) if paths else data.load_bundled_library()


def _config_path(value: str) -> Path:
    path = Path(value)
    if not path.exists() and value in data.bundled_config_names():
        return data.bundled_config_path(value)
    return path


def _nav(base: NavConfig, args: argparse.Namespace) -> NavConfig:
    changes = {}
    if args.nav_points is not None:
        changes["n_points"] = args.nav_points
    if args.nav_seed is not None:
        changes["seed"] = args.nav_seed
    return dataclasses.replace(base, **changes)


def _run_validation(placed, nav: NavConfig, report_path: str | None):
    result = validate_map(placed, nav)
    if report_path:
        atomic_write(report_path, write_report(result.report))
    print(format_report(result.report))
    return result.report


def cmd_generate(args: argparse.Namespace) -> int:
    loaded = load_config(_config_path(args.config), _library(args.pieces))
    gen = loaded.generation
    if args.seed is not None:
        gen = dataclasses.replace(gen, seed=args.seed)
    elif not loaded.seed_from_file:
        gen = dataclasses.replace(gen, seed=time.time_ns() & 0x7FFFFFFF)
    loaded.generation = gen

    gmap = generate(gen, loaded.library, config_digest=loaded.digest())
    atomic_write(args.out, dump_map(gmap, include_timing=args.timing))
    if args.log:
        atomic_write(args.log, "\n".join(gmap.log) + "\n")
    if args.obj:
        atomic_write(args.obj, export_obj(gmap))
    print(
        f"seed={gmap.seed} pieces={gmap.piece_count} end={gmap.end_reason} "
        f"generation={gmap.generation_ms:.1f}ms"
    )

    report = None
    if args.validate or args.min_cbar is not None or args.min_armax is not None:
        report = _run_validation(gmap.placed, _nav(loaded.nav, args), args.report)
    if gmap.piece_count == 1:
        print("map contains only the starting piece", file=sys.stderr)
        return EXIT_DEGENERATE
    if report is not None:
        if args.min_cbar is not None and report.c_bar < args.min_cbar:
            return EXIT_THRESHOLD
        if args.min_armax is not None and report.a_r_max < args.min_armax:
            return EXIT_THRESHOLD
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    library = _library(args.pieces)
    nav = NavConfig()
    if args.config:
        nav = load_config(_config_path(args.config), library).nav
    gmap = load_map(args.map, library)
    _run_validation(gmap.placed, _nav(nav, args), args.report)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    gmap = load_map(args.map, _library(args.pieces))
    atomic_write(args.obj, export_obj(gmap))
    return EXIT_OK


def cmd_methods(args: argparse.Namespace) -> int:
    entries = registered_methods()
    if args.json:
        print(json.dumps([{"kind": e.name, "params": list(e.params)} for e in entries], indent=2))
    else:
        for e in entries:
            print(f"{e.name}: {', '.join(e.params)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="snapmesh", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a map from a config")
    g.add_argument("--config", required=True, help="config file, or a bundled config name")
    g.add_argument("--pieces", nargs="+", help="piece files (default: bundled set)")
    g.add_argument("--seed", type=int, help="overrides the config seed")
    g.add_argument("--out", required=True, help="map file to write")
    g.add_argument("--log", help="narration log to write")
    g.add_argument("--obj", help="also export the map as OBJ")
    g.add_argument("--validate", action="store_true", help="run navigability validation")
    g.add_argument("--report", help="validation report file")
    g.add_argument("--nav-points", type=int)
    g.add_argument("--nav-seed", type=int)
    g.add_argument("--min-cbar", type=float, help="exit 3 if c_bar falls below (fraction)")
    g.add_argument("--min-armax", type=float, help="exit 3 if A_r_max falls below (fraction)")
    g.add_argument("--timing", action="store_true", help="record generation time in the map file")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="compute navigability metrics for a map")
    v.add_argument("--map", required=True)
    v.add_argument("--pieces", nargs="+")
    v.add_argument("--config", help="take navigation parameters from this config")
    v.add_argument("--nav-points", type=int)
    v.add_argument("--nav-seed", type=int)
    v.add_argument("--report")
    v.set_defaults(func=cmd_validate)

    e = sub.add_parser("export", help="export a map as Wavefront OBJ")
    e.add_argument("--map", required=True)
    e.add_argument("--pieces", nargs="+")
    e.add_argument("--obj", required=True)
    e.set_defaults(func=cmd_export)

    m = sub.add_parser("methods", help="list registered generation methods")
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_methods)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except NoWalkableSurfaceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_WALKABLE
    except (SnapMeshError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LOAD


if __name__ == "__main__":
    sys.exit(main())
