"""Command-line front end.

Subcommands: lk (linking matrix), lines (transversal lines), circles
(transversal circles), surface (secant-surface trace and mesh), verify
(signature against the linking-number formula), fixtures (list or emit
built-in scenes).  Reports are JSON on stdout, optionally copied to
--out; a lines report with --out also writes a CSV summary next to it,
and a surface report writes an OBJ mesh.

Exit codes: 0 success or verified match, 1 verification mismatch,
2 general-position violation (the scene is too degenerate to trust),
3 input error.  Slot patterns on the command line are 1-based; reports
echo them as given.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

import numpy as np

from . import circles as circles_mod
from . import lines as lines_mod
from . import surface as surface_mod
from .circles import solve_circles, theorem_value_circles, weight_circle
from .errors import (GeneralPositionError, InputError, NoRegularValue,
                     TranslinkError, UnsupportedPattern)
from .fixtures import FIXTURES, get_fixture
from .geometry import Line3, OrderMode, OrderSpec, ProjectiveLine
from .linking import linking_matrix
from .lines import solve_transversals
from .sceneio import load_scene, scene_to_dict
from .surface import (build_swept_surface, export_obj, orient_branch,
                      section_degree, trace_branches)
from .weights import theorem_value, verify_lines, weight

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_DEGENERATE = 2
EXIT_INPUT = 3


@dataclass(frozen=True)
class RunConfig:
    """Resolved run parameters; every report embeds one."""

    command: str
    fixture: str | None
    scene: str | None
    spec: str | None
    grid: int
    tol: float
    seed: int
    threads: int
    out: str | None
    formats: tuple

    def __post_init__(self):
        if self.tol <= 0.0:
            raise InputError("tolerance must be positive")
        if self.grid < 2:
            raise InputError("grid must be at least 2")
        if self.threads < 1:
            raise InputError("thread count must be at least 1")

    def as_dict(self) -> dict:
        d = asdict(self)
        d["formats"] = list(self.formats)
        return d


def _parse_spec(text: str) -> tuple[str, tuple]:
    """Slot spec 'mode:slots' with 1-based slots, e.g. linear:1,2,3,4."""
    try:
        mode, slot_text = text.split(":", 1)
    except ValueError:
        raise InputError(f"spec {text!r} must look like mode:1,2,3,4")
    mode = mode.strip().lower()
    if mode not in ("linear", "cyclic"):
        raise InputError(f"spec mode {mode!r} must be linear or cyclic")
    try:
        slots = tuple(int(s) - 1 for s in slot_text.split(","))
    except ValueError:
        raise InputError(f"spec slots {slot_text!r} must be integers")
    if len(slots) not in (4, 6):
        raise InputError("spec must list four or six slots")
    if any(s < 0 for s in slots):
        raise InputError("spec slots are 1-based")
    if len(slots) == 6 and mode != "cyclic":
        raise InputError("six-slot patterns are cyclic")
    return mode, slots


def _load(cfg: RunConfig):
    """Curves for the run: a fixture by name or a scene file."""
    if (cfg.fixture is None) == (cfg.scene is None):
        raise InputError("pass exactly one of --fixture or --scene")
    if cfg.fixture is not None:
        fix = get_fixture(cfg.fixture)
        return fix.name, fix.curves
    scene = load_scene(cfg.scene)
    return scene.name, scene.curves


def _slot_curves(curves, pattern):
    n = len(curves)
    bad = [p for p in pattern if p >= n]
    if bad:
        raise InputError(
            f"spec names curve {bad[0] + 1} but the scene has {n} curves")
    return [curves[p] for p in pattern]


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, float)):
        return float(x)
    if isinstance(x, (np.integer, int)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    return x


def _line_payload(line) -> dict:
    if isinstance(line, Line3):
        return {"kind": "affine",
                "direction": line.direction.tolist(),
                "moment": line.moment.tolist()}
    if isinstance(line, ProjectiveLine):
        a, b = line.a, line.b
        plucker = [a[i] * b[j] - a[j] * b[i]
                   for i, j in ((0, 1), (0, 2), (0, 3),
                                (1, 2), (1, 3), (2, 3))]
        return {"kind": "projective",
                "basis": [a.tolist(), b.tolist()],
                "plucker": plucker}
    raise InputError(f"unknown line type {type(line).__name__}")


def _emit(report: dict, cfg: RunConfig) -> None:
    text = json.dumps(_jsonable(report), indent=2, sort_keys=True)
    print(text)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8") as fh:
            fh.write(text)
            fh.write("\n")


def _derived_path(out: str, ext: str) -> str:
    stem, _ = os.path.splitext(out)
    return stem + ext


# ---------------------------------------------------------------------------
# subcommands


def _cmd_lk(cfg: RunConfig) -> int:
    name, curves = _load(cfg)
    matrix = linking_matrix(curves)
    report = {
        "command": "lk",
        "scene": name,
        "config": cfg.as_dict(),
        "projective": matrix.projective,
        "raw": matrix.raw,
        "rounded": [[str(v) for v in row] for row in matrix.values],
    }
    _emit(report, cfg)
    return EXIT_OK


def _root_record(slot_curves, root) -> dict:
    return {
        "params": root.params,
        "points": root.points,
        "positions": root.positions,
        "det": root.det,
        "order_ok": root.order_ok,
        "weight": weight(slot_curves, root),
        "line": _line_payload(root.line),
    }


def _cmd_lines(cfg: RunConfig) -> int:
    name, curves = _load(cfg)
    mode, pattern = _parse_spec(cfg.spec)
    if len(pattern) != 4:
        raise InputError("lines takes a four-slot spec")
    slot_curves = _slot_curves(curves, pattern)
    order = OrderSpec(mode=OrderMode.CYCLIC if mode == "cyclic"
                      else OrderMode.LINEAR, slots=(0, 1, 2, 3))
    roots = solve_transversals(slot_curves, order=order, grid=cfg.grid,
                               newton_tol=cfg.tol)
    records = [_root_record(slot_curves, r) for r in roots]
    report = {
        "command": "lines",
        "scene": name,
        "config": cfg.as_dict(),
        "pattern": [p + 1 for p in pattern],
        "mode": mode,
        "count": len(roots),
        "count_matching": sum(1 for r in roots if r.order_ok),
        "transversals": records,
    }
    _emit(report, cfg)
    if cfg.out and "csv" in cfg.formats:
        path = _derived_path(cfg.out, ".csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "t1", "t2", "t3", "t4",
                             "order_ok", "weight"])
            for k, rec in enumerate(records):
                writer.writerow([k, *[f"{t:.12f}" for t in rec["params"]],
                                 rec["order_ok"], rec["weight"]])
    return EXIT_OK


def _cmd_circles(cfg: RunConfig) -> int:
    name, curves = _load(cfg)
    mode, pattern = _parse_spec(cfg.spec)
    if len(pattern) != 6:
        raise InputError("circles takes a six-slot spec")
    slot_curves = _slot_curves(curves, pattern)
    order = OrderSpec(mode=OrderMode.CYCLIC, slots=(0, 1, 2, 3, 4, 5))
    roots = solve_circles(slot_curves, order=order, grid=cfg.grid,
                          newton_tol=cfg.tol)
    matching = [r for r in roots if r.order_ok]
    weights = [weight_circle(slot_curves, r) for r in matching]
    signature = int(sum(weights))
    try:
        expected = theorem_value_circles(curves, pattern)
        matches = Fraction(signature) == expected
    except UnsupportedPattern:
        expected = None
        matches = None
    records = []
    for r in roots:
        records.append({
            "center": r.circle.center,
            "radius": r.circle.radius,
            "normal": r.circle.normal,
            "params": r.params,
            "points": r.points,
            "angles": r.angles,
            "det": r.det,
            "order_ok": r.order_ok,
            "weight": weight_circle(slot_curves, r) if r.order_ok else None,
        })
    report = {
        "command": "circles",
        "scene": name,
        "config": cfg.as_dict(),
        "pattern": [p + 1 for p in pattern],
        "count": len(roots),
        "count_matching": len(matching),
        "signature": signature,
        "expected": expected,
        "matches": matches,
        "circles": records,
    }
    _emit(report, cfg)
    return EXIT_OK


def _cmd_surface(cfg: RunConfig) -> int:
    name, curves = _load(cfg)
    if len(curves) != 3:
        raise InputError("surface takes a scene with exactly three curves")
    branches = trace_branches(*curves, grid=cfg.grid)
    for b in branches:
        orient_branch(b)
    degrees = {slot + 1: section_degree(branches, slot, seed=cfg.seed)
               for slot in range(3)}
    swept = build_swept_surface(branches)
    eulers = [swept.euler_characteristic(k) for k in range(len(branches))]
    if cfg.out and "obj" in cfg.formats:
        export_obj(swept, _derived_path(cfg.out, ".obj"))
    report = {
        "command": "surface",
        "scene": name,
        "config": cfg.as_dict(),
        "branches": [{
            "vertices": len(b),
            "sigma": b.sigma,
            "pinch_count": len(b.pinches),
            "pinch_params": [b.params[i] for i in b.pinches],
            "euler_characteristic": eulers[k],
        } for k, b in enumerate(branches)],
        "section_degrees": degrees,
    }
    _emit(report, cfg)
    return EXIT_OK


def _cmd_verify(cfg: RunConfig) -> int:
    name, curves = _load(cfg)
    mode, pattern = _parse_spec(cfg.spec)
    if len(pattern) == 4:
        rep = verify_lines(curves, pattern, grid=cfg.grid)
    else:
        rep = verify_circles_entry(curves, pattern, cfg)
    report = {
        "command": "verify",
        "scene": name,
        "config": cfg.as_dict(),
        "pattern": [p + 1 for p in pattern],
        "count_matching": len(rep.roots),
        "weights": list(rep.weights),
        "signature": rep.signature,
        "expected": rep.expected,
        "matches": rep.matches,
        "count_bound_ok": rep.count_bound_ok,
    }
    _emit(report, cfg)
    return EXIT_OK if rep.matches else EXIT_MISMATCH


def verify_circles_entry(curves, pattern, cfg: RunConfig):
    from .circles import verify_circles
    return verify_circles(curves, pattern, grid=cfg.grid)


def _cmd_fixtures(cfg: RunConfig) -> int:
    if cfg.fixture is None:
        report = {
            "command": "fixtures",
            "config": cfg.as_dict(),
            "fixtures": [{
                "name": name,
                "curves": len(fix.curves),
                "projective": fix.projective,
                "notes": fix.notes,
            } for name, fix in ((n, FIXTURES[n]()) for n in sorted(FIXTURES))],
        }
        _emit(report, cfg)
        return EXIT_OK
    fix = get_fixture(cfg.fixture)
    scene = scene_to_dict(fix.curves, name=fix.name)
    _emit(scene, cfg)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument plumbing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


_DEFAULT_GRIDS = {
    "lk": lines_mod.GRID,
    "lines": lines_mod.GRID,
    "circles": circles_mod.G3,
    "surface": surface_mod.TRACE_GRID,
    "verify": lines_mod.GRID,
    "fixtures": lines_mod.GRID,
}

_DEFAULT_FORMATS = {
    "lines": ("json", "csv"),
    "surface": ("json", "obj"),
}


def _build_parser() -> _Parser:
    parser = _Parser(prog="translink",
                     description="Lines and circles meeting closed curves, "
                                 "with signed counts tied to linking "
                                 "numbers.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("lk", "pairwise linking matrix of a scene"),
            ("lines", "transversal lines for a four-slot pattern"),
            ("circles", "transversal circles for a six-slot pattern"),
            ("surface", "trace the secant surface of three curves"),
            ("verify", "check a signature against its formula"),
            ("fixtures", "list built-in scenes or emit one as JSON")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--fixture", help="built-in scene name")
        p.add_argument("--scene", help="scene JSON path")
        p.add_argument("--spec", help="slot pattern, e.g. linear:1,2,3,4")
        p.add_argument("--grid", type=int, default=None,
                       help="seeding grid per axis")
        p.add_argument("--tol", type=float, default=1e-10,
                       help="root residual tolerance")
        p.add_argument("--seed", type=int, default=0,
                       help="seed for regular-value draws")
        p.add_argument("--threads", type=int, default=None,
                       help="worker cap (results never depend on it)")
        p.add_argument("--out", help="write the JSON report here")
    return parser


_DISPATCH = {
    "lk": _cmd_lk,
    "lines": _cmd_lines,
    "circles": _cmd_circles,
    "surface": _cmd_surface,
    "verify": _cmd_verify,
    "fixtures": _cmd_fixtures,
}

_NEEDS_SPEC = ("lines", "circles", "verify")


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command in _NEEDS_SPEC and not args.spec:
            raise InputError(f"{args.command} needs --spec")
        cfg = RunConfig(
            command=args.command,
            fixture=args.fixture,
            scene=args.scene,
            spec=args.spec,
            grid=args.grid if args.grid is not None
            else _DEFAULT_GRIDS[args.command],
            tol=args.tol,
            seed=args.seed,
            threads=args.threads if args.threads is not None
            else os.cpu_count() or 1,
            out=args.out,
            formats=_DEFAULT_FORMATS.get(args.command, ("json",)),
        )
        return _DISPATCH[args.command](cfg)
    except SystemExit as exc:          # argparse --help
        code = exc.code
        return EXIT_OK if code in (0, None) else EXIT_INPUT
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GeneralPositionError, NoRegularValue) as exc:
        print(f"general-position violation: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except TranslinkError as exc:
        # remaining toolkit errors signal near-degenerate scenes
        print(f"degenerate scene: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
