"""Command-line front end: JSON in, JSON report (and optional figure) out."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import dendrite as dd
from . import kp
from . import lam
from . import polydyn as pd
from .figures import PALETTE, Figure, bounds_of, graph_figure, lamination_figure
from .geom import GeometryError, PolyContinuum, PolyCurve, as_complex_array
from .index_var import (ArcPartition, BoundaryFixedPoint, InsufficientSamples, NoEscapePath, index,
                        locate_fixed_points, lollipop_check, make_junction, variation_total)
from .maps import map_from_json
from .schoenflies import (BoundaryMap, NotInjective, evaluate, extend_homeomorphism, grid_in_polygon,
                          injectivity_probe)

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

NUMERICAL = (InsufficientSamples, NoEscapePath, BoundaryFixedPoint, pd.NotIsolated, pd.BranchAmbiguity,
             pd.RootFailure, dd.CellBudgetExceeded, NotInjective, ArithmeticError, FloatingPointError)


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Input helpers
# ---------------------------------------------------------------------------

def _load(path: str | None, what: str) -> dict:
    if path is None:
        raise UsageError(f"--{what} is required")
    return json.loads(Path(path).read_text())


def _continuum(data: dict) -> PolyContinuum:
    if "curves" in data:
        return PolyContinuum.from_json(data)
    if "vertices" in data:
        return PolyContinuum.from_json({"kind": "polygon" if data.get("closed", True) else "tree",
                                        "curves": [data]})
    raise UsageError("input is not a continuum")


def _closed_curve(data) -> PolyCurve:
    if isinstance(data, list):
        return PolyCurve(as_complex_array(data), closed=True).ccw()
    if "curve" in data:
        return _closed_curve(data["curve"])
    X = _continuum(data)
    closed = X.filled
    if not closed:
        raise UsageError("input has no closed curve")
    return closed[0]


def _partition(data: dict) -> ArcPartition:
    S = _closed_curve(data)
    if "cuts" in data:
        cuts = tuple(as_complex_array(data["cuts"]))
    else:
        cuts = tuple(S.point_at(np.arange(3) / 3))
    return ArcPartition(S, cuts)


def _point(text: str | None) -> complex:
    if text is None:
        raise UsageError("--point is required")
    try:
        x, y = (float(s) for s in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad point {text!r}; expected x,y") from exc
    return complex(x, y)


def _angle(text: str | None) -> Fraction:
    if text is None:
        raise UsageError("--angle is required")
    try:
        return Fraction(text) % 1
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad angle {text!r}; expected p/q") from exc


def _xy(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def _jsonable(x):
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}"
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, complex):
        return _xy(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


# ---------------------------------------------------------------------------
# Commands: index and variation
# ---------------------------------------------------------------------------

def cmd_index(args):
    data = _load(args.input, "input")
    f = map_from_json(_load(args.map, "map"))
    S = _closed_curve(data)
    report = {"index": index(S, f)}
    fig = None
    if args.svg:
        img = np.asarray(f(S.point_at(np.linspace(0, 1, 513))), dtype=complex)
        fig = Figure(bounds_of(S.vertices, img), "index")
        fig.curve(S)
        fig.polyline(img, PALETTE["image"])
    return report, fig


def _variation(args, title: str):
    data = _load(args.input, "input")
    f = map_from_json(_load(args.map, "map"))
    P = _partition(data)
    X = _continuum(data["X"]) if "X" in data else None
    rep = variation_total(P, f, X)
    fig = None
    if args.svg:
        S = P.curve
        img = np.asarray(f(S.point_at(np.linspace(0, 1, 513))), dtype=complex)
        fig = Figure(bounds_of(S.vertices, img), title)
        if X is not None:
            fig.continuum(X)
        fig.curve(S)
        fig.polyline(img, PALETTE["image"])
        fig.points(list(P.cuts))
        for a, b in P.arcs:
            t0, t1 = S.param_of(a), S.param_of(b)
            t1 = t1 + 1 if t1 <= t0 else t1
            fig.junction(make_junction(S.point_at((t0 + t1) / 2), X, S))
    return rep, fig


def cmd_variation(args):
    rep, fig = _variation(args, "variation")
    return {"per_arc": list(rep.per_arc), "variation": rep.total}, fig


def cmd_ivp1(args):
    rep, fig = _variation(args, "index and variation")
    return {"index": rep.index, "variation": rep.total, "identity": rep.identity_holds,
            "per_arc": list(rep.per_arc)}, fig


def cmd_lollipop(args):
    data = _load(args.input, "input")
    f = map_from_json(_load(args.map, "map"))
    P = _partition(data)
    stick = PolyCurve(as_complex_array(data["stick"]))
    rep = lollipop_check(P, int(data["stick_end"]), stick, f)
    fig = None
    if args.svg:
        fig = Figure(bounds_of(P.curve.vertices), "lollipop")
        fig.curve(P.curve)
        fig.polyline(stick.vertices, PALETTE["chord"], lw=1.5)
        fig.points(list(P.cuts))
    return rep.to_json(), fig


def cmd_fixed_points(args):
    f = map_from_json(_load(args.map, "map"))
    data = _load(args.input, "input") if args.input else {}
    box = data.get("box", [-4.0, -4.0, 4.0, 4.0])
    found = locate_fixed_points(box, f, max_depth=args.depth or 12, seed=args.seed)
    fig = None
    if args.svg:
        x0, y0, x1, y1 = box
        fig = Figure((x0, y0, x1, y1), "fixed points")
        fig.polyline([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1), complex(x0, y0)],
                     PALETTE["continuum"])
        if found:
            fig.points([e.center for e in found], PALETTE["image"])
    return {"box": list(box), "enclosures": [e.to_json() for e in found],
            "total_index": sum(e.index for e in found)}, fig


# ---------------------------------------------------------------------------
# KP partitions
# ---------------------------------------------------------------------------

def _kp_figure(K: PolyContinuum, title: str) -> Figure:
    fig = Figure(bounds_of(K.vertices), title)
    fig.continuum(K)
    return fig


def cmd_kp_partition(args):
    K = _continuum(_load(args.input, "input"))
    rng = np.random.default_rng(args.seed)
    x0, y0, x1, y1 = K.bbox()
    w, h = x1 - x0, y1 - y0
    n = args.samples or 200
    pts = []
    while len(pts) < n:
        z = complex(rng.uniform(x0 - w, x1 + w), rng.uniform(y0 - h, y1 + h))
        if not K.in_hull([z], 1e-6)[0] and float(K.distance([z])[0]) > 1e-6:
            pts.append(z)
    rep = kp.partition_check(K, pts)
    fig = None
    if args.svg:
        fig = _kp_figure(K, "partition check")
        fig.points(pts, PALETTE["curve"], 4)
        if rep.disagreements:
            fig.points(list(rep.disagreements), PALETTE["image"], 16)
    return rep.to_json(), fig


def cmd_kp_locate(args):
    K = _continuum(_load(args.input, "input"))
    p = _point(args.point)
    el = kp.kp_locate(p, K)
    fig = None
    if args.svg:
        fig = _kp_figure(K, "KP element")
        fig.ball(el.ball)
        for g in el.distinct_chords:
            fig.polyline(g.polyline(far=fig.far), PALETTE["chord"], lw=1.5)
        fig.points([p], PALETTE["image"])
    return {"point": _xy(p), "element": el.to_json(far=10 * K.scale())}, fig


def cmd_kp_balls(args):
    K = _continuum(_load(args.input, "input"))
    if args.budget:
        balls = kp.maximal_balls(K, budget=args.budget)
        out = [b.to_json() for b in balls]
        shown = [b.ball for b in balls]
    else:
        els = kp.gap_balls(K)
        out = [e.to_json(far=10 * K.scale()) for e in els]
        shown = [e.ball for e in els]
    fig = None
    if args.svg:
        fig = _kp_figure(K, "maximal balls")
        for B in shown:
            fig.ball(B)
    return {"balls": out, "count": len(out)}, fig


# ---------------------------------------------------------------------------
# Schoenflies extension
# ---------------------------------------------------------------------------

def cmd_schoenflies(args):
    data = _load(args.input, "input")
    src = PolyCurve(as_complex_array(data["source"]), closed=True)
    dst = PolyCurve(as_complex_array(data["target"]), closed=True)
    if "src_knots" in data:
        h = BoundaryMap(src, dst, np.asarray(data["src_knots"], float), np.asarray(data["dst_knots"], float))
    else:
        h = BoundaryMap.vertex_map(src, dst, int(data.get("shift", 0)))
    H = extend_homeomorphism(h, budget=args.budget or 64)
    grid = grid_in_polygon(src, args.samples or 40)
    img = evaluate(H, grid)
    bpts = src.point_at(np.linspace(0, 1, 257)[:-1])
    bdev = float(np.abs(evaluate(H, bpts) - h(bpts)).max())
    report = {"faces": len(H.faces), "chords": len(H.lamination.chords), "samples": len(grid),
              "injective": injectivity_probe(img), "boundary_deviation": bdev,
              "lamination": H.lamination.to_json()}
    fig = None
    if args.svg:
        fig = Figure(bounds_of(dst.vertices, src.vertices), "Schoenflies extension")
        fig.curve(dst, PALETTE["continuum"])
        for a, b in H.lamination.chords:
            fig.polyline([a, b], PALETTE["chord"], lw=0.6)
        fig.points(img, PALETTE["image"], 2)
    return report, fig


# ---------------------------------------------------------------------------
# Laminations
# ---------------------------------------------------------------------------

def _lamination(args) -> lam.FiniteLamination:
    return lam.FiniteLamination.from_json(_load(args.input, "input"))


def cmd_lam_check(args):
    L = _lamination(args)
    fig = lamination_figure(L.classes, "lamination") if args.svg else None
    return {"lamination": L.to_json(), "axioms": lam.check_invariant(L).to_json()}, fig


def cmd_lam_refine(args):
    L = lam.refine(_lamination(args), args.depth if args.depth is not None else 1)
    fig = lamination_figure(L.classes, "refined lamination") if args.svg else None
    return {"lamination": L.to_json(), "axioms": lam.check_invariant(L).to_json()}, fig


def cmd_lam_quotient(args):
    L = _lamination(args)
    T = lam.quotient_tree(lam.refine(L, args.depth) if args.depth else L)
    out = T.to_json()
    fixed = [k for k in range(len(T.vertices)) if T.induced[k] == k and T.valence(k) >= 2]
    out["repulsion"] = [lam.weakly_repelling_certificate(T, k).to_json() for k in fixed]
    fig = graph_figure([v.name for v in T.vertices], T.edges, "quotient tree") if args.svg else None
    return out, fig


def cmd_lam_periodic(args):
    L = _lamination(args)
    leaves = set()
    for c in L.classes:
        sides = [(c[k], c[(k + 1) % len(c)]) for k in range(len(c))] if len(c) > 2 else [c]
        leaves.update(lam.make_class(s) for s in sides)
    leaf = lam.find_periodic_leaf(sorted(leaves), L.degree)
    fig = lamination_figure(leaf.orbit, "periodic leaf orbit") if args.svg else None
    return leaf.to_json(), fig


# ---------------------------------------------------------------------------
# Dendrites
# ---------------------------------------------------------------------------

def _tree_map(args) -> dd.TreeMap:
    return dd.TreeMap.from_json(_load(args.input, "input"))


def _tree_figure(f: dd.TreeMap, title: str):
    T = f.tree
    names = list(T.vertices)
    idx = {v: k for k, v in enumerate(names)}
    return graph_figure(names, [(idx[u], idx[v]) for u, v, _ in T.edges], title)


def cmd_dendrite_fix(args):
    f = _tree_map(args)
    res = dd.find_fixed_point(f)
    return res.to_json(), (_tree_figure(f, "fixed point") if args.svg else None)


def cmd_dendrite_scramble(args):
    f = _tree_map(args)
    res = dd.check_scrambling(f)
    return res.to_json(), (_tree_figure(f, "boundary scrambling") if args.svg else None)


def cmd_dendrite_cutpoints(args):
    f = _tree_map(args)
    pts = dd.periodic_cutpoints(f, args.depth or 3)
    return {"cutpoints": [p.to_json() for p in pts]}, (_tree_figure(f, "periodic cutpoints") if args.svg else None)


# ---------------------------------------------------------------------------
# Polynomials
# ---------------------------------------------------------------------------

def _polynomial(args):
    P = map_from_json(_load(args.map, "map"))
    if not isinstance(P, pd.PolynomialMap):
        raise UsageError("--map must be a polynomial")
    return P


def cmd_poly_fixed(args):
    P = _polynomial(args)
    recs = pd.fixed_points(P)
    fig = None
    if args.svg:
        pts = [r.location for r in recs]
        fig = Figure(bounds_of(pts + [pts[0] + 1, pts[0] - 1]), "fixed points")
        fig.points(pts, PALETTE["image"])
    return {"fixed_points": [r.to_json() for r in recs]}, fig


def cmd_poly_index(args):
    P = _polynomial(args)
    p = _point(args.point)
    if abs(complex(P(p)) - p) > (args.tol or 1e-7):
        raise UsageError("--point is not a fixed point")
    return {"point": _xy(p), "local_index": pd.local_index(P, p)}, None


def cmd_poly_argcheck(args):
    P = _polynomial(args)
    S = _closed_curve(_load(args.input, "input"))
    rep = pd.argument_principle_check(P, S)
    fig = None
    if args.svg:
        fig = Figure(bounds_of(S.vertices), "argument principle")
        fig.curve(S)
        if rep.local:
            fig.points([z for z, _ in rep.local], PALETTE["image"])
    return rep.to_json(), fig


def cmd_poly_ray(args):
    P = _polynomial(args)
    ray = pd.trace_external_ray(P, _angle(args.angle), generations=args.depth or 40)
    out = ray.to_json(args.tol or 1e-9)
    fig = None
    if args.svg:
        fig = Figure(bounds_of(ray.trace[ray.per_generation:]), f"external ray {out['angle']}")
        fig.polyline(ray.trace, PALETTE["ray"], lw=1.2)
        land = pd.landing_point(ray, args.tol or 1e-9)
        if isinstance(land, complex):
            fig.points([land])
    return out, fig


def cmd_poly_scramble(args):
    P = map_from_json(_load(args.map, "map"))
    data = _load(args.input, "input")
    X = _continuum(data["X"])
    zones = [_continuum(z) for z in data.get("zones", [])]
    rep = pd.check_scrambling(pd.ScrambleConfig(X, zones, P), samples=args.samples or 400)
    fig = None
    if args.svg:
        fig = Figure(bounds_of(X.vertices, *[Z.vertices for Z in zones]), "boundary scrambling")
        fig.continuum(X)
        for Z in zones:
            fig.continuum(Z)
        if rep.witness is not None:
            fig.points([rep.witness], PALETTE["image"], 20)
    return rep.to_json(), fig


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--input", metavar="FILE")
    p.add_argument("--map", metavar="FILE")
    p.add_argument("--out", metavar="FILE.json")
    p.add_argument("--svg", metavar="FILE.svg")
    p.add_argument("--samples", type=int, metavar="N")
    p.add_argument("--budget", type=int, metavar="N")
    p.add_argument("--depth", type=int, metavar="N")
    p.add_argument("--tol", type=float, metavar="X")
    p.add_argument("--seed", type=int, default=0, metavar="N")
    p.add_argument("--point", metavar="X,Y")
    p.add_argument("--angle", metavar="P/Q")
    return p


COMMANDS = {
    ("index",): cmd_index,
    ("variation",): cmd_variation,
    ("ivp1",): cmd_ivp1,
    ("lollipop",): cmd_lollipop,
    ("fixed-points",): cmd_fixed_points,
    ("kp", "partition"): cmd_kp_partition,
    ("kp", "locate"): cmd_kp_locate,
    ("kp", "balls"): cmd_kp_balls,
    ("schoenflies",): cmd_schoenflies,
    ("lam", "check"): cmd_lam_check,
    ("lam", "refine"): cmd_lam_refine,
    ("lam", "quotient"): cmd_lam_quotient,
    ("lam", "periodic"): cmd_lam_periodic,
    ("dendrite", "fix"): cmd_dendrite_fix,
    ("dendrite", "scramble"): cmd_dendrite_scramble,
    ("dendrite", "cutpoints"): cmd_dendrite_cutpoints,
    ("poly", "fixed"): cmd_poly_fixed,
    ("poly", "index"): cmd_poly_index,
    ("poly", "argcheck"): cmd_poly_argcheck,
    ("poly", "ray"): cmd_poly_ray,
    ("poly", "scramble"): cmd_poly_scramble,
}


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="planefix", description="Fixed-point tools for plane maps.")
    sub = parser.add_subparsers(dest="command", required=True)
    groups: dict[str, argparse._SubParsersAction] = {}
    for key, fn in COMMANDS.items():
        if len(key) == 1:
            p = sub.add_parser(key[0], parents=[common])
        else:
            if key[0] not in groups:
                g = sub.add_parser(key[0])
                groups[key[0]] = g.add_subparsers(dest="action", required=True)
            p = groups[key[0]].add_parser(key[1], parents=[common])
        p.set_defaults(handler=fn)
    return parser


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, default=_jsonable) + "\n"


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        report, fig = args.handler(args)
        text = dumps(report)
    except NUMERICAL as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (UsageError, GeometryError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if fig is not None:
        fig.save(args.svg)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
