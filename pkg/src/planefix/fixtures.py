"""Randomized admissible configurations with known variation.

A configuration is a star-shaped polygon ``S`` around 0 (radii in
``[0.8, 1.2]``), counterclockwise cut points at polygon vertices, and a
piecewise-linear map on ``S`` whose image of each arc is prescribed:
cut points go into the disk of radius 0.5, and an arc with target
variation ``k`` leaves the hull radially opposite the arc, circles ``k``
times around outside radius 1.3, and comes back.  The variation of each arc
is ``k`` by construction.

Crosscut fixtures: forward-invariant polygonal continua for ``z**2`` and
``z**2 - 1`` and random small bumps leaving them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import PolyContinuum, PolyCurve, regular_polygon
from .index_var import ArcPartition
from .maps import PolylineMap

R_IN = 0.6
R_OUT = 1.45


@dataclass(frozen=True)
class Configuration:
    partition: ArcPartition
    f: PolylineMap
    variations: tuple

    @property
    def curve(self) -> PolyCurve:
        return self.partition.curve

    @property
    def expected_index(self) -> int:
        return int(sum(self.variations)) + 1


def star_polygon(rng: np.random.Generator, n: int = 48, symmetric: bool = False) -> PolyCurve:
    """Random star polygon; vertex 0 lies on the positive real axis and, when
    ``symmetric``, vertex ``n // 2`` on the negative real axis."""
    angles = 2 * np.pi * (np.arange(n) + rng.uniform(-0.3, 0.3, n)) / n
    angles[0] = 0.0
    if symmetric:
        angles[n // 2] = np.pi
    k = np.arange(1, 4)
    a = rng.normal(0, 0.06, 3)
    b = rng.normal(0, 0.06, 3)
    radii = 1.0 + (a[None, :] * np.cos(np.outer(angles, k)) + b[None, :] * np.sin(np.outer(angles, k))).sum(1)
    radii = np.clip(radii + rng.uniform(-0.03, 0.03, n), 0.8, 1.2)
    return PolyCurve(radii * np.exp(1j * angles), closed=True)


def _turn(mu: float, radius0: float, sweep: float, grow: float = 0.02) -> np.ndarray:
    """Points outside the hull sweeping angle ``sweep`` from angle ``mu``."""
    m = max(2, int(np.ceil(abs(sweep) / (np.pi / 24))))
    s = np.linspace(0, 1, m + 1)
    radius = radius0 + grow * abs(sweep) / (2 * np.pi) * s
    return radius * np.exp(1j * (mu + sweep * s))


def arc_image(start: complex, end: complex, mid_angle: float, variation: int, style: str,
              rng: np.random.Generator) -> np.ndarray:
    """Image polyline of one arc, from ``start`` to ``end`` (both inside radius 0.5)."""
    home = mid_angle + np.pi
    if style == "inside" and variation == 0:
        return np.array([start, end])
    pts = [start, R_IN * np.exp(1j * home)]
    r0 = R_OUT + rng.uniform(0, 0.2)
    if variation == 0:
        # excursion that turns back before reaching the arc's direction
        sweep = rng.choice([-1, 1]) * rng.uniform(0.2, 0.45) * np.pi
        out = _turn(home, r0, sweep)
        back = _turn(home + sweep, r0 + 0.05, -sweep)
        pts += [r0 * np.exp(1j * home)] + list(out) + list(back) + [R_IN * np.exp(1j * home)]
    elif style == "wiggle":
        # pass the arc direction, come back over it, pass again
        sign = int(np.sign(variation))
        first = sign * (np.pi + 0.3)
        second = -sign * 0.6
        third = 2 * np.pi * variation - first - second
        r = r0
        pts.append(r * np.exp(1j * home))
        angle = home
        for sweep in (first, second, third):
            seg = _turn(angle, r, sweep)
            pts += list(seg[1:])
            angle += sweep
            r = abs(seg[-1]) + 0.03
            pts.append(r * np.exp(1j * angle))
        pts.append(R_IN * np.exp(1j * angle))
    else:
        sweep = 2 * np.pi * variation
        seg = _turn(home, r0, sweep, grow=0.05)
        pts += [r0 * np.exp(1j * home)] + list(seg[1:]) + [R_IN * np.exp(1j * (home + sweep))]
    pts.append(end)
    out = np.array(pts)
    keep = np.concatenate([[True], np.abs(np.diff(out)) > 1e-12])
    return out[keep]


def random_cuts(rng: np.random.Generator, S: PolyCurve, n_arcs: int, max_gap: float = 0.9 * np.pi,
                fixed: tuple = (0,)) -> list[int]:
    """Vertex indices of cut points; every arc spans less than ``max_gap``."""
    n = len(S.vertices)
    angles = np.mod(np.angle(S.vertices), 2 * np.pi)
    for _ in range(1000):
        extra = rng.choice(np.arange(1, n), size=n_arcs - len(fixed), replace=False)
        cuts = sorted(set(fixed) | set(int(e) for e in extra))
        if len(cuts) != n_arcs:
            continue
        a = angles[cuts]
        gaps = np.diff(np.concatenate([a, [a[0] + 2 * np.pi]]))
        if gaps.max() < max_gap and gaps.min() > 0.15:
            return cuts
    raise RuntimeError("could not place cut points")


def random_configuration(rng: np.random.Generator, n_arcs: int | None = None,
                         variations: tuple | None = None, styles: tuple | None = None,
                         symmetric: bool = False, fixed: tuple = (0,)) -> Configuration:
    S = star_polygon(rng, symmetric=symmetric)
    if n_arcs is None:
        n_arcs = len(variations) if variations is not None else int(rng.integers(3, 7))
    cuts = random_cuts(rng, S, n_arcs, fixed=fixed)
    if variations is None:
        variations = tuple(int(v) for v in rng.choice([-2, -1, 0, 0, 0, 1, 2], size=n_arcs))
    if styles is None:
        styles = tuple(rng.choice(["plain", "inside", "wiggle"]) for _ in range(n_arcs))
    knots_S = S.knots
    ends = 0.5 * np.sqrt(rng.uniform(0, 1, n_arcs)) * np.exp(2j * np.pi * rng.uniform(0, 1, n_arcs))
    knots, image = [], []
    for k in range(n_arcs):
        i0, i1 = cuts[k], cuts[(k + 1) % n_arcs]
        t0 = knots_S[i0]
        t1 = knots_S[i1] if i1 != cuts[0] else 1.0
        a0 = np.angle(S.vertices[i0])
        span = (np.angle(S.vertices[i1]) - a0) % (2 * np.pi)
        mid = a0 + span / 2
        img = arc_image(ends[k], ends[(k + 1) % n_arcs], mid, variations[k], styles[k], rng)
        s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(img)))])
        s = s / s[-1] if s[-1] > 0 else np.linspace(0, 1, len(img))
        ts = t0 + (t1 - t0) * s
        if k:
            ts, img = ts[1:], img[1:]
        knots.extend(ts)
        image.extend(img)
    f = PolylineMap.on_curve(S, np.array(knots), np.array(image))
    partition = ArcPartition(S, tuple(S.vertices[c] for c in cuts))
    return Configuration(partition, f, tuple(variations))


@dataclass(frozen=True)
class LollipopConfiguration:
    partition: ArcPartition
    stick_end: int
    stick: PolyCurve
    f: PolylineMap
    variations: tuple


def random_lollipop(rng: np.random.Generator, n_arcs: int | None = None) -> LollipopConfiguration:
    """Configuration plus a stick along the real axis from the cut point at
    angle 0 to the one at angle pi.

    The stick's image is a segment when both end images are on the same
    side of the real axis, and otherwise detours around the far end of the
    stick through -1.5 (outside the hull, away from the junction at angle 0).
    """
    n = 48
    if n_arcs is None:
        n_arcs = int(rng.integers(4, 8))
    base = random_configuration(rng, n_arcs=n_arcs, symmetric=True, fixed=(0, n // 2))
    S, f = base.curve, base.f
    cuts = base.partition.cuts
    stick_end = int(np.argmin(np.abs(np.array(cuts) - S.vertices[n // 2])))
    a0, an = cuts[0], cuts[stick_end]
    stick = PolyCurve(np.array([a0, 0j, an]), closed=False)
    f0 = complex(f.eval_param(0, 0.0))
    fn = complex(f.eval_param(0, S.param_of(an)))
    if np.sign(f0.imag) == np.sign(fn.imag):
        image = np.array([f0, fn])
    else:
        image = np.array([f0, -1.5 + 0j, fn])
    s = np.concatenate([[0.0], np.cumsum(np.abs(np.diff(image)))])
    f = f.with_piece(stick, s / s[-1], image)
    return LollipopConfiguration(base.partition, stick_end, stick, f, base.variations)


def disk_continuum(n: int = 64) -> PolyContinuum:
    """Inscribed ``n``-gon of the unit circle; invariant under ``z**2`` for even ``n``."""
    return PolyContinuum("polygon", (regular_polygon(n),))


def basilica_core(n: int = 48) -> PolyContinuum:
    """Polygonal disks about the superattracting cycle ``0 <-> -1`` of
    ``z**2 - 1`` (radii 0.25 and 0.1) joined along the real axis.

    The squares of the radii and ``2 * 0.1 + 0.1**2`` fit inside the
    inradii, so ``z**2 - 1`` maps the set into itself.
    """
    big = regular_polygon(n, 0.25)
    small = regular_polygon(n, 0.1, -1 + 0j)
    stem = PolyCurve(np.array([-0.9 + 0j, -0.25 + 0j]), closed=False)
    return PolyContinuum("union", (big, small, stem))


def bump(curve: PolyCurve, t0: float, t1: float, height: float, n: int = 6) -> PolyCurve:
    """Crosscut from ``curve(t0)`` to ``curve(t1)`` running at distance
    ``height`` to the right of the curve (outside for a counterclockwise
    closed curve; pass a negative height for the left side of a polyline)."""
    ts = np.linspace(t0, t1, n)
    base = curve.point_at(ts)
    tangent = base[-1] - base[0]
    lifted = base + height * (-1j) * tangent / abs(tangent)
    return PolyCurve(np.concatenate([[base[0]], lifted, [base[-1]]]), closed=False)


def random_bumps(rng: np.random.Generator, X: PolyContinuum, count: int,
                 width: tuple = (0.01, 0.05), height: tuple = (0.2, 0.6)) -> list[PolyCurve]:
    """Small crosscuts of ``X``: a random stretch of one of its curves
    (fraction ``width`` of its length) with a bump ``height * width * length`` high."""
    out = []
    curves = X.curves
    while len(out) < count:
        c = curves[int(rng.integers(0, len(curves)))]
        w = rng.uniform(*width)
        t0 = rng.uniform(0.0, 1.0 - w) if not c.closed else rng.uniform(0.0, 1.0)
        t1 = t0 + w
        if t1 > 1.0:
            continue
        h = rng.uniform(*height) * w * c.length
        side = 1.0 if c.closed else float(rng.choice([-1.0, 1.0]))
        out.append(bump(c, t0, t1, side * h))
    return out


__all__ = ["Configuration", "LollipopConfiguration", "random_lollipop", "star_polygon", "arc_image", "random_cuts", "random_configuration",
           "disk_continuum", "basilica_core", "bump", "random_bumps"]
