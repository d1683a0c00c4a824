"""Planar primitives shared by the rest of the package.

Points are Python/numpy complex numbers throughout; ``x + iy`` is the point
``(x, y)``.  All routines are pure and operate on immutable values.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

EPS_GEOM = 1e-9
N_ARC = 64


class GeometryError(ValueError):
    """Base class for validation failures raised by geometric routines."""


class PointOnCurve(GeometryError):
    pass


class AtCenter(GeometryError):
    pass


class NotOnBoundary(GeometryError):
    pass


class DegenerateRegion(GeometryError):
    pass


def as_complex_array(points: Iterable) -> np.ndarray:
    arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points)
    if arr.ndim == 2 and arr.shape[1] == 2 and not np.iscomplexobj(arr):
        arr = arr[:, 0] + 1j * arr[:, 1]
    return arr.astype(complex).ravel()


def cross(a, b):
    return (np.conj(a) * b).imag


def dot(a, b):
    return (np.conj(a) * b).real


# ---------------------------------------------------------------------------
# Balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    """A closed round ball of the sphere seen in the plane chart.

    ``kind`` is one of ``"disk"`` (``|z-c| <= r``), ``"exterior"``
    (``|z-c| >= r``, contains infinity) or ``"halfplane"``
    (``Re(conj(normal) * (z - center)) >= 0``; ``center`` is any point on
    the boundary line and ``normal`` the unit inward normal).
    """

    kind: str
    center: complex
    radius: float = 0.0
    normal: complex = 0j

    def __post_init__(self):
        if self.kind not in ("disk", "exterior", "halfplane"):
            raise ValueError(f"unknown ball kind {self.kind!r}")
        if self.kind == "halfplane":
            if abs(abs(self.normal) - 1.0) > 1e-9:
                raise ValueError("half-plane normal must be a unit vector")
        elif self.radius < 0 or not math.isfinite(self.radius):
            raise ValueError("radius must be finite and non-negative")

    @classmethod
    def halfplane(cls, point: complex, inward_normal: complex) -> "Ball":
        n = complex(inward_normal)
        n /= abs(n)
        # canonical boundary point: foot of the origin
        p = complex(point)
        foot = dot(n, p) * n
        return cls("halfplane", foot, 0.0, n)

    @property
    def degenerate(self) -> bool:
        return self.kind != "halfplane" and self.radius == 0.0

    def signed_depth(self, z):
        """Positive in the interior, zero on the boundary, negative outside."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return self.radius - np.abs(z - self.center)
        if self.kind == "exterior":
            return np.abs(z - self.center) - self.radius
        return dot(self.normal, z - self.center)

    def contains(self, z, tol: float = EPS_GEOM):
        return self.signed_depth(z) >= -tol

    def interior_contains(self, z, tol: float = EPS_GEOM):
        return self.signed_depth(z) > tol

    def on_boundary(self, z, tol: float = EPS_GEOM):
        return np.abs(self.signed_depth(z)) <= tol

    def boundary_angle(self, z):
        """Circular coordinate of boundary points, increasing along the
        positively oriented boundary (ball on the left)."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return np.mod(np.angle(z - self.center), 2 * np.pi)
        if self.kind == "exterior":
            return np.mod(-np.angle(z - self.center), 2 * np.pi)
        # along the line, direction with the ball on the left
        d = self.normal * -1j
        return dot(d, z - self.center)

    def key(self) -> tuple:
        if self.kind == "halfplane":
            return (2, self.normal.real, self.normal.imag, dot(self.normal, self.center))
        return (0 if self.kind == "disk" else 1, self.center.real, self.center.imag, self.radius)

    def same_as(self, other: "Ball", tol: float = 1e-6) -> bool:
        if self.kind != other.kind:
            return False
        if self.kind == "halfplane":
            return (abs(self.normal - other.normal) <= tol
                    and abs(dot(self.normal, self.center) - dot(other.normal, other.center)) <= tol)
        scale = max(1.0, self.radius)
        return (abs(self.center - other.center) <= tol * scale
                and abs(self.radius - other.radius) <= tol * scale)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == "halfplane":
            out["point"] = [self.center.real, self.center.imag]
            out["normal"] = [self.normal.real, self.normal.imag]
        else:
            out["center"] = [self.center.real, self.center.imag]
            out["radius"] = self.radius
        return out


def ball_through(a: complex, b: complex, tangent_angle: float) -> Ball:
    """The ball whose boundary passes through ``a`` and ``b`` and which lies
    to the left of its boundary tangent at ``a``.

    The tangent direction at ``a`` makes angle ``tangent_angle`` with ``b - a``;
    sweeping the angle over ``[0, 2*pi)`` visits every ball with ``a, b`` on
    its boundary exactly once (half-planes at ``0`` and ``pi``).
    """
    ab = b - a
    d = ab / abs(ab) * complex(math.cos(tangent_angle), math.sin(tangent_angle))
    left = 1j * d
    denom = 2 * dot(left, a - b)
    if abs(denom) <= 1e-14 * abs(ab):
        return Ball.halfplane(a, left)
    s = -abs(ab) ** 2 / denom
    c = a + s * left
    return Ball("disk" if s > 0 else "exterior", c, abs(s))


# ---------------------------------------------------------------------------
# Curves and continua
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PolyCurve:
    """Polyline (``closed=False``) or polygon (``closed=True``)."""

    vertices: np.ndarray
    closed: bool = False

    def __post_init__(self):
        v = as_complex_array(self.vertices)
        if self.closed and len(v) > 1 and abs(v[0] - v[-1]) <= EPS_GEOM:
            v = v[:-1]
        if len(v) < 2:
            raise DegenerateRegion("a curve needs at least two vertices")
        steps = np.abs(np.diff(np.concatenate([v, v[:1]]) if self.closed else v))
        if np.any(steps <= EPS_GEOM):
            raise DegenerateRegion("consecutive vertices coincide")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @cached_property
    def path(self) -> np.ndarray:
        """Vertex sequence with the first vertex repeated when closed."""
        v = self.vertices
        return np.concatenate([v, v[:1]]) if self.closed else v

    @cached_property
    def segments(self) -> np.ndarray:
        p = self.path
        return np.stack([p[:-1], p[1:]], axis=1)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.abs(np.diff(self.path))

    @property
    def length(self) -> float:
        return float(self.lengths.sum())

    @cached_property
    def knots(self) -> np.ndarray:
        """Normalized arclength parameter of each vertex (``path`` order)."""
        cum = np.concatenate([[0.0], np.cumsum(self.lengths)])
        return cum / cum[-1]

    def signed_area(self) -> float:
        p = self.path
        return 0.5 * float(cross(p[:-1], p[1:]).sum())

    def point_at(self, t):
        """Point at normalized arclength ``t`` (taken mod 1 when closed)."""
        t = np.asarray(t, dtype=float)
        if self.closed:
            t = np.mod(t, 1.0)
        knots = self.knots
        p = self.path
        return np.interp(t, knots, p.real) + 1j * np.interp(t, knots, p.imag)

    def param_of(self, z: complex, tol: float = 1e-7) -> float:
        """Arclength parameter of a point lying on the curve."""
        segs = self.segments
        a, b = segs[:, 0], segs[:, 1]
        ab = b - a
        u = np.clip(dot(ab, z - a) / np.abs(ab) ** 2, 0.0, 1.0)
        dist = np.abs(a + u * ab - z)
        i = int(np.argmin(dist))
        if dist[i] > tol * max(1.0, abs(z)):
            raise NotOnBoundary(f"point {z} is not on the curve")
        knots = self.knots
        t = knots[i] + u[i] * (knots[i + 1] - knots[i])
        return float(t % 1.0) if self.closed else float(t)

    def reversed(self) -> "PolyCurve":
        return PolyCurve(self.vertices[::-1].copy(), self.closed)

    def ccw(self) -> "PolyCurve":
        if self.closed and self.signed_area() < 0:
            return self.reversed()
        return self

    def distance(self, z) -> np.ndarray:
        return segments_distance(self.segments, z)

    def subarc(self, t0: float, t1: float) -> np.ndarray:
        """Vertices of the counterclockwise subarc from parameter t0 to t1."""
        if self.closed:
            t0 %= 1.0
            t1 %= 1.0
            if t1 <= t0:
                t1 += 1.0
        knots = self.knots
        inner = []
        for k in (0.0, 1.0) if self.closed else (0.0,):
            sel = knots[:-1] + k if self.closed else knots
            inner.extend(t for t in sel if t0 < t < t1)
        ts = np.array([t0] + sorted(inner) + [t1])
        return self.point_at(ts)


def polygon(points: Sequence) -> PolyCurve:
    return PolyCurve(as_complex_array(points), closed=True).ccw()


def regular_polygon(n: int, radius: float = 1.0, center: complex = 0j, phase: float = 0.0) -> PolyCurve:
    k = np.arange(n)
    return PolyCurve(center + radius * np.exp(1j * (phase + 2 * np.pi * k / n)), closed=True)


@dataclass(frozen=True)
class PolyContinuum:
    """Polygonal compact set.

    ``kind="polygon"``: the filled region bounded by a single simple closed
    curve.  ``kind="tree"``: the union of straight edges (a connected
    acyclic graph).  ``kind="union"``: any finite union of polygons and
    polylines; polygons are filled.
    """

    kind: str
    curves: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind not in ("polygon", "tree", "union"):
            raise ValueError(f"unknown continuum kind {self.kind!r}")
        curves = tuple(c.ccw() if c.closed else c for c in self.curves)
        if not curves:
            raise DegenerateRegion("empty continuum")
        if self.kind == "polygon" and (len(curves) != 1 or not curves[0].closed):
            raise ValueError("a polygon continuum is a single closed curve")
        object.__setattr__(self, "curves", curves)

    @classmethod
    def from_polygon(cls, points) -> "PolyContinuum":
        return cls("polygon", (polygon(points),))

    @classmethod
    def from_polyline(cls, points) -> "PolyContinuum":
        return cls("tree", (PolyCurve(as_complex_array(points), closed=False),))

    @classmethod
    def from_edges(cls, edges) -> "PolyContinuum":
        return cls("tree", tuple(PolyCurve(as_complex_array(e), closed=False) for e in edges))

    @cached_property
    def segments(self) -> np.ndarray:
        return np.concatenate([c.segments for c in self.curves])

    @cached_property
    def vertices(self) -> np.ndarray:
        v = np.concatenate([c.vertices for c in self.curves])
        # merge shared tree vertices
        out = []
        for z in v:
            if all(abs(z - w) > EPS_GEOM for w in out):
                out.append(z)
        return np.array(out)

    @property
    def filled(self) -> list[PolyCurve]:
        return [c for c in self.curves if c.closed]

    def scale(self) -> float:
        v = self.vertices
        return float(max(np.ptp(v.real), np.ptp(v.imag), 1e-12))

    def bbox(self) -> tuple[float, float, float, float]:
        v = self.vertices
        return float(v.real.min()), float(v.imag.min()), float(v.real.max()), float(v.imag.max())

    def distance(self, z) -> np.ndarray:
        return segments_distance(self.segments, z)

    def in_hull(self, z, tol: float = EPS_GEOM) -> np.ndarray:
        """Membership in the topological hull: on an edge or inside a polygon."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        inside = self.distance(z) <= tol
        for c in self.filled:
            inside |= winding_numbers(c, z, check=False) != 0
        return inside

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "curves": [
                {"closed": c.closed, "vertices": [[v.real, v.imag] for v in c.vertices]}
                for c in self.curves
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "PolyContinuum":
        curves = tuple(PolyCurve(as_complex_array(c["vertices"]), bool(c.get("closed", False)))
                       for c in data["curves"])
        return cls(data.get("kind", "union"), curves)


def segments_distance(segments: np.ndarray, z) -> np.ndarray:
    """Distance from each point of ``z`` to the union of segments."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    a = segments[:, 0][None, :]
    b = segments[:, 1][None, :]
    ab = b - a
    zz = z[:, None]
    denom = np.where(np.abs(ab) > 0, np.abs(ab) ** 2, 1.0)
    u = np.clip(dot(ab, zz - a) / denom, 0.0, 1.0)
    return np.abs(a + u * ab - zz).min(axis=1)


def segment_hits(p0: complex, p1: complex, segments: np.ndarray, tol: float = 0.0):
    """Parameters ``(s, t)`` of proper intersections of ``[p0, p1]`` with each
    segment (``s`` along ``[p0, p1]``).  Parallel overlaps are ignored."""
    a, b = segments[:, 0], segments[:, 1]
    r = p1 - p0
    q = b - a
    denom = cross(r, q)
    ok = np.abs(denom) > 1e-300
    denom = np.where(ok, denom, 1.0)
    s = cross(a - p0, q) / denom
    t = cross(a - p0, r) / denom
    mask = ok & (s >= -tol) & (s <= 1 + tol) & (t >= -tol) & (t <= 1 + tol)
    return s[mask], t[mask], np.nonzero(mask)[0]


def polylines_cross(p: np.ndarray, q: np.ndarray, tol: float = 0.0) -> bool:
    """True when the two polylines share a point (endpoint contacts count)."""
    segs = np.stack([q[:-1], q[1:]], axis=1)
    for i in range(len(p) - 1):
        s, _, _ = segment_hits(p[i], p[i + 1], segs, tol)
        if len(s):
            return True
    return False


# ---------------------------------------------------------------------------
# Winding numbers
# ---------------------------------------------------------------------------

def _winding_sum(path: np.ndarray, w: np.ndarray) -> np.ndarray:
    d = path[None, :] - w[:, None]
    a, b = d[:, :-1], d[:, 1:]
    # per-edge subtended angle, exactly in (-pi, pi]
    ang = np.arctan2(cross(a, b), dot(a, b))
    return ang.sum(axis=1) / (2 * np.pi)


def winding_numbers(curve: PolyCurve, w, check: bool = True, eps: float = EPS_GEOM) -> np.ndarray:
    """Vectorized :func:`winding_number` over an array of points."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    if not curve.closed:
        raise ValueError("winding number needs a closed curve")
    if check:
        bad = curve.distance(w) <= eps
        if np.any(bad):
            raise PointOnCurve(f"point {w[bad][0]} lies on the curve")
    turns = _winding_sum(curve.path, w)
    k = np.rint(turns)
    if check and np.any(np.abs(turns - k) > 0.1):
        raise PointOnCurve("winding residual too large; point too close to the curve")
    return k.astype(int)


def winding_number(curve: PolyCurve, w: complex, eps: float = EPS_GEOM) -> int:
    """Signed number of counterclockwise turns of ``curve`` around ``w``."""
    return int(winding_numbers(curve, [w], eps=eps)[0])


def path_winding(path: np.ndarray, w: complex = 0j) -> float:
    """Unrounded winding of an arbitrary (closed) vertex path around ``w``."""
    path = np.asarray(path, dtype=complex)
    return float(_winding_sum(path, np.array([w]))[0])


# ---------------------------------------------------------------------------
# Smallest enclosing ball (Welzl, move-to-front incremental form)
# ---------------------------------------------------------------------------

def _circle2(a: complex, b: complex) -> tuple[complex, float]:
    c = (a + b) / 2
    return c, abs(a - c)


def circumcircle(a: complex, b: complex, c: complex) -> tuple[complex, float] | None:
    d = 2 * cross(b - a, c - a)
    if abs(d) < 1e-300:
        return None
    ba, ca = b - a, c - a
    ux = (abs(ba) ** 2 * ca.imag - abs(ca) ** 2 * ba.imag) / d
    uy = (abs(ca) ** 2 * ba.real - abs(ba) ** 2 * ca.real) / d
    center = a + complex(ux, uy)
    return center, abs(center - a)


def _circle3(a, b, c):
    best = None
    for p, q, r in ((a, b, c), (a, c, b), (b, c, a)):
        cc, rr = _circle2(p, q)
        if abs(r - cc) <= rr * (1 + 1e-12) + 1e-15:
            if best is None or rr < best[1]:
                best = (cc, rr)
    if best is not None:
        return best
    cc = circumcircle(a, b, c)
    if cc is None:
        pts = sorted((a, b, c), key=lambda z: (z.real, z.imag))
        return _circle2(pts[0], pts[-1])
    return cc


def _inside(c, r, p):
    return abs(p - c) <= r * (1 + 1e-12) + 1e-15


def smallest_enclosing_ball(points, seed: int = 0) -> Ball:
    """Minimal closed disk containing all points (randomized incremental)."""
    pts = [complex(p) for p in as_complex_array(points)]
    if not pts:
        raise ValueError("need at least one point")
    random.Random(seed).shuffle(pts)
    c, r = pts[0], 0.0
    for i in range(1, len(pts)):
        if _inside(c, r, pts[i]):
            continue
        c, r = pts[i], 0.0
        for j in range(i):
            if _inside(c, r, pts[j]):
                continue
            c, r = _circle2(pts[i], pts[j])
            for k in range(j):
                if not _inside(c, r, pts[k]):
                    c, r = _circle3(pts[i], pts[j], pts[k])
    return Ball("disk", c, r)


# ---------------------------------------------------------------------------
# Inversion and geodesics
# ---------------------------------------------------------------------------

def invert(p, center: complex = 0j, eps: float = EPS_GEOM):
    """Circle inversion in the unit circle about ``center``."""
    d = np.asarray(p, dtype=complex) - center
    if np.any(np.abs(d) <= eps):
        raise AtCenter("cannot invert the center of inversion")
    out = center + d / np.abs(d) ** 2
    return complex(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class Geodesic:
    """Carrier of a hyperbolic geodesic of a ball joining ``a`` to ``b``.

    ``circle`` is ``(center, radius)`` for a circular carrier, or ``None``
    for a straight carrier (a diameter, or a line through infinity).
    """

    ball: Ball
    a: complex
    b: complex
    circle: tuple | None

    def side(self, z):
        """Signed side of ``z`` with respect to the carrier (sign only)."""
        z = np.asarray(z, dtype=complex)
        if self.circle is None:
            return cross(self.b - self.a, z - self.a)
        c, r = self.circle
        return np.abs(z - c) - r

    def distance(self, z):
        z = np.asarray(z, dtype=complex)
        if self.circle is None:
            ab = self.b - self.a
            return np.abs(cross(ab, z - self.a)) / abs(ab)
        c, r = self.circle
        return np.abs(np.abs(z - c) - r)

    def polyline(self, n: int = N_ARC, far: float | None = None) -> np.ndarray:
        """Sampled trace from ``a`` to ``b`` inside the ball.

        Geodesics through infinity are returned as two rays truncated at
        distance ``far`` and joined by a segment at that distance.
        """
        B, a, b = self.ball, self.a, self.b
        if self.circle is None:
            if B.kind == "exterior" or (B.kind == "halfplane"):
                far = far or 10.0 * (abs(a - b) + abs(a) + abs(b))
                u = (a - b) / abs(a - b)
                return np.array([a, a + far * u, b - far * u, b])
            return a + (b - a) * np.linspace(0, 1, n + 1)
        c, r = self.circle
        t0 = np.angle(a - c)
        t1 = np.angle(b - c)
        d = (t1 - t0) % (2 * np.pi)
        mid_ccw = c + r * np.exp(1j * (t0 + d / 2))
        if not B.contains(mid_ccw, tol=1e-9 * max(1.0, r)):
            d -= 2 * np.pi
        return c + r * np.exp(1j * (t0 + d * np.linspace(0, 1, n + 1)))


def geodesic(B: Ball, a: complex, b: complex, tol: float = 1e-7) -> Geodesic:
    """The hyperbolic geodesic of ``B`` with endpoints ``a, b`` on its boundary."""
    scale = max(1.0, abs(a), abs(b), B.radius)
    if not (B.on_boundary(a, tol * scale) and B.on_boundary(b, tol * scale)):
        raise NotOnBoundary("geodesic endpoints must lie on the ball boundary")
    if abs(a - b) <= EPS_GEOM:
        raise NotOnBoundary("geodesic endpoints coincide")
    if B.kind == "halfplane":
        m = (a + b) / 2
        return Geodesic(B, a, b, (m, abs(a - b) / 2))
    c, r = B.center, B.radius
    ua, ub = (a - c) / r, (b - c) / r
    s = ua + ub
    if abs(s) <= 1e-12:
        return Geodesic(B, a, b, None)
    # orthogonal circle: center at the intersection of the tangents at a and b
    cos_half = abs(s) / 2
    q = c + r * (s / abs(s)) / cos_half
    rho = abs(q - a)
    return Geodesic(B, a, b, (q, rho))


def hyperbolic_geodesic(B: Ball, a: complex, b: complex, n_arc: int = N_ARC) -> PolyCurve:
    """Polyline discretization of the geodesic of ``B`` joining ``a`` and ``b``."""
    return PolyCurve(geodesic(B, a, b).polyline(n_arc), closed=False)
