"""Degree, fixed-point index and variation of plane maps on polygonal curves.

The index of ``f`` on a closed curve ``S`` is the winding number of
``z -> f(z) - z`` around 0.  The variation of ``f`` on an arc counts signed
passages of the image of the arc across a junction (three disjoint rays
leaving the curve at one point).  For admissible partitions the two are tied
by ``index = total variation + 1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geom import (
    EPS_GEOM,
    GeometryError,
    PolyContinuum,
    PolyCurve,
    cross,
    dot,
    segment_hits,
    segments_distance,
    winding_numbers,
)
from .maps import PlaneMap, PolylineMap

EPS_FIX = 1e-7
MAX_SAMPLES = 1 << 16


class FixedPointOnCurve(GeometryError):
    pass


class InsufficientSamples(GeometryError):
    pass


class NoEscapePath(GeometryError):
    pass


class ArcNotMovedOff(GeometryError):
    pass


class EndpointEscapes(GeometryError):
    pass


class HypothesisFailed(GeometryError):
    pass


class BoundaryFixedPoint(GeometryError):
    pass


# ---------------------------------------------------------------------------
# Degree of circle maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CircleMapSamples:
    """Samples ``(t, g(t))`` of a map from R/Z to the unit circle."""

    t: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float)
        v = np.asarray(self.values, dtype=complex)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("t and values must be 1-d arrays of equal length")
        if np.any(np.diff(t) <= 0) or t[0] < 0 or t[-1] >= 1:
            raise ValueError("sample parameters must increase within [0, 1)")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, g, n: int = 16) -> "CircleMapSamples":
        t = np.arange(n) / n
        return cls(t, g(t))


def _angle_steps(values: np.ndarray) -> np.ndarray:
    closed = np.concatenate([values, values[:1]])
    return np.angle(closed[1:] / closed[:-1])


def circle_map_degree(g: CircleMapSamples, evaluator=None, max_samples: int = MAX_SAMPLES) -> int:
    """Degree of a circle map from its samples (lift difference over one turn).

    With ``evaluator`` (a callable ``t -> g(t)``) the samples are refined
    until consecutive values are less than a quarter turn apart.
    """
    t, v = g.t, g.values
    if len(t) < 8 and evaluator is None:
        raise InsufficientSamples("need at least 8 samples without an evaluator")
    if np.any(np.abs(v) == 0):
        raise ValueError("circle map samples must be nonzero")
    v = v / np.abs(v)
    while True:
        steps = _angle_steps(v)
        bad = np.abs(steps) >= np.pi / 2
        if len(t) >= 8 and not bad.any():
            break
        if evaluator is None:
            raise InsufficientSamples("adjacent samples are a quarter turn or more apart")
        if len(t) >= max_samples:
            raise InsufficientSamples("refinement budget exhausted")
        tt = np.concatenate([t, [1.0]])
        if len(t) < 8:
            bad[:] = True
        mids = (tt[:-1][bad] + tt[1:][bad]) / 2
        new = np.asarray(evaluator(mids), dtype=complex)
        t = np.concatenate([t, mids])
        v = np.concatenate([v, new / np.abs(new)])
        order = np.argsort(t)
        t, v = t[order], v[order]
    return int(round(steps.sum() / (2 * np.pi)))


# ---------------------------------------------------------------------------
# Sampling maps along curves
# ---------------------------------------------------------------------------

def _evaluate_on_curve(S: PolyCurve, f: PlaneMap, ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    z = S.point_at(ts)
    if isinstance(f, PolylineMap):
        piece = f.piece_for(S)
        if piece is not None:
            return z, f.eval_param(piece, ts)
    return z, np.asarray(f(z), dtype=complex)


def _initial_params(S: PolyCurve, f: PlaneMap, t0: float, t1: float, n0: int) -> np.ndarray:
    ts = [np.linspace(t0, t1, n0 + 1)]
    shifts = (-1.0, 0.0, 1.0) if S.closed else (0.0,)
    extra = np.concatenate([S.knots, f.breakpoints(S)])
    for k in shifts:
        e = extra + k
        ts.append(e[(e > t0) & (e < t1)])
    out = np.unique(np.concatenate(ts))
    # drop near-duplicates that would make zero-length steps
    keep = np.concatenate([[True], np.diff(out) > 1e-13])
    keep[-1] = True
    return out[keep]


@dataclass(frozen=True)
class CurveSample:
    """Parameters, points and displacement ``f(z) - z`` along an arc."""

    t: np.ndarray
    z: np.ndarray
    image: np.ndarray
    exact: bool

    @property
    def displacement(self) -> np.ndarray:
        return self.image - self.z


def sample_displacement(S: PolyCurve, f: PlaneMap, t0: float = 0.0, t1: float = 1.0,
                        n0: int = 64, eps_fix: float = EPS_FIX,
                        max_samples: int = MAX_SAMPLES) -> CurveSample:
    """Sample ``f(z) - z`` along ``S`` between parameters ``t0 < t1``.

    Piecewise-linear maps sampled at all breakpoints give an exact
    displacement polygon.  Otherwise intervals are bisected until
    ``|w_{i+1} - w_i| < 0.5 * min(|w_i|, |w_{i+1}|)``, which certifies that
    the displacement cannot wind around 0 between samples.
    """
    ts = _initial_params(S, f, t0, t1, n0)
    z, fz = _evaluate_on_curve(S, f, ts)
    exact = bool(getattr(f, "piecewise_linear", False))
    while True:
        w = fz - z
        mags = np.abs(w)
        if mags.min() < eps_fix:
            i = int(np.argmin(mags))
            raise FixedPointOnCurve(f"|f(z) - z| = {mags[i]:.3g} at z = {z[i]}")
        if exact:
            segs = np.stack([w[:-1], w[1:]], axis=1)
            d = float(segments_distance(segs, [0j])[0])
            if d < eps_fix:
                raise FixedPointOnCurve(f"displacement polygon passes within {d:.3g} of 0")
            break
        bad = np.abs(np.diff(w)) >= 0.5 * np.minimum(mags[:-1], mags[1:])
        if not bad.any():
            break
        if len(ts) + bad.sum() > max_samples:
            raise InsufficientSamples("could not certify the displacement winding within the sample budget")
        mids = (ts[:-1][bad] + ts[1:][bad]) / 2
        zm, fm = _evaluate_on_curve(S, f, mids)
        ts = np.concatenate([ts, mids])
        order = np.argsort(ts)
        ts = ts[order]
        z = np.concatenate([z, zm])[order]
        fz = np.concatenate([fz, fm])[order]
    return CurveSample(ts, z, fz, exact)


def _turns(w: np.ndarray) -> float:
    return float(np.angle(w[1:] / w[:-1]).sum() / (2 * np.pi))


def index(S: PolyCurve, f: PlaneMap, eps_fix: float = EPS_FIX) -> int:
    """Fixed-point index of ``f`` on the closed curve ``S``."""
    if not S.closed:
        raise ValueError("index needs a closed curve")
    s = sample_displacement(S, f, 0.0, 1.0, eps_fix=eps_fix)
    return int(round(_turns(s.displacement)))


def fractional_index(S: PolyCurve, a: complex, b: complex, f: PlaneMap, eps_fix: float = EPS_FIX) -> float:
    """Turns of ``f(z) - z`` along the counterclockwise arc of ``S`` from ``a`` to ``b``.

    ``a == b`` means the whole curve.
    """
    ta = S.param_of(a)
    tb = S.param_of(b)
    if tb <= ta:
        tb += 1.0
    s = sample_displacement(S, f, ta, tb, eps_fix=eps_fix)
    return _turns(s.displacement)


def in_hull(S: PolyCurve, z) -> np.ndarray:
    """Membership in the topological hull of a simple closed curve (boundary included)."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    on = S.distance(z) <= EPS_GEOM
    return on | (winding_numbers(S, z, check=False) % 2 != 0)


# ---------------------------------------------------------------------------
# Junctions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Junction:
    """Three polyline rays from ``vertex``; each leaves the escape box along
    ``escape`` and is understood to continue straight to infinity.

    ``plus``, ``inner``, ``minus`` are listed counterclockwise around the
    vertex with ``inner`` between the other two.
    """

    vertex: complex
    plus: np.ndarray
    inner: np.ndarray
    minus: np.ndarray
    escape: complex

    @property
    def rays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.plus, self.inner, self.minus

    def extended(self, far: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """The rays with a final straight leg of length ``far``."""
        return tuple(np.concatenate([r, [r[-1] + far * self.escape]]) for r in self.rays)

    def to_json(self) -> dict:
        pts = lambda r: [[p.real, p.imag] for p in r]  # noqa: E731
        return {"vertex": [self.vertex.real, self.vertex.imag], "plus": pts(self.plus),
                "inner": pts(self.inner), "minus": pts(self.minus),
                "escape": [self.escape.real, self.escape.imag]}


def _obstacle_segments(X: PolyContinuum | None, S: PolyCurve | None) -> np.ndarray:
    parts = []
    if X is not None:
        parts.append(X.segments)
    if S is not None:
        parts.append(S.segments)
    if not parts:
        raise ValueError("a junction needs at least one obstacle")
    return np.concatenate(parts)


@dataclass
class JunctionRouter:
    """Grid router for junction rays in the complement of a set of segments.

    The grid covers a box three times the size of the obstacles' bounding
    box; cells whose centers are within one cell width of an obstacle are
    blocked.  One breadth-first search from the box border gives a distance
    field, so routing from any cell is a steepest descent.
    """

    segments: np.ndarray
    cells: int = 64
    origin: complex = field(init=False)
    h: float = field(init=False)
    n: int = field(init=False)
    dist: np.ndarray = field(init=False)

    def __post_init__(self):
        pts = self.segments.ravel()
        lo = complex(pts.real.min(), pts.imag.min())
        hi = complex(pts.real.max(), pts.imag.max())
        size = max(hi.real - lo.real, hi.imag - lo.imag, 1e-9)
        mid = (lo + hi) / 2
        self.h = size / self.cells
        self.n = 3 * self.cells + 1
        self.origin = mid - complex(1.5 * size, 1.5 * size)
        idx = np.arange(self.n)
        centers = (self.origin + self.h * idx[None, :] + 1j * self.h * idx[:, None]).ravel()
        near = ((centers.real > lo.real - self.h) & (centers.real < hi.real + self.h)
                & (centers.imag > lo.imag - self.h) & (centers.imag < hi.imag + self.h))
        blocked = np.zeros(len(centers), dtype=bool)
        blocked[near] = _segments_distance_chunked(self.segments, centers[near]) < self.h
        self.dist = _border_bfs(blocked.reshape(self.n, self.n))

    def center(self, i: int, j: int) -> complex:
        return self.origin + self.h * j + 1j * self.h * i

    def cell_of(self, z: complex) -> tuple[int, int]:
        d = (z - self.origin) / self.h
        return int(round(d.imag)), int(round(d.real))

    def descend(self, i: int, j: int) -> list[tuple[int, int]]:
        path = [(i, j)]
        while self.dist[i, j] > 0:
            for di, dj in ((0, 1), (1, 0), (0, -1), (-1, 0)):
                a, b = i + di, j + dj
                if 0 <= a < self.n and 0 <= b < self.n and self.dist[a, b] == self.dist[i, j] - 1:
                    i, j = a, b
                    break
            path.append((i, j))
        return path

    def escape_direction(self, i: int, j: int) -> complex:
        if j == 0:
            return -1 + 0j
        if j == self.n - 1:
            return 1 + 0j
        if i == 0:
            return -1j
        return 1j


def _segments_distance_chunked(segments: np.ndarray, z: np.ndarray, chunk: int = 4096) -> np.ndarray:
    out = np.empty(len(z))
    for k in range(0, len(z), chunk):
        out[k:k + chunk] = segments_distance(segments, z[k:k + chunk])
    return out


def _border_bfs(blocked: np.ndarray) -> np.ndarray:
    """4-connected BFS distance from the free border cells (-1 = unreachable)."""
    free = ~blocked
    dist = np.full(blocked.shape, -1, dtype=np.int64)
    front = np.zeros_like(free)
    front[0, :] = front[-1, :] = front[:, 0] = front[:, -1] = True
    front &= free
    d = 0
    while front.any():
        dist[front] = d
        grown = np.zeros_like(front)
        grown[1:, :] |= front[:-1, :]
        grown[:-1, :] |= front[1:, :]
        grown[:, 1:] |= front[:, :-1]
        grown[:, :-1] |= front[:, 1:]
        front = grown & free & (dist < 0)
        d += 1
    return dist


def _simplify(path: list[complex]) -> list[complex]:
    out = [path[0]]
    for k in range(1, len(path) - 1):
        d1 = path[k] - out[-1]
        d2 = path[k + 1] - path[k]
        if abs(cross(d1, d2)) > 1e-12 * abs(d1) * abs(d2) or dot(d1, d2) < 0:
            out.append(path[k])
    out.append(path[-1])
    return out


def _offset(path: Sequence[complex], escape: complex, delta: float) -> np.ndarray:
    """Right-hand parallel of ``path`` at distance ``delta`` (mitred corners),
    sharing the first vertex."""
    out = [path[0]]
    for k in range(1, len(path)):
        d_in = path[k] - path[k - 1]
        d_out = path[k + 1] - path[k] if k + 1 < len(path) else escape
        n_in = -1j * d_in / abs(d_in)
        n_out = -1j * d_out / abs(d_out)
        m = n_in + n_out
        out.append(path[k] + delta * m / (1 + dot(n_in, n_out)))
    return np.array(out)


def _ray_clear(ray: np.ndarray, segments: np.ndarray, vertex: complex) -> bool:
    """True when ``ray`` meets ``segments`` only at ``vertex``."""
    p0, r = ray[:-1, None], np.diff(ray)[:, None]
    q0, q = segments[None, :, 0], (segments[:, 1] - segments[:, 0])[None, :]
    denom = cross(r, q)
    ok = np.abs(denom) > 1e-300
    denom = np.where(ok, denom, 1.0)
    s = cross(q0 - p0, q) / denom
    t = cross(q0 - p0, r) / denom
    tol = 1e-12
    mask = ok & (s >= -tol) & (s <= 1 + tol) & (t >= -tol) & (t <= 1 + tol)
    i, k = np.nonzero(mask)
    pts = ray[i] + s[i, k] * np.diff(ray)[i]
    return bool(np.all(np.abs(pts - vertex) <= 1e-9))


def _rays_disjoint(r1: np.ndarray, r2: np.ndarray, vertex: complex) -> bool:
    segs = np.stack([r2[:-1], r2[1:]], axis=1)
    return _ray_clear(r1, segs, vertex)


def _outward_normal(S: PolyCurve, v: complex) -> complex:
    t = S.param_of(v)
    knots = S.knots
    k = int(np.searchsorted(knots, t, side="right")) - 1
    k = min(max(k, 0), len(S.segments) - 1)
    a, b = S.segments[k]
    d = (b - a) / abs(b - a)
    return -1j * d  # right normal of a counterclockwise curve


def make_junction(v: complex, X: PolyContinuum | None, S: PolyCurve, normal: complex | None = None,
                  cells: int = 64, max_cells: int = 1024,
                  router: JunctionRouter | None = None) -> Junction:
    """A junction at ``v`` whose rays avoid ``X`` and ``S`` except at ``v``.

    The rays leave ``v`` along ``normal`` (default: the outward normal of the
    counterclockwise curve ``S`` at ``v``) and follow a shortest grid path
    to the border of the escape box.  The grid is refined until the rays are
    certified disjoint from the obstacles.
    """
    v = complex(v)
    segs = _obstacle_segments(X, S)
    if X is not None and float(X.distance([v])[0]) <= EPS_GEOM:
        raise NoEscapePath("junction vertex lies on X")
    if float(segments_distance(S.segments, [v])[0]) > 1e-7 * max(1.0, abs(v)):
        raise NoEscapePath("junction vertex is not on S")
    if normal is None:
        normal = _outward_normal(S, v)
    normal = complex(normal) / abs(normal)
    n_cells = cells
    while n_cells <= max_cells:
        r = router if (router is not None and router.cells == n_cells) else JunctionRouter(segs, n_cells)
        junction = _try_route(r, v, normal, segs)
        if junction is not None:
            return junction
        n_cells *= 2
        router = None
    raise NoEscapePath(f"no escape route from {v}")


def _try_route(r: JunctionRouter, v: complex, normal: complex, segs: np.ndarray) -> Junction | None:
    h = r.h
    for step in (1.5, 2.5, 3.5):
        i, j = r.cell_of(v + step * h * normal)
        if not (0 <= i < r.n and 0 <= j < r.n) or r.dist[i, j] < 0:
            continue
        start = r.center(i, j)
        if dot(start - v, normal) <= 0:
            continue
        cells = r.descend(i, j)
        escape = r.escape_direction(*cells[-1])
        path = _simplify([v] + [r.center(a, b) for a, b in cells])
        if len(path) >= 2 and abs(path[-1] - path[-2]) > 0 and dot(path[-1] - path[-2], escape) < 0:
            continue
        inner = np.array(path)
        delta = h / 5
        plus = _offset(path, escape, delta)
        minus = _offset(path, escape, -delta)
        J = Junction(v, plus, inner, minus, escape)
        far = 3 * h * r.n
        ext = J.extended(far)
        if not all(_ray_clear(ray, segs, v) for ray in ext):
            continue
        if not (_rays_disjoint(ext[0], ext[1], v) and _rays_disjoint(ext[1], ext[2], v)
                and _rays_disjoint(ext[0], ext[2], v)):
            continue
        return J
    return None


# ---------------------------------------------------------------------------
# Variation
# ---------------------------------------------------------------------------

def _arc_params(S: PolyCurve, a: complex, b: complex) -> tuple[float, float]:
    ta = S.param_of(a)
    tb = S.param_of(b)
    if tb <= ta:
        tb += 1.0
    return ta, tb


def sample_image(S: PolyCurve, f: PlaneMap, t0: float, t1: float, n0: int = 256,
                 max_step: float | None = None) -> CurveSample:
    """Image polyline of the arc ``[t0, t1]`` of ``S`` under ``f``.

    Exact for piecewise-linear maps; otherwise refined until consecutive
    image points are closer than ``max_step``.
    """
    ts = _initial_params(S, f, t0, t1, n0)
    z, fz = _evaluate_on_curve(S, f, ts)
    exact = bool(getattr(f, "piecewise_linear", False))
    if not exact:
        if max_step is None:
            max_step = 1e-3 * max(np.ptp(fz.real), np.ptp(fz.imag), S.length, 1e-9)
        while True:
            bad = np.abs(np.diff(fz)) > max_step
            if not bad.any():
                break
            if len(ts) + bad.sum() > MAX_SAMPLES:
                raise InsufficientSamples("image polyline refinement budget exhausted")
            mids = (ts[:-1][bad] + ts[1:][bad]) / 2
            zm, fm = _evaluate_on_curve(S, f, mids)
            ts = np.concatenate([ts, mids])
            order = np.argsort(ts)
            ts = ts[order]
            z = np.concatenate([z, zm])[order]
            fz = np.concatenate([fz, fm])[order]
    return CurveSample(ts, z, fz, exact)


def _pairwise_hits(image: np.ndarray, ray: np.ndarray, tol: float = 1e-12):
    """All intersections between segments of two polylines: ``(i, s, k, t)``."""
    p0, r = image[:-1, None], np.diff(image)[:, None]
    q0, q = ray[None, :-1], np.diff(ray)[None, :]
    denom = cross(r, q)
    ok = np.abs(denom) > 1e-300
    denom = np.where(ok, denom, 1.0)
    s = cross(q0 - p0, q) / denom
    t = cross(q0 - p0, r) / denom
    mask = ok & (s >= -tol) & (s <= 1 + tol) & (t >= -tol) & (t <= 1 + tol)
    i, k = np.nonzero(mask)
    return i, s[i, k], k, t[i, k]


def _crossings(image: np.ndarray, ray: np.ndarray) -> list[float]:
    """Positions ``i + s`` along ``image`` where it crosses ``ray`` transversally.

    Hits at shared vertices are counted once (half-open segments); touches
    where the image stays on one side of the ray are dropped.
    """
    n, m = len(image) - 1, len(ray) - 1
    out = []
    for i, sk, ik, tk in zip(*_pairwise_hits(image, ray)):
        if (sk >= 1 - 1e-12 and i < n - 1) or (tk >= 1 - 1e-12 and ik < m - 1):
            continue
        q0, q1 = ray[ik], ray[ik + 1]
        d = q1 - q0
        before = image[i] if sk > 1e-12 or i == 0 else image[i - 1]
        after = image[i + 1] if sk < 1 - 1e-12 or i == n - 1 else image[i + 2]
        if cross(d, before - q0) * cross(d, after - q0) > 0:
            continue
        out.append(i + float(sk))
    return sorted(out)


def count_crossings(image: np.ndarray, J: Junction) -> int:
    """Signed count of ``(+, i)`` minus ``(i, +)`` consecutive passages."""
    pts = np.concatenate([image, J.plus, J.inner, J.minus])
    far = 10.0 * (np.abs(pts).max() + 1.0)
    plus, inner, minus = J.extended(far)
    events = [(p, "+") for p in _crossings(image, plus)]
    events += [(p, "i") for p in _crossings(image, inner)]
    events += [(p, "-") for p in _crossings(image, minus)]
    events.sort()
    total = 0
    for (_, x), (_, y) in zip(events, events[1:]):
        if x == "+" and y == "i":
            total += 1
        elif x == "i" and y == "+":
            total -= 1
    return total


def check_arc_admissible(S: PolyCurve, t0: float, t1: float, sample: CurveSample,
                         eps_fix: float = EPS_FIX) -> None:
    fa, fb = sample.image[0], sample.image[-1]
    if not in_hull(S, [fa, fb]).all():
        raise EndpointEscapes("an endpoint of the arc maps outside the hull of S")
    arc = S.subarc(t0, t1)
    arc_segs = np.stack([arc[:-1], arc[1:]], axis=1)
    d = _segments_distance_chunked(arc_segs, sample.image)
    if d.min() < eps_fix:
        raise ArcNotMovedOff("the image of the arc meets the arc")
    if len(_pairwise_hits(sample.image, arc, tol=0.0)[0]):
        raise ArcNotMovedOff("the image of the arc crosses the arc")


def variation_arc(S: PolyCurve, a: complex, b: complex, f: PlaneMap, J: Junction | None = None,
                  X: PolyContinuum | None = None, eps_fix: float = EPS_FIX) -> int:
    """Variation of ``f`` on the counterclockwise arc ``[a, b]`` of ``S``.

    Without ``J`` a junction is built at the midpoint of the arc.
    """
    if not S.closed:
        raise ValueError("variation needs a closed curve")
    t0, t1 = _arc_params(S, a, b)
    sample = sample_image(S, f, t0, t1)
    check_arc_admissible(S, t0, t1, sample, eps_fix)
    if J is None:
        J = make_junction(S.point_at((t0 + t1) / 2), X, S)
    else:
        tv = S.param_of(J.vertex)
        if not any(t0 - 1e-12 <= tv + k <= t1 + 1e-12 for k in (-1.0, 0.0, 1.0)):
            raise ValueError("junction vertex is not on the arc")
    return count_crossings(sample.image, J)


@dataclass(frozen=True)
class ArcPartition:
    """Closed curve cut into counterclockwise arcs at the given points."""

    curve: PolyCurve
    cuts: tuple

    def __post_init__(self):
        S = self.curve.ccw()
        cuts = [complex(c) for c in self.cuts]
        if len(cuts) < 1:
            raise ValueError("a partition needs at least one cut point")
        ts = [S.param_of(c) for c in cuts]
        order = np.argsort(ts)
        ts = np.asarray(ts)[order]
        if len(ts) > 1 and (np.diff(ts).min() <= 1e-12 or 1 - ts[-1] + ts[0] <= 1e-12):
            raise ValueError("cut points must be distinct")
        object.__setattr__(self, "curve", S)
        object.__setattr__(self, "cuts", tuple(cuts[k] for k in order))

    @property
    def arcs(self) -> list[tuple[complex, complex]]:
        c = self.cuts
        return [(c[k], c[(k + 1) % len(c)]) for k in range(len(c))]

    def refined(self, extra: Sequence[complex]) -> "ArcPartition":
        return ArcPartition(self.curve, tuple(self.cuts) + tuple(complex(e) for e in extra))


@dataclass(frozen=True)
class VariationReport:
    per_arc: tuple
    total: int
    index: int

    @property
    def identity_holds(self) -> bool:
        return self.index == self.total + 1

    def to_json(self) -> dict:
        return {"per_arc": list(self.per_arc), "total": self.total, "index": self.index,
                "identity_holds": self.identity_holds}


def variation_total(P: ArcPartition, f: PlaneMap, X: PolyContinuum | None = None) -> VariationReport:
    S = P.curve
    per_arc = []
    router = JunctionRouter(_obstacle_segments(X, S))
    for k, (a, b) in enumerate(P.arcs):
        try:
            t0, t1 = _arc_params(S, a, b)
            J = make_junction(S.point_at((t0 + t1) / 2), X, S, router=router)
            per_arc.append(variation_arc(S, a, b, f, J, X))
        except GeometryError as exc:
            raise type(exc)(f"arc {k} [{a}, {b}]: {exc}") from exc
    return VariationReport(tuple(per_arc), int(sum(per_arc)), index(S, f))


# ---------------------------------------------------------------------------
# Lollipop identity
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LollipopReport:
    side: str
    variations: tuple
    lhs: int
    rhs: int

    @property
    def holds(self) -> bool:
        return self.lhs == self.rhs

    def to_json(self) -> dict:
        return {"side": self.side, "variations": list(self.variations), "lhs": self.lhs,
                "rhs": self.rhs, "holds": self.holds}


def _loop(parts: Sequence[np.ndarray]) -> PolyCurve:
    pts = np.concatenate(parts)
    keep = np.concatenate([[True], np.abs(np.diff(pts)) > EPS_GEOM])
    pts = pts[keep]
    if abs(pts[-1] - pts[0]) <= EPS_GEOM:
        pts = pts[:-1]
    return PolyCurve(pts, closed=True)


def lollipop_check(P: ArcPartition, stick_end: int, stick: PolyCurve, f: PlaneMap) -> LollipopReport:
    """Check the identity relating variation and index on one side of a stick.

    ``stick`` is an arc inside the hull of ``S = P.curve`` joining the cut
    point ``P.cuts[0]`` to ``P.cuts[stick_end]``.  Depending on where
    ``f(P.cuts[stick_end])`` lies, the variation over the arcs on the
    corresponding side plus one is compared with the index of ``f`` on the
    loop formed by those arcs and the stick.
    """
    S = P.curve
    a0, an = P.cuts[0], P.cuts[stick_end]
    if not 0 < stick_end < len(P.cuts):
        raise HypothesisFailed("stick end must be a cut point other than the first")
    I = stick
    if abs(I.vertices[0] - a0) > 1e-9 or abs(I.vertices[-1] - an) > 1e-9:
        raise HypothesisFailed("stick must run from the first cut point to the chosen cut point")
    inner = I.vertices[1:-1]
    if len(inner) and not np.all(winding_numbers(S, inner, check=False) != 0):
        raise HypothesisFailed("stick leaves the hull of S")
    for k in range(len(I.vertices) - 1):
        s, _, _ = segment_hits(I.vertices[k], I.vertices[k + 1], S.segments, tol=1e-12)
        if np.any((s > 1e-9) & (s < 1 - 1e-9)):
            raise HypothesisFailed("stick meets S away from its endpoints")
    if isinstance(f, PolylineMap) and f.piece_for(I) is not None:
        img = f.eval_param(f.piece_for(I), np.unique(np.concatenate([I.knots, f.pieces[f.piece_for(I)][1]])))
    else:
        img = sample_image(I, f, 0.0, 1.0).image
    if abs(img[0] - f(np.array([a0]))[0]) > 1e-7 or abs(img[-1] - f(np.array([an]))[0]) > 1e-7:
        raise HypothesisFailed("f on the stick disagrees with f on S at the stick ends")
    try:
        J0 = make_junction(a0, None, S)
    except NoEscapePath as exc:
        raise HypothesisFailed(f"no junction at the first cut point: {exc}") from exc
    far = 10.0 * (np.abs(np.concatenate([img, J0.inner])).max() + 1.0)
    obstacles = [I.vertices] + list(J0.extended(far))
    for ob in obstacles:
        segs = np.stack([ob[:-1], ob[1:]], axis=1)
        if float(_segments_distance_chunked(segs, img).min()) < EPS_FIX:
            raise HypothesisFailed("f(stick) meets the stick or the junction at the first cut point")
        if len(_pairwise_hits(img, ob, tol=0.0)[0]):
            raise HypothesisFailed("f(stick) meets the stick or the junction at the first cut point")
    variations = []
    router = JunctionRouter(S.segments)
    for k, (a, b) in enumerate(P.arcs):
        try:
            ta, tb = _arc_params(S, a, b)
            J = make_junction(S.point_at((ta + tb) / 2), None, S, router=router)
            variations.append(variation_arc(S, a, b, f, J))
        except (ArcNotMovedOff, EndpointEscapes) as exc:
            raise HypothesisFailed(f"arc {k} is not admissible: {exc}") from exc
    t0, tn = S.param_of(a0), S.param_of(an)
    fan = complex(np.atleast_1d(f(np.array([an])))[0])
    right_loop = _loop([S.subarc(t0, tn), I.vertices[::-1]])
    if winding_numbers(right_loop, [fan], check=False)[0] != 0:
        side, loop, arcs = "R", right_loop, variations[:stick_end]
    else:
        side, arcs = "L", variations[stick_end:]
        loop = _loop([S.subarc(tn, t0), I.vertices])
    lhs = int(sum(arcs)) + 1
    rhs = index(loop.ccw(), f)
    return LollipopReport(side, tuple(variations), lhs, rhs)


# ---------------------------------------------------------------------------
# Fixed-point localization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Enclosure:
    box: tuple
    index: int

    @property
    def center(self) -> complex:
        x0, y0, x1, y1 = self.box
        return complex((x0 + x1) / 2, (y0 + y1) / 2)

    def contains(self, z: complex, tol: float = 0.0) -> bool:
        x0, y0, x1, y1 = self.box
        return x0 - tol <= z.real <= x1 + tol and y0 - tol <= z.imag <= y1 + tol

    def to_json(self) -> dict:
        return {"box": list(self.box), "center": [self.center.real, self.center.imag], "index": self.index}


def box_curve(box: Sequence[float]) -> PolyCurve:
    x0, y0, x1, y1 = box
    return PolyCurve(np.array([complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)]), closed=True)


def box_index(box: Sequence[float], f: PlaneMap, eps_fix: float = EPS_FIX) -> int:
    return index(box_curve(box), f, eps_fix)


def locate_fixed_points(box: Sequence[float], f: PlaneMap, max_depth: int = 12, seed: int = 0,
                        retries: int = 5, eps_fix: float = EPS_FIX) -> list[Enclosure]:
    """Quadtree search for fixed points driven by box indices.

    Boxes with nonzero index are split in four; splitting lines are jittered
    when they pass too close to a fixed point.  Leaves at ``max_depth`` are
    returned as enclosures with their indices.
    """
    rng = np.random.default_rng(seed)
    box = tuple(float(x) for x in box)
    root = box_index(box, f, eps_fix)
    out: list[Enclosure] = []

    def split(b, depth):
        x0, y0, x1, y1 = b
        w, hgt = x1 - x0, y1 - y0
        for attempt in range(retries + 1):
            amp = 0.1 * 2.0 ** -depth if attempt else 0.0
            xm = x0 + w * (0.5 + amp * rng.uniform(-1, 1))
            ym = y0 + hgt * (0.5 + amp * rng.uniform(-1, 1))
            kids = [(x0, y0, xm, ym), (xm, y0, x1, ym), (x0, ym, xm, y1), (xm, ym, x1, y1)]
            try:
                return [(k, box_index(k, f, eps_fix)) for k in kids]
            except FixedPointOnCurve:
                continue
        raise BoundaryFixedPoint(f"cannot split box {b} away from fixed points")

    def walk(b, ind, depth):
        if ind == 0:
            return
        if depth == max_depth:
            out.append(Enclosure(b, ind))
            return
        kids = split(b, depth + 1)
        if sum(k[1] for k in kids) != ind:
            raise InsufficientSamples(f"child indices do not add up in box {b}")
        for k, ki in kids:
            walk(k, ki, depth + 1)

    walk(box, root, 0)
    return out


__all__ = [
    "EPS_FIX", "FixedPointOnCurve", "InsufficientSamples", "NoEscapePath", "ArcNotMovedOff",
    "EndpointEscapes", "HypothesisFailed", "BoundaryFixedPoint", "CircleMapSamples",
    "circle_map_degree", "sample_displacement", "index", "fractional_index", "in_hull",
    "Junction", "JunctionRouter", "make_junction", "sample_image", "count_crossings",
    "variation_arc", "ArcPartition", "VariationReport", "variation_total", "LollipopReport",
    "lollipop_check", "Enclosure", "box_curve", "box_index", "locate_fixed_points",
]
