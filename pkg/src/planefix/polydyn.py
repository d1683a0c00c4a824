"""Polynomial dynamics: fixed points, local index, external rays, crosscuts
and planar boundary scrambling."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import shapely
from shapely.geometry import LineString, Polygon
from shapely.ops import polygonize, unary_union

from .geom import EPS_GEOM, GeometryError, PolyContinuum, PolyCurve, regular_polygon, winding_numbers
from .index_var import (EPS_FIX, ArcNotMovedOff, EndpointEscapes, FixedPointOnCurve, count_crossings,
                        index, locate_fixed_points, make_junction, sample_image,
                        _segments_distance_chunked, _pairwise_hits)
from .maps import PlaneMap, PolynomialMap

RATIONAL_DENOMINATOR = 64
RATIONAL_TOL = 1e-9
NEUTRAL_TOL = 1e-9
ROOT_RESIDUAL = 1e-10
EPS_BRANCH = 1e-6


class NotIsolated(GeometryError):
    """The local index did not stabilize: another fixed point is too close."""


class BranchAmbiguity(GeometryError):
    """Two preimages are equally good continuations of a ray."""


class NotACrosscut(GeometryError):
    pass


class RootFailure(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# Fixed points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FixedPointRecord:
    location: complex
    multiplier: complex
    kind: str
    local_index: int
    rotation: Fraction | None = None

    def to_json(self) -> dict:
        out = {"location": [self.location.real, self.location.imag],
               "multiplier": [self.multiplier.real, self.multiplier.imag],
               "class": self.kind, "local_index": self.local_index}
        if self.rotation is not None:
            out["rotation"] = f"{self.rotation.numerator}/{self.rotation.denominator}"
        return out


def classify_multiplier(m: complex) -> tuple[str, Fraction | None]:
    """Repelling, attracting, parabolic or irrational-neutral.

    A neutral multiplier ``exp(2 pi i a)`` counts as parabolic when ``a`` is
    within ``RATIONAL_TOL`` of a fraction with denominator at most
    ``RATIONAL_DENOMINATOR``.
    """
    r = abs(m)
    if r > 1 + NEUTRAL_TOL:
        return "repelling", None
    if r < 1 - NEUTRAL_TOL:
        return "attracting", None
    a = (math.atan2(m.imag, m.real) / (2 * math.pi)) % 1.0
    q = Fraction(a).limit_denominator(RATIONAL_DENOMINATOR)
    if abs(float(q) - a) <= RATIONAL_TOL:
        return "parabolic", q % 1
    return "irrational-neutral", None


def _displacement_coeffs(P: PolynomialMap) -> list[complex]:
    c = list(P.coeffs) + [0j] * max(0, 2 - len(P.coeffs))
    c[1] -= 1
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return c


def _cluster(roots: np.ndarray, tol: float) -> list[tuple[complex, int]]:
    out: list[list] = []
    for z in sorted(roots, key=lambda w: (w.real, w.imag)):
        for c in out:
            if abs(z - np.mean(c)) <= tol:
                c.append(z)
                break
        else:
            out.append([z])
    return [(complex(np.mean(c)), len(c)) for c in out]


def polynomial_fixed_points(P: PolynomialMap, cluster_tol: float = 1e-5) -> list[tuple[complex, int]]:
    """Roots of ``P(z) - z`` with multiplicities (companion eigenvalues
    polished by Newton steps)."""
    c = _displacement_coeffs(P)
    if len(c) == 1:
        if c[0] == 0:
            raise NotIsolated("every point is fixed")
        return []
    D = PolynomialMap(tuple(c))
    dD = D.derivative()
    roots = np.roots(np.array(c[::-1]))
    out = []
    for z, k in _cluster(roots, cluster_tol):
        if k == 1:
            for _ in range(3):
                d = complex(dD(z))
                if d == 0:
                    break
                z = z - complex(D(z)) / d
        scale = sum(abs(a) * abs(z) ** j for j, a in enumerate(c)) + 1.0
        if k == 1 and abs(complex(D(z))) > ROOT_RESIDUAL * scale:
            raise RootFailure(f"residual {abs(complex(D(z))):.3g} at {z}")
        out.append((z, k))
    return out


def fixed_points(P: PolynomialMap) -> list[FixedPointRecord]:
    if P.degree < 1:
        raise ValueError("degree must be at least 1")
    roots = polynomial_fixed_points(P)
    dP = P.derivative()
    out = []
    for z, _ in roots:
        others = [w for w, _ in roots if w != z]
        m = complex(dP(z))
        kind, rot = classify_multiplier(m)
        out.append(FixedPointRecord(z, m, kind, local_index(P, z, others=others), rot))
    return sorted(out, key=lambda r: (r.location.real, r.location.imag))


def local_index(f: PlaneMap, p: complex, r0: float = 0.1, others=(), shrink: float = 0.5,
                max_steps: int = 14, eps_fix: float = EPS_FIX) -> int:
    """Index of ``f`` on small circles about the fixed point ``p``.

    The radius is shrunk until two consecutive radii give the same index.
    Known fixed points ``others`` cap the starting radius at a third of
    their distance.
    """
    p = complex(p)
    r = r0
    if len(others):
        gap = min(abs(complex(w) - p) for w in others)
        if gap <= 1e-9:
            raise NotIsolated(f"another fixed point at distance {gap:.3g}")
        r = min(r, gap / 3)
    prev = None
    for _ in range(max_steps):
        try:
            k = index(regular_polygon(64, r, p), f, eps_fix=min(eps_fix, 1e-3 * r))
        except FixedPointOnCurve:
            prev = None
            r *= shrink
            continue
        if k == prev:
            return k
        prev = k
        r *= shrink
    raise NotIsolated(f"local index at {p} did not stabilize")


@dataclass(frozen=True)
class ArgumentReport:
    curve_index: int
    local: tuple
    total: int

    @property
    def holds(self) -> bool:
        return self.curve_index == self.total

    def to_json(self) -> dict:
        return {"curve_index": self.curve_index, "sum_local": self.total, "holds": self.holds,
                "fixed_points": [{"location": [z.real, z.imag], "local_index": k} for z, k in self.local]}


def argument_principle_check(f: PlaneMap, S: PolyCurve, eps_fix: float = EPS_FIX) -> ArgumentReport:
    """Curve index against the sum of local indices of the fixed points inside."""
    if not S.closed:
        raise ValueError("argument principle needs a closed curve")
    S = S.ccw()
    k = index(S, f, eps_fix=eps_fix)
    if isinstance(f, PolynomialMap):
        pts = [z for z, _ in polynomial_fixed_points(f)]
    else:
        v = S.vertices
        box = (v.real.min(), v.imag.min(), v.real.max(), v.imag.max())
        pts = [e.center for e in locate_fixed_points(box, f)]
    d = S.distance(pts) if pts else np.array([])
    if len(d) and d.min() < eps_fix:
        raise FixedPointOnCurve("a fixed point lies on the curve")
    inside = [z for z in pts if winding_numbers(S, z, check=False)[0] != 0]
    local = []
    for z in inside:
        others = [w for w in pts if w != z]
        r0 = min(0.1, 0.5 * float(S.distance([z])[0]))
        local.append((z, local_index(f, z, r0=r0, others=others)))
    return ArgumentReport(k, tuple(local), sum(i for _, i in local))


# ---------------------------------------------------------------------------
# External rays
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Truncated:
    diameter: float

    def to_json(self) -> dict:
        return {"truncated": True, "tail_diameter": self.diameter}


@dataclass(frozen=True)
class ExternalRay:
    """Backward-orbit trace of the ray of ``angle``.

    ``trace`` lists ``per_generation`` points per generation from the anchor
    inward, in the coordinates of the original polynomial; ``conjugation`` is
    the factor ``a`` with ``a * P(w / a)`` monic.
    """

    angle: Fraction
    trace: np.ndarray
    generations: int
    per_generation: int
    conjugation: complex = 1.0 + 0j

    def generation(self, k: int) -> np.ndarray:
        m = self.per_generation
        return self.trace[k * m:(k + 1) * m]

    @property
    def status(self):
        return landing_point(self)

    def to_json(self, tol: float = 1e-9) -> dict:
        land = landing_point(self, tol)
        status = ({"landed": [land.real, land.imag]} if isinstance(land, complex) else land.to_json())
        return {"angle": f"{self.angle.numerator}/{self.angle.denominator}",
                "trace": [[z.real, z.imag] for z in self.trace], "status": status}


def monic_conjugation(P: PolynomialMap) -> tuple[PolynomialMap, complex]:
    """``(Q, a)`` with ``Q(w) = a P(w / a)`` monic."""
    d = P.degree
    if d < 2:
        raise ValueError("external rays need degree at least 2")
    lead = P.coeffs[-1]
    a = complex(lead) ** (1.0 / (d - 1))
    return PolynomialMap(tuple(a * c * a ** (-k) for k, c in enumerate(P.coeffs))), a


def _preimages(coeffs: np.ndarray, w: complex) -> np.ndarray:
    c = coeffs.copy()
    c[-1] -= w
    z = np.roots(c)
    dc = np.polyder(c)
    for _ in range(2):
        d = np.polyval(dc, z)
        ok = d != 0
        z = np.where(ok, z - np.polyval(c, z) / np.where(ok, d, 1), z)
    return z


def trace_external_ray(P: PolynomialMap, theta, generations: int = 40, R: float | None = None,
                       per_generation: int = 8, eps_branch: float = EPS_BRANCH) -> ExternalRay:
    """Trace the ray of angle ``theta`` by pulling back equipotential anchors.

    Anchors ``R**(d**(-s/m)) * exp(2 pi i a)`` sit on the rays of every
    angle ``a`` in the forward orbit of ``theta``; generation ``k`` of the ray
    of ``a`` is the preimage of generation ``k - 1`` of the ray of ``d*a``
    nearest to the previous point of the trace.
    """
    theta = Fraction(theta) % 1
    Q, a = monic_conjugation(P)
    d = Q.degree
    R = max(2.0 + sum(abs(c) for c in Q.coeffs), R or 0.0)
    m = per_generation
    coeffs = np.array(Q.coeffs[::-1], dtype=complex)
    orbit = [theta]
    for _ in range(generations):
        orbit.append(orbit[-1] * d % 1)
    angles = sorted(set(orbit))
    radii = [R ** (d ** (-s / m)) for s in range(m)]
    prev = {al: [complex(r * np.exp(2j * np.pi * float(al))) for r in radii] for al in angles}
    levels = {al: list(prev[al]) for al in [theta]}
    for k in range(1, generations + 1):
        needed = set(orbit[:generations - k + 1])
        cur = {}
        for al in sorted(needed):
            src = prev[al * d % 1]
            ref = prev[al][-1]
            pts = []
            for s in range(m):
                cand = _preimages(coeffs, src[s])
                dist = np.sort(np.abs(cand - ref))
                if len(dist) > 1 and dist[1] - dist[0] < eps_branch:
                    raise BranchAmbiguity(f"ray {al}: preimages tie at generation {k}")
                z = complex(cand[int(np.argmin(np.abs(cand - ref)))])
                pts.append(z)
                ref = z
            cur[al] = pts
        if theta in cur:
            levels[theta].extend(cur[theta])
        prev = cur
    trace = np.array(levels[theta]) / a
    return ExternalRay(theta, trace, generations, m, a)


def landing_point(ray: ExternalRay, tol: float = 1e-9):
    """The limit of the trace when its last generation has diameter below
    ``tol``; otherwise :class:`Truncated` with that diameter."""
    tail = ray.trace[-(ray.per_generation + 1):]
    diam = float(np.abs(tail - tail[-1]).max())
    if diam <= tol:
        return complex(tail[-1])
    return Truncated(diam)


# ---------------------------------------------------------------------------
# Crosscuts
# ---------------------------------------------------------------------------

def _key(z: complex) -> tuple:
    return (round(z.real, 9), round(z.imag, 9))


def _path_in_continuum(X: PolyContinuum, a: complex, b: complex) -> np.ndarray:
    """A polyline inside ``X`` from ``a`` to ``b`` (both on ``X``)."""
    pts: dict[tuple, complex] = {}
    adj: dict[tuple, set] = {}

    def node(z):
        k = _key(z)
        pts.setdefault(k, z)
        adj.setdefault(k, set())
        return k

    def link(p, q):
        if p != q:
            adj[p].add(q)
            adj[q].add(p)

    ends = [complex(a), complex(b)]
    for p, q in X.segments:
        inner = []
        for e in ends:
            pq = q - p
            u = ((e - p) * pq.conjugate()).real / abs(pq) ** 2
            if 0 < u < 1 and abs(p + u * pq - e) <= 1e-7 * max(1.0, abs(e)):
                inner.append((u, e))
        chain = [p] + [e for _, e in sorted(inner)] + [q]
        keys = [node(z) for z in chain]
        for s, t in zip(keys, keys[1:]):
            link(s, t)
    start, goal = node(ends[0]), node(ends[1])
    dist = {start: 0.0}
    back = {}
    heap = [(0.0, start)]
    while heap:
        dcur, k = heapq.heappop(heap)
        if k == goal:
            break
        if dcur > dist[k]:
            continue
        for j in sorted(adj[k]):
            nd = dcur + abs(pts[j] - pts[k])
            if nd < dist.get(j, math.inf):
                dist[j] = nd
                back[j] = k
                heapq.heappush(heap, (nd, j))
    if goal not in dist:
        line = np.linspace(ends[0], ends[1], 65)
        if X.in_hull(line, 1e-9).all():
            return line
        raise NotACrosscut("no path inside X joins the crosscut endpoints")
    path = [goal]
    while path[-1] != start:
        path.append(back[path[-1]])
    return np.array([pts[k] for k in reversed(path)])


def _validate_crosscut(Q: PolyCurve, X: PolyContinuum, tol: float = 1e-7) -> None:
    if Q.closed:
        raise NotACrosscut("a crosscut is an open arc")
    q0, q1 = Q.vertices[0], Q.vertices[-1]
    scale = max(1.0, X.scale())
    if X.distance([q0, q1]).max() > tol * scale:
        raise NotACrosscut("crosscut endpoints must lie on X")
    if abs(q0 - q1) <= tol * scale:
        raise NotACrosscut("crosscut endpoints must be distinct")
    t = np.linspace(0.0, 1.0, 257)[1:-1]
    inner = np.concatenate([Q.point_at(t), Q.vertices[1:-1]])
    if X.in_hull(inner, tol * scale).any():
        raise NotACrosscut("crosscut interior meets the hull of X")


def shadow_indicator(Q: PolyCurve, X: PolyContinuum):
    """Membership test for the shadow of the crosscut ``Q``: the bounded
    complementary piece cut off between ``Q`` and ``X``."""
    back = _path_in_continuum(X, Q.vertices[-1], Q.vertices[0])
    loop = np.concatenate([Q.vertices, back[1:-1]])
    loop_curve = PolyCurve(_dedupe(loop), closed=True)

    def inside(z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        w = winding_numbers(loop_curve, z, check=False)
        return (w != 0) & ~X.in_hull(z, EPS_GEOM) & (Q.distance(z) > EPS_GEOM)

    return inside


def _dedupe(v: np.ndarray) -> np.ndarray:
    out = [v[0]]
    for z in v[1:]:
        if abs(z - out[-1]) > EPS_GEOM:
            out.append(z)
    if len(out) > 2 and abs(out[-1] - out[0]) <= EPS_GEOM:
        out.pop()
    return np.array(out)


def essential_crossing(ray: ExternalRay, Q: PolyCurve, X: PolyContinuum, tail: int | None = None) -> bool:
    """Whether the inner tail of the ray lies in the shadow of ``Q``."""
    _validate_crosscut(Q, X)
    inside = shadow_indicator(Q, X)
    pts = ray.trace[X.distance(ray.trace) > 1e-9]
    if not len(pts):
        return False
    n = tail or ray.per_generation
    return bool(inside(pts[-n:]).all())


def _oriented(Q: PolyCurve, X: PolyContinuum) -> tuple[PolyCurve, complex, complex]:
    """``Q`` oriented with its shadow on the left, its midpoint and the
    unit normal pointing away from the shadow."""
    inside = shadow_indicator(Q, X)
    v = complex(Q.point_at(0.5))
    t = Q.param_of(v)
    k = min(int(np.searchsorted(Q.knots, t, side="right")) - 1, len(Q.segments) - 1)
    a, b = Q.segments[k]
    n = -1j * (b - a) / abs(b - a)
    delta = 0.05 * min(float(np.min(Q.lengths)), float(X.distance([v])[0]))
    right, left = inside([v + delta * n, v - delta * n])
    if left and not right:
        return Q, v, n
    if right and not left:
        return Q.reversed(), v, -n
    raise NotACrosscut("could not tell the sides of the crosscut apart")


def crosscut_variation(f: PlaneMap, Q: PolyCurve, X: PolyContinuum, eps_fix: float = EPS_FIX) -> int:
    """Variation of ``f`` on the crosscut ``Q`` of ``X``, oriented as part of a
    counterclockwise bumping curve, counted on a junction whose vertex is the
    midpoint of ``Q`` and whose rays leave on the side away from the shadow."""
    _validate_crosscut(Q, X)
    Q, v, normal = _oriented(Q, X)
    sample = sample_image(Q, f, 0.0, 1.0)
    if not X.in_hull([sample.image[0], sample.image[-1]], 1e-9).all():
        raise EndpointEscapes("a crosscut endpoint maps outside the hull of X")
    d = _segments_distance_chunked(Q.segments, sample.image)
    if d.min() < eps_fix or len(_pairwise_hits(sample.image, Q.vertices, tol=0.0)[0]):
        raise ArcNotMovedOff("the image of the crosscut meets the crosscut")
    J = make_junction(v, X, Q, normal=normal)
    return count_crossings(sample.image, J)


# ---------------------------------------------------------------------------
# Boundary scrambling in the plane
# ---------------------------------------------------------------------------

def to_shape(X: PolyContinuum):
    parts = []
    for c in X.curves:
        v = [(z.real, z.imag) for z in c.vertices]
        parts.append(Polygon(v) if c.closed else LineString(v))
    return unary_union(parts)


def _parts(g) -> list:
    if g.is_empty:
        return []
    if hasattr(g, "geoms"):
        out = []
        for h in g.geoms:
            out.extend(_parts(h))
        return out
    return [g]


def is_connected(g) -> bool:
    parts = _parts(g)
    if not parts:
        return False
    root = list(range(len(parts)))

    def find(i):
        while root[i] != i:
            root[i] = root[root[i]]
            i = root[i]
        return i

    for i in range(len(parts)):
        for j in range(i + 1, len(parts)):
            if parts[i].distance(parts[j]) <= EPS_GEOM:
                root[find(i)] = find(j)
    return len({find(i) for i in range(len(parts))}) == 1


def is_non_separating(g) -> bool:
    """Connected with connected complement: every bounded face of the
    arrangement of its linework is covered by the set itself."""
    if not is_connected(g):
        return False
    lines = unary_union([p.boundary if p.geom_type == "Polygon" else p for p in _parts(g)])
    for face in polygonize(lines):
        if not g.buffer(EPS_GEOM).covers(face.representative_point()):
            return False
    return True


def _samples_on(X: PolyContinuum, n: int) -> np.ndarray:
    pts = [X.vertices]
    for c in X.curves:
        pts.append(c.point_at(np.linspace(0.0, 1.0, n, endpoint=not c.closed)))
    for c in X.filled:
        v = c.vertices
        xs = np.linspace(v.real.min(), v.real.max(), int(math.sqrt(n)) + 2)[1:-1]
        ys = np.linspace(v.imag.min(), v.imag.max(), int(math.sqrt(n)) + 2)[1:-1]
        grid = (xs[:, None] + 1j * ys[None, :]).ravel()
        pts.append(grid[winding_numbers(c, grid, check=False) != 0])
    return np.concatenate(pts)


def _samples_of_shape(g, n: int) -> np.ndarray:
    out = []
    for p in _parts(g):
        if p.geom_type == "Point":
            out.append([complex(p.x, p.y)])
        elif p.geom_type == "LineString":
            s = np.linspace(0.0, p.length, n)
            q = [p.interpolate(t) for t in s]
            out.append([complex(a.x, a.y) for a in q])
        elif p.geom_type == "Polygon":
            out.append(_samples_on(PolyContinuum.from_polygon(list(p.exterior.coords)[:-1]), n))
    return np.concatenate(out) if out else np.array([], dtype=complex)


@dataclass
class ScrambleConfig:
    """``X`` with exit continua ``zones[i]`` meeting it in ``K_i``."""

    X: PolyContinuum
    zones: list
    f: PlaneMap
    shapes: list = field(init=False, repr=False)
    exits: list = field(init=False, repr=False)

    def __post_init__(self):
        x = to_shape(self.X)
        self.shapes = [to_shape(Z) for Z in self.zones]
        for i, a in enumerate(self.shapes):
            for b in self.shapes[i + 1:]:
                if a.intersects(b):
                    raise ValueError("the zones must be pairwise disjoint")
        self.exits = [shapely.intersection(x.buffer(EPS_GEOM), z) for z in self.shapes]
        if any(k.is_empty for k in self.exits):
            raise ValueError("every zone must meet X")


@dataclass(frozen=True)
class PlaneScrambleReport:
    verdict: str
    clause: str | None = None
    witness: complex | None = None
    zone: int | None = None

    @property
    def scrambles(self) -> bool:
        return self.verdict in ("scrambles", "strongly-scrambles")

    def to_json(self) -> dict:
        out = {"verdict": self.verdict}
        if self.clause is not None:
            out["clause"] = self.clause
        if self.witness is not None:
            out["witness"] = [self.witness.real, self.witness.imag]
        if self.zone is not None:
            out["zone"] = self.zone
        return out


def check_scrambling(cfg: ScrambleConfig, samples: int = 400, tol: float = 1e-9) -> PlaneScrambleReport:
    """Sampled check of the planar boundary-scrambling conditions and of the
    strong variant."""
    X, f = cfg.X, cfg.f
    pts = _samples_on(X, samples)
    img = np.asarray(f(pts), dtype=complex)
    out_of_x = ~X.in_hull(img, tol)
    in_zone = np.zeros(len(pts), dtype=bool)
    for Z in cfg.zones:
        in_zone |= Z.in_hull(img, tol)
    bad = np.nonzero(out_of_x & ~in_zone)[0]
    if len(bad):
        return PlaneScrambleReport("fails", "1", complex(pts[bad[0]]))
    for i, K in enumerate(cfg.exits):
        if not is_non_separating(K):
            return PlaneScrambleReport("fails", "2", zone=i)
    strong = True
    for i, (Z, K) in enumerate(zip(cfg.zones, cfg.exits)):
        ks = _samples_of_shape(K, samples)
        fk = np.asarray(f(ks), dtype=complex)
        in_z = Z.in_hull(fk, tol)
        in_x = X.in_hull(fk, tol)
        bad = np.nonzero(in_z & ~in_x)[0]
        if len(bad):
            return PlaneScrambleReport("fails", "3", complex(ks[bad[0]]), i)
        if not ((in_z & in_x).all() or not in_z.any()):
            strong = False
    return PlaneScrambleReport("strongly-scrambles" if strong else "scrambles")
