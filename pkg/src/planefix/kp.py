"""Maximal balls in the complement of a polygonal compact set.

A ball (disk, half-plane or exterior of a disk) is maximal for ``K`` when
its interior misses ``K`` and its boundary meets ``K`` in at least two
points.  The hyperbolic convex hull of the contact set inside the ball is
bounded by geodesic chords; hulls of distinct maximal balls tile the
complement of ``K``.  Given a point, its ball is found constructively by
inverting about the point and taking the smallest disk enclosing the image
of ``K``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .geom import (
    EPS_GEOM,
    Ball,
    Geodesic,
    GeometryError,
    PolyContinuum,
    ball_through,
    circumcircle,
    cross,
    dot,
    geodesic,
    segments_distance,
    smallest_enclosing_ball,
    winding_numbers,
)


class PointInContinuum(GeometryError):
    pass


# ---------------------------------------------------------------------------
# Contacts and elements
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Contact:
    """A component of ``boundary(B) & K``: a point (``start == end``) or a
    straight piece of a half-plane boundary, oriented along the boundary."""

    start: complex
    end: complex

    @property
    def is_point(self) -> bool:
        return self.start == self.end

    def to_json(self) -> list:
        if self.is_point:
            return [self.start.real, self.start.imag]
        return [[self.start.real, self.start.imag], [self.end.real, self.end.imag]]


def _tolerance(K: PolyContinuum) -> float:
    return 1e-8 * max(1.0, K.scale())


def _boundary_coord(B: Ball, z: complex) -> float:
    return float(B.boundary_angle(z))


def _boundary_point(B: Ball, beta: float) -> complex:
    if B.kind == "disk":
        return B.center + B.radius * cmath.exp(1j * beta)
    if B.kind == "exterior":
        return B.center + B.radius * cmath.exp(-1j * beta)
    return B.center + beta * (-1j * B.normal)


def contact_set(B: Ball, K: PolyContinuum, tol: float | None = None) -> list[Contact]:
    """Components of ``boundary(B) & K`` ordered along the boundary of ``B``."""
    tol = _tolerance(K) if tol is None else tol
    merge = 100 * tol
    points: list[complex] = []
    pieces: list[tuple[complex, complex]] = []
    for a, b in K.segments:
        a, b = complex(a), complex(b)
        if B.kind == "halfplane":
            da, db = float(B.signed_depth(a)), float(B.signed_depth(b))
            if abs(da) <= tol and abs(db) <= tol:
                pieces.append((a, b))
                continue
            if abs(da) <= tol:
                points.append(a)
            if abs(db) <= tol:
                points.append(b)
            if da * db < 0 and abs(da) > tol and abs(db) > tol:
                points.append(a + (b - a) * da / (da - db))
            continue
        c, r = B.center, B.radius
        d = b - a
        A = abs(d) ** 2
        Bq = 2 * dot(d, a - c)
        C = abs(a - c) ** 2 - r * r
        ends = [z for z in (a, b) if abs(abs(z - c) - r) <= tol]
        points.extend(ends)
        u = min(max(-Bq / (2 * A), 0.0), 1.0)
        z = a + u * d
        if abs(abs(z - c) - r) <= tol:
            # tangency: one contact at the foot of the center
            if not any(abs(z - e) <= merge for e in ends):
                points.append(z)
            continue
        disc = Bq * Bq - 4 * A * C
        if disc >= 0:
            sq = math.sqrt(disc)
            for u in ((-Bq - sq) / (2 * A), (-Bq + sq) / (2 * A)):
                if 0 < u < 1 and not any(abs(a + u * d - e) <= merge for e in ends):
                    points.append(a + u * d)
    comps: list[tuple[float, float, complex, complex]] = []
    for a, b in pieces:
        sa, sb = _boundary_coord(B, a), _boundary_coord(B, b)
        if sa > sb:
            a, b, sa, sb = b, a, sb, sa
        comps.append((sa, sb, a, b))
    comps.sort(key=lambda x: x[0])
    merged: list[list] = []
    for sa, sb, a, b in comps:
        if merged and sa <= merged[-1][1] + tol:
            if sb > merged[-1][1]:
                merged[-1][1], merged[-1][3] = sb, b
        else:
            merged.append([sa, sb, a, b])
    out = [[sa, sb, a, b] for sa, sb, a, b in merged]
    for z in points:
        s = _boundary_coord(B, z)
        if any(seg[0] - tol <= s <= seg[1] + tol for seg in merged):
            continue
        if any(abs(z - o[2]) <= merge for o in out):
            continue
        out.append([s, s, z, z])
    out.sort(key=lambda x: x[0])
    return [Contact(a, b) for _, _, a, b in out]


@dataclass(frozen=True)
class Chord:
    """A chord of the hull with the side of its carrier that is cut away."""

    geodesic: Geodesic
    cap_sign: float

    @property
    def a(self) -> complex:
        return self.geodesic.a

    @property
    def b(self) -> complex:
        return self.geodesic.b


def _side(g: Geodesic, z: complex) -> float:
    if g.circle is None:
        return cross(g.b - g.a, z - g.a)
    c, r = g.circle
    return abs(z - c) - r


def _dist(g: Geodesic, z: complex) -> float:
    if g.circle is None:
        ab = g.b - g.a
        return abs(cross(ab, z - g.a)) / abs(ab)
    c, r = g.circle
    return abs(abs(z - c) - r)


@dataclass(frozen=True)
class KPElement:
    """The hull of the contact set of a maximal ball."""

    ball: Ball
    contacts: tuple
    chords: tuple
    euclidean: bool = False

    @property
    def is_gap(self) -> bool:
        return len(self.contacts) >= 3 or any(not c.is_point for c in self.contacts)

    @property
    def contact_points(self) -> list[complex]:
        out = []
        for c in self.contacts:
            out.append(c.start)
            if not c.is_point:
                out.append(c.end)
        return out

    @property
    def distinct_chords(self) -> list[Geodesic]:
        out: list[Geodesic] = []
        for ch in self.chords:
            if not any({ch.a, ch.b} == {g.a, g.b} for g in out):
                out.append(ch.geodesic)
        return out

    def contains(self, p: complex, tol: float = 1e-7) -> bool:
        p = complex(p)
        if float(self.ball.signed_depth(p)) < -tol:
            return False
        for ch in self.chords:
            if _dist(ch.geodesic, p) <= tol:
                continue
            if _side(ch.geodesic, p) * ch.cap_sign > 0:
                return False
        return True

    def to_json(self, far: float | None = None) -> dict:
        return {
            "ball": self.ball.to_json(),
            "contacts": [c.to_json() for c in self.contacts],
            "chords": [[[z.real, z.imag] for z in g.polyline(far=far)] for g in self.distinct_chords],
            "is_gap": self.is_gap,
        }


def kp_element(B: Ball, K: PolyContinuum, euclidean: bool = False, tol: float | None = None) -> KPElement:
    """Hull of ``boundary(B) & K`` bounded by chords between consecutive contacts."""
    tol = _tolerance(K) if tol is None else tol
    if euclidean and B.kind != "disk":
        raise ValueError("straight chords are only defined for disks")
    comps = contact_set(B, K, tol)
    if len(comps) < 2 and not (len(comps) == 1 and not comps[0].is_point):
        raise ValueError("a maximal ball needs at least two contact points")
    chords = []
    m = len(comps)
    for k in range(m):
        x, y = comps[k].end, comps[(k + 1) % m].start
        if abs(x - y) <= tol:
            continue
        g = Geodesic(B, x, y, None) if euclidean else geodesic(B, x, y, tol=1e-6)
        wraps = k == m - 1
        if B.kind == "halfplane" and wraps:
            # the boundary gap runs through infinity, outside the carrier circle
            ref_sign = 1.0 if g.circle is not None else -_side(g, _boundary_point(B, 0.0))
        else:
            bx, by = _boundary_coord(B, x), _boundary_coord(B, y)
            if B.kind == "halfplane":
                beta = (bx + by) / 2
            else:
                span = (by - bx) % (2 * math.pi)
                if span <= 1e-15:
                    span = 2 * math.pi
                beta = bx + span / 2
            ref_sign = _side(g, _boundary_point(B, beta))
        chords.append(Chord(g, math.copysign(1.0, ref_sign)))
    return KPElement(B, tuple(comps), tuple(chords), euclidean)


def ball_is_empty(B: Ball, K: PolyContinuum, tol: float | None = None) -> bool:
    """True when the interior of ``B`` misses ``K``."""
    tol = _tolerance(K) if tol is None else tol
    v = K.vertices
    if B.kind == "exterior":
        return bool(np.all(np.abs(v - B.center) <= B.radius + tol))
    if B.kind == "halfplane":
        return bool(np.all(B.signed_depth(v) <= tol))
    if float(K.distance([B.center])[0]) < B.radius - tol:
        return False
    return not any(winding_numbers(c, [B.center], check=False)[0] != 0 for c in K.filled)


# ---------------------------------------------------------------------------
# Point location by inversion
# ---------------------------------------------------------------------------

def _image_circle(a: complex, b: complex, p: complex):
    """Carrier ``(center, radius)`` of the image of ``[a, b]`` under
    ``1/(z - p)``, or None when the image is straight."""
    return circumcircle(0j, 1 / (a - p), 1 / (b - p))


def _farthest_on_image(a: complex, b: complex, p: complex, c: complex) -> tuple[complex, bool]:
    """Point of the image of ``[a, b]`` farthest from ``c``; the flag tells
    whether it is interior to the image arc."""
    A, Bm = 1 / (a - p), 1 / (b - p)
    mid = 1 / ((a + b) / 2 - p)
    best = A if abs(A - c) >= abs(Bm - c) else Bm
    circ = _image_circle(a, b, p)
    if circ is None:
        return best, False
    g, rho = circ
    if abs(g - c) <= 1e-300:
        return best, False
    q = g + rho * (g - c) / abs(g - c)
    if cross(Bm - A, q - A) * cross(Bm - A, mid - A) > 0 and abs(q - c) > abs(best - c):
        return q, True
    return best, False


def enclosing_disk_of_image(K: PolyContinuum, p: complex, max_iter: int = 100) -> tuple[complex, float]:
    """Smallest disk containing the image of ``K`` under ``z -> 1/(z - p)``.

    Vertex images and the farthest points of the edge images (circular
    arcs) are fed to Welzl's algorithm until nothing sticks out.  When the
    result is pinned by just two objects it is recomputed in closed form,
    because the farthest-point iteration converges slowly along an arc.
    """
    segs = K.segments
    vimg = 1 / (K.vertices - p)
    pts = list(vimg) + list(1 / ((segs[:, 0] + segs[:, 1]) / 2 - p))
    for _ in range(max_iter):
        D = smallest_enclosing_ball(pts)
        c, r = D.center, D.radius
        extra = []
        for a, b in segs:
            q, _ = _farthest_on_image(complex(a), complex(b), p, c)
            if abs(q - c) > r * (1 + 1e-12):
                extra.append(q)
        if not extra:
            break
        pts += extra
    # active objects: (center, radius) with radius 0 for points
    active = [(complex(v), 0.0) for v in vimg if abs(v - c) >= r * (1 - 1e-6)]
    for a, b in segs:
        q, interior = _farthest_on_image(complex(a), complex(b), p, c)
        if interior and abs(q - c) >= r * (1 - 1e-6):
            active.append(_image_circle(complex(a), complex(b), p))
    uniq: list[tuple[complex, float]] = []
    for g, rho in active:
        if not any(abs(g - h) <= 1e-9 * r and abs(rho - s) <= 1e-9 * r for h, s in uniq):
            uniq.append((g, rho))
    # a disk pinned by two objects is exact in closed form; nearby vertices
    # may also look active, so every pair is tried
    best = None
    for i in range(len(uniq)):
        for j in range(i + 1, len(uniq)):
            (g1, r1), (g2, r2) = uniq[i], uniq[j]
            dist = abs(g2 - g1)
            if dist == 0:
                continue
            u = (g2 - g1) / dist
            f1, f2 = g1 - r1 * u, g2 + r2 * u
            c2, rr = (f1 + f2) / 2, abs(f2 - f1) / 2
            if abs(rr - r) > 1e-6 * r or (best is not None and rr >= best[1]):
                continue
            if all(abs(v - c2) <= rr * (1 + 1e-9) for v in vimg) and all(
                    abs(_farthest_on_image(complex(a), complex(b), p, c2)[0] - c2) <= rr * (1 + 1e-9)
                    for a, b in segs):
                best = (c2, rr)
    return best if best is not None else (c, r)


def pull_back(c: complex, r: float, p: complex) -> Ball:
    """Preimage under ``z -> 1/(z - p)`` of the closed exterior of ``|w - c| <= r``."""
    e = abs(c) ** 2 - r * r
    if abs(e) <= 1e-10 * (abs(c) + r) ** 2:
        n = c.conjugate() / abs(c)
        return Ball.halfplane(p + n / (2 * abs(c)), -n)
    q = p + c.conjugate() / e
    rho = r / abs(e)
    return Ball("exterior" if e > 0 else "disk", q, rho)


def kp_locate(p: complex, K: PolyContinuum, euclidean: bool = False) -> KPElement:
    """The element of the partition whose hull contains ``p``."""
    p = complex(p)
    if K.in_hull([p], tol=EPS_GEOM)[0]:
        raise PointInContinuum(f"{p} lies in K")
    c, r = enclosing_disk_of_image(K, p)
    B = pull_back(c, r, p)
    return kp_element(B, K, euclidean)


# ---------------------------------------------------------------------------
# Enumeration of maximal balls
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MaximalBall:
    ball: Ball
    contacts: tuple

    def to_json(self) -> dict:
        return {"ball": self.ball.to_json(), "contacts": [c.to_json() for c in self.contacts]}


def _features(K: PolyContinuum):
    verts = [complex(v) for v in K.vertices]
    edges = [(complex(a), complex(b)) for a, b in K.segments]
    return verts, edges


def _line(e):
    a, b = e
    d = (b - a) / abs(b - a)
    n = 1j * d
    return n, dot(n, a)


def _circles_ppp(a, b, c):
    cc = circumcircle(a, b, c)
    return [cc] if cc is not None else []


def _circles_ppl(v1, v2, e):
    n, d0 = _line(e)
    m = (v1 + v2) / 2
    u = 1j * (v2 - v1) / abs(v2 - v1)
    alpha = dot(n, m) - d0
    beta = dot(n, u)
    h2 = abs(m - v1) ** 2
    out = []
    A, Bq, C = 1 - beta * beta, -2 * alpha * beta, h2 - alpha * alpha
    roots = _quadratic(A, Bq, C)
    for t in roots:
        c = m + t * u
        out.append((c, abs(c - v1)))
    return out


def _circles_pll(v, e1, e2):
    n1, d1 = _line(e1)
    n2, d2 = _line(e2)
    out = []
    M = np.array([[n1.real, n1.imag], [n2.real, n2.imag]])
    det = np.linalg.det(M)
    for s1 in (1, -1):
        for s2 in (1, -1):
            if abs(det) > 1e-12:
                c0 = np.linalg.solve(M, [d1, d2])
                c1 = np.linalg.solve(M, [s1, s2])
                c0, c1 = complex(*c0), complex(*c1)
                # |c0 + r c1 - v|^2 = r^2
                w = c0 - v
                A = abs(c1) ** 2 - 1
                Bq = 2 * dot(c1, w)
                C = abs(w) ** 2
                for r in _quadratic(A, Bq, C):
                    if r > 0:
                        out.append((c0 + r * c1, r))
            elif s1 == 1 and s2 == 1:
                # parallel lines: the circle sits midway
                if dot(n1, n2) < 0:
                    n2, d2 = -n2, -d2
                r = abs(d1 - d2) / 2
                mid_off = (d1 + d2) / 2
                base = n1 * mid_off
                dirv = -1j * n1
                w = base - v
                for t in _quadratic(1.0, 2 * dot(dirv, w), abs(w) ** 2 - r * r):
                    out.append((base + t * dirv, r))
    return out


def _circles_lll(e1, e2, e3):
    lines = [_line(e) for e in (e1, e2, e3)]
    out = []
    for s in ((1, 1, 1), (1, 1, -1), (1, -1, 1), (-1, 1, 1)):
        M = np.array([[n.real, n.imag, -si] for (n, _), si in zip(lines, s)])
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        x, y, r = np.linalg.solve(M, [d for _, d in lines])
        if abs(r) > 1e-12:
            out.append((complex(x, y), abs(r)))
    return out


def _quadratic(A, B, C):
    if abs(A) < 1e-14:
        return [-C / B] if abs(B) > 1e-14 else []
    disc = B * B - 4 * A * C
    if disc < 0:
        return []
    sq = math.sqrt(disc)
    return [(-B - sq) / (2 * A), (-B + sq) / (2 * A)]


def _dedupe(balls: list[Ball]) -> list[Ball]:
    out: list[Ball] = []
    for B in sorted(balls, key=lambda b: b.key()):
        if not any(B.same_as(o, 1e-7) for o in out):
            out.append(B)
    return out


def gap_balls(K: PolyContinuum, tol: float | None = None) -> list[KPElement]:
    """Maximal balls whose hull has interior: three or more contacts, or a
    whole edge on a half-plane boundary."""
    tol = _tolerance(K) if tol is None else tol
    verts, edges = _features(K)
    feats = [("v", v) for v in verts] + [("e", e) for e in edges]
    circles = []
    for f1, f2, f3 in combinations(feats, 3):
        kinds = "".join(sorted(x[0] for x in (f1, f2, f3)))
        vs = [x[1] for x in (f1, f2, f3) if x[0] == "v"]
        es = [x[1] for x in (f1, f2, f3) if x[0] == "e"]
        if kinds == "vvv":
            circles += _circles_ppp(*vs)
        elif kinds == "evv":
            circles += _circles_ppl(vs[0], vs[1], es[0])
        elif kinds == "eev":
            circles += _circles_pll(vs[0], es[0], es[1])
        else:
            circles += _circles_lll(*es)
    cands = []
    for c, r in circles:
        if not (math.isfinite(c.real) and math.isfinite(c.imag)) or r <= tol:
            continue
        for kind in ("disk", "exterior"):
            cands.append(Ball(kind, c, r))
    for a, b in combinations(verts, 2):
        n = 1j * (b - a) / abs(b - a)
        cands.append(Ball.halfplane(a, n))
        cands.append(Ball.halfplane(a, -n))
    out = []
    for B in _dedupe([B for B in cands if ball_is_empty(B, K, tol)]):
        try:
            el = kp_element(B, K, tol=tol)
        except ValueError:
            continue
        if el.is_gap:
            out.append(el)
    return out


def _family_balls(K: PolyContinuum, budget: int) -> list[Ball]:
    verts, edges = _features(K)
    out = []
    params = (np.arange(budget) + 0.5) / budget
    for a, b in combinations(verts, 2):
        for s in params:
            out.append(ball_through(a, b, 2 * math.pi * s))
    for v in verts:
        for e in edges:
            if abs(v - e[0]) <= EPS_GEOM or abs(v - e[1]) <= EPS_GEOM:
                continue
            n, _ = _line(e)
            for s in params:
                t = e[0] + s * (e[1] - e[0])
                den = 2 * dot(n, v - t)
                if abs(den) <= 1e-12:
                    continue
                lam = abs(t - v) ** 2 / den
                out.append(Ball("disk", t + lam * n, abs(lam)))
                out.append(Ball("exterior", t + lam * n, abs(lam)))
    for e1, e2 in combinations(edges, 2):
        n1, _ = _line(e1)
        n2, d2 = _line(e2)
        for s in params:
            t = e1[0] + s * (e1[1] - e1[0])
            for sign in (1, -1):
                # center t + lam*n1 at signed distance sign*|lam| from line 2
                k = dot(n2, n1)
                for sl in (1, -1):
                    den = k - sign * sl
                    if abs(den) <= 1e-12:
                        continue
                    lam = (d2 - dot(n2, t)) / den
                    if lam * sl <= 0:
                        continue
                    out.append(Ball("disk", t + lam * n1, abs(lam)))
    return out


def maximal_balls(K: PolyContinuum, budget: int = 64) -> list[MaximalBall]:
    """Maximal balls of the complement of ``K``.

    Balls with three or more contacts (and half-planes carrying an edge)
    are found exactly; the one-parameter families of two-contact balls are
    sampled at ``budget`` parameters per pair of boundary features.
    """
    if K.scale() <= EPS_GEOM:
        raise GeometryError("K has zero size")
    tol = _tolerance(K)
    gaps = gap_balls(K, tol)
    fam = [B for B in _family_balls(K, budget) if ball_is_empty(B, K, tol)]
    out = [MaximalBall(el.ball, el.contacts) for el in gaps]
    for B in _dedupe(fam):
        if any(B.same_as(m.ball, 1e-7) for m in out):
            continue
        comps = contact_set(B, K, tol)
        if len(comps) >= 2:
            out.append(MaximalBall(B, tuple(comps)))
    return out


# ---------------------------------------------------------------------------
# Brute-force location (oracle for the inversion method)
# ---------------------------------------------------------------------------

def _vcircumcircle(a, b, c):
    d = 2 * cross(b - a, c - a)
    ba, ca = b - a, c - a
    ok = np.abs(d) > 1e-14 * (np.abs(ba) * np.abs(ca) + 1e-300)
    d = np.where(ok, d, 1.0)
    ux = (np.abs(ba) ** 2 * ca.imag - np.abs(ca) ** 2 * ba.imag) / d
    uy = (np.abs(ca) ** 2 * ba.real - np.abs(ba) ** 2 * ca.real) / d
    g = a + ux + 1j * uy
    return g, np.abs(g - a), ok


def _pair_candidates(p: complex, verts: np.ndarray, edges: np.ndarray):
    """Circles (center, radius) through two boundary features of ``K`` whose
    geodesic passes through ``p``; plus half-plane boundary lines."""
    centers, radii = [], []
    lines = []
    nv = len(verts)
    # vertex / vertex
    i, j = np.triu_indices(nv, 1)
    a, b = verts[i], verts[j]
    g, R, ok = _vcircumcircle(a, b, np.full(a.shape, p))
    m = (a + b) / 2
    u = 1j * (b - a) / np.abs(b - a)
    den = 2 * dot(u, m - g)
    line = ~ok | (np.abs(den) <= 1e-12 * np.abs(b - a) ** 2)
    den = np.where(line, 1.0, den)
    s = (np.abs(m - a) ** 2 + R ** 2 - np.abs(m - g) ** 2) / den
    C = np.where(ok, m + s * u, m)
    rad = np.abs(C - a)
    sel = ok & ~line
    centers.append(C[sel])
    radii.append(rad[sel])
    coll = ~ok
    centers.append(m[coll])
    radii.append(np.abs(b - a)[coll] / 2)
    for aa, bb in zip(a[ok & line], b[ok & line]):
        lines.append((aa, bb))
    # vertex / edge
    e0, e1 = edges[:, 0], edges[:, 1]
    L = np.abs(e1 - e0)
    d = (e1 - e0) / L
    n = 1j * d
    vi, ei = np.meshgrid(np.arange(nv), np.arange(len(edges)), indexing="ij")
    vi, ei = vi.ravel(), ei.ravel()
    v = verts[vi]
    E0, D, N = e0[ei], d[ei], n[ei]
    not_end = (np.abs(v - E0) > EPS_GEOM) & (np.abs(v - e1[ei]) > EPS_GEOM)
    den = 2 * dot(D, p - v)
    good = not_end & (np.abs(den) > 1e-14)
    den = np.where(good, den, 1.0)
    x = (np.abs(E0 - p) ** 2 - np.abs(E0 - v) ** 2) / den
    O = E0 + x * D
    R = np.abs(O - v)
    for sgn in (1, -1):
        t = O + sgn * R * D
        xt = dot(D, t - E0)
        den2 = 2 * dot(N, v - t)
        ok2 = good & (np.abs(den2) > 1e-14) & (xt > 0) & (xt < L[ei])
        den2 = np.where(ok2, den2, 1.0)
        lam = np.abs(t - v) ** 2 / den2
        centers.append((t + lam * N)[ok2])
        radii.append(np.abs(lam)[ok2])
    # edge / edge
    ne = len(edges)
    i, j = np.triu_indices(ne, 1)
    d1, d2 = d[i], d[j]
    n1, n2 = n[i], n[j]
    a1, a2 = e0[i], e0[j]
    det = cross(d1, d2)
    par = np.abs(det) <= 1e-12
    det = np.where(par, 1.0, det)
    s1 = cross(a2 - a1, d2) / det
    O = a1 + s1 * d1
    R = np.abs(p - O)
    for sg1 in (1, -1):
        for sg2 in (1, -1):
            t1 = O + sg1 * R * d1
            t2 = O + sg2 * R * d2
            x1, x2 = dot(d1, t1 - a1), dot(d2, t2 - a2)
            dd = cross(n1, n2)
            okp = (~par & (np.abs(dd) > 1e-14) & (x1 > 0) & (x1 < L[i]) & (x2 > 0) & (x2 < L[j]))
            dd = np.where(okp, dd, 1.0)
            lam1 = cross(t2 - t1, n2) / dd
            centers.append((t1 + lam1 * n1)[okp])
            radii.append(np.abs(lam1)[okp])
    if par.any():
        f1 = a1 + dot(d1, p - a1) * d1
        f2 = a2 + dot(d2, p - a2) * d2
        centers.append(((f1 + f2) / 2)[par])
        radii.append((np.abs(f1 - f2) / 2)[par])
    return np.concatenate(centers), np.concatenate(radii), lines


def brute_force_locate(p: complex, K: PolyContinuum, gaps: list[KPElement] | None = None,
                       tol: float | None = None) -> list[KPElement]:
    """Every element whose hull contains ``p``, by exhaustive construction.

    Candidate balls are the gap balls of ``K`` together with, for every pair
    of boundary features, the balls touching both whose chord passes
    through ``p`` (closed-form constructions).  Works for sets without
    filled parts and for filled polygons alike.
    """
    p = complex(p)
    tol = _tolerance(K) if tol is None else tol
    if gaps is None:
        gaps = gap_balls(K, tol)
    verts = K.vertices
    edges = K.segments
    C, R, lines = _pair_candidates(p, verts, edges)
    fin = np.isfinite(C) & np.isfinite(R) & (R > tol)
    C, R = C[fin], R[fin]
    inside = np.abs(p - C) < R
    # disk when p is inside the circle, exterior otherwise
    dmin = segments_distance(edges, C) if len(C) else np.empty(0)
    vmax = np.abs(verts[None, :] - C[:, None]).max(axis=1)
    ok = np.where(inside, dmin >= R - tol, vmax <= R + tol)
    for curve in K.filled:
        sel = ok & inside
        if sel.any():
            ok[sel] &= winding_numbers(curve, C[sel], check=False) == 0
    balls = [Ball("disk" if ins else "exterior", complex(c), float(r))
             for c, r, ins in zip(C[ok], R[ok], inside[ok])]
    for a, b in lines:
        n = 1j * (b - a) / abs(b - a)
        if dot(n, p - a) < 0:
            n = -n
        B = Ball.halfplane(a, n)
        if ball_is_empty(B, K, tol):
            balls.append(B)
    found: list[KPElement] = []
    for B in _dedupe(balls):
        try:
            el = kp_element(B, K, tol=tol)
        except ValueError:
            continue
        if el.contains(p, 1e-7 * max(1.0, abs(p))):
            found.append(el)
    for el in gaps:
        if el.contains(p, 1e-7 * max(1.0, abs(p))) and not any(el.ball.same_as(f.ball, 1e-6) for f in found):
            found.append(el)
    return found


@dataclass(frozen=True)
class PartitionReport:
    located: int
    agreements: int
    multiple: int
    missing: int
    disagreements: tuple

    @property
    def ok(self) -> bool:
        return self.agreements == self.located and self.multiple == 0 and self.missing == 0

    def to_json(self) -> dict:
        return {"located": self.located, "agreements": self.agreements, "multiple": self.multiple,
                "missing": self.missing,
                "disagreements": [[z.real, z.imag] for z in self.disagreements], "ok": self.ok}


def partition_check(K: PolyContinuum, samples) -> PartitionReport:
    """Locate each sample by inversion and cross-check against brute force."""
    tol = _tolerance(K)
    gaps = gap_balls(K, tol)
    agree = multiple = missing = 0
    bad = []
    samples = [complex(z) for z in np.atleast_1d(np.asarray(samples, dtype=complex))]
    for p in samples:
        el = kp_locate(p, K)
        brute = brute_force_locate(p, K, gaps, tol)
        if len(brute) > 1:
            multiple += 1
        if not brute:
            missing += 1
        if any(el.ball.same_as(b.ball, 1e-6) for b in brute) and el.contains(p, 1e-7 * max(1.0, abs(p))):
            agree += 1
        else:
            bad.append(p)
    return PartitionReport(len(samples), agree, multiple, missing, tuple(bad))


# ---------------------------------------------------------------------------
# Chords joining two points of K
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ChordSet:
    """``kind`` is ``"empty"``, ``"single"`` or ``"disk"``; ``chords`` holds
    the witness chord(s): the single chord or the two extreme chords."""

    kind: str
    chords: tuple
    angles: tuple

    def to_json(self, far: float | None = None) -> dict:
        return {"kind": self.kind, "angles": list(self.angles),
                "chords": [[[z.real, z.imag] for z in g.polyline(far=far)] for g in self.chords]}


def chords_between(a: complex, b: complex, K: PolyContinuum, samples: int = 720,
                   threshold: float = 1e-6) -> ChordSet:
    """All chords joining ``a`` and ``b`` through maximal balls of ``K``.

    The balls through ``a`` and ``b`` form a circle of balls parametrized by
    the tangent angle at ``a``; the valid ones (empty interior) form an arc
    whose ends are located by bisection.
    """
    a, b = complex(a), complex(b)
    tol = _tolerance(K)
    if not (K.in_hull([a], tol)[0] and K.in_hull([b], tol)[0]):
        raise GeometryError("chord endpoints must lie in K")

    def valid(theta):
        B = ball_through(a, b, theta)
        return ball_is_empty(B, K, tol)

    thetas = 2 * math.pi * np.arange(samples) / samples
    flags = np.array([valid(t) for t in thetas])
    if not flags.any():
        return ChordSet("empty", (), ())
    if flags.all():
        raise GeometryError("every ball through the two points is empty; K is too small")
    # rotate so that a valid run does not wrap
    start = int(np.argmax(~flags))
    idx = (np.arange(samples) + start) % samples
    f = flags[idx]
    first = int(np.argmax(f))
    last = samples - 1 - int(np.argmax(f[::-1]))
    step = 2 * math.pi / samples

    def refine(good, bad):
        for _ in range(60):
            mid = (good + bad) / 2
            if valid(mid):
                good = mid
            else:
                bad = mid
        return good

    t_first = thetas[idx[first]]
    t_last = thetas[idx[first]] + (last - first) * step
    lo = refine(t_first, t_first - step)
    hi = refine(t_last, t_last + step)
    gl = geodesic(ball_through(a, b, lo), a, b, tol=1e-6)
    if hi - lo <= threshold:
        return ChordSet("single", (gl,), (lo % (2 * math.pi),))
    gh = geodesic(ball_through(a, b, hi), a, b, tol=1e-6)
    return ChordSet("disk", (gl, gh), (lo % (2 * math.pi), hi % (2 * math.pi)))


__all__ = [
    "PointInContinuum", "Contact", "Chord", "KPElement", "MaximalBall", "contact_set", "kp_element",
    "ball_is_empty", "enclosing_disk_of_image", "pull_back", "kp_locate", "gap_balls", "maximal_balls",
    "brute_force_locate", "PartitionReport", "partition_check", "ChordSet", "chords_between",
]
