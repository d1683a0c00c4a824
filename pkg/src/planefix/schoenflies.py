"""Extension of a boundary homeomorphism between polygons to their interiors.

The target polygon is cut by the straight chords of its maximal inscribed
disks (chords join consecutive contact points of a disk).  The chords and
the boundary split the target into faces.  Pulling the face vertices back
through the boundary map gives matching faces in the (convex) source, and
each source face is mapped onto its target face radially from its vertex
average, affinely on every ray.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geom import (
    EPS_GEOM,
    DegenerateRegion,
    GeometryError,
    PolyContinuum,
    PolyCurve,
    cross,
    winding_numbers,
)
from .kp import KPElement, gap_balls, kp_element, kp_locate


class NotInjective(GeometryError):
    pass


class OrientationReversed(GeometryError):
    pass


class OutsideDomain(GeometryError):
    pass


class SourceNotConvex(GeometryError):
    pass


# ---------------------------------------------------------------------------
# Boundary correspondences
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryMap:
    """Piecewise-linear homeomorphism between two polygon boundaries.

    ``src_knots[k]`` (arclength parameter on ``source``) maps to
    ``dst_knots[k]`` (on ``target``); in between the map is linear in
    arclength.  Knots are listed counterclockwise on both sides.
    """

    source: PolyCurve
    target: PolyCurve
    src_knots: np.ndarray
    dst_knots: np.ndarray

    def __post_init__(self):
        s = np.mod(np.asarray(self.src_knots, float), 1.0)
        d = np.mod(np.asarray(self.dst_knots, float), 1.0)
        if len(s) != len(d) or len(s) < 3:
            raise ValueError("need at least three matching knots")
        order = np.argsort(s)
        s, d = s[order], d[order]
        if np.any(np.diff(s) <= 1e-12):
            raise NotInjective("source knots repeat")
        fwd = np.mod(np.diff(np.concatenate([d, d[:1]])), 1.0)
        bwd = np.mod(-np.diff(np.concatenate([d, d[:1]])), 1.0)
        if np.all(fwd > 1e-12) and abs(fwd.sum() - 1.0) < 1e-9:
            pass
        elif np.all(bwd > 1e-12) and abs(bwd.sum() - 1.0) < 1e-9:
            raise OrientationReversed("the boundary map reverses orientation")
        else:
            raise NotInjective("the boundary map is not injective")
        d_unwrapped = d[0] + np.concatenate([[0.0], np.cumsum(fwd[:-1])])
        object.__setattr__(self, "src_knots", s)
        object.__setattr__(self, "dst_knots", d_unwrapped)

    @classmethod
    def vertex_map(cls, source: PolyCurve, target: PolyCurve, shift: int = 0) -> "BoundaryMap":
        """Vertex ``k`` of ``source`` to vertex ``k + shift`` of ``target``
        (listed as given, so a clockwise listing reverses orientation)."""
        if len(source.vertices) != len(target.vertices):
            raise ValueError("vertex maps need polygons with equally many vertices")
        n = len(source.vertices)
        src = source.knots[:-1]
        dst = target.knots[(np.arange(n) + shift) % n]
        return cls(source, target, src, dst)

    @classmethod
    def identity(cls, curve: PolyCurve) -> "BoundaryMap":
        return cls(curve, curve, curve.knots[:-1], curve.knots[:-1])

    def _interp(self, t, xs, ys):
        t = np.mod(np.asarray(t, float) - xs[0], 1.0) + xs[0]
        xs_ext = np.concatenate([xs, [xs[0] + 1.0]])
        ys_ext = np.concatenate([ys, [ys[0] + 1.0]])
        return np.mod(np.interp(t, xs_ext, ys_ext), 1.0)

    def param(self, t):
        """Target parameter of source parameter ``t``."""
        return self._interp(t, self.src_knots, self.dst_knots)

    def inverse_param(self, t):
        return self._interp(t, self.dst_knots, self.src_knots)

    def __call__(self, z):
        z = np.atleast_1d(np.asarray(z, complex))
        return self.target.point_at(self.param([self.source.param_of(complex(w)) for w in z]))


# ---------------------------------------------------------------------------
# Interior lamination
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InteriorLamination:
    """Straight chords of maximal inscribed disks of a polygon."""

    polygon: PolyCurve
    elements: tuple
    chords: tuple

    @property
    def gaps(self) -> list[KPElement]:
        return [e for e in self.elements if len(e.contacts) >= 3]

    @property
    def barycenters(self) -> list[complex]:
        return [complex(np.mean([c.start for c in g.contacts])) for g in self.gaps]

    def to_json(self) -> dict:
        return {
            "chords": [[[a.real, a.imag], [b.real, b.imag]] for a, b in self.chords],
            "gaps": [{"center": [g.ball.center.real, g.ball.center.imag], "radius": g.ball.radius,
                      "contacts": [[c.start.real, c.start.imag] for c in g.contacts]} for g in self.gaps],
            "barycenters": [[b.real, b.imag] for b in self.barycenters],
        }


def _boundary_continuum(P: PolyCurve) -> PolyContinuum:
    return PolyContinuum("tree", (PolyCurve(P.path, closed=False),))


def _interior_points(P: PolyCurve, n: int) -> np.ndarray:
    """About ``n`` deterministic points inside ``P`` (Halton sequence in its bounding box)."""
    def halton(k, base):
        out = np.zeros(len(k))
        f = 1.0
        k = k.copy()
        while np.any(k > 0):
            f /= base
            out += f * (k % base)
            k //= base
        return out

    v = P.vertices
    x0, x1, y0, y1 = v.real.min(), v.real.max(), v.imag.min(), v.imag.max()
    pts = np.empty(0, complex)
    m = n
    while len(pts) < n and m < 1000 * n:
        k = np.arange(1, 4 * m + 1)
        z = (x0 + (x1 - x0) * halton(k, 2)) + 1j * (y0 + (y1 - y0) * halton(k, 3))
        inside = winding_numbers(P, z, check=False) != 0
        inside &= P.distance(z) > 1e-6 * max(x1 - x0, y1 - y0)
        pts = z[inside][:n]
        m *= 2
    return pts


def build_interior_lamination(P: PolyCurve, budget: int = 64) -> InteriorLamination:
    """Chords of the maximal disks inside the simple polygon ``P``.

    Disks with three or more contacts are found exactly; two-contact disks
    are sampled by locating ``budget`` interior points.  Chords are the
    straight segments joining consecutive contacts; crossing chords (which
    only arise from round-off) are dropped, and the ``budget`` longest
    two-contact chords are kept.
    """
    P = P.ccw()
    if abs(P.signed_area()) <= EPS_GEOM:
        raise DegenerateRegion("polygon has no interior")
    K = _boundary_continuum(P)
    tol = 1e-8 * max(1.0, K.scale())
    gaps = []
    for el in gap_balls(K, tol):
        if el.ball.kind == "disk" and winding_numbers(P, [el.ball.center], check=False)[0] != 0:
            gaps.append(kp_element(el.ball, K, euclidean=True, tol=tol))
    singles = []
    for z in _interior_points(P, budget):
        el = kp_locate(z, K, euclidean=True)
        if el.ball.kind != "disk" or len(el.contacts) >= 3:
            continue
        if any(el.ball.same_as(o.ball, 1e-7) for o in singles):
            continue
        singles.append(el)
    elements = gaps + singles
    chords: list[tuple[complex, complex]] = []
    for el in gaps:
        for g in el.distinct_chords:
            chords.append((g.a, g.b))
    two = []
    for el in singles:
        g = el.distinct_chords[0]
        two.append((abs(g.a - g.b), (g.a, g.b)))
    two.sort(key=lambda x: -x[0])
    for _, ch in two[:budget]:
        chords.append(ch)
    chords = _drop_crossing(P, chords)
    return InteriorLamination(P, tuple(elements), tuple(chords))


def _drop_crossing(P: PolyCurve, chords):
    out = []
    params = []
    for a, b in chords:
        ta, tb = P.param_of(a, tol=1e-6), P.param_of(b, tol=1e-6)
        if abs(ta - tb) < 1e-9 or abs(abs(ta - tb) - 1) < 1e-9:
            continue
        lo, hi = min(ta, tb), max(ta, tb)
        bad = False
        for lo2, hi2 in params:
            if (abs(lo - lo2) < 1e-9 and abs(hi - hi2) < 1e-9):
                bad = True
                break
            inside = [lo < t < hi and abs(t - lo) > 1e-9 and abs(t - hi) > 1e-9 for t in (lo2, hi2)]
            if inside[0] != inside[1]:
                shared = any(abs(t - s) < 1e-9 for t in (lo, hi) for s in (lo2, hi2))
                if not shared:
                    bad = True
                    break
        if not bad:
            out.append((a, b))
            params.append((lo, hi))
    return out


# ---------------------------------------------------------------------------
# Faces
# ---------------------------------------------------------------------------

def _faces(n: int, chords: list[tuple[int, int]]) -> list[list[int]]:
    """Faces of a polygon with vertices ``0..n-1`` (counterclockwise) cut by
    non-crossing diagonals, each as a counterclockwise index cycle."""
    nbrs = {i: {(i + 1) % n, (i - 1) % n} for i in range(n)}
    for i, j in chords:
        nbrs[i].add(j)
        nbrs[j].add(i)
    order = {i: sorted(nbrs[i], key=lambda w: (w - i) % n) for i in range(n)}
    half = [(i, (i + 1) % n) for i in range(n)] + [(i, j) for i, j in chords] + [(j, i) for i, j in chords]
    used = set()
    faces = []
    for start in half:
        if start in used:
            continue
        face = []
        u, v = start
        while (u, v) not in used:
            used.add((u, v))
            face.append(u)
            ring = order[v]
            k = ring.index(u)
            u, v = v, ring[k - 1]
        faces.append(face)
    return faces


@dataclass(frozen=True)
class Face:
    source: np.ndarray
    target: np.ndarray
    source_center: complex
    target_center: complex


def _kernel_contains(poly: np.ndarray, z: complex, tol: float) -> bool:
    nxt = np.roll(poly, -1)
    return bool(np.all(cross(nxt - poly, z - poly) > -tol * np.abs(nxt - poly)))


def _is_convex(poly: np.ndarray, tol: float = 1e-12) -> bool:
    nxt = np.roll(poly, -1)
    nn = np.roll(poly, -2)
    return bool(np.all(cross(nxt - poly, nn - nxt) >= -tol))


@dataclass(frozen=True)
class ExtendedMap:
    """``faces`` live in model coordinates; ``model`` (when not None) is the
    star map from the source polygon onto the model polygon."""

    boundary: BoundaryMap
    lamination: InteriorLamination
    faces: tuple
    model: Face | None = None

    def __call__(self, z):
        return evaluate(self, z)

    def model_point(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, complex))
        return z if self.model is None else _star_map(self.model, z)

    def source_point(self, w) -> np.ndarray:
        w = np.atleast_1d(np.asarray(w, complex))
        if self.model is None:
            return w
        m = self.model
        return _star_map(Face(m.target, m.source, m.target_center, m.source_center), w)


def _area(poly: np.ndarray) -> float:
    return float(cross(poly, np.roll(poly, -1)).sum() / 2)


def extend_homeomorphism(h: BoundaryMap, budget: int = 64) -> ExtendedMap:
    """Extend ``h`` over the enclosed disks.

    The source polygon must be convex so that pulled-back chords stay inside
    it.  Every target face must be star-shaped about its vertex average.
    """
    src = h.source
    if src.signed_area() < 0 or not _is_convex(src.vertices):
        raise SourceNotConvex("the source polygon must be convex and counterclockwise")
    if h.target.signed_area() < 0:
        raise OrientationReversed("the target polygon must be counterclockwise")
    L = build_interior_lamination(h.target, budget)
    T = L.polygon
    # boundary vertices: target corners, images of source corners and knots, chord ends
    params = list(T.knots[:-1])
    params += list(h.param(src.knots[:-1]))
    params += list(np.mod(h.dst_knots, 1.0))
    for a, b in L.chords:
        params += [T.param_of(a, tol=1e-6), T.param_of(b, tol=1e-6)]
    params = np.sort(np.mod(params, 1.0))
    keep = np.concatenate([[True], np.diff(params) > 1e-10])
    if 1.0 - params[-1] + params[0] <= 1e-10:
        keep[-1] = False
    params = params[keep]
    n = len(params)

    def index_of(t):
        d = np.abs(((params - t) + 0.5) % 1.0 - 0.5)
        return int(np.argmin(d))

    chord_idx = []
    for a, b in L.chords:
        i, j = index_of(T.param_of(a, tol=1e-6)), index_of(T.param_of(b, tol=1e-6))
        if i != j and (j - i) % n not in (1, n - 1):
            chord_idx.append((i, j))
    tpts = T.point_at(params)
    spts = src.point_at(h.inverse_param(params))
    scale = max(np.ptp(tpts.real), np.ptp(tpts.imag))
    cycles = _faces(n, chord_idx)
    sscale = max(np.ptp(spts.real), np.ptp(spts.imag))
    model = None
    if any(_area(spts[cyc]) <= 1e-12 * sscale ** 2 for cyc in cycles):
        # a pulled-back chord lies along a source edge; realize the faces in
        # a strictly convex model polygon inscribed in the unit circle
        c = complex(src.vertices.mean())
        qpts = np.exp(1j * np.angle(spts - c))
        model = Face(spts, qpts, c, 0j)
        spts = qpts
    faces = []
    for cyc in cycles:
        tp, sp = tpts[cyc], spts[cyc]
        tc, sc = complex(tp.mean()), complex(sp.mean())
        if not _kernel_contains(tp, tc, 1e-12 * scale):
            raise GeometryError("a target face is not star-shaped about its vertex average; raise the budget")
        faces.append(Face(sp, tp, sc, tc))
    return ExtendedMap(h, L, tuple(faces), model)


def _star_map(face: Face, z: np.ndarray) -> np.ndarray:
    """Radial map from the source face onto the target face."""
    s, t = face.source, face.target
    s1, t1 = np.roll(s, -1), np.roll(t, -1)
    d = z - face.source_center
    out = np.full(z.shape, face.target_center, dtype=complex)
    moving = np.abs(d) > 0
    if not moving.any():
        return out
    dm = d[moving]
    # ray c + mu*d meets edge s_k + lam*(s_{k+1} - s_k)
    e = (s1 - s)[None, :]
    w = (s - face.source_center)[None, :]
    den = cross(dm[:, None], e)
    ok = np.abs(den) > 1e-300
    den = np.where(ok, den, 1.0)
    mu = cross(w, e) / den
    lam = cross(w, dm[:, None]) / den
    valid = ok & (mu > 0) & (lam >= -1e-12) & (lam <= 1 + 1e-12)
    mu = np.where(valid, mu, np.inf)
    k = np.argmin(mu, axis=1)
    rows = np.arange(len(dm))
    lam_k = np.clip(lam[rows, k], 0.0, 1.0)
    rho = 1.0 / mu[rows, k]
    hit = t[k] + lam_k * (t1[k] - t[k])
    out[moving] = face.target_center + rho * (hit - face.target_center)
    return out


def evaluate(H: ExtendedMap, z) -> np.ndarray | complex:
    """Image of points of the closed source polygon."""
    scalar = np.ndim(z) == 0
    z = np.atleast_1d(np.asarray(z, complex))
    src = H.boundary.source
    scale = max(np.ptp(src.vertices.real), np.ptp(src.vertices.imag))
    tol = 1e-9 * scale
    on_boundary = src.distance(z) <= tol
    inside = winding_numbers(src, z, check=False) != 0
    if np.any(~(inside | on_boundary)):
        raise OutsideDomain("point outside the source polygon")
    out = np.empty(z.shape, complex)
    todo = ~on_boundary
    if on_boundary.any():
        out[on_boundary] = H.boundary(z[on_boundary])
    w = z.copy()
    if H.model is not None and todo.any():
        w[todo] = _star_map(H.model, z[todo])
    for face in H.faces:
        if not todo.any():
            break
        s = face.source
        nxt = np.roll(s, -1)
        zz = w[todo]
        inside_face = np.all(cross((nxt - s)[None, :], zz[:, None] - s[None, :])
                             >= -tol * np.abs(nxt - s)[None, :], axis=1)
        if inside_face.any():
            idx = np.nonzero(todo)[0][inside_face]
            out[idx] = _star_map(face, w[idx])
            todo[idx] = False
    if todo.any():
        raise OutsideDomain("point not covered by any face")
    return complex(out[0]) if scalar else out


def injectivity_probe(images: np.ndarray, eps: float = EPS_GEOM) -> bool:
    """True when no two images are within ``eps`` of each other."""
    images = np.asarray(images, complex)
    cells: dict[tuple[int, int], list[int]] = {}
    keys = np.floor(np.stack([images.real, images.imag], axis=1) / eps).astype(np.int64)
    for idx, (kx, ky) in enumerate(keys):
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for j in cells.get((kx + dx, ky + dy), ()):
                    if abs(images[j] - images[idx]) <= eps:
                        return False
        cells.setdefault((int(kx), int(ky)), []).append(idx)
    return True


def grid_in_polygon(P: PolyCurve, n: int) -> np.ndarray:
    """Points of an ``n x n`` grid over the bounding box that lie inside ``P``."""
    v = P.vertices
    xs = np.linspace(v.real.min(), v.real.max(), n + 2)[1:-1]
    ys = np.linspace(v.imag.min(), v.imag.max(), n + 2)[1:-1]
    z = (xs[None, :] + 1j * ys[:, None]).ravel()
    return z[winding_numbers(P, z, check=False) != 0]


__all__ = [
    "NotInjective", "OrientationReversed", "OutsideDomain", "SourceNotConvex", "BoundaryMap",
    "InteriorLamination", "build_interior_lamination", "Face", "ExtendedMap", "extend_homeomorphism",
    "evaluate", "injectivity_probe", "grid_in_polygon",
]
