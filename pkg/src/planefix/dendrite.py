"""Exact dynamics on finite metric trees.

Edge lengths, edge parameters and map pieces are :class:`fractions.Fraction`
values, so every fixed point returned here satisfies ``f(x) == x`` exactly.

A tree map sends each edge of a subtree ``D1`` of an ambient tree ``D2``
along the tree arcs between consecutive break images, linearly in
arclength.  After canonicalization every *cell* (a parameter interval of a
domain edge) maps affinely into a single edge of ``D2``, or to a point.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable

import numpy as np


class TreeError(ValueError):
    pass


class NotSubtree(TreeError):
    pass


class NotFixed(TreeError):
    pass


class CellBudgetExceeded(TreeError):
    pass


def frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(str(x)) if isinstance(x, str) else Fraction(x)


@dataclass(frozen=True, order=True)
class TreePoint:
    """A vertex (``edge == -1``) or a point ``0 < t < 1`` inside an edge."""

    edge: int
    t: Fraction
    vertex: Hashable = None

    @property
    def is_vertex(self) -> bool:
        return self.edge < 0

    def __repr__(self) -> str:
        return f"<{self.vertex}>" if self.is_vertex else f"<e{self.edge}@{self.t}>"

    def to_json(self) -> dict:
        if self.is_vertex:
            return {"vertex": self.vertex}
        return {"edge": self.edge, "t": str(self.t)}


@dataclass(frozen=True)
class Dendrite:
    """Finite tree with rational edge lengths; ``edges[k] = (u, v, length)``."""

    vertices: tuple
    edges: tuple

    def __post_init__(self):
        verts = tuple(self.vertices)
        edges = tuple((u, v, frac(L)) for u, v, L in self.edges)
        if len(set(verts)) != len(verts):
            raise TreeError("duplicate vertex names")
        vs = set(verts)
        for u, v, L in edges:
            if u not in vs or v not in vs or u == v:
                raise TreeError(f"bad edge {(u, v)}")
            if L <= 0:
                raise TreeError("edge lengths must be positive")
        if len(edges) != len(verts) - 1:
            raise TreeError("a tree on n vertices has n - 1 edges")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "edges", edges)
        if len(self._dist) and any(len(d) != len(verts) for d in self._dist.values()):
            raise TreeError("the graph is not connected")

    @cached_property
    def adjacency(self) -> dict:
        adj = {v: [] for v in self.vertices}
        for k, (u, v, _) in enumerate(self.edges):
            adj[u].append((v, k))
            adj[v].append((u, k))
        return adj

    @cached_property
    def _dist(self) -> dict:
        out = {}
        for s in self.vertices:
            d = {s: Fraction(0)}
            queue = deque([s])
            while queue:
                x = queue.popleft()
                for y, k in self.adjacency[x]:
                    if y not in d:
                        d[y] = d[x] + self.edges[k][2]
                        queue.append(y)
            out[s] = d
        return out

    @cached_property
    def _edge_index(self) -> dict:
        out = {}
        for k, (u, v, _) in enumerate(self.edges):
            out[(u, v)] = (k, False)
            out[(v, u)] = (k, True)
        return out

    def vertex(self, name) -> TreePoint:
        if name not in self.adjacency:
            raise TreeError(f"unknown vertex {name!r}")
        return TreePoint(-1, Fraction(0), name)

    def point(self, edge: int, t) -> TreePoint:
        t = frac(t)
        if not 0 <= t <= 1:
            raise TreeError("edge parameter outside [0, 1]")
        u, v, _ = self.edges[edge]
        if t == 0:
            return self.vertex(u)
        if t == 1:
            return self.vertex(v)
        return TreePoint(edge, t)

    def valence(self, p: TreePoint) -> int:
        return len(self.adjacency[p.vertex]) if p.is_vertex else 2

    def param_on(self, p: TreePoint, edge: int):
        """Parameter of ``p`` on the closed edge, or None."""
        u, v, _ = self.edges[edge]
        if p.is_vertex:
            return Fraction(0) if p.vertex == u else Fraction(1) if p.vertex == v else None
        return p.t if p.edge == edge else None

    def _exits(self, p: TreePoint):
        if p.is_vertex:
            return [(p.vertex, Fraction(0))]
        u, v, L = self.edges[p.edge]
        return [(u, p.t * L), (v, (1 - p.t) * L)]

    def _common_edge(self, x: TreePoint, y: TreePoint):
        for e in {x.edge, y.edge} - {-1}:
            tx, ty = self.param_on(x, e), self.param_on(y, e)
            if tx is not None and ty is not None:
                return e, tx, ty
        if x.is_vertex and y.is_vertex and (x.vertex, y.vertex) in self._edge_index:
            k, rev = self._edge_index[(x.vertex, y.vertex)]
            return (k, Fraction(1), Fraction(0)) if rev else (k, Fraction(0), Fraction(1))
        return None

    def distance(self, x: TreePoint, y: TreePoint) -> Fraction:
        common = self._common_edge(x, y)
        if common is not None:
            e, tx, ty = common
            return abs(tx - ty) * self.edges[e][2]
        return min(dx + self._dist[a][b] + dy for a, dx in self._exits(x) for b, dy in self._exits(y))

    def between(self, z: TreePoint, x: TreePoint, y: TreePoint) -> bool:
        """``z`` lies on the arc ``[x, y]``."""
        return self.distance(x, z) + self.distance(z, y) == self.distance(x, y)

    def separates(self, z: TreePoint, x: TreePoint, y: TreePoint) -> bool:
        return z != x and z != y and self.between(z, x, y)

    def _vertex_path(self, a, b) -> list:
        path = [a]
        while path[-1] != b:
            cur = path[-1]
            for y, k in self.adjacency[cur]:
                if self._dist[y][b] + self.edges[k][2] == self._dist[cur][b]:
                    path.append(y)
                    break
        return path

    def pieces(self, x: TreePoint, y: TreePoint) -> list[tuple[int, Fraction, Fraction]]:
        """The arc from ``x`` to ``y`` as ``(edge, t_from, t_to)`` pieces."""
        if x == y:
            return []
        common = self._common_edge(x, y)
        if common is not None:
            e, tx, ty = common
            return [(e, tx, ty)]
        best = None
        for a, dx in self._exits(x):
            for b, dy in self._exits(y):
                total = dx + self._dist[a][b] + dy
                if best is None or total < best[0]:
                    best = (total, a, b)
        _, a, b = best
        out = []
        if not x.is_vertex:
            out.append((x.edge, x.t, self.param_on(self.vertex(a), x.edge)))
        path = self._vertex_path(a, b)
        for p, q in zip(path, path[1:]):
            k, rev = self._edge_index[(p, q)]
            out.append((k, Fraction(1), Fraction(0)) if rev else (k, Fraction(0), Fraction(1)))
        if not y.is_vertex:
            out.append((y.edge, self.param_on(self.vertex(b), y.edge), y.t))
        return out

    def walk(self, x: TreePoint, y: TreePoint, s) -> TreePoint:
        """Point at distance ``s`` from ``x`` towards ``y``."""
        s = frac(s)
        for e, t0, t1 in self.pieces(x, y):
            L = abs(t1 - t0) * self.edges[e][2]
            if s <= L:
                return self.point(e, t0 + (t1 - t0) * (s / L if L else 0))
            s -= L
        return y

    def to_json(self) -> dict:
        return {"vertices": list(self.vertices),
                "edges": [[u, v, str(L)] for u, v, L in self.edges]}

    @classmethod
    def from_json(cls, data: dict) -> "Dendrite":
        return cls(tuple(data["vertices"]), tuple((u, v, frac(L)) for u, v, L in data["edges"]))


def path_dendrite(xs) -> Dendrite:
    """The interval through the increasing rationals ``xs`` (vertex names are
    their decimal strings)."""
    xs = [frac(x) for x in xs]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise TreeError("path vertices must increase")
    names = tuple(str(x) for x in xs)
    return Dendrite(names, tuple((names[k], names[k + 1], xs[k + 1] - xs[k]) for k in range(len(xs) - 1)))


def at(D: Dendrite, x) -> TreePoint:
    """Point with coordinate ``x`` on a path dendrite."""
    x = frac(x)
    for k, (u, v, L) in enumerate(D.edges):
        a, b = frac(u), frac(v)
        if a <= x <= b:
            return D.point(k, (x - a) / L)
    raise TreeError(f"{x} is outside the interval")


def coordinate(D: Dendrite, p: TreePoint) -> Fraction:
    if p.is_vertex:
        return frac(p.vertex)
    u, _, L = D.edges[p.edge]
    return frac(u) + p.t * L


@dataclass(frozen=True)
class Subtree:
    """The subtree of ``tree`` spanned by ``edges`` (or the single vertex)."""

    tree: Dendrite
    edges: frozenset
    vertices: frozenset

    @classmethod
    def of_edges(cls, tree: Dendrite, edges) -> "Subtree":
        edges = frozenset(edges)
        if not edges:
            raise NotSubtree("use Subtree.point for a one-vertex subtree")
        verts = frozenset(x for k in edges for x in tree.edges[k][:2])
        sub = cls(tree, edges, verts)
        sub._check()
        return sub

    @classmethod
    def point(cls, tree: Dendrite, vertex) -> "Subtree":
        tree.vertex(vertex)
        return cls(tree, frozenset(), frozenset([vertex]))

    @classmethod
    def whole(cls, tree: Dendrite) -> "Subtree":
        if not tree.edges:
            return cls.point(tree, tree.vertices[0])
        return cls.of_edges(tree, range(len(tree.edges)))

    @classmethod
    def of_vertices(cls, tree: Dendrite, vertices) -> "Subtree":
        vs = frozenset(vertices)
        if len(vs) == 1:
            return cls.point(tree, next(iter(vs)))
        return cls.of_edges(tree, [k for k, (u, v, _) in enumerate(tree.edges) if u in vs and v in vs])

    def _check(self):
        if any(k < 0 or k >= len(self.tree.edges) for k in self.edges):
            raise NotSubtree("edge index outside the ambient tree")
        if len(self.edges) != len(self.vertices) - 1:
            raise NotSubtree("edges do not span a connected subtree")

    def contains(self, p: TreePoint) -> bool:
        return p.vertex in self.vertices if p.is_vertex else p.edge in self.edges

    @property
    def is_whole(self) -> bool:
        return len(self.vertices) == len(self.tree.vertices)


def boundary_set(D1: Subtree, D2: Dendrite | None = None) -> list[TreePoint]:
    """Points of ``D1`` where the rest of the ambient tree attaches."""
    T = D1.tree
    if D2 is not None and D2 != T:
        raise NotSubtree("D1 is not a subtree of D2")
    out = []
    for v in sorted(D1.vertices, key=str):
        if any(k not in D1.edges for _, k in T.adjacency[v]):
            out.append(T.vertex(v))
    return out


# ---------------------------------------------------------------------------
# Tree maps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Cell:
    """``edge`` on ``[t0, t1]`` maps affinely to ``image_edge`` on
    ``[s0, s1]`` (``image_edge`` is None for a constant cell at ``p0``)."""

    edge: int
    t0: Fraction
    t1: Fraction
    image_edge: int | None
    s0: Fraction
    s1: Fraction
    p0: TreePoint
    p1: TreePoint


@dataclass(frozen=True)
class TreeMap:
    """Continuous piecewise-linear map from ``domain`` into its ambient tree.

    ``breaks[e]`` lists ``(t, image)`` for domain edge ``e`` with ``t``
    running from 0 to 1; ``vertex_images`` holds the images of domain
    vertices (consistent with the breaks).
    """

    domain: Subtree
    breaks: dict = field(default_factory=dict)
    vertex_images: dict = field(default_factory=dict)

    @property
    def tree(self) -> Dendrite:
        return self.domain.tree

    def __post_init__(self):
        T = self.tree
        for e in self.domain.edges:
            br = self.breaks.get(e)
            if not br or br[0][0] != 0 or br[-1][0] != 1:
                raise TreeError(f"edge {e} needs breaks at 0 and 1")
            if any(b[0] <= a[0] for a, b in zip(br, br[1:])):
                raise TreeError("break parameters must increase")
            u, v, _ = T.edges[e]
            for name, img in ((u, br[0][1]), (v, br[-1][1])):
                if self.vertex_images.setdefault(name, img) != img:
                    raise TreeError(f"discontinuous at vertex {name}")
        if set(self.vertex_images) != set(self.domain.vertices):
            raise TreeError("every domain vertex needs an image")

    @classmethod
    def from_vertex_images(cls, domain: Subtree, images: dict, extra: dict | None = None) -> "TreeMap":
        """Each domain edge maps along the arc between its end images, with
        optional interior breaks ``extra[e] = [(t, point), ...]``."""
        T = domain.tree
        breaks = {}
        for e in domain.edges:
            u, v, _ = T.edges[e]
            inner = sorted((frac(t), p) for t, p in (extra or {}).get(e, []))
            breaks[e] = tuple([(Fraction(0), images[u])] + inner + [(Fraction(1), images[v])])
        return cls(domain, breaks, dict(images))

    @classmethod
    def from_function(cls, domain: Subtree, knots) -> "TreeMap":
        """Map on a path dendrite given by coordinate pairs ``(x, f(x))``;
        linear in between (extended constantly beyond the knots)."""
        T = domain.tree
        knots = sorted((frac(x), frac(y)) for x, y in knots)
        xs = [k[0] for k in knots]

        def value(x):
            for (x0, y0), (x1, y1) in zip(knots, knots[1:]):
                if x0 <= x <= x1:
                    return y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            return knots[0][1] if x < xs[0] else knots[-1][1]

        breaks, images = {}, {}
        for e in domain.edges:
            u, v, L = T.edges[e]
            a, b = frac(u), frac(v)
            pts = [a] + [x for x in xs if a < x < b] + [b]
            breaks[e] = tuple(((x - a) / L, at(T, value(x))) for x in pts)
        for name in domain.vertices:
            images[name] = at(T, value(frac(name)))
        return cls(domain, breaks, images)

    @cached_property
    def cells(self) -> dict:
        """Canonical cells of every domain edge (images subdivided at vertices)."""
        T = self.tree
        out = {}
        for e in self.domain.edges:
            cells = []
            for (ta, pa), (tb, pb) in zip(self.breaks[e], self.breaks[e][1:]):
                pieces = T.pieces(pa, pb)
                if not pieces:
                    cells.append(Cell(e, ta, tb, None, Fraction(0), Fraction(0), pa, pa))
                    continue
                total = T.distance(pa, pb)
                t = ta
                for k, (ed, s0, s1) in enumerate(pieces):
                    L = abs(s1 - s0) * T.edges[ed][2]
                    t_next = tb if k == len(pieces) - 1 else t + (tb - ta) * L / total
                    cells.append(Cell(e, t, t_next, ed, s0, s1, T.point(ed, s0), T.point(ed, s1)))
                    t = t_next
            out[e] = tuple(cells)
        return out

    @property
    def cell_count(self) -> int:
        return sum(len(c) for c in self.cells.values())

    def _eval_cell(self, c: Cell, t: Fraction) -> TreePoint:
        if c.image_edge is None:
            return c.p0
        lam = (t - c.t0) / (c.t1 - c.t0)
        return self.tree.point(c.image_edge, c.s0 + (c.s1 - c.s0) * lam)

    def __call__(self, p: TreePoint) -> TreePoint:
        if p.is_vertex:
            if p.vertex not in self.vertex_images:
                raise TreeError(f"{p} is outside the domain")
            return self.vertex_images[p.vertex]
        if p.edge not in self.domain.edges:
            raise TreeError(f"{p} is outside the domain")
        for c in self.cells[p.edge]:
            if c.t0 <= p.t <= c.t1:
                return self._eval_cell(c, p.t)
        raise AssertionError("cells do not cover the edge")

    def fixed_points(self) -> tuple[list[TreePoint], list[tuple[TreePoint, TreePoint]]]:
        """Isolated fixed points and maximal fixed segments (cell-wise)."""
        T = self.tree
        points: set[TreePoint] = set()
        segments = []
        for v in self.domain.vertices:
            p = T.vertex(v)
            if self(p) == p:
                points.add(p)
        for cells in self.cells.values():
            for c in cells:
                for t, img in ((c.t0, c.p0), (c.t1, c.p1)):
                    if T.point(c.edge, t) == img:
                        points.add(img)
                if c.image_edge is None:
                    q = c.p0
                    tq = T.param_on(q, c.edge)
                    if tq is not None and c.t0 <= tq <= c.t1:
                        points.add(q)
                    continue
                if c.image_edge != c.edge:
                    continue
                k = (c.s1 - c.s0) / (c.t1 - c.t0)
                if k == 1:
                    if c.s0 == c.t0:
                        segments.append((T.point(c.edge, c.t0), T.point(c.edge, c.t1)))
                    continue
                t = (c.s0 - k * c.t0) / (1 - k)
                if c.t0 <= t <= c.t1:
                    points.add(T.point(c.edge, t))
        seg_pts = [s for s in segments]
        isolated = sorted(p for p in points
                          if not any(T.between(p, a, b) for a, b in seg_pts))
        return isolated, segments

    def to_json(self) -> dict:
        return {
            "tree": self.tree.to_json(),
            "domain_edges": sorted(self.domain.edges),
            "domain_vertices": sorted(map(str, self.domain.vertices)),
            "breaks": {str(e): [[str(t), p.to_json()] for t, p in br] for e, br in sorted(self.breaks.items())},
            "vertex_images": {str(v): p.to_json() for v, p in sorted(self.vertex_images.items(), key=lambda x: str(x[0]))},
        }

    @classmethod
    def from_json(cls, data: dict) -> "TreeMap":
        T = Dendrite.from_json(data["tree"])

        def pt(d):
            return T.vertex(d["vertex"]) if "vertex" in d else T.point(int(d["edge"]), frac(d["t"]))

        edges = [int(e) for e in data.get("domain_edges", [])]
        if edges:
            dom = Subtree.of_edges(T, edges)
        else:
            dom = Subtree.point(T, data["domain_vertices"][0])
        breaks = {int(e): tuple((frac(t), pt(p)) for t, p in br) for e, br in data.get("breaks", {}).items()}
        images = {v: pt(p) for v, p in data.get("vertex_images", {}).items()}
        return cls(dom, breaks, images)


def compose(f: TreeMap, g: TreeMap) -> TreeMap:
    """``f o g``; ``g`` must map its domain into the domain of ``f``."""
    T = g.tree
    breaks = {}
    for e in g.domain.edges:
        ts = []
        for c in g.cells[e]:
            ts.append(c.t0)
            if c.image_edge is None:
                continue
            if c.image_edge not in f.domain.edges:
                raise TreeError("g leaves the domain of f")
            lo, hi = sorted((c.s0, c.s1))
            for fc in f.cells[c.image_edge]:
                for s in (fc.t0, fc.t1):
                    if lo < s < hi:
                        ts.append(c.t0 + (c.t1 - c.t0) * (s - c.s0) / (c.s1 - c.s0))
        ts.append(Fraction(1))
        ts = sorted(set(ts))
        breaks[e] = tuple((t, f(g(T.point(e, t)))) for t in ts)
    images = {v: f(g(T.vertex(v))) for v in g.domain.vertices}
    return TreeMap(g.domain, breaks, images)


def natural_retraction(D2: Dendrite, D1: Subtree):
    """The retraction of ``D2`` onto ``D1`` as a :class:`TreeMap` on all of ``D2``."""
    if D1.tree != D2:
        raise NotSubtree("D1 is not a subtree of D2")
    attach = {v: v for v in D1.vertices}
    queue = deque(D1.vertices)
    while queue:
        x = queue.popleft()
        for y, _ in D2.adjacency[x]:
            if y not in attach:
                attach[y] = attach[x]
                queue.append(y)
    images = {v: D2.vertex(attach[v]) for v in D2.vertices}
    return TreeMap.from_vertex_images(Subtree.whole(D2), images)


def retract_point(D1: Subtree, p: TreePoint) -> TreePoint:
    if D1.contains(p):
        return p
    return natural_retraction(D1.tree, D1)(p)


def retracted_map(f: TreeMap) -> TreeMap:
    """``r o f`` with ``r`` the natural retraction onto the domain of ``f``."""
    r = natural_retraction(f.tree, f.domain)
    return compose(r, f)


def power(f: TreeMap, n: int) -> TreeMap:
    """``f o (r o f)^(n-1)``; equals ``f^n`` when the domain is invariant.

    Points leaving the domain are first pulled back by the natural
    retraction, which changes nothing near points whose orbit stays inside.
    """
    if n < 1:
        raise ValueError("n >= 1")
    g = retracted_map(f) if not _invariant(f) else f
    out = f
    for _ in range(n - 1):
        out = compose(out, g)
    return out


def _invariant(f: TreeMap) -> bool:
    D1 = f.domain
    if not all(D1.contains(p) for p in f.vertex_images.values()):
        return False
    return all(c.image_edge is None or c.image_edge in D1.edges for cs in f.cells.values() for c in cs)


# ---------------------------------------------------------------------------
# Scrambling and fixed points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScrambleVerdict:
    scrambles: bool
    witness: TreePoint | None = None

    def to_json(self) -> dict:
        return {"scrambles": self.scrambles, "witness": None if self.witness is None else self.witness.to_json()}


def _component_meets(D1: Subtree, e: TreePoint, y: TreePoint) -> bool:
    """Whether the component of ``D2 - {e}`` containing ``y`` meets ``D1``."""
    T = D1.tree
    if not e.is_vertex:
        return True
    first = T.pieces(e, y)[0][0]
    return first in D1.edges


def check_scrambling(f: TreeMap, D1: Subtree | None = None, D2: Dendrite | None = None) -> ScrambleVerdict:
    D1 = f.domain if D1 is None else D1
    if D2 is not None and D2 != D1.tree:
        raise NotSubtree("D1 is not a subtree of D2")
    for e in boundary_set(D1):
        img = f(e)
        if img != e and not _component_meets(D1, e, img):
            return ScrambleVerdict(False, e)
    return ScrambleVerdict(True)


@dataclass(frozen=True)
class FixedPointResult:
    point: TreePoint | None
    reason: str
    witness: tuple = ()

    @property
    def found(self) -> bool:
        return self.point is not None

    def to_json(self) -> dict:
        return {"point": None if self.point is None else self.point.to_json(), "reason": self.reason,
                "witness": [w.to_json() for w in self.witness]}


def _all_fixed(f: TreeMap) -> list[TreePoint]:
    pts, segs = f.fixed_points()
    return sorted(set(pts) | {a for a, _ in segs})


def fixed_point_between(f: TreeMap, a: TreePoint, b: TreePoint) -> TreePoint | None:
    """A fixed point strictly inside the arc ``(a, b)``, if any."""
    T = f.tree
    pts, segs = f.fixed_points()
    for p in pts:
        if T.separates(p, a, b):
            return p
    for s, t in segs:
        for p in (s, t, T.walk(s, t, T.distance(s, t) / 2)):
            if T.separates(p, a, b):
                return p
    return None


def find_fixed_point(f: TreeMap, D1: Subtree | None = None, D2: Dendrite | None = None) -> FixedPointResult:
    """A fixed point of ``f``, or a certificate that none exists.

    When two boundary points are both pushed away from ``D1`` the fixed
    point returned lies strictly between them (hence is a cutpoint).
    """
    D1 = f.domain if D1 is None else D1
    E = boundary_set(D1, D2)
    escaping = [e for e in E if f(e) != e and not _component_meets(D1, e, f(e))]
    if len(escaping) >= 2:
        a, b = escaping[0], escaping[1]
        p = fixed_point_between(f, a, b)
        if p is None:
            raise AssertionError("two-sided separation without a fixed point")
        return FixedPointResult(p, "between", (a, b))
    fixed = _all_fixed(f)
    scr = check_scrambling(f, D1, D2)
    if fixed:
        return FixedPointResult(fixed[0], "scrambles" if scr.scrambles else "cell", ())
    if scr.scrambles:
        raise AssertionError("boundary scrambling map without a fixed point")
    return FixedPointResult(None, "certified-none", (scr.witness,))


# ---------------------------------------------------------------------------
# Weak repulsion and periodic cutpoints
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RepulsionVerdict:
    repelling: bool
    reason: str
    witness: TreePoint | None = None
    powers: tuple = ()

    def to_json(self) -> dict:
        return {"weakly_repelling": self.repelling, "reason": self.reason,
                "witness": None if self.witness is None else self.witness.to_json(),
                "powers": [[n, ok] for n, ok in self.powers]}


def _first_step(f: TreeMap, a: TreePoint, toward: TreePoint) -> TreePoint:
    """End of the first linearity cell from ``a`` towards ``toward``."""
    T = f.tree
    e, t0, t1 = T.pieces(a, toward)[0]
    stops = [t1]
    for c in f.cells.get(e, ()):
        for s in (c.t0, c.t1):
            if min(t0, t1) < s < max(t0, t1):
                stops.append(s)
    t = min(stops, key=lambda s: abs(s - t0))
    return T.point(e, t)


def _branch_verdict(f: TreeMap, a: TreePoint, toward: TreePoint) -> tuple[bool, str, TreePoint | None]:
    # f is affine on the first cell and fixes a, so a second fixed point there
    # means the whole cell is fixed
    T = f.tree
    end = _first_step(f, a, toward)
    y = T.walk(a, end, T.distance(a, end) / 2)
    fy = f(y)
    if fy == y:
        return True, "fixed-cutpoints", y
    if T.separates(y, a, fy):
        return True, "separating", y
    return False, "not-repelling", y


def weakly_repelling(f: TreeMap, a: TreePoint, branch: TreePoint, max_power: int = 6) -> RepulsionVerdict:
    """Is the fixed point ``a`` weakly repelling in the component of
    ``D1 - {a}`` containing ``branch``?  Decided on the first linearity cell,
    with the same check for ``f^n``, ``n <= max_power``."""
    if f(a) != a:
        raise NotFixed(f"{a} is not fixed")
    if branch == a or not f.domain.contains(branch):
        raise TreeError("branch point must be a domain point other than a")
    ok, reason, y = _branch_verdict(f, a, branch)
    powers = []
    if ok:
        T = f.tree
        e, t0, t1 = T.pieces(a, branch)[0]
        start = (e, t1 > t0)
        for n in range(2, max_power + 1):
            germ = _power_germ(f, a, start, n)
            powers.append((n, germ is not None and germ[0] == start and germ[1] >= 1))
    return RepulsionVerdict(ok, reason, y, tuple(powers))


def _germ(f: TreeMap, a: TreePoint, direction) -> tuple | None:
    """Image direction and slope of ``f`` on its first cell leaving the fixed
    point ``a`` along ``direction = (edge, increasing)``; None if collapsed."""
    T = f.tree
    e, up = direction
    end = _first_step(f, a, T.point(e, 1 if up else 0))
    y = T.walk(a, end, T.distance(a, end) / 2)
    fy = f(y)
    if fy == a:
        return None
    e2, s0, s1 = T.pieces(a, fy)[0]
    return (e2, s1 > s0), T.distance(a, fy) / T.distance(a, y)


def _power_germ(f: TreeMap, a: TreePoint, direction, n: int) -> tuple | None:
    """Germ of ``power(f, n)`` at ``a``, iterated locally instead of composing
    whole maps (whose cell count grows geometrically)."""
    invariant = _invariant(f)
    slope = Fraction(1)
    for k in range(n):
        if direction[0] not in f.domain.edges:
            return None
        germ = _germ(f, a, direction)
        if germ is None:
            return None
        direction, slope = germ[0], slope * germ[1]
        # the natural retraction collapses directions leaving the domain
        if k < n - 1 and not invariant and direction[0] not in f.domain.edges:
            return None
    return direction, slope


@dataclass(frozen=True)
class PeriodicPoint:
    point: TreePoint
    period: int

    def to_json(self) -> dict:
        return {"point": self.point.to_json(), "period": self.period}


def periodic_cutpoints(f: TreeMap, up_to: int, max_cells: int = 200_000) -> list[PeriodicPoint]:
    """Periodic points of period ``<= up_to`` with valence ``>= 2``.

    Fixed segments of an iterate contribute only their tree vertices.
    """
    if not f.domain.is_whole:
        raise NotSubtree("periodic cutpoints need an invariant tree (D1 = D2)")
    T = f.tree
    found: dict[TreePoint, int] = {}
    g = f
    for k in range(1, up_to + 1):
        if k > 1:
            g = compose(g, f)
        if g.cell_count > max_cells:
            raise CellBudgetExceeded(f"{g.cell_count} cells at iterate {k}")
        pts, segs = g.fixed_points()
        cand = set(pts)
        for s, t in segs:
            cand |= {T.vertex(v) for v in T.vertices if T.between(T.vertex(v), s, t)}
        for p in cand:
            if p not in found and T.valence(p) >= 2:
                found[p] = k
    return [PeriodicPoint(p, n) for p, n in sorted(found.items(), key=lambda x: (x[1], x[0]))]


# ---------------------------------------------------------------------------
# Random instances
# ---------------------------------------------------------------------------

def random_dendrite(rng: np.random.Generator, n: int) -> Dendrite:
    names = tuple(f"v{k}" for k in range(n))
    edges = []
    for k in range(1, n):
        parent = int(rng.integers(0, k))
        edges.append((names[parent], names[k], Fraction(int(rng.integers(1, 5)), int(rng.integers(1, 4)))))
    return Dendrite(names, tuple(edges))


def random_point(rng: np.random.Generator, T: Dendrite, sub: Subtree | None = None) -> TreePoint:
    edges = sorted(sub.edges) if sub is not None and sub.edges else list(range(len(T.edges)))
    if sub is not None and not sub.edges:
        return T.vertex(next(iter(sub.vertices)))
    e = edges[int(rng.integers(0, len(edges)))]
    return T.point(e, Fraction(int(rng.integers(0, 9)), 8))


def random_tree_map(rng: np.random.Generator, n: int = 6, sub_size: int | None = None,
                    invariant: bool = False, breaks: int = 2) -> TreeMap:
    """Random map from a random subtree ``D1`` into a random tree ``D2``."""
    T = random_dendrite(rng, n)
    sub_size = n if sub_size is None else sub_size
    # grow a connected vertex set from v0
    verts = {T.vertices[0]}
    while len(verts) < sub_size:
        frontier = sorted({y for x in verts for y, _ in T.adjacency[x]} - verts)
        verts.add(frontier[int(rng.integers(0, len(frontier)))])
    D1 = Subtree.of_vertices(T, verts)
    target = D1 if invariant else None
    images = {v: random_point(rng, T, target) for v in sorted(D1.vertices)}
    extra = {}
    for e in D1.edges:
        ts = sorted({Fraction(int(x), 16) for x in rng.integers(1, 16, size=breaks)})
        extra[e] = [(t, random_point(rng, T, target)) for t in ts]
    return TreeMap.from_vertex_images(D1, images, extra)


__all__ = [
    "TreeError", "NotSubtree", "NotFixed", "CellBudgetExceeded", "frac", "TreePoint", "Dendrite", "path_dendrite",
    "at", "coordinate", "Subtree", "boundary_set", "Cell", "TreeMap", "compose", "natural_retraction",
    "retract_point", "retracted_map", "power", "ScrambleVerdict", "check_scrambling", "FixedPointResult",
    "fixed_point_between", "find_fixed_point", "RepulsionVerdict", "weakly_repelling", "PeriodicPoint",
    "periodic_cutpoints", "random_dendrite", "random_point", "random_tree_map",
]
