"""Finite laminations of the circle ``R/Z`` invariant under angle ``d``-tupling.

Angles are exact :class:`fractions.Fraction` values in ``[0, 1)``.  A class
is a circularly sorted tuple of angles (two angles make a leaf, three or
more a gap polygon).  Distinct classes may share endpoints as long as their
hulls do not cross.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import permutations, product
from typing import Iterable

from .dendrite import Dendrite, Subtree, TreeMap
from . import dendrite as dd


class LaminationError(ValueError):
    pass


class NotALeaf(LaminationError):
    pass


class NotRefined(LaminationError):
    pass


class NotATree(LaminationError):
    pass


class NoPeriodicLeaf(LaminationError):
    pass


class NotInvariant(LaminationError):
    pass


def angle(x) -> Fraction:
    """Exact angle mod 1 from a fraction, an int or a ``"p/q"`` string."""
    if isinstance(x, str):
        x = Fraction(x.strip())
    elif not isinstance(x, Fraction):
        x = Fraction(x)
    return x % 1


def sigma(a, d: int) -> Fraction:
    return (angle(a) * d) % 1


def make_class(points: Iterable) -> tuple:
    return tuple(sorted({angle(p) for p in points}))


def image_class(c: tuple, d: int) -> tuple:
    return make_class(sigma(a, d) for a in c)


def leaf_length(leaf) -> Fraction:
    pts = make_class(leaf)
    if len(pts) != 2:
        raise NotALeaf("a leaf has exactly two endpoints")
    gap = abs(pts[1] - pts[0])
    return min(gap, 1 - gap)


def _in_open_arc(x: Fraction, a: Fraction, b: Fraction) -> bool:
    """``x`` in the counterclockwise open arc from ``a`` to ``b``."""
    return 0 < (x - a) % 1 < (b - a) % 1 or (a == b and x != a)


def unlinked(A, B) -> bool:
    """The hulls of the two classes do not cross."""
    A, B = make_class(A), make_class(B)
    rest = [b for b in B if b not in A]
    if not rest or len(A) < 2:
        return True
    arcs = set()
    for b in rest:
        for k in range(len(A)):
            if _in_open_arc(b, A[k], A[(k + 1) % len(A)]):
                arcs.add(k)
                break
    return len(arcs) <= 1


@dataclass(frozen=True)
class FiniteLamination:
    degree: int
    classes: tuple = ()

    def __post_init__(self):
        if self.degree < 2:
            raise LaminationError("degree must be at least 2")
        seen = []
        for c in self.classes:
            c = make_class(c)
            if c and c not in seen:
                seen.append(c)
        object.__setattr__(self, "classes", tuple(sorted(seen)))

    @cached_property
    def angles(self) -> tuple:
        return tuple(sorted({a for c in self.classes for a in c}))

    def with_classes(self, extra) -> "FiniteLamination":
        return FiniteLamination(self.degree, self.classes + tuple(make_class(c) for c in extra))

    def to_json(self) -> dict:
        return {"degree": self.degree, "classes": [[str(a) for a in c] for c in self.classes]}

    @classmethod
    def from_json(cls, data: dict) -> "FiniteLamination":
        return cls(int(data["degree"]), tuple(make_class(c) for c in data.get("classes", [])))


# ---------------------------------------------------------------------------
# Axioms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    closed: str
    unlinked: tuple
    forward: tuple
    backward: tuple
    orientation: tuple

    @property
    def ok(self) -> bool:
        return all(x[0] for x in (self.unlinked, self.forward, self.backward, self.orientation))

    def to_json(self) -> dict:
        def enc(item):
            ok, wit = item
            return {"ok": ok, "witness": None if wit is None else [[str(a) for a in c] for c in wit]}
        return {"E1": self.closed, "E2": enc(self.unlinked), "D1": enc(self.forward),
                "D2": enc(self.backward), "D3": enc(self.orientation), "ok": self.ok}


def _orientation_ok(c: tuple, d: int) -> bool:
    """Images of a gap's vertices, taken in order, wind once around the circle
    (or collapse to a point)."""
    imgs = [sigma(a, d) for a in c]
    if len(set(imgs)) == 1:
        return True
    total = sum((imgs[(k + 1) % len(imgs)] - imgs[k]) % 1 for k in range(len(imgs)))
    return total == 1


def check_invariant(L: FiniteLamination) -> AxiomReport:
    d = L.degree
    classes = L.classes
    e2 = (True, None)
    for i, A in enumerate(classes):
        for B in classes[i + 1:]:
            if not unlinked(A, B):
                e2 = (False, (A, B))
                break
        if not e2[0]:
            break
    known = set(classes)
    d1 = (True, None)
    for c in classes:
        img = image_class(c, d)
        if len(img) > 1 and img not in known:
            d1 = (False, (c, img))
            break
    d2 = (True, None)
    angles = L.angles
    for c in classes:
        for x in angles:
            if sigma(x, d) not in c:
                continue
            if not any(x in D and set(image_class(D, d)) <= set(c) for D in classes):
                d2 = (False, (c, (x,)))
                break
        if not d2[0]:
            break
    d3 = (True, None)
    for c in classes:
        if len(c) >= 3 and not _orientation_ok(c, d):
            d3 = (False, (c,))
            break
    return AxiomReport("finite-trivial", e2, d1, d2, d3)


# ---------------------------------------------------------------------------
# Periodic leaves
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicLeaf:
    leaf: tuple
    period: int
    orbit: tuple

    def to_json(self) -> dict:
        return {"leaf": [str(a) for a in self.leaf], "period": self.period,
                "orbit": [[str(a) for a in c] for c in self.orbit]}


def find_periodic_leaf(chords, d: int) -> PeriodicLeaf:
    """A periodic leaf of a finite forward-invariant chord set, with its
    exact period."""
    leaves = sorted({make_class(c) for c in chords})
    if any(len(c) != 2 for c in leaves):
        raise NotALeaf("chords must be leaves")
    known = set(leaves)
    for c in leaves:
        img = image_class(c, d)
        if len(img) == 2 and img not in known:
            raise NotInvariant(f"image of {c} is not in the set")
    for start in leaves:
        seen = {start: 0}
        orbit = [start]
        cur = start
        while True:
            cur = image_class(cur, d)
            if len(cur) != 2:
                break
            if cur in seen:
                cyc = orbit[seen[cur]:]
                return PeriodicLeaf(cur, len(cyc), tuple(cyc))
            seen[cur] = len(orbit)
            orbit.append(cur)
    raise NoPeriodicLeaf("every orbit degenerates to a point")


def leaf_orbit(leaf, d: int) -> list[tuple]:
    """Forward orbit of a leaf until it repeats or degenerates."""
    out = [make_class(leaf)]
    while True:
        nxt = image_class(out[-1], d)
        if len(nxt) != 2 or nxt in out:
            return out
        out.append(nxt)


# ---------------------------------------------------------------------------
# Preimage refinement
# ---------------------------------------------------------------------------

def _pullback_options(c: tuple, d: int):
    pre = [[(a + m) / d for m in range(d)] for a in c]
    for perms in product(list(permutations(range(d))), repeat=len(c) - 1):
        groups = [[pre[0][g]] for g in range(d)]
        for j, perm in enumerate(perms, start=1):
            for g in range(d):
                groups[g].append(pre[j][perm[g]])
        yield [make_class(g) for g in groups]


def pullback(L: FiniteLamination, c: tuple) -> list[tuple]:
    """The ``d`` preimage classes of ``c`` compatible with ``L``, or ``[]``.

    Among compatible choices, prefer the one reusing the most existing
    classes, then the one touching the fewest existing angles.
    """
    d = L.degree
    existing = set(L.classes)
    angles = set(L.angles)
    best = None
    for option in _pullback_options(c, d):
        ok = all(unlinked(g, h) for i, g in enumerate(option) for h in option[i + 1:])
        ok = ok and all(unlinked(g, h) for g in option for h in L.classes)
        if not ok:
            continue
        reused = sum(g in existing for g in option)
        touching = sum(a in angles for g in option if g not in existing for a in g)
        score = (-reused, touching)
        if best is None or score < best[0]:
            best = (score, option)
    return [] if best is None else best[1]


def refine(L: FiniteLamination, depth: int) -> FiniteLamination:
    """Add ``depth`` rounds of preimages of every class."""
    current = L
    fresh = list(L.classes)
    for _ in range(depth):
        new = []
        for c in fresh:
            for g in pullback(current, c):
                if g not in current.classes and g not in new:
                    new.append(g)
            current = current.with_classes(new)
        fresh = new
        if not fresh:
            break
    return current


# ---------------------------------------------------------------------------
# Quotient tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuotientVertex:
    kind: str            # "region" or "class"
    angles: tuple        # class angles, or region arc start angles
    arcs: tuple = ()     # region arcs (start, end) with end > start possibly past 1

    @property
    def name(self) -> str:
        body = ",".join(str(a) for a in self.angles)
        return ("C{" if self.kind == "class" else "R{") + body + "}"

    def to_json(self) -> dict:
        out = {"kind": self.kind, "name": self.name}
        if self.kind == "region":
            out["arcs"] = [[str(a), str(b % 1 if b != 1 else b)] for a, b in self.arcs]
        else:
            out["angles"] = [str(a) for a in self.angles]
        return out


@dataclass(frozen=True)
class QuotientTree:
    lamination: FiniteLamination
    vertices: tuple
    edges: tuple
    induced: tuple

    def neighbors(self, v: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == v} | {a for a, b in self.edges if b == v})

    def valence(self, v: int) -> int:
        return len(self.neighbors(v))

    def index(self, name: str) -> int:
        for k, v in enumerate(self.vertices):
            if v.name == name:
                return k
        raise KeyError(name)

    def orbit_period(self, v: int, up_to: int) -> int | None:
        x = v
        for k in range(1, up_to + 1):
            x = self.induced[x]
            if x == v:
                return k
        return None

    def to_tree_map(self) -> TreeMap:
        """The induced map as an exact tree map (unit edge lengths; each
        edge maps linearly along the arc between its end images)."""
        names = tuple(v.name for v in self.vertices)
        D = Dendrite(names, tuple((names[a], names[b], 1) for a, b in self.edges))
        images = {names[k]: D.vertex(names[self.induced[k]]) for k in range(len(names))}
        return TreeMap.from_vertex_images(Subtree.whole(D), images)

    def to_json(self) -> dict:
        return {
            "vertices": [v.to_json() for v in self.vertices],
            "edges": [list(e) for e in self.edges],
            "induced": list(self.induced),
        }


def _faces(n: int, chords: list[tuple[int, int]]):
    """Faces of the disk with boundary points ``0..n-1`` (counterclockwise)
    cut by non-crossing chords.  Returns, per face, its half-edges as
    ``(u, v, kind)`` with kind ``"arc"`` or a chord index."""
    ring: dict[int, list] = {v: [] for v in range(n)}
    for v in range(n):
        w = (v + 1) % n
        ring[v].append(((1 if n > 1 else 0, 0), (v, w, "arc")))
        ring[w].append(((n - 1, 2), (w, v, "rev")))
    for k, (a, b) in enumerate(chords):
        ring[a].append((((b - a) % n, 1), (a, b, k)))
        ring[b].append((((a - b) % n, 1), (b, a, k)))
    order = {v: [h for _, h in sorted(ring[v], key=lambda x: x[0])] for v in range(n)}
    twin = {}
    for v in range(n):
        for h in order[v]:
            u, w, kind = h
            if kind == "arc":
                twin[h] = (w, u, "rev")
            elif kind == "rev":
                twin[h] = (w, u, "arc")
            else:
                twin[h] = (w, u, kind)
    starts = [h for v in range(n) for h in order[v] if h[2] != "rev"]
    used = set()
    faces = []
    for h0 in starts:
        if h0 in used:
            continue
        face = []
        h = h0
        while h not in used:
            used.add(h)
            face.append(h)
            t = twin[h]
            ring_v = order[h[1]]
            h = ring_v[ring_v.index(t) - 1]
        faces.append(face)
    return faces


def quotient_tree(L: FiniteLamination) -> QuotientTree:
    """Dual tree of complementary regions and classes with the induced map.

    Each region arc must map onto a union of arcs (its image is shorter than
    the whole circle and its ends are angles of ``L``).  A region goes to
    the region containing the images of its arcs; when those spread over
    several regions, to the one containing the image of the midpoint of its
    longest arc.  Regions without arcs go to the region bounded by the images
    of their boundary classes.
    """
    d = L.degree
    A = list(L.angles)
    n = len(A)
    pos = {a: k for k, a in enumerate(A)}
    if n == 0:
        v = QuotientVertex("region", (), ((Fraction(0), Fraction(1)),))
        return QuotientTree(L, (v,), (), (0,))
    chord_list, owner = [], []
    for ci, c in enumerate(L.classes):
        if len(c) < 2:
            continue
        idx = [pos[a] for a in c]
        pairs = [(idx[0], idx[1])] if len(c) == 2 else [(idx[k], idx[(k + 1) % len(c)]) for k in range(len(c))]
        for p in pairs:
            key = tuple(sorted(p))
            if key in [tuple(sorted(q)) for q in chord_list]:
                owner[[tuple(sorted(q)) for q in chord_list].index(key)].add(ci)
                continue
            chord_list.append(p)
            owner.append({ci})
    faces = _faces(n, chord_list)

    def arc_of(k):
        a, b = A[k], A[(k + 1) % n]
        return (a, b if b > a else b + 1)

    vertices: list[QuotientVertex] = []
    region_faces = []
    class_vertex = {}
    for face in faces:
        arcs = [arc_of(h[0]) for h in face if h[2] == "arc"]
        chord_ids = [h[2] for h in face if h[2] not in ("arc", "rev")]
        if not arcs and chord_ids:
            owners = set.intersection(*(owner[k] for k in chord_ids))
            if any(len(L.classes[ci]) == len(face) and len(L.classes[ci]) >= 3 for ci in owners):
                continue   # interior of a gap polygon
        region_faces.append((arcs, chord_ids, face))
    for arcs, chord_ids, face in region_faces:
        vertices.append(QuotientVertex("region", tuple(sorted(a for a, _ in arcs)) if arcs
                                       else tuple(sorted({A[h[0]] for h in face})), tuple(sorted(arcs))))
    n_regions = len(vertices)
    for ci, c in enumerate(L.classes):
        class_vertex[ci] = len(vertices)
        vertices.append(QuotientVertex("class", c))
    edges = set()
    for r, (arcs, chord_ids, face) in enumerate(region_faces):
        for k in chord_ids:
            for ci in owner[k]:
                edges.add((r, class_vertex[ci]))
    # singleton classes hang off the region of the arc starting at them
    region_of_arc = {}
    for r, (arcs, _, _) in enumerate(region_faces):
        for a, _ in arcs:
            region_of_arc[a] = r
    for ci, c in enumerate(L.classes):
        if len(c) == 1:
            edges.add((region_of_arc[c[0]], class_vertex[ci]))
    edges = tuple(sorted(edges))
    _check_tree(len(vertices), edges)

    def region_at(x: Fraction) -> int:
        x = x % 1
        for r, (arcs, _, _) in enumerate(region_faces):
            for a, b in arcs:
                if a < x < b or a < x + 1 < b:
                    return r
        raise NotRefined(f"angle {x} is not inside any region arc")

    neighbors = {v: set() for v in range(len(vertices))}
    for a, b in edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    class_index = {c: ci for ci, c in enumerate(L.classes)}
    induced = [0] * len(vertices)
    for ci, c in enumerate(L.classes):
        img = image_class(c, d)
        if img in class_index:
            induced[class_vertex[ci]] = class_vertex[class_index[img]]
            continue
        holders = [cj for cj, cc in enumerate(L.classes) if set(img) <= set(cc)]
        if holders:
            induced[class_vertex[ci]] = class_vertex[holders[0]]
        elif len(img) == 1 and img[0] not in pos:
            induced[class_vertex[ci]] = region_at(img[0])
        else:
            raise NotRefined(f"image of class {c} is not a class of the lamination")
    for r, (arcs, chord_ids, face) in enumerate(region_faces):
        if arcs:
            targets = []
            for a, b in arcs:
                if d * (b - a) >= 1 or sigma(a, d) not in pos or sigma(b, d) not in pos:
                    raise NotRefined(f"region {vertices[r].name} maps over more than its image arcs allow")
                targets.append(region_at(sigma((a + b) / 2, d)))
            if len(set(targets)) == 1:
                induced[r] = targets[0]
            else:
                longest = max(range(len(arcs)), key=lambda k: (arcs[k][1] - arcs[k][0], -k))
                induced[r] = targets[longest]
        else:
            imgs = {induced[v] for v in neighbors[r]}
            cands = [s for s in range(n_regions) if imgs <= neighbors[s]]
            if len(cands) != 1:
                cands = [s for s in cands if not region_faces[s][0]]
            if len(cands) != 1:
                raise NotRefined(f"region {vertices[r].name} has no unique image region")
            induced[r] = cands[0]
    return QuotientTree(L, tuple(vertices), edges, tuple(induced))


def _check_tree(n: int, edges) -> None:
    if len(edges) != n - 1:
        raise NotATree(f"{n} vertices but {len(edges)} edges")
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            raise NotATree("the dual graph has a cycle")
        parent[ra] = rb


# ---------------------------------------------------------------------------
# Dynamics on the quotient tree
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RepulsionCertificate:
    vertex: str
    branches: tuple = field(default_factory=tuple)   # (neighbor name, power or None, reason, witness)

    @property
    def repelling(self) -> bool:
        return any(b[1] is not None for b in self.branches)

    def to_json(self) -> dict:
        return {"vertex": self.vertex, "weakly_repelling": self.repelling,
                "branches": [{"toward": t, "power": p, "reason": r, "witness": w} for t, p, r, w in self.branches]}


def weakly_repelling_certificate(T: QuotientTree, v: int, branch: int | None = None,
                                 max_power: int = 6) -> RepulsionCertificate:
    """Weak repulsion of the fixed vertex ``v`` in each branch (or the given
    one): the smallest ``n <= max_power`` for which ``f^n`` is weakly
    repelling there, with its witness."""
    if T.induced[v] != v:
        raise dd.NotFixed(f"vertex {T.vertices[v].name} is not fixed")
    f = T.to_tree_map()
    D = f.tree
    a = D.vertex(T.vertices[v].name)
    nbrs = T.neighbors(v) if branch is None else [branch]
    out = []
    for w in nbrs:
        b = D.vertex(T.vertices[w].name)
        g = f
        found = None
        for n in range(1, max_power + 1):
            if n > 1:
                g = dd.compose(g, f)
            if g(a) != a:
                continue
            verdict = dd.weakly_repelling(g, a, b, max_power=1)
            if verdict.repelling:
                found = (n, verdict.reason, repr(verdict.witness))
                break
        out.append((T.vertices[w].name, found[0], found[1], found[2]) if found
                   else (T.vertices[w].name, None, "not-repelling", None))
    return RepulsionCertificate(T.vertices[v].name, tuple(out))


def periodic_cutpoints(T: QuotientTree, up_to: int) -> list[tuple[str, int]]:
    """Vertices of period ``<= up_to`` and valence ``>= 2`` with their periods."""
    out = []
    for v in range(len(T.vertices)):
        if T.valence(v) < 2:
            continue
        p = T.orbit_period(v, up_to)
        if p is not None:
            out.append((T.vertices[v].name, p))
    return sorted(out, key=lambda x: (x[1], x[0]))


RABBIT = FiniteLamination(2, ((Fraction(1, 7), Fraction(2, 7)), (Fraction(2, 7), Fraction(4, 7)),
                              (Fraction(4, 7), Fraction(1, 7))))

__all__ = [
    "LaminationError", "NotALeaf", "NotRefined", "NotATree", "NoPeriodicLeaf", "NotInvariant", "angle", "sigma",
    "make_class", "image_class", "leaf_length", "unlinked", "FiniteLamination", "AxiomReport", "check_invariant",
    "PeriodicLeaf", "find_periodic_leaf", "leaf_orbit", "pullback", "refine", "QuotientVertex", "QuotientTree",
    "quotient_tree", "RepulsionCertificate", "weakly_repelling_certificate", "periodic_cutpoints", "RABBIT",
]
