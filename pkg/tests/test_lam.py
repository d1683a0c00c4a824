import cmath
import math
from fractions import Fraction as F
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planefix.lam import (RABBIT, FiniteLamination, NotALeaf, NotRefined, check_invariant, find_periodic_leaf,
                          image_class, leaf_length, make_class, periodic_cutpoints, pullback, quotient_tree,
                          refine, sigma, unlinked, weakly_repelling_certificate)

TRIANGLE = FiniteLamination(2, ((F(1, 7), F(2, 7), F(4, 7)),))
THREE = FiniteLamination(2, ((F(1, 3), F(2, 3)), (F(1, 6), F(1, 3)), (F(2, 3), F(5, 6))))
LEAF = FiniteLamination(2, ((F(1, 3), F(2, 3)),))


# --- geometric oracle for the dual graph -------------------------------------

def on_circle(a) -> complex:
    return cmath.exp(2j * math.pi * float(a))


def cap_of(cls, p: complex) -> int:
    """Index j of the arc (a_j, a_{j+1}) of the class whose cap contains p, -1 inside the polygon."""
    pts = [on_circle(a) for a in cls]
    k = len(pts)
    for j in range(k):
        a, b = pts[j], pts[(j + 1) % k]
        # the arc from a to b counterclockwise lies to the right of the chord a -> b
        if ((b - a).conjugate() * (p - a)).imag < 0:
            return j
    return -1


def dual_graph(L: FiniteLamination):
    """Regions and region-class adjacencies, from cap signatures of sample points."""
    angles = sorted(L.angles)
    classes = L.classes
    if not angles:
        return {"R{}"}, set()
    arcs = [(angles[k], angles[(k + 1) % len(angles)] + (1 if k == len(angles) - 1 else 0))
            for k in range(len(angles))]
    starts, corners = {}, {}
    for a, b in arcs:
        m = on_circle((a + b) / 2)
        starts.setdefault(tuple(cap_of(c, 0.999999 * m) for c in classes), set()).add(a)
    touching = []
    for ci, c in enumerate(classes):
        pts = [on_circle(a) for a in c]
        for j in range(len(c)):
            x, y = j, (j + 1) % len(c)
            p = (pts[x] + pts[y]) / 2 + 1e-7 * (-1j) * (pts[y] - pts[x]) / abs(pts[y] - pts[x])
            s = tuple(cap_of(d, p) if di != ci else j for di, d in enumerate(classes))
            corners.setdefault(s, set()).update({c[x], c[y]})
            touching.append((s, ci))
    name = {}
    for s in set(starts) | set(corners):
        body = sorted(starts[s]) if s in starts else sorted(corners[s])
        name[s] = "R{" + ",".join(str(x) for x in body) + "}"
    label = lambda c: "C{" + ",".join(str(a) for a in c) + "}"  # noqa: E731
    return set(name.values()), {(name[s], label(classes[ci])) for s, ci in touching}


def tree_edges(T):
    names = [v.name for v in T.vertices]
    out = set()
    for a, b in T.edges:
        x, y = names[a], names[b]
        out.add((x, y) if x.startswith("R") else (y, x))
    return out


def rationals(max_den=60):
    return st.integers(2, max_den).flatmap(lambda q: st.integers(0, q - 1).map(lambda p: F(p, q)))


class TestArithmetic:
    def test_sigma(self):
        assert sigma(F(1, 3), 2) == F(2, 3)
        assert sigma(F(2, 3), 2) == F(1, 3)
        assert sigma(F(1, 4), 3) == F(3, 4)

    def test_leaf_length(self):
        assert leaf_length((F(1, 3), F(2, 3))) == F(1, 3)
        assert leaf_length((F(1, 7), F(2, 7))) == F(1, 7)
        assert leaf_length((F(0), F(1, 2))) == F(1, 2)

    def test_not_a_leaf(self):
        with pytest.raises(NotALeaf):
            leaf_length((F(1, 7), F(2, 7), F(4, 7)))

    @given(rationals(), st.integers(2, 5))
    def test_denominator_divides(self, a, d):
        assert a.denominator % sigma(a, d).denominator == 0
        assert 0 <= sigma(a, d) < 1

    @settings(max_examples=200)
    @given(rationals(), rationals(), st.integers(2, 5))
    def test_expansion_law(self, a, b, d):
        if a == b:
            return
        ell = leaf_length((a, b))
        if ell < F(1, 2 * (d + 1)):
            assert leaf_length(image_class((a, b), d)) == d * ell

    @given(rationals(), rationals(), rationals(), rationals(), rationals())
    def test_unlinked_symmetric_and_rotation_invariant(self, a, b, c, e, r):
        if a == b or c == e:
            return
        A, B = make_class((a, b)), make_class((c, e))
        assert unlinked(A, B) == unlinked(B, A)
        rot = lambda X: make_class(tuple((x + r) % 1 for x in X))  # noqa: E731
        assert unlinked(rot(A), rot(B)) == unlinked(A, B)

    def test_json_round_trip(self):
        L = refine(RABBIT, 2)
        assert FiniteLamination.from_json(L.to_json()) == L
        assert all(isinstance(a, str) and "/" in a or a == "0" for c in L.to_json()["classes"] for a in c)


class TestAxioms:
    def test_three_leaves(self):
        rep = check_invariant(THREE)
        assert rep.unlinked[0] and rep.forward[0]
        assert all(image_class(c, 2) == (F(1, 3), F(2, 3)) for c in THREE.classes)
        assert rep.closed == "finite-trivial"

    def test_crossing_leaves(self):
        rep = check_invariant(FiniteLamination(2, ((F(1, 4), F(1, 2)), (F(1, 3), F(2, 3)))))
        assert not rep.unlinked[0]

    def test_invariant_leaf(self):
        assert check_invariant(LEAF).forward[0]

    def test_refinements_satisfy_all_axioms(self):
        for L in (refine(LEAF, 2), refine(RABBIT, 2), refine(TRIANGLE, 2)):
            assert check_invariant(L).ok

    def test_polygon_class_pullback(self):
        # the rabbit triangle maps onto itself; its other preimage is the sibling triangle
        assert sorted(pullback(TRIANGLE, TRIANGLE.classes[0])) == [
            (F(1, 14), F(9, 14), F(11, 14)), (F(1, 7), F(2, 7), F(4, 7))]
        assert len(refine(TRIANGLE, 2).classes) == 4


class TestPeriodicLeaf:
    def test_fixed_leaf(self):
        assert find_periodic_leaf([(F(1, 3), F(2, 3))], 2).period == 1

    def test_rabbit_orbit(self):
        leaves = [(F(1, 7), F(2, 7)), (F(2, 7), F(4, 7)), (F(4, 7), F(1, 7))]
        p = find_periodic_leaf(leaves, 2)
        assert p.period == 3 and set(p.orbit) == {make_class(x) for x in leaves}

    def test_period_four(self):
        leaves = [(F(1, 5), F(2, 5)), (F(2, 5), F(4, 5)), (F(4, 5), F(3, 5)), (F(3, 5), F(1, 5))]
        assert find_periodic_leaf(leaves, 2).period == 4

    @settings(max_examples=60)
    @given(st.integers(1, 31).map(lambda k: 2 * k + 1), st.data())
    def test_minimal_period(self, q, data):
        a = F(data.draw(st.integers(0, q - 1)), q)
        b = F(data.draw(st.integers(0, q - 1)), q)
        if a == b:
            return
        orbit, cur = [], make_class((a, b))
        while cur not in orbit:
            orbit.append(cur)
            cur = image_class(cur, 2)
        p = find_periodic_leaf(orbit, 2)
        x = p.leaf
        for _ in range(p.period):
            x = image_class(x, 2)
        assert x == p.leaf
        returns = []
        x = p.leaf
        for n in range(1, 25):
            x = image_class(x, 2)
            if x == p.leaf:
                returns.append(n)
        assert all(n % p.period == 0 for n in returns)


class TestQuotientTree:
    def test_three_leaves_dual_graph(self):
        T = quotient_tree(THREE)
        regions, edges = dual_graph(THREE)
        assert len(T.vertices) == len(regions) + len(THREE.classes) == 7
        assert {v.name for v in T.vertices if v.kind == "region"} == regions
        assert tree_edges(T) == edges
        assert len(T.edges) == len(T.vertices) - 1
        names = [v.name for v in T.vertices]
        for k, v in enumerate(T.vertices):
            if v.kind == "class":
                assert names[T.induced[k]] == "C{1/3,2/3}"

    def test_single_leaf_not_refined(self):
        with pytest.raises(NotRefined):
            quotient_tree(LEAF)

    def test_empty(self):
        T = quotient_tree(FiniteLamination(2, ()))
        assert len(T.vertices) == 1 and T.induced == (0,) and not T.edges

    @pytest.mark.parametrize("L", [refine(LEAF, 2), refine(RABBIT, 1), refine(RABBIT, 2), refine(TRIANGLE, 2)],
                             ids=["leaf2", "rabbit1", "rabbit2", "triangle2"])
    def test_refined_trees(self, L):
        T = quotient_tree(L)
        regions, edges = dual_graph(L)
        assert len(T.vertices) == len(regions) + len(L.classes)
        assert len(T.edges) == len(T.vertices) - 1
        assert tree_edges(T) == edges
        names = [v.name for v in T.vertices]
        for k, v in enumerate(T.vertices):
            if v.kind == "class":
                img = image_class(v.angles, L.degree)
                assert names[T.induced[k]] == ("C{" + ",".join(str(a) for a in img) + "}" if len(img) > 1
                                               else names[T.induced[k]])


class TestRepulsion:
    def test_invariant_leaf_both_branches(self):
        T = quotient_tree(refine(LEAF, 2))
        cert = weakly_repelling_certificate(T, T.index("C{1/3,2/3}"))
        assert len(cert.branches) == 2
        assert all(b[1] is not None for b in cert.branches)

    def test_single_vertex(self):
        T = quotient_tree(FiniteLamination(2, ()))
        cert = weakly_repelling_certificate(T, 0)
        assert not cert.repelling and cert.branches == ()

    def test_rabbit_fixed_gap(self):
        T = quotient_tree(refine(RABBIT, 2))
        cert = weakly_repelling_certificate(T, T.index("R{1/7,2/7,4/7}"))
        assert cert.repelling and len(cert.branches) == 3


class TestPeriodicCutpoints:
    def test_invariant_leaf(self):
        T = quotient_tree(refine(LEAF, 2))
        assert periodic_cutpoints(T, 1) == [("C{1/3,2/3}", 1)]

    def test_rabbit(self):
        T = quotient_tree(refine(RABBIT, 2))
        cuts = periodic_cutpoints(T, 3)
        assert len(cuts) >= 2
        for name, p in cuts:
            v = T.index(name)
            assert T.valence(v) >= 2 and T.orbit_period(v, 3) == p

    def test_empty(self):
        assert periodic_cutpoints(quotient_tree(FiniteLamination(2, ())), 3) == []

    def test_stable_under_refinement(self):
        # preimage leaves of the rabbit are strictly preperiodic, so no new periodic cutpoints appear
        found = [periodic_cutpoints(quotient_tree(refine(RABBIT, g)), 6) for g in (1, 2, 3)]
        assert found[0] == found[1] == found[2]
        assert sorted(p for _, p in found[0]) == [1, 3, 3, 3]


def test_class_pairs_in_refinement_unlinked():
    L = refine(RABBIT, 3)
    assert all(unlinked(a, b) for a, b in combinations(L.classes, 2))
