from fractions import Fraction as F

import numpy as np
import pytest

from planefix import dendrite as dd
from planefix.dendrite import (Dendrite, NotFixed, NotSubtree, Subtree, TreeMap, at, boundary_set,
                               check_scrambling, coordinate, find_fixed_point, natural_retraction, path_dendrite,
                               periodic_cutpoints, random_tree_map, retracted_map, weakly_repelling)
from planefix.lam import RABBIT, periodic_cutpoints as lam_cutpoints, quotient_tree, refine

HALF = F(1, 2)


def interval_map(knots, upper=2):
    """Map on [0, 1] inside [0, upper] through the coordinate knots."""
    D = path_dendrite(range(upper + 1))
    return D, TreeMap.from_function(Subtree.of_edges(D, [0]), knots)


def star(legs):
    names = ("c",) + tuple(f"l{k}" for k in range(legs))
    return Dendrite(names, tuple(("c", f"l{k}", 1) for k in range(legs)))


def solve_knots(knots):
    """Isolated solutions of f(x) = x for the piecewise-linear interpolant (exact)."""
    out = set()
    for (x0, y0), (x1, y1) in zip(knots, knots[1:]):
        x0, y0, x1, y1 = map(F, (x0, y0, x1, y1))
        slope = (y1 - y0) / (x1 - x0)
        if slope == 1:
            continue
        x = (y0 - slope * x0) / (1 - slope)
        if x0 <= x <= x1:
            out.add(x)
    return out


class TestBoundary:
    def test_interval(self):
        D = path_dendrite([0, 1, 2])
        assert boundary_set(Subtree.of_edges(D, [0])) == [D.vertex("1")]

    def test_star_center(self):
        T = star(4)
        assert boundary_set(Subtree.of_edges(T, [0, 1, 2])) == [T.vertex("c")]

    def test_whole(self):
        assert boundary_set(Subtree.whole(star(3))) == []

    def test_not_subtree(self):
        with pytest.raises(NotSubtree):
            boundary_set(Subtree.of_edges(star(3), [0]), star(4))
        with pytest.raises(NotSubtree):
            Subtree.of_edges(Dendrite(("a", "b", "c", "d"), (("a", "b", 1), ("b", "c", 1), ("c", "d", 1))), [0, 2])


class TestRetraction:
    def test_interval(self):
        D = path_dendrite([0, 1, 2])
        r = natural_retraction(D, Subtree.of_edges(D, [0]))
        assert coordinate(D, r(at(D, F(17, 10)))) == 1
        for x in (0, F(1, 3), 1):
            assert r(at(D, x)) == at(D, x)

    def test_other_legs_go_to_branch_point(self):
        T = star(3)
        r = natural_retraction(T, Subtree.of_edges(T, [0]))
        for e in (1, 2):
            for t in (F(1, 5), HALF, 1):
                assert r(T.point(e, t)) == T.vertex("c")

    @pytest.mark.parametrize("seed", range(20))
    def test_idempotent_and_identity_on_subtree(self, seed):
        rng = np.random.default_rng(seed)
        f = random_tree_map(rng, n=7, sub_size=4)
        T, D1 = f.tree, f.domain
        r = natural_retraction(T, D1)
        for e in range(len(T.edges)):
            for t in (F(0), F(1, 3), F(7, 8), F(1)):
                p = T.point(e, t)
                q = r(p)
                assert D1.contains(q) and r(q) == q
                if D1.contains(p):
                    assert q == p


class TestRetractedMap:
    def test_shift_is_clamped(self):
        D, f = interval_map([(0, HALF), (1, F(3, 2))])
        g = retracted_map(f)
        for k in range(17):
            x = F(k, 16)
            assert coordinate(D, g(at(D, x))) == min(x + HALF, 1)

    def test_inside_image_is_unchanged(self):
        D, f = interval_map([(0, F(3, 4)), (1, F(1, 4))])
        g = retracted_map(f)
        for k in range(9):
            p = at(D, F(k, 8))
            assert g(p) == f(p)

    def test_collapse_outside(self):
        T = star(3)
        D1 = Subtree.of_edges(T, [0])
        f = TreeMap.from_vertex_images(D1, {"c": T.vertex("l1"), "l0": T.vertex("l1")})
        g = retracted_map(f)
        assert all(g(T.point(0, t)) == T.vertex("c") for t in (0, F(1, 3), 1))


class TestScrambling:
    def test_contracting_flip(self):
        _, f = interval_map([(0, F(3, 4)), (1, F(1, 4))])
        assert check_scrambling(f).scrambles

    def test_shift_fails_at_one(self):
        D, f = interval_map([(0, HALF), (1, F(3, 2))])
        v = check_scrambling(f)
        assert not v.scrambles and v.witness == D.vertex("1")

    def test_invariant_vacuous(self):
        _, f = interval_map([(0, 1), (1, 0)])
        assert check_scrambling(f).scrambles


class TestFixedPoint:
    def test_linear_solve(self):
        D, f = interval_map([(0, F(3, 4)), (1, F(1, 4))])
        r = find_fixed_point(f)
        assert coordinate(D, r.point) == HALF

    def test_certified_none(self):
        _, f = interval_map([(0, HALF), (1, F(3, 2))])
        r = find_fixed_point(f)
        assert not r.found and r.reason == "certified-none"

    @pytest.mark.parametrize("seed", range(40))
    def test_path_maps_against_linear_solve(self, seed):
        rng = np.random.default_rng(seed)
        xs = sorted({F(int(k), 12) for k in rng.integers(1, 12, size=3)} | {F(0), F(1)})
        knots = [(x, F(int(rng.integers(0, 25)), 12)) for x in xs]
        D, f = interval_map(knots, upper=3)
        pts, segs = f.fixed_points()
        if not segs:
            assert {coordinate(D, p) for p in pts} == solve_knots(knots)
        r = find_fixed_point(f)
        if r.found:
            assert f(r.point) == r.point
        else:
            assert not solve_knots(knots) and not check_scrambling(f).scrambles

    def test_scrambling_gives_exact_fixed_point(self):
        checked = 0
        for seed in range(400):
            f = random_tree_map(np.random.default_rng(seed), n=6, sub_size=4)
            if not check_scrambling(f).scrambles:
                continue
            r = find_fixed_point(f)
            assert r.found and f(r.point) == r.point
            checked += 1
        assert checked >= 100

    def test_retracted_maps_always_fix_a_point(self):
        for seed in range(100):
            g = retracted_map(random_tree_map(np.random.default_rng(seed), n=6, sub_size=4))
            r = find_fixed_point(g)
            assert r.found and g(r.point) == r.point

    def test_two_sided_separation_yields_cutpoint(self):
        seen = 0
        for seed in range(600):
            f = random_tree_map(np.random.default_rng(seed), n=7, sub_size=4)
            r = find_fixed_point(f)
            if r.reason != "between":
                continue
            a, b = r.witness
            T = f.tree
            assert f(r.point) == r.point
            assert T.separates(r.point, a, b) and T.valence(r.point) >= 2
            seen += 1
        assert seen >= 5

    def test_two_sided_on_interval(self):
        # D1 = [1, 2] inside [0, 3]; both ends pushed outward
        D = path_dendrite([0, 1, 2, 3])
        f = TreeMap.from_function(Subtree.of_edges(D, [1]), [(1, F(1, 2)), (2, F(5, 2))])
        r = find_fixed_point(f)
        assert r.reason == "between" and coordinate(D, r.point) == F(3, 2)


class TestRepulsion:
    def setup_method(self):
        self.D, self.double = interval_map([(0, 0), (1, 2)])
        _, self.halve = interval_map([(0, 0), (1, HALF)])

    def test_doubling(self):
        D = self.D
        v = weakly_repelling(self.double, D.vertex("0"), at(D, 1))
        assert v.repelling and v.reason == "separating" and coordinate(D, v.witness) == F(1, 4)
        assert D.separates(v.witness, D.vertex("0"), self.double(v.witness))
        assert all(ok for _, ok in v.powers) and len(v.powers) == 5

    def test_halving(self):
        assert not weakly_repelling(self.halve, self.D.vertex("0"), at(self.D, 1)).repelling

    def test_square_witness(self):
        D = self.D
        g = dd.power(self.double, 2)
        v = weakly_repelling(g, D.vertex("0"), at(D, 1))
        assert v.repelling and coordinate(D, v.witness) == F(1, 8)

    def test_not_fixed(self):
        with pytest.raises(NotFixed):
            weakly_repelling(self.double, at(self.D, HALF), at(self.D, 1))

    def test_power_stability_on_random_fixtures(self):
        tested = 0
        for seed in range(150):
            f = random_tree_map(np.random.default_rng(seed), n=5, invariant=True, breaks=1)
            T = f.tree
            for a in [p for p in f.fixed_points()[0] if p.is_vertex]:
                for y, _ in T.adjacency[a.vertex]:
                    v = weakly_repelling(f, a, T.vertex(y))
                    if v.repelling:
                        assert all(ok for _, ok in v.powers)
                        tested += 1
        assert tested >= 10

    @pytest.mark.parametrize("invariant", [True, False])
    def test_power_verdicts_match_full_composition(self, invariant):
        # oracle: build power(f, n) as a whole map and judge its first cell
        compared = 0
        for seed in range(60):
            rng = np.random.default_rng(seed)
            f = (random_tree_map(rng, n=5, invariant=True, breaks=1) if invariant
                 else random_tree_map(rng, n=6, sub_size=4))
            T = f.tree
            for a in [p for p in f.fixed_points()[0] if p.is_vertex]:
                for y, _ in T.adjacency[a.vertex]:
                    if not f.domain.contains(T.vertex(y)):
                        continue
                    v = weakly_repelling(f, a, T.vertex(y), max_power=3)
                    if not v.repelling:
                        continue
                    expected = [(n, dd._branch_verdict(dd.power(f, n), a, T.vertex(y))[0]) for n in (2, 3)]
                    assert list(v.powers) == expected
                    compared += 1
        assert compared >= 5


class TestPeriodicCutpoints:
    def test_tent(self):
        D = Dendrite(("0", "1/2", "1"), (("0", "1/2", HALF), ("1/2", "1", HALF)))
        tent = TreeMap.from_function(Subtree.whole(D), [(0, 0), (HALF, 1), (1, 0)])
        got = {(coordinate(D, p.point), p.period) for p in periodic_cutpoints(tent, 2)}
        assert got == {(F(2, 3), 1), (F(2, 5), 2), (F(4, 5), 2)}

    def test_identity(self):
        T = star(3)
        ident = TreeMap.from_vertex_images(Subtree.whole(T), {v: T.vertex(v) for v in T.vertices})
        assert [p.point for p in periodic_cutpoints(ident, 1)] == [T.vertex("c")]

    def test_requires_invariant_tree(self):
        _, f = interval_map([(0, 0), (1, 2)])
        with pytest.raises(NotSubtree):
            periodic_cutpoints(f, 1)

    def test_budget(self):
        D = Dendrite(("0", "1/2", "1"), (("0", "1/2", HALF), ("1/2", "1", HALF)))
        tent = TreeMap.from_function(Subtree.whole(D), [(0, 0), (HALF, 1), (1, 0)])
        with pytest.raises(dd.CellBudgetExceeded):
            periodic_cutpoints(tent, 12, max_cells=100)

    @pytest.mark.parametrize("depth", [1, 2])
    def test_rabbit_quotient_agrees_with_lamination(self, depth):
        T = quotient_tree(refine(RABBIT, depth))
        f = T.to_tree_map()
        ours = {(p.point.vertex, p.period) for p in periodic_cutpoints(f, 3) if p.point.is_vertex}
        assert ours == set(lam_cutpoints(T, 3))


def test_json_round_trip():
    f = random_tree_map(np.random.default_rng(5), n=6, sub_size=4)
    g = TreeMap.from_json(f.to_json())
    assert g.to_json() == f.to_json()
    T = f.tree
    for e in f.domain.edges:
        for t in (F(0), F(1, 7), F(1)):
            assert g(T.point(e, t)) == f(T.point(e, t))
