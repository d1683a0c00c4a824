import math

import numpy as np
import pytest

from planefix.geom import Ball, GeometryError, PolyContinuum, ball_through, smallest_enclosing_ball
from planefix.kp import (PointInContinuum, ball_is_empty, brute_force_locate, chords_between, gap_balls,
                         kp_element, kp_locate, maximal_balls, partition_check)

SQUARE = PolyContinuum.from_polygon([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
SEGMENT = PolyContinuum.from_polyline([-1, 1])
ROOT2 = math.sqrt(2)


def same_ball(B: Ball, kind, center, radius=0.0, normal=0j, tol=1e-9):
    if B.kind != kind:
        return False
    if kind == "halfplane":
        return abs(B.normal - normal) < tol and abs(B.center - center) < tol
    return abs(B.center - center) < tol and abs(B.radius - radius) < tol


def paper_balls():
    return [("halfplane", 1j, 0, 1j), ("halfplane", -1j, 0, -1j), ("halfplane", 1 + 0j, 0, 1 + 0j),
            ("halfplane", -1 + 0j, 0, -1 + 0j), ("exterior", 0j, ROOT2, 0j)]


def interior_hits(B: Ball, K: PolyContinuum, n: int = 400) -> int:
    """Oracle: dense samples of K lying strictly inside B."""
    pts = []
    for c in K.curves:
        path = c.path
        for a, b in zip(path[:-1], path[1:]):
            pts.extend(a + (b - a) * np.linspace(0, 1, n))
    return int((B.signed_depth(np.array(pts)) > 1e-9).sum())


def in_square_exterior_gap(z: complex) -> bool:
    """Oracle for the hull of |z| >= sqrt 2: outside that circle and outside the
    four orthogonal disks of radius sqrt 2 centred at +-2 and +-2i."""
    return abs(z) >= ROOT2 and all(abs(z - c) >= ROOT2 for c in (2, -2, 2j, -2j))


class TestMaximalBalls:
    def test_five_square_balls(self):
        balls = [m.ball for m in maximal_balls(SQUARE, budget=16)]
        for kind, c, r, n in paper_balls():
            assert any(same_ball(B, kind, c, r, n) for B in balls)

    def test_gap_balls_are_exactly_the_five(self):
        gaps = gap_balls(SQUARE)
        assert len(gaps) == 5
        for kind, c, r, n in paper_balls():
            assert sum(same_ball(el.ball, kind, c, r, n) for el in gaps) == 1

    def test_two_vertex_circles_through_right_corners(self):
        found = []
        for m in maximal_balls(SQUARE, budget=32):
            pts = sorted((c.start for c in m.contacts), key=lambda z: z.imag)
            if len(pts) == 2 and abs(pts[0] - (1 - 1j)) < 1e-9 and abs(pts[1] - (1 + 1j)) < 1e-9:
                found.append(m.ball)
        assert len(found) >= 3
        for B in found:
            # the circle passes through 1 +- i and contains the square: centre on the real axis, x <= 0
            assert B.kind == "exterior"
            assert abs(B.center.imag) < 1e-9 and B.center.real <= 1e-9
            assert abs(abs(1 + 1j - B.center) - B.radius) < 1e-9

    def test_segment_balls_have_empty_interiors(self):
        balls = maximal_balls(SEGMENT, budget=24)
        # any disk through both ends contains the segment, so only exteriors and half-planes remain
        assert len(balls) >= 8 and {m.ball.kind for m in balls} == {"exterior", "halfplane"}
        for m in balls:
            assert interior_hits(m.ball, SEGMENT) == 0
            # a two-contact ball touches both ends; a half-plane carries the whole segment
            assert np.all(np.abs(m.ball.signed_depth(np.array([-1, 1]))) < 1e-9)

    def test_zero_size(self):
        with pytest.raises(GeometryError):
            maximal_balls(PolyContinuum.from_polyline([0, 1e-15]))


class TestLocate:
    def test_semi_disk(self):
        el = kp_locate(1.5j, SQUARE)
        assert same_ball(el.ball, "halfplane", 1j, normal=1j)
        assert el.is_gap  # the semi-disk has interior
        rng = np.random.default_rng(0)
        z = 3 * rng.uniform(-1, 1, 400) + 1j * (1 + 2 * rng.uniform(0, 1, 400))
        for p in z:
            if abs(abs(p - 1j) - 1) < 1e-6:
                continue
            assert el.contains(p) == (abs(p - 1j) <= 1)

    def test_exterior_gap(self):
        el = kp_locate(2 + 2j, SQUARE)
        assert same_ball(el.ball, "exterior", 0j, ROOT2)
        assert el.is_gap
        rng = np.random.default_rng(1)
        for p in 4 * rng.uniform(-1, 1, 600) + 4j * rng.uniform(-1, 1, 600):
            d = min([abs(abs(p) - ROOT2)] + [abs(abs(p - c) - ROOT2) for c in (2, -2, 2j, -2j)])
            if d < 1e-6:
                continue
            assert el.contains(p) == in_square_exterior_gap(p)

    def test_exterior_gap_matches_brute_force(self):
        brute = brute_force_locate(2 + 2j, SQUARE)
        assert len(brute) == 1 and same_ball(brute[0].ball, "exterior", 0j, ROOT2)

    def test_point_in_continuum(self):
        with pytest.raises(PointInContinuum):
            kp_locate(0j, SQUARE)

    def test_inversion_returns_empty_ball_containing_point(self):
        rng = np.random.default_rng(2)
        K = PolyContinuum.from_polygon(rng.uniform(0.6, 1.4, 7) * np.exp(1j * np.sort(rng.uniform(0, 2 * np.pi, 7))))
        z = 3 * rng.uniform(-1, 1, 300) + 3j * rng.uniform(-1, 1, 300)
        z = z[~K.in_hull(z, tol=1e-3)]
        for p in z:
            el = kp_locate(p, K)
            assert ball_is_empty(el.ball, K)
            assert el.contains(p, 1e-7 * max(1, abs(p)))


class TestElement:
    def test_halfplane_semicircle(self):
        el = kp_element(Ball.halfplane(1j, 1j), SQUARE)
        (g,) = el.distinct_chords
        c, r = g.circle
        assert abs(c - 1j) < 1e-9 and abs(r - 1) < 1e-9
        assert {round(g.a.real), round(g.b.real)} == {-1, 1}

    def test_exterior_four_chords(self):
        el = kp_element(Ball("exterior", 0j, ROOT2), SQUARE)
        assert el.is_gap and len(el.contacts) == 4
        centres = sorted((g.circle[0] for g in el.distinct_chords), key=lambda z: (round(z.real), round(z.imag)))
        expected = sorted([2, -2, 2j, -2j], key=lambda z: (round(complex(z).real), round(complex(z).imag)))
        assert np.allclose(centres, expected, atol=1e-9)
        assert all(abs(g.circle[1] - ROOT2) < 1e-9 for g in el.distinct_chords)

    def test_two_contact_ball_single_chord(self):
        B = Ball("exterior", -1 + 0j, math.sqrt(5))  # through 1 +- i and containing the square
        assert ball_is_empty(B, SQUARE)
        el = kp_element(B, SQUARE)
        assert len(el.distinct_chords) == 1 and not el.is_gap

    def test_euclidean_variant(self):
        el = kp_element(Ball("disk", 0j, 1.0), PolyContinuum.from_edges([[1, 1.5], [1j, 1.5j], [-1, -1.5]]),
                        euclidean=True)
        assert all(g.circle is None for g in el.distinct_chords)
        assert el.contains(0j)


class TestChordsBetween:
    def test_top_corners_disk(self):
        cs = chords_between(-1 + 1j, 1 + 1j, SQUARE)
        assert cs.kind == "disk"
        carriers = sorted((g.circle for g in cs.chords), key=lambda c: c[1])
        # extremes: the half-plane semicircle and the exterior-ball arc
        assert abs(carriers[0][0] - 1j) < 1e-6 and abs(carriers[0][1] - 1) < 1e-6
        assert abs(carriers[1][0] - 2j) < 1e-6 and abs(carriers[1][1] - ROOT2) < 1e-6

    def test_right_corners_extremes(self):
        cs = chords_between(1 + 1j, 1 - 1j, SQUARE)
        assert cs.kind == "disk"
        carriers = sorted((g.circle for g in cs.chords), key=lambda c: c[1])
        assert abs(carriers[0][0] - 1) < 1e-6 and abs(carriers[1][0] - 2) < 1e-6

    def test_opposite_corners_single(self):
        cs = chords_between(1 + 1j, -1 - 1j, SQUARE)
        assert cs.kind == "single"
        B = ball_through(1 + 1j, -1 - 1j, cs.angles[0])
        assert B.kind == "exterior" and abs(B.center) < 1e-6 and abs(B.radius - ROOT2) < 1e-6

    def test_no_ball_avoids_crossing(self):
        # two points separated by a wall of K: no empty ball passes through both
        K = PolyContinuum.from_edges([[-1, 1], [-2j, 2j]])
        assert chords_between(-1, 1, K).kind == "empty"

    def test_sweep_oracle(self):
        a, b = -1 + 1j, 1 + 1j
        cs = chords_between(a, b, SQUARE)
        lo, hi = cs.angles
        if hi < lo:
            hi += 2 * math.pi
        thetas = np.linspace(0, 2 * math.pi, 1441)[:-1]
        valid = [t for t in thetas if ball_is_empty(ball_through(a, b, t), SQUARE)]
        inside = [t for t in valid if lo - 1e-6 <= t <= hi + 1e-6 or lo - 1e-6 <= t + 2 * math.pi <= hi + 1e-6]
        assert len(inside) == len(valid) > 0


class TestPartition:
    def test_square_grid(self):
        g = np.linspace(-3, 3, 25)
        z = (g[:, None] + 1j * g[None, :]).ravel()
        z = z[(np.abs(z.real) > 1.05) | (np.abs(z.imag) > 1.05)][:500]
        rep = partition_check(SQUARE, z)
        assert rep.located == 500 and rep.ok and rep.multiple == 0

    def test_segment_random(self):
        rng = np.random.default_rng(0)
        z = rng.uniform(-3, 3, 200) + 1j * rng.uniform(-3, 3, 200)
        rep = partition_check(SEGMENT, z)
        assert rep.located == 200 and rep.ok

    def test_random_octagon(self):
        rng = np.random.default_rng(0)
        K = PolyContinuum.from_polygon(rng.uniform(0.6, 1.4, 8) * np.exp(1j * np.sort(rng.uniform(0, 2 * np.pi, 8))))
        z = rng.uniform(-3, 3, 800) + 1j * rng.uniform(-3, 3, 800)
        z = z[~K.in_hull(z, tol=1e-3)][:500]
        rep = partition_check(K, z)
        assert rep.located == 500 and rep.agreements == 500 and rep.ok


class TestInvariants:
    def test_gap_hulls_disjoint(self):
        rng = np.random.default_rng(3)
        gaps = gap_balls(SQUARE)
        z = 4 * rng.uniform(-1, 1, 2000) + 4j * rng.uniform(-1, 1, 2000)
        z = z[~SQUARE.in_hull(z, tol=1e-3)]
        for p in z:
            owners = [el for el in gaps if el.contains(p, 1e-9)]
            assert len(owners) <= 1

    def test_chord_limit_is_chord(self):
        a, b = 1 + 1j, 1 - 1j
        cs = chords_between(a, b, SQUARE)
        lo, hi = cs.angles
        span = (hi - lo) % (2 * math.pi)
        for end, direction in ((lo, 1), (hi, -1)):
            seq = [end + direction * span * 2.0 ** -k for k in range(1, 12)]
            assert all(ball_is_empty(ball_through(a, b, t), SQUARE) for t in seq)
            assert ball_is_empty(ball_through(a, b, end), SQUARE)

    @pytest.mark.parametrize("seed", range(20))
    def test_smallest_ball_centre_in_contact_hull(self, seed):
        rng = np.random.default_rng(seed)
        pts = rng.normal(size=30) + 1j * rng.normal(size=30)
        B = smallest_enclosing_ball(pts)
        support = pts[np.abs(np.abs(pts - B.center) - B.radius) <= 1e-9 * B.radius]
        # centre in the convex hull of the support: no open half-plane through it misses them all
        angles = np.sort(np.angle(support - B.center))
        gaps = np.diff(np.concatenate([angles, [angles[0] + 2 * math.pi]]))
        assert gaps.max() <= math.pi + 1e-9
