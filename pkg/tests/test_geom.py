import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from planefix.geom import (EPS_GEOM, AtCenter, Ball, DegenerateRegion, NotOnBoundary, PointOnCurve,
                           PolyContinuum, PolyCurve, circumcircle, hyperbolic_geodesic, invert,
                           regular_polygon, smallest_enclosing_ball, winding_number)


def angle_sum(path, w):
    """Independent oracle: total turning of ``path - w`` via atan2 of successive ratios."""
    v = np.asarray(path) - w
    v = np.concatenate([v, v[:1]])
    return int(round(sum(math.atan2((b / a).imag, (b / a).real) for a, b in zip(v[:-1], v[1:])) / (2 * math.pi)))


def brute_enclosing(points):
    pts = list(points)
    best = None
    cands = [((a + b) / 2, abs(a - b) / 2) for a, b in itertools.combinations(pts, 2)]
    for a, b, c in itertools.combinations(pts, 3):
        cc = circumcircle(a, b, c)
        if cc is not None:
            cands.append(cc)
    for c, r in cands:
        if all(abs(p - c) <= r + 1e-9 for p in pts) and (best is None or r < best[1]):
            best = (c, r)
    return best


class TestWinding:
    def test_inside_and_outside(self):
        C = regular_polygon(64)
        assert winding_number(C, 0j) == 1
        assert winding_number(C, 3 + 0j) == 0

    def test_squared_circle_winds_twice(self):
        z = np.exp(2j * np.pi * np.arange(256) / 256)
        image = PolyCurve(z**2, closed=True)
        assert winding_number(image, 0j) == angle_sum(z**2, 0j) == 2

    def test_on_curve_raises(self):
        with pytest.raises(PointOnCurve):
            winding_number(regular_polygon(4), 1 + 0j)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(3, 40), st.integers(0, 39), st.floats(-3, 3), st.floats(-3, 3))
    def test_rotation_and_reversal(self, n, shift, x, y):
        C = regular_polygon(n, 1.5, 0.2 + 0.1j)
        w = complex(x, y)
        if C.distance([w])[0] < 1e-6:
            return
        k = winding_number(C, w)
        rolled = PolyCurve(np.roll(C.vertices, shift % n), closed=True)
        assert winding_number(rolled, w) == k
        assert winding_number(C.reversed(), w) == -k
        assert k == angle_sum(C.vertices, w)

    def test_zero_outside_vertex_hull(self):
        rng = np.random.default_rng(1)
        C = PolyCurve(rng.normal(size=12) + 1j * rng.normal(size=12), closed=True)
        far = 10 * np.exp(2j * np.pi * rng.uniform(size=20))
        assert all(winding_number(C, w) == 0 for w in far)


class TestEnclosingBall:
    def test_square_corners(self):
        B = smallest_enclosing_ball([1 + 1j, -1 + 1j, -1 - 1j, 1 - 1j])
        assert abs(B.center) < 1e-12
        assert B.radius == pytest.approx(math.sqrt(2), abs=1e-12)

    def test_singleton_is_degenerate(self):
        B = smallest_enclosing_ball([0j])
        assert B.radius == 0 and B.degenerate

    def test_matches_brute_force(self):
        rng = np.random.default_rng(7)
        pts = rng.uniform(size=50) + 1j * rng.uniform(size=50)
        B = smallest_enclosing_ball(pts)
        c, r = brute_enclosing(pts)
        assert abs(B.center - c) < 1e-9 and abs(B.radius - r) < 1e-9

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=2, max_size=25))
    def test_contains_and_supported(self, xy):
        pts = np.array([complex(x, y) for x, y in xy])
        B = smallest_enclosing_ball(pts)
        d = np.abs(pts - B.center)
        assert d.max() <= B.radius + 1e-9 * max(1, B.radius)
        if not B.degenerate:
            assert (np.abs(d - B.radius) <= 1e-7 * max(1, B.radius)).sum() >= 2


class TestInvert:
    def test_real_axis(self):
        assert invert(2 + 0j, 0j) == pytest.approx(0.5)

    def test_at_center(self):
        with pytest.raises(AtCenter):
            invert(1 + 1j, 1 + 1j)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-6, 6), st.floats(0, 2 * math.pi))
    def test_involution_about_origin(self, logr, t):
        p = 10**logr * complex(math.cos(t), math.sin(t))
        assert abs(invert(invert(p)) - p) <= 1e-12 * abs(p)

    @settings(max_examples=100, deadline=None)
    @given(st.floats(-6, 6), st.floats(0, 2 * math.pi), st.floats(-5, 5), st.floats(-5, 5))
    def test_involution_off_origin(self, logr, t, cx, cy):
        # the intermediate point c + 1/conj(p - c) is rounded at the scale of |c|;
        # the second inversion amplifies that rounding by |p - c|**2
        c = complex(cx, cy)
        p = c + 10**logr * complex(math.cos(t), math.sin(t))
        r = abs(p - c)
        floor = 4 * np.spacing(max(abs(c), 1 / r)) * r**2
        assert abs(invert(invert(p, c), c) - p) <= 1e-12 * r + floor + 4 * np.spacing(abs(p))

    def test_circle_maps_to_circle(self):
        center, r, c = 3 + 1j, 1.0, 0j
        pts = center + r * np.exp(1j * np.array([0.3, 1.7, 4.0, 5.5]))
        img = [invert(p, c) for p in pts]
        cc, rr = circumcircle(*img[:3])
        assert abs(abs(img[3] - cc) - rr) < 1e-12


class TestGeodesic:
    def test_diameter_is_straight(self):
        g = hyperbolic_geodesic(Ball("disk", 0j, 1.0), 1 + 0j, -1 + 0j)
        assert np.abs(g.vertices.imag).max() < 1e-12

    def test_halfplane_semicircle(self):
        B = Ball.halfplane(1j, 1j)
        g = hyperbolic_geodesic(B, -1 + 1j, 1 + 1j)
        assert np.abs(np.abs(g.vertices - 1j) - 1).max() < 1e-12
        assert g.vertices.imag.min() >= 1 - 1e-12

    def test_orthogonal_arc(self):
        B = Ball("disk", 0j, 1.0)
        g = hyperbolic_geodesic(B, 1 + 0j, 1j)
        v = g.vertices
        assert abs(v[0] - 1) < EPS_GEOM and abs(v[-1] - 1j) < EPS_GEOM
        c = 1 + 1j  # orthogonal circle: centre at the tangent-line intersection
        assert np.abs(np.abs(v - c) - 1).max() < 1e-9
        # orthogonality: radius of the carrier is tangent-perpendicular at the endpoints
        assert abs(((v[0] - c) * np.conj(v[0])).real) < 1e-9
        assert (np.abs(v[1:-1]) < 1).all()

    def test_not_on_boundary(self):
        with pytest.raises(NotOnBoundary):
            hyperbolic_geodesic(Ball("disk", 0j, 1.0), 0.5 + 0j, 1j)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0, 2 * math.pi), st.floats(0.05, 2 * math.pi - 0.05), st.floats(0.1, 3))
    def test_endpoints_and_interior(self, t, dt, r):
        B = Ball("disk", 0.5 - 0.2j, r)
        a = B.center + r * complex(math.cos(t), math.sin(t))
        b = B.center + r * complex(math.cos(t + dt), math.sin(t + dt))
        v = hyperbolic_geodesic(B, a, b).vertices
        assert abs(v[0] - a) < 1e-9 * max(1, r) and abs(v[-1] - b) < 1e-9 * max(1, r)
        assert (np.abs(v[1:-1] - B.center) < r + 1e-9).all()


class TestContainers:
    def test_degenerate_curve(self):
        with pytest.raises(DegenerateRegion):
            PolyCurve(np.array([0j, 0j, 1 + 0j]))

    def test_continuum_round_trip(self):
        X = PolyContinuum.from_polygon([0, 1, 1 + 1j, 1j])
        Y = PolyContinuum.from_json(X.to_json())
        assert np.allclose(Y.vertices, X.vertices)
        assert X.in_hull([0.5 + 0.5j])[0] and not X.in_hull([2 + 0j])[0]
