"""Evaluatable maps of the plane.

Every map is a callable taking and returning complex numpy arrays.  Maps
that are only defined on a few polylines (:class:`PolylineMap`) also report
their breakpoints so curve sampling can hit them exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .geom import NotOnBoundary, PolyCurve, as_complex_array


class PlaneMap:
    """Base class; subclasses implement :meth:`__call__`."""

    piecewise_linear = False

    def __call__(self, z):  # pragma: no cover - interface
        raise NotImplementedError

    def breakpoints(self, curve: PolyCurve) -> np.ndarray:
        """Curve parameters where the map stops being smooth (default none)."""
        return np.empty(0)

    def to_json(self) -> dict:
        raise TypeError(f"{type(self).__name__} has no JSON form")


@dataclass(frozen=True)
class PolynomialMap(PlaneMap):
    """``sum(coeffs[k] * z**k)``; coefficients in ascending degree."""

    coeffs: tuple

    def __post_init__(self):
        c = [complex(x) for x in self.coeffs]
        while len(c) > 1 and c[-1] == 0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return np.polyval(self.coeffs[::-1], z)

    def derivative(self) -> "PolynomialMap":
        if self.degree == 0:
            return PolynomialMap((0,))
        return PolynomialMap(tuple(k * c for k, c in enumerate(self.coeffs) if k > 0))

    def compose(self, other: "PolynomialMap") -> "PolynomialMap":
        out = np.poly1d([0j])
        inner = np.poly1d(other.coeffs[::-1])
        for c in self.coeffs[::-1]:
            out = out * inner + c
        return PolynomialMap(tuple(out.coeffs[::-1]))

    def to_json(self) -> dict:
        return {"type": "polynomial", "coeffs": [[c.real, c.imag] for c in self.coeffs]}


@dataclass(frozen=True)
class AffineMap(PlaneMap):
    """``a*z + b`` (optionally ``a*conj(z) + b`` when ``conjugate``)."""

    a: complex = 1
    b: complex = 0
    conjugate: bool = False

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return self.a * (np.conj(z) if self.conjugate else z) + self.b

    def to_json(self) -> dict:
        return {"type": "affine", "a": [self.a.real, self.a.imag], "b": [self.b.real, self.b.imag],
                "conjugate": self.conjugate}


@dataclass(frozen=True)
class MobiusMap(PlaneMap):
    """``(a*z + b) / (c*z + d)``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) == 0:
            raise ValueError("degenerate Mobius transformation")

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            return (self.a * z + self.b) / (self.c * z + self.d)

    def to_json(self) -> dict:
        return {"type": "mobius", "abcd": [[x.real, x.imag] for x in (self.a, self.b, self.c, self.d)]}


@dataclass(frozen=True)
class FunctionMap(PlaneMap):
    """Wraps an arbitrary vectorized callable."""

    func: Callable
    name: str = "function"

    def __call__(self, z):
        return np.asarray(self.func(np.asarray(z, dtype=complex)), dtype=complex)


@dataclass(frozen=True)
class PolylineMap(PlaneMap):
    """Piecewise-linear map defined on a few source polylines.

    ``pieces`` is a sequence of ``(source, knots, image)``: a source
    :class:`PolyCurve`, increasing normalized arclength parameters
    ``knots`` (first 0, last 1) and the image points at those parameters.
    Between knots the map is linear in the arclength parameter.  Points not
    on any source polyline raise :class:`NotOnBoundary`.
    """

    pieces: tuple = field(default_factory=tuple)
    tol: float = 1e-7
    piecewise_linear = True

    @classmethod
    def on_curve(cls, source: PolyCurve, knots: Sequence[float], image: Sequence[complex]) -> "PolylineMap":
        return cls(((source, np.asarray(knots, float), as_complex_array(image)),))

    def with_piece(self, source: PolyCurve, knots, image) -> "PolylineMap":
        return PolylineMap(self.pieces + ((source, np.asarray(knots, float), as_complex_array(image)),),
                           self.tol)

    def _locate(self, z: complex):
        best = None
        for idx, (src, _, _) in enumerate(self.pieces):
            d = float(src.distance([z])[0])
            if best is None or d < best[0]:
                best = (d, idx)
        if best is None or best[0] > self.tol * max(1.0, abs(z)):
            raise NotOnBoundary(f"{z} is not on the domain of the polyline map")
        return best[1]

    def eval_param(self, piece: int, t):
        src, knots, image = self.pieces[piece]
        t = np.asarray(t, dtype=float)
        if src.closed:
            t = np.mod(t, 1.0)
        return np.interp(t, knots, image.real) + 1j * np.interp(t, knots, image.imag)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = np.atleast_1d(z).ravel()
        out = np.empty(flat.shape, dtype=complex)
        for k, w in enumerate(flat):
            idx = self._locate(complex(w))
            src = self.pieces[idx][0]
            out[k] = self.eval_param(idx, src.param_of(complex(w), tol=self.tol))
        return out.reshape(z.shape) if z.ndim else complex(out[0])

    def piece_for(self, curve: PolyCurve):
        """Index of the piece whose source is exactly ``curve``, else None."""
        for idx, (src, _, _) in enumerate(self.pieces):
            if (src.closed == curve.closed and len(src.vertices) == len(curve.vertices)
                    and np.allclose(src.vertices, curve.vertices, atol=1e-12)):
                return idx
        return None

    def breakpoints(self, curve: PolyCurve) -> np.ndarray:
        """Curve parameters of every knot (of any piece) lying on ``curve``."""
        piece = self.piece_for(curve)
        if piece is not None:
            return np.unique(self.pieces[piece][1])
        out = []
        for src, knots, _ in self.pieces:
            pts = src.point_at(knots)
            on = curve.distance(pts) <= self.tol
            for p in pts[on]:
                out.append(curve.param_of(complex(p), tol=self.tol * 10))
        return np.array(sorted(set(out)))


def map_from_json(data: dict) -> PlaneMap:
    kind = data.get("type", "polynomial")
    if kind == "polynomial":
        return PolynomialMap(tuple(complex(*c) if isinstance(c, (list, tuple)) else complex(c)
                                   for c in data["coeffs"]))
    if kind == "affine":
        return AffineMap(complex(*data.get("a", [1, 0])), complex(*data.get("b", [0, 0])),
                         bool(data.get("conjugate", False)))
    if kind == "mobius":
        return MobiusMap(*(complex(*x) for x in data["abcd"]))
    if kind == "polyline":
        pieces = []
        for p in data["pieces"]:
            src = PolyCurve(as_complex_array(p["source"]), bool(p.get("closed", False)))
            pieces.append((src, np.asarray(p["knots"], float), as_complex_array(p["image"])))
        return PolylineMap(tuple(pieces))
    raise ValueError(f"unknown map type {kind!r}")


def polyline_map_to_json(m: PolylineMap) -> dict:
    return {
        "type": "polyline",
        "pieces": [
            {"source": [[v.real, v.imag] for v in src.vertices], "closed": src.closed,
             "knots": list(map(float, knots)), "image": [[v.real, v.imag] for v in image]}
            for src, knots, image in m.pieces
        ],
    }


__all__ = [
    "PlaneMap", "PolynomialMap", "AffineMap", "MobiusMap", "FunctionMap", "PolylineMap",
    "map_from_json", "polyline_map_to_json",
]
