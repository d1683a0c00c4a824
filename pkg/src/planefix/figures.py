"""Matplotlib figures for CLI reports (SVG or any format matplotlib knows)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.patches import Circle, Polygon as PolygonPatch  # noqa: E402

from .geom import Ball, PolyContinuum, PolyCurve  # noqa: E402

PALETTE = {
    "continuum": "#333333",
    "fill": "#d9d9d9",
    "curve": "#1f77b4",
    "image": "#d62728",
    "ball": "#2ca02c",
    "chord": "#9467bd",
    "ray": "#ff7f0e",
    "point": "#000000",
    "junction": ("#17becf", "#8c564b", "#e377c2"),
}

plt.rcParams["svg.hashsalt"] = "planefix"
plt.rcParams["svg.fonttype"] = "none"
plt.rcParams["path.simplify"] = False


class Figure:
    """One square axes whose view is the data bounds enlarged by 1.2."""

    def __init__(self, bounds, title: str = ""):
        x0, y0, x1, y1 = (float(b) for b in bounds)
        cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
        half = 0.6 * max(x1 - x0, y1 - y0, 1e-6)
        self.fig, self.ax = plt.subplots(figsize=(6, 6))
        self.ax.set_xlim(cx - half, cx + half)
        self.ax.set_ylim(cy - half, cy + half)
        self.ax.set_aspect("equal")
        self.far = 10 * half + abs(complex(cx, cy))
        if title:
            self.ax.set_title(title)

    def continuum(self, X: PolyContinuum):
        for c in X.curves:
            if c.closed:
                self.ax.add_patch(PolygonPatch(_xy(c.vertices), closed=True, fc=PALETTE["fill"],
                                               ec=PALETTE["continuum"], lw=1))
            else:
                self.polyline(c.vertices, PALETTE["continuum"], lw=1.5)

    def curve(self, S: PolyCurve, color: str | None = None, lw: float = 1.2):
        self.polyline(S.path, color or PALETTE["curve"], lw=lw)

    def polyline(self, pts, color: str, lw: float = 1.0, ls: str = "-"):
        pts = np.asarray(pts, dtype=complex)
        self.ax.plot(pts.real, pts.imag, color=color, lw=lw, ls=ls)

    def points(self, pts, color: str | None = None, size: float = 12):
        pts = np.atleast_1d(np.asarray(pts, dtype=complex))
        self.ax.scatter(pts.real, pts.imag, s=size, color=color or PALETTE["point"], zorder=3)

    def ball(self, B: Ball, color: str | None = None):
        color = color or PALETTE["ball"]
        if B.kind == "halfplane":
            d = B.normal * -1j
            p = B.center
            self.polyline([p - self.far * d, p + self.far * d], color, ls="--")
        else:
            self.ax.add_patch(Circle((B.center.real, B.center.imag), B.radius, fill=False,
                                     ec=color, ls="--" if B.kind == "exterior" else "-"))

    def junction(self, J):
        for ray, color in zip(J.extended(self.far), PALETTE["junction"]):
            self.polyline(ray, color, lw=0.8)

    def save(self, path) -> Path:
        path = Path(path)
        fmt = path.suffix.lstrip(".") or "svg"
        meta = {"Date": None} if fmt == "svg" else None
        self.fig.savefig(path, format=fmt, metadata=meta)
        plt.close(self.fig)
        return path


def _xy(pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=complex)
    return np.stack([pts.real, pts.imag], axis=1)


def bounds_of(*groups) -> tuple[float, float, float, float]:
    pts = np.concatenate([np.atleast_1d(np.asarray(g, dtype=complex)).ravel() for g in groups if g is not None])
    pts = pts[np.isfinite(pts)]
    return float(pts.real.min()), float(pts.imag.min()), float(pts.real.max()), float(pts.imag.max())


def lamination_figure(chords, title: str = "") -> Figure:
    """Unit circle with straight leaves between the given angle pairs (in turns)."""
    F = Figure((-1, -1, 1, 1), title)
    t = np.linspace(0, 1, 361)
    F.polyline(np.exp(2j * np.pi * t), PALETTE["continuum"])
    for cls in chords:
        z = np.exp(2j * np.pi * np.array([float(a) for a in cls]))
        F.ax.add_patch(PolygonPatch(_xy(z), closed=True, fc="none" if len(z) == 2 else PALETTE["fill"],
                                    ec=PALETTE["chord"]))
        F.points(z, PALETTE["chord"], 8)
    return F


def graph_figure(names, edges, title: str = "") -> Figure:
    """A tree drawn by a layered layout from its first vertex."""
    n = len(names)
    adj = {k: set() for k in range(n)}
    for a, b in edges:
        adj[a].add(b)
        adj[b].add(a)
    depth = {0: 0} if n else {}
    order = [0] if n else []
    for v in order:
        for w in sorted(adj[v]):
            if w not in depth:
                depth[w] = depth[v] + 1
                order.append(w)
    layers: dict[int, list[int]] = {}
    for v in order:
        layers.setdefault(depth[v], []).append(v)
    pos = {}
    for d, vs in layers.items():
        for i, v in enumerate(vs):
            pos[v] = complex(d, i - (len(vs) - 1) / 2)
    pts = list(pos.values()) or [0j]
    F = Figure(bounds_of(pts), title)
    for a, b in edges:
        if a in pos and b in pos:
            F.polyline([pos[a], pos[b]], PALETTE["continuum"])
    for v, z in pos.items():
        F.points([z])
        F.ax.annotate(str(names[v]), (z.real, z.imag), fontsize=7, xytext=(3, 3), textcoords="offset points")
    return F


__all__ = ["PALETTE", "Figure", "bounds_of", "lamination_figure", "graph_figure"]
