"""Closed polygonal curves, discrete geometric quantities, and the shape catalog.

Conventions
-----------
A curve is a closed polygon with vertices ``x_0, ..., x_{N-1}`` stored in
clockwise order.  Edge ``j`` joins vertex ``j-1`` to vertex ``j`` (periodic),
so ``h_j = x_j - x_{j-1}``.  The outward unit normal of edge ``j`` is
``n_j = -h_j^perp / |h_j|`` where ``^perp`` is the clockwise rotation
``(x, y) -> (y, -x)``.  With clockwise vertex ordering this normal points away
from the enclosed region, and a unit circle has curvature +1 under the
convention ``kappa n = -d^2 X / ds^2``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateEdge, SamplingFailure, SizeMismatch

# Relative degenerate-edge threshold: an edge counts as collapsed when its
# length falls below EDGE_DEGENERACY_REL * (perimeter / N).
EDGE_DEGENERACY_REL = 1e-12


class PolygonalCurve:
    """Closed planar polygon with at least three vertices.

    Vertex order is normalized to clockwise on construction (the first vertex
    is kept in place), unless ``orientation="keep"`` is passed, which is used
    by the time steppers to preserve index alignment across steps.  The node
    array is copied and frozen; curves are immutable and safe to share.
    """

    __slots__ = ("nodes",)

    def __init__(self, nodes, orientation="auto"):
        nodes = np.array(nodes, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 2:
            raise ValueError(f"nodes must have shape (N, 2), got {nodes.shape}")
        if nodes.shape[0] < 3:
            raise ValueError(f"a closed polygon needs N >= 3 vertices, got {nodes.shape[0]}")
        if not np.all(np.isfinite(nodes)):
            raise ValueError("nodes contain non-finite values")
        if orientation == "auto" and _signed_area(nodes) > 0.0:
            # Counterclockwise input: reverse traversal, keeping vertex 0 first.
            nodes = np.concatenate([nodes[:1], nodes[:0:-1]])
        nodes.setflags(write=False)
        self.nodes = nodes

    @property
    def n(self) -> int:
        return self.nodes.shape[0]

    def translated(self, offset) -> "PolygonalCurve":
        return PolygonalCurve(self.nodes + np.asarray(offset, dtype=float), orientation="keep")

    def scaled(self, factor: float) -> "PolygonalCurve":
        return PolygonalCurve(self.nodes * float(factor), orientation="keep")

    def rolled(self, shift: int) -> "PolygonalCurve":
        """Cyclically re-index the vertices (same polygon, new start)."""
        return PolygonalCurve(np.roll(self.nodes, shift, axis=0), orientation="keep")

    def __repr__(self):
        return f"PolygonalCurve(N={self.n})"


@dataclass(frozen=True)
class EdgeData:
    """Per-edge vectors, lengths and outward unit normals of a polygon."""

    vectors: np.ndarray   # (N, 2), vectors[j] = x_j - x_{j-1}
    lengths: np.ndarray   # (N,), all positive
    normals: np.ndarray   # (N, 2), unit outward normals


def _signed_area(nodes: np.ndarray) -> float:
    x, y = nodes[:, 0], nodes[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    return 0.5 * float(np.sum(x * yn - xn * y))


def _raw_edges(curve: PolygonalCurve):
    vectors = curve.nodes - np.roll(curve.nodes, 1, axis=0)
    lengths = np.hypot(vectors[:, 0], vectors[:, 1])
    return vectors, lengths


def edge_data(curve: PolygonalCurve) -> EdgeData:
    """Edge vectors, lengths and outward normals; raises on degenerate edges."""
    vectors, lengths = _raw_edges(curve)
    eps = EDGE_DEGENERACY_REL * float(np.sum(lengths)) / curve.n
    if np.any(lengths <= eps):
        j = int(np.argmin(lengths))
        raise DegenerateEdge(f"edge {j} has length {lengths[j]:.3e} <= {eps:.3e}")
    # n = -h^perp / |h| with h^perp = (h_y, -h_x)  (clockwise quarter turn)
    normals = np.column_stack([-vectors[:, 1], vectors[:, 0]]) / lengths[:, None]
    for arr in (vectors, lengths, normals):
        arr.setflags(write=False)
    return EdgeData(vectors=vectors, lengths=lengths, normals=normals)


def enclosed_area(curve: PolygonalCurve) -> float:
    """Positive enclosed area (shoelace formula, orientation independent)."""
    return abs(_signed_area(curve.nodes))


def perimeter(curve: PolygonalCurve) -> float:
    return float(np.sum(edge_data(curve).lengths))


def energy(curve: PolygonalCurve) -> float:
    """Sum of squared edge lengths (the discrete energy bounded by the
    mild-stability estimate)."""
    return float(np.sum(edge_data(curve).lengths ** 2))


def mesh_ratio(curve: PolygonalCurve) -> float:
    """Longest edge over shortest edge; 1 for an equidistributed polygon."""
    lengths = edge_data(curve).lengths
    return float(np.max(lengths) / np.min(lengths))


def centroid(curve: PolygonalCurve) -> np.ndarray:
    return curve.nodes.mean(axis=0)


def is_convex(curve: PolygonalCurve, tol: float = 1e-9) -> bool:
    """True when all turns have a consistent sign (up to ``tol`` relative)."""
    vectors, lengths = _raw_edges(curve)
    nxt = np.roll(vectors, -1, axis=0)
    cross = vectors[:, 0] * nxt[:, 1] - vectors[:, 1] * nxt[:, 0]
    scale = lengths * np.roll(lengths, -1)
    return bool(np.all(cross <= tol * scale) or np.all(cross >= -tol * scale))


# ---------------------------------------------------------------------------
# Shape catalog
# ---------------------------------------------------------------------------

class ShapeSpec:
    """A continuous closed curve given by a parametrization over [0, 1)."""

    #: parameter values of slope discontinuities (empty for smooth shapes)
    junctions: tuple = ()
    #: True when |dX/drho| is constant, so uniform parameters equidistribute
    uniform_speed: bool = False

    def point(self, rho: np.ndarray) -> np.ndarray:
        """Map parameters ``rho`` (any array) to points, shape (..., 2)."""
        raise NotImplementedError

    def cache_key(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Circle(ShapeSpec):
    radius: float = 1.0
    uniform_speed = True

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")

    def point(self, rho):
        ang = 2.0 * np.pi * np.asarray(rho, dtype=float)
        return self.radius * np.stack([np.cos(ang), np.sin(ang)], axis=-1)

    def cache_key(self):
        return f"circle_r{self.radius!r}"


@dataclass(frozen=True)
class Ellipse(ShapeSpec):
    a: float = 2.0
    b: float = 1.0

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("semi-axes must be positive")

    def point(self, rho):
        ang = 2.0 * np.pi * np.asarray(rho, dtype=float)
        return np.stack([self.a * np.cos(ang), self.b * np.sin(ang)], axis=-1)

    def cache_key(self):
        return f"ellipse_a{self.a!r}_b{self.b!r}"


@dataclass(frozen=True)
class Tube(ShapeSpec):
    """A rectangle capped by two semicircles on its short sides.

    ``rect_length`` is the length of the straight part and ``radius`` the cap
    radius (so the overall height is ``2 * radius``).  The parametrization is
    by arclength, clockwise, starting at the top-left junction.
    """

    rect_length: float = 4.0
    radius: float = 0.5

    def __post_init__(self):
        if self.rect_length <= 0 or self.radius <= 0:
            raise ValueError("tube parameters must be positive")

    @property
    def _total(self) -> float:
        return 2.0 * self.rect_length + 2.0 * np.pi * self.radius

    @property
    def junctions(self):
        ell, cap, total = self.rect_length, np.pi * self.radius, self._total
        return (0.0, ell / total, (ell + cap) / total, (2.0 * ell + cap) / total)

    def point(self, rho):
        ell, r = self.rect_length, self.radius
        cap = np.pi * r
        total = self._total
        s = (np.asarray(rho, dtype=float) % 1.0) * total
        x = np.empty_like(s)
        y = np.empty_like(s)

        top = s < ell
        x[top] = -0.5 * ell + s[top]
        y[top] = r

        right = (s >= ell) & (s < ell + cap)
        theta = 0.5 * np.pi - (s[right] - ell) / r
        x[right] = 0.5 * ell + r * np.cos(theta)
        y[right] = r * np.sin(theta)

        bottom = (s >= ell + cap) & (s < 2.0 * ell + cap)
        x[bottom] = 0.5 * ell - (s[bottom] - ell - cap)
        y[bottom] = -r

        left = s >= 2.0 * ell + cap
        theta = -0.5 * np.pi - (s[left] - 2.0 * ell - cap) / r
        x[left] = -0.5 * ell + r * np.cos(theta)
        y[left] = r * np.sin(theta)

        return np.stack([x, y], axis=-1)

    def cache_key(self):
        return f"tube_l{self.rect_length!r}_r{self.radius!r}"


@dataclass(frozen=True)
class Flower(ShapeSpec):
    """Twelve-petal polar curve r(theta) = 2 + cos(6 theta)."""

    def point(self, rho):
        rho = np.asarray(rho, dtype=float)
        ang = 2.0 * np.pi * rho
        rad = 2.0 + np.cos(12.0 * np.pi * rho)
        return np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=-1)

    def cache_key(self):
        return "flower"


@dataclass(frozen=True)
class NonconvexBenchmark(ShapeSpec):
    """Strongly nonconvex benchmark curve used for long-time evolution tests."""

    def point(self, rho):
        rho = np.asarray(rho, dtype=float)
        ang = 2.0 * np.pi * rho
        x = np.cos(ang)
        y = np.sin(np.cos(ang)) + np.sin(ang) * (0.7 + np.sin(ang) * np.sin(6.0 * np.pi * rho) ** 2)
        return np.stack([x, y], axis=-1)

    def cache_key(self):
        return "nonconvex"


class Custom(ShapeSpec):
    """Shape defined by a user-supplied parametrization ``rho -> (x, y)``."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], name: str = "custom"):
        self.fn = fn
        self.name = name

    def point(self, rho):
        pts = np.asarray(self.fn(np.asarray(rho, dtype=float)), dtype=float)
        if pts.shape[-1] != 2:
            raise ValueError("custom parametrization must return (..., 2) points")
        return pts

    def cache_key(self):
        return self.name


SHAPE_CATALOG = {
    "circle": lambda params: Circle(*params) if params else Circle(),
    "ellipse": lambda params: Ellipse(*params) if params else Ellipse(),
    "tube": lambda params: Tube(*params) if params else Tube(),
    "flower": lambda params: Flower(),
    "nonconvex": lambda params: NonconvexBenchmark(),
}


def make_shape(name: str, params=()) -> ShapeSpec:
    """Build a catalog shape from its CLI name and optional parameters."""
    try:
        factory = SHAPE_CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown shape {name!r}; known: {sorted(SHAPE_CATALOG)}") from None
    return factory(tuple(params))


# ---------------------------------------------------------------------------
# Equidistributed sampling
# ---------------------------------------------------------------------------

_TABLE_START = 1 << 12
_TABLE_MAX = 1 << 22
_TABLE_RTOL = 1e-10


def _arclength_table(shape: ShapeSpec):
    """Cumulative chord-length table, refined until the perimeter estimate
    changes by less than ``_TABLE_RTOL`` relative between refinements."""
    k = _TABLE_START
    prev_len = None
    while k <= _TABLE_MAX:
        params = np.linspace(0.0, 1.0, k + 1)
        pts = shape.point(params)
        seg = np.hypot(*(pts[1:] - pts[:-1]).T)
        total = float(np.sum(seg))
        if total <= 0.0:
            raise SamplingFailure("shape has zero perimeter")
        if prev_len is not None and abs(total - prev_len) < _TABLE_RTOL * total:
            cum = np.concatenate([[0.0], np.cumsum(seg)])
            return params, cum, total
        prev_len = total
        k *= 2
    raise SamplingFailure(
        f"arclength table did not converge to rtol={_TABLE_RTOL} within {_TABLE_MAX} samples")


_CHORD_ITERATIONS = 200
_CHORD_RTOL = 1e-9


def _sample_smooth(shape: ShapeSpec, n: int) -> np.ndarray:
    """Vertices on the shape with (nearly) equal polygon side lengths.

    Starts from equal-arclength placement and iterates a cumulative-chord
    redistribution (vertex 0 stays pinned at rho = 0) until the sides agree
    to ``_CHORD_RTOL`` relative.  Equal arclength alone is not enough: where
    curvature varies, equal arcs subtend unequal chords.
    """
    if shape.uniform_speed:
        return shape.point(np.arange(n) / n)
    params, cum, total = _arclength_table(shape)
    s = total * np.arange(n) / n
    pts = shape.point(np.interp(s, cum, params))
    best = None
    for _ in range(_CHORD_ITERATIONS):
        closed = np.vstack([pts, pts[:1]])
        chords = np.hypot(*(closed[1:] - closed[:-1]).T)
        spread = float(np.max(chords) / np.min(chords)) - 1.0
        if best is None or spread < best[0]:
            best = (spread, pts)
        if spread <= _CHORD_RTOL:
            break
        q = np.concatenate([[0.0], np.cumsum(chords)])
        s_closed = np.concatenate([s, [total]])
        s = np.interp(q[-1] * np.arange(n) / n, q, s_closed)
        pts = shape.point(np.interp(s, cum, params))
    spread, pts = best
    if spread > 1e-3:
        raise SamplingFailure(
            f"chord equidistribution stalled at mesh ratio {1.0 + spread:.6f} for n={n}")
    return pts


def _sample_with_junctions(shape: ShapeSpec, n: int) -> np.ndarray:
    """Pin a vertex on every junction, then split each smooth arc into equal
    arclength pieces, allocating vertex counts by largest remainder."""
    junctions = np.asarray(shape.junctions, dtype=float)
    k = len(junctions)
    if n < k:
        raise SamplingFailure(f"need at least {k} vertices to pin all junctions, got {n}")
    bounds = np.concatenate([junctions, [junctions[0] + 1.0]])
    arc_params = bounds[1:] - bounds[:-1]
    # Arc lengths from a fine per-arc chord sum (shapes with junctions are
    # arclength-parametrized here, but do not rely on that).
    arc_len = np.empty(k)
    for i in range(k):
        ps = np.linspace(bounds[i], bounds[i + 1], 4097)
        pts = shape.point(ps)
        arc_len[i] = np.sum(np.hypot(*(pts[1:] - pts[:-1]).T))
    quota = n * arc_len / arc_len.sum()
    counts = np.maximum(np.floor(quota).astype(int), 1)
    while counts.sum() < n:
        frac = quota - counts
        counts[int(np.argmax(frac))] += 1
    while counts.sum() > n:
        frac = quota - counts
        counts[int(np.argmin(frac))] -= 1
    if np.any(counts < 1):
        raise SamplingFailure("vertex budget too small for junction pinning")
    rhos = []
    for i in range(k):
        steps = np.arange(counts[i]) / counts[i]
        rhos.append(bounds[i] + steps * arc_params[i])
    return shape.point(np.concatenate(rhos) % 1.0)


def equidistributed_sample(shape: ShapeSpec, n: int) -> PolygonalCurve:
    """Place ``n`` vertices on ``shape`` at (nearly) equal arclength spacing.

    Smooth shapes get a mesh ratio of at most ``1 + 1e-3``; shapes with slope
    discontinuities (``Tube``) get a vertex pinned on each junction and each
    smooth arc subdivided equidistantly.
    """
    if n < 3:
        raise ValueError(f"need n >= 3 vertices, got {n}")
    if shape.junctions:
        pts = _sample_with_junctions(shape, n)
    else:
        pts = _sample_smooth(shape, n)
    return PolygonalCurve(pts)


# ---------------------------------------------------------------------------
# Snapshot files: CSV and JSON, bit-exact at 17 significant digits
# ---------------------------------------------------------------------------

def save_snapshot_csv(path, curve: PolygonalCurve, t: float) -> None:
    with open(path, "w") as fh:
        fh.write(f"# t={t:.17g}, N={curve.n}\n")
        for x, y in curve.nodes:
            fh.write(f"{x:.17g},{y:.17g}\n")


def load_snapshot_csv(path):
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# t="):
            raise ValueError(f"{path}: missing snapshot header '# t=..., N=...'")
        t_part, n_part = header[2:].split(",")
        t = float(t_part.split("=")[1])
        n = int(n_part.split("=")[1])
        rows = [tuple(map(float, line.split(","))) for line in fh if line.strip()]
    if len(rows) != n:
        raise ValueError(f"{path}: header claims N={n} but file has {len(rows)} rows")
    return PolygonalCurve(np.array(rows)), t


def save_snapshot_json(path, curve: PolygonalCurve, t: float) -> None:
    payload = {"t": t, "nodes": [[float(x), float(y)] for x, y in curve.nodes]}
    with open(path, "w") as fh:
        json.dump(payload, fh)


def load_snapshot_json(path):
    with open(path) as fh:
        payload = json.load(fh)
    return PolygonalCurve(np.array(payload["nodes"], dtype=float)), float(payload["t"])
