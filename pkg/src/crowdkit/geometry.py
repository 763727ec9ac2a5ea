"""2D geometric primitives shared by all simulation modules.

Shapes are closed: boundary points count as inside. Polygons must be
simple (no self-intersections, no holes); holes are modeled as separate
obstacles. All types are immutable values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Union

import numpy as np


class GeometryError(ValueError):
    pass


class Point2(NamedTuple):
    x: float
    y: float


def _check_finite(*values: float) -> None:
    for v in values:
        if not math.isfinite(v):
            raise GeometryError(f"non-finite coordinate: {v!r}")


def euclidean_distance(a: Point2, b: Point2) -> float:
    """Euclidean distance between two points, in meters."""
    return math.hypot(a[0] - b[0], a[1] - b[1])


@dataclass(frozen=True)
class Rectangle:
    origin: Point2
    width: float
    height: float

    def __post_init__(self):
        _check_finite(self.origin[0], self.origin[1], self.width, self.height)
        if self.width <= 0 or self.height <= 0:
            raise GeometryError("rectangle dimensions must be strictly positive")

    @property
    def x_max(self) -> float:
        return self.origin[0] + self.width

    @property
    def y_max(self) -> float:
        return self.origin[1] + self.height

    def contains(self, p: Point2) -> bool:
        return (self.origin[0] <= p[0] <= self.x_max
                and self.origin[1] <= p[1] <= self.y_max)

    def distance(self, p: Point2) -> float:
        dx = max(self.origin[0] - p[0], 0.0, p[0] - self.x_max)
        dy = max(self.origin[1] - p[1], 0.0, p[1] - self.y_max)
        return math.hypot(dx, dy)

    def closest_boundary_point(self, p: Point2) -> Point2:
        # Clamp to the rectangle; for interior points snap to the nearest edge.
        cx = min(max(p[0], self.origin[0]), self.x_max)
        cy = min(max(p[1], self.origin[1]), self.y_max)
        if (cx, cy) != (p[0], p[1]):
            return Point2(cx, cy)
        candidates = [
            Point2(self.origin[0], cy), Point2(self.x_max, cy),
            Point2(cx, self.origin[1]), Point2(cx, self.y_max),
        ]
        return min(candidates, key=lambda q: euclidean_distance(p, q))

    def bounding_box(self) -> tuple[float, float, float, float]:
        return (self.origin[0], self.origin[1], self.x_max, self.y_max)

    def contains_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return ((xs >= self.origin[0]) & (xs <= self.x_max)
                & (ys >= self.origin[1]) & (ys <= self.y_max))

    def distance_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        dx = np.maximum(np.maximum(self.origin[0] - xs, 0.0), xs - self.x_max)
        dy = np.maximum(np.maximum(self.origin[1] - ys, 0.0), ys - self.y_max)
        return np.hypot(dx, dy)

    def area(self) -> float:
        return self.width * self.height


@dataclass(frozen=True)
class Circle:
    center: Point2
    radius: float

    def __post_init__(self):
        _check_finite(self.center[0], self.center[1], self.radius)
        if self.radius <= 0:
            raise GeometryError("circle radius must be strictly positive")

    def contains(self, p: Point2) -> bool:
        return euclidean_distance(self.center, p) <= self.radius

    def distance(self, p: Point2) -> float:
        return max(0.0, euclidean_distance(self.center, p) - self.radius)

    def closest_boundary_point(self, p: Point2) -> Point2:
        d = euclidean_distance(self.center, p)
        if d == 0.0:
            return Point2(self.center[0] + self.radius, self.center[1])
        s = self.radius / d
        return Point2(self.center[0] + (p[0] - self.center[0]) * s,
                      self.center[1] + (p[1] - self.center[1]) * s)

    def bounding_box(self) -> tuple[float, float, float, float]:
        return (self.center[0] - self.radius, self.center[1] - self.radius,
                self.center[0] + self.radius, self.center[1] + self.radius)

    def contains_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.hypot(xs - self.center[0], ys - self.center[1]) <= self.radius

    def distance_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        return np.maximum(0.0, np.hypot(xs - self.center[0], ys - self.center[1]) - self.radius)

    def area(self) -> float:
        return math.pi * self.radius ** 2


def _signed_area(vertices) -> float:
    s = 0.0
    n = len(vertices)
    for i in range(n):
        x0, y0 = vertices[i]
        x1, y1 = vertices[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _segments_properly_intersect(a, b, c, d) -> bool:
    """True if open segments ab and cd cross (shared endpoints excluded)."""
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return (o1 * o2 < 0) and (o3 * o4 < 0)


@dataclass(frozen=True)
class Polygon:
    vertices: tuple[Point2, ...]

    def __init__(self, vertices):
        verts = tuple(Point2(float(x), float(y)) for x, y in vertices)
        if len(verts) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        for v in verts:
            _check_finite(v[0], v[1])
        area = _signed_area(verts)
        if area == 0.0:
            raise GeometryError("degenerate polygon (zero area)")
        if area < 0:  # normalize to counter-clockwise storage
            verts = verts[::-1]
        n = len(verts)
        for i in range(n):
            a, b = verts[i], verts[(i + 1) % n]
            if a == b:
                raise GeometryError("polygon has a zero-length edge")
            for j in range(i + 1, n):
                c, d = verts[j], verts[(j + 1) % n]
                if _segments_properly_intersect(a, b, c, d):
                    raise GeometryError("polygon is self-intersecting")
        object.__setattr__(self, "vertices", verts)

    def _edges(self):
        n = len(self.vertices)
        for i in range(n):
            yield self.vertices[i], self.vertices[(i + 1) % n]

    def contains(self, p: Point2) -> bool:
        # Boundary counts as inside; check edges first, then even-odd crossing.
        for a, b in self._edges():
            if point_segment_distance(p, a, b) <= 1e-12:
                return True
        inside = False
        x, y = p
        for a, b in self._edges():
            if (a[1] > y) != (b[1] > y):
                x_cross = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
                if x < x_cross:
                    inside = not inside
        return inside

    def distance(self, p: Point2) -> float:
        if self.contains(p):
            return 0.0
        return min(point_segment_distance(p, a, b) for a, b in self._edges())

    def closest_boundary_point(self, p: Point2) -> Point2:
        best, best_d = None, math.inf
        for a, b in self._edges():
            q = project_point_on_segment(p, a, b)
            d = euclidean_distance(p, q)
            if d < best_d:
                best, best_d = q, d
        return best

    def bounding_box(self) -> tuple[float, float, float, float]:
        xs = [v[0] for v in self.vertices]
        ys = [v[1] for v in self.vertices]
        return (min(xs), min(ys), max(xs), max(ys))

    def contains_batch(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        verts = np.asarray(self.vertices)
        ax, ay = verts[:, 0], verts[:, 1]
        bx, by = np.roll(ax, -1), np.roll(ay, -1)
        px = np.asarray(xs, dtype=float)[..., None]
        py = np.asarray(ys, dtype=float)[..., None]
        # even-odd crossings
        cond = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
        crossings = np.sum(cond & (px < x_cross), axis=-1)
        inside = (crossings % 2) == 1
        # boundary inclusion
        on_edge = self.distance_batch(xs, ys, _skip_contains=True) <= 1e-12
        return inside | on_edge

    def distance_batch(self, xs: np.ndarray, ys: np.ndarray, _skip_contains=False) -> np.ndarray:
        verts = np.asarray(self.vertices)
        ax, ay = verts[:, 0], verts[:, 1]
        ex, ey = np.roll(ax, -1) - ax, np.roll(ay, -1) - ay
        px = np.asarray(xs, dtype=float)[..., None]
        py = np.asarray(ys, dtype=float)[..., None]
        t = ((px - ax) * ex + (py - ay) * ey) / (ex * ex + ey * ey)
        t = np.clip(t, 0.0, 1.0)
        d = np.hypot(px - (ax + t * ex), py - (ay + t * ey)).min(axis=-1)
        if not _skip_contains:
            d = np.where(self.contains_batch(xs, ys), 0.0, d)
        return d

    def area(self) -> float:
        return abs(_signed_area(self.vertices))


Shape = Union[Rectangle, Circle, Polygon]


def contains_point(shape: Shape, p: Point2) -> bool:
    """True iff p lies inside or on the boundary of the shape."""
    return shape.contains(p)


def distance_to_shape(p: Point2, shape: Shape) -> float:
    """0 for contained points, else min distance to the shape boundary."""
    return shape.distance(p)


def project_point_on_segment(p: Point2, a: Point2, b: Point2) -> Point2:
    """Closest point to p on segment ab."""
    abx, aby = b[0] - a[0], b[1] - a[1]
    denom = abx * abx + aby * aby
    if denom == 0.0:
        return a
    t = ((p[0] - a[0]) * abx + (p[1] - a[1]) * aby) / denom
    t = min(1.0, max(0.0, t))
    return Point2(a[0] + t * abx, a[1] + t * aby)


def point_segment_distance(p: Point2, a: Point2, b: Point2) -> float:
    q = project_point_on_segment(p, a, b)
    return math.hypot(p[0] - q[0], p[1] - q[1])


def segment_segment_distance(a: Point2, b: Point2, c: Point2, d: Point2) -> float:
    """Min distance between segments ab and cd; 0 if they intersect."""
    if _segments_properly_intersect(a, b, c, d):
        return 0.0
    return min(
        point_segment_distance(a, c, d),
        point_segment_distance(b, c, d),
        point_segment_distance(c, a, b),
        point_segment_distance(d, a, b),
    )


def segment_shape_distance(a: Point2, b: Point2, shape: Shape) -> float:
    """Min distance from segment ab to the shape (0 if it touches or enters)."""
    if shape.contains(a) or shape.contains(b):
        return 0.0
    if isinstance(shape, Circle):
        return max(0.0, point_segment_distance(shape.center, a, b) - shape.radius)
    if isinstance(shape, Rectangle):
        x0, y0, x1, y1 = shape.bounding_box()
        corners = [Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1)]
        edges = list(zip(corners, corners[1:] + corners[:1]))
    else:
        edges = list(shape._edges())
    best = math.inf
    for c, d in edges:
        best = min(best, segment_segment_distance(a, b, c, d))
        if best == 0.0:
            return 0.0
    return best


def shape_shape_distance(s1: Shape, s2: Shape) -> float:
    """Min gap between two shapes (0 if they touch or overlap)."""
    if isinstance(s1, Circle):
        return max(0.0, s2.distance(s1.center) - s1.radius)
    if isinstance(s2, Circle):
        return max(0.0, s1.distance(s2.center) - s2.radius)
    edges1 = _shape_edges(s1)
    edges2 = _shape_edges(s2)
    if any(s2.contains(a) for a, _ in edges1) or any(s1.contains(a) for a, _ in edges2):
        return 0.0
    best = math.inf
    for a, b in edges1:
        for c, d in edges2:
            best = min(best, segment_segment_distance(a, b, c, d))
            if best == 0.0:
                return 0.0
    return best


def _shape_edges(shape: Shape):
    if isinstance(shape, Rectangle):
        x0, y0, x1, y1 = shape.bounding_box()
        corners = [Point2(x0, y0), Point2(x1, y0), Point2(x1, y1), Point2(x0, y1)]
        return list(zip(corners, corners[1:] + corners[:1]))
    if isinstance(shape, Polygon):
        return list(shape._edges())
    raise TypeError(f"no edges for {type(shape).__name__}")
