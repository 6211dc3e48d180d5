"""Behavior specifier: polygons, uniform formation fill, vertex-count
matching, and the translation of an operator intention into a swarm goal.

Rotation convention used package-wide: R(theta) rotates counter-clockwise
and row-vector formations rotate as z @ R(theta).T, so an agent's world
position is c + s * z_i @ R(theta).T.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInput, InvalidShape, ShapeTooThin

_GRID_SIDE_CAP = 512


def rotation_matrix(theta: float) -> np.ndarray:
    """Counter-clockwise rotation by ``theta`` radians."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def wrap_angle(theta: float) -> float:
    """Normalize an angle to (-pi, pi]."""
    wrapped = math.fmod(theta + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi


def place_formation(z: np.ndarray, s: float, theta: float, c) -> np.ndarray:
    """World positions of a centered formation under scale/rotation/centroid."""
    c = np.asarray(c, dtype=float)
    return c[None, :] + s * z @ rotation_matrix(theta).T


def _signed_area(vertices: np.ndarray) -> float:
    x, y = vertices[:, 0], vertices[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_intersect(p1, p2, p3, p4, eps: float) -> bool:
    """True if open segments p1p2 and p3p4 properly cross or overlap."""
    d1 = _orient(p3, p4, p1)
    d2 = _orient(p3, p4, p2)
    d3 = _orient(p1, p2, p3)
    d4 = _orient(p1, p2, p4)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and (
        (d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)
    ):
        return True
    # collinear overlap check
    for d, a in ((d1, p1), (d2, p2)):
        if abs(d) <= eps and _on_segment(p3, p4, a, eps):
            return True
    for d, a in ((d3, p3), (d4, p4)):
        if abs(d) <= eps and _on_segment(p1, p2, a, eps):
            return True
    return False


def _on_segment(a, b, p, eps: float) -> bool:
    return (
        min(a[0], b[0]) - eps <= p[0] <= max(a[0], b[0]) + eps
        and min(a[1], b[1]) - eps <= p[1] <= max(a[1], b[1]) + eps
    )


def polyline_self_intersects(points: np.ndarray, closed: bool = True) -> bool:
    """Check a vertex chain for self-intersection among non-adjacent edges."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 3:
        return False
    scale = float(np.abs(pts).max()) or 1.0
    eps = 1e-12 * scale * scale
    m = n if closed else n - 1
    edges = [(pts[i], pts[(i + 1) % n]) for i in range(m)]
    for i in range(len(edges)):
        for j in range(i + 1, len(edges)):
            if j == i + 1 or (closed and i == 0 and j == len(edges) - 1):
                continue  # adjacent edges share an endpoint
            if _segments_intersect(*edges[i], *edges[j], eps):
                return True
    return False


class Polygon:
    """A simple polygon with positive area, normalized counter-clockwise."""

    __slots__ = ("vertices",)

    def __init__(self, vertices):
        verts = np.asarray(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or verts.shape[0] < 3:
            raise InvalidShape(
                f"polygon needs at least 3 two-dimensional vertices, got shape {verts.shape}"
            )
        if not np.all(np.isfinite(verts)):
            raise InvalidShape("polygon vertices contain non-finite entries")
        gaps = np.linalg.norm(np.roll(verts, -1, axis=0) - verts, axis=1)
        scale = float(np.abs(verts).max()) or 1.0
        if np.any(gaps <= 1e-12 * scale):
            raise InvalidShape("polygon has coincident consecutive vertices")
        area = _signed_area(verts)
        if abs(area) <= 1e-12 * scale * scale:
            raise InvalidShape("polygon is degenerate (zero area)")
        if area < 0.0:
            # reverse orientation but keep the drawn starting vertex first
            verts = np.roll(verts[::-1], 1, axis=0).copy()
        if polyline_self_intersects(verts, closed=True):
            raise InvalidShape("polygon is self-intersecting")
        self.vertices = verts

    @property
    def n_vertices(self) -> int:
        return int(self.vertices.shape[0])

    def __repr__(self) -> str:
        return f"Polygon({self.n_vertices} vertices)"


@dataclass(frozen=True)
class PolygonMetrics:
    area: float
    centroid: np.ndarray


@dataclass(frozen=True)
class Formation:
    """Centroid-centered relative agent positions filling a polygon.

    ``source_polygon`` is expressed in the same centered frame as ``z``.
    """

    z: np.ndarray
    density: float
    source_polygon: Polygon

    @property
    def n_agents(self) -> int:
        return int(self.z.shape[0])


@dataclass(frozen=True)
class Intention:
    """Operator-side goal: shape, scaling, rotation and centroid."""

    shape: Polygon
    s: float
    theta: float
    c: np.ndarray

    def __post_init__(self):
        if not (np.isfinite(self.s) and self.s > 0):
            raise InvalidInput(f"scaling must be positive, got {self.s}")
        object.__setattr__(self, "theta", wrap_angle(float(self.theta)))
        c = np.asarray(self.c, dtype=float).reshape(2)
        if not np.all(np.isfinite(c)):
            raise InvalidInput("centroid must be finite")
        object.__setattr__(self, "c", c)


@dataclass(frozen=True)
class BehaviorGoal:
    """Swarm-side translation of an intention."""

    formation: Formation
    s: float
    theta: float
    c: np.ndarray


def polygon_metrics(polygon: Polygon) -> PolygonMetrics:
    """Shoelace area and area-weighted centroid."""
    v = polygon.vertices
    x, y = v[:, 0], v[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    area = 0.5 * float(cross.sum())
    cx = float(((x + xn) * cross).sum()) / (6.0 * area)
    cy = float(((y + yn) * cross).sum()) / (6.0 * area)
    return PolygonMetrics(area=area, centroid=np.array([cx, cy]))


def point_in_polygon(point, vertices: np.ndarray, include_boundary: bool = True) -> bool:
    """Crossing-number test; boundary points resolve per ``include_boundary``."""
    px, py = float(point[0]), float(point[1])
    v = np.asarray(vertices, dtype=float)
    scale = float(np.abs(v).max()) or 1.0
    eps = 1e-12 * scale
    inside = False
    n = len(v)
    for i in range(n):
        ax, ay = v[i]
        bx, by = v[(i + 1) % n]
        if (
            min(ax, bx) - eps <= px <= max(ax, bx) + eps
            and min(ay, by) - eps <= py <= max(ay, by) + eps
            and abs((bx - ax) * (py - ay) - (by - ay) * (px - ax)) <= eps * (abs(bx - ax) + abs(by - ay) + eps)
        ):
            return include_boundary
        if (ay > py) != (by > py):
            x_cross = ax + (py - ay) * (bx - ax) / (by - ay)
            if px < x_cross:
                inside = not inside
    return inside


def _points_strictly_inside(points: np.ndarray, vertices: np.ndarray) -> np.ndarray:
    return np.array(
        [point_in_polygon(p, vertices, include_boundary=False) for p in points],
        dtype=bool,
    )


def fill_polygon_uniform(polygon: Polygon, m: int) -> Formation:
    """Fill a polygon with exactly ``m`` grid points, recentered to (0, 0).

    The grid covers the bounding box, anchored half a cell off the lower-left
    corner; the side count starts at the smallest square holding m points at
    uniform density and grows until at least m points land strictly inside.
    When more than m qualify, the m closest to the polygon centroid are kept
    (ties broken lexicographically by (y, x)).
    """
    if m < 1:
        raise InvalidInput(f"agent count must be >= 1, got {m}")
    metrics = polygon_metrics(polygon)
    v = polygon.vertices
    xmin, ymin = v.min(axis=0)
    xmax, ymax = v.max(axis=0)
    box_area = (xmax - xmin) * (ymax - ymin)
    side = max(1, math.ceil(math.sqrt(m * box_area / metrics.area)))

    while side <= _GRID_SIDE_CAP:
        hx = (xmax - xmin) / side
        hy = (ymax - ymin) / side
        xs = xmin + (np.arange(side) + 0.5) * hx
        ys = ymin + (np.arange(side) + 0.5) * hy
        gx, gy = np.meshgrid(xs, ys)
        candidates = np.column_stack([gx.ravel(), gy.ravel()])
        keep = _points_strictly_inside(candidates, v)
        if keep.sum() >= m:
            points = candidates[keep]
            dists = np.linalg.norm(points - metrics.centroid, axis=1)
            order = np.lexsort((points[:, 0], points[:, 1], dists))
            points = points[order[:m]]
            center = points.mean(axis=0)
            return Formation(
                z=points - center,
                density=m / metrics.area,
                source_polygon=Polygon(v - center),
            )
        side += 1
    raise ShapeTooThin(
        f"could not place {m} interior points before the {_GRID_SIDE_CAP}-cell grid cap"
    )


def match_vertex_counts(shape_a: Polygon, shape_b: Polygon) -> tuple[Polygon, Polygon]:
    """Equalize vertex counts by splitting the longest edges at midpoints.

    The boundary point set is unchanged; ties pick the lowest edge index.
    """
    target = max(shape_a.n_vertices, shape_b.n_vertices)
    return _split_to(shape_a, target), _split_to(shape_b, target)


def _split_to(polygon: Polygon, target: int) -> Polygon:
    verts = [tuple(p) for p in polygon.vertices]
    while len(verts) < target:
        lengths = [
            math.dist(verts[i], verts[(i + 1) % len(verts)]) for i in range(len(verts))
        ]
        i = int(np.argmax(lengths))
        a, b = verts[i], verts[(i + 1) % len(verts)]
        verts.insert(i + 1, ((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0))
    return Polygon(np.array(verts))


def intention_to_goal(intention: Intention, m: int) -> BehaviorGoal:
    """Realize an intention as a filled formation plus pose parameters."""
    formation = fill_polygon_uniform(intention.shape, m)
    return BehaviorGoal(
        formation=formation, s=intention.s, theta=intention.theta, c=intention.c.copy()
    )
