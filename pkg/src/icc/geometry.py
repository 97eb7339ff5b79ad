"""Self-contained 2D geometry kernel used by every other module.

Coordinates follow the raster convention: x grows to the right, y grows
downward. Angles are measured in degrees from the +x axis with atan2
semantics in that frame, so +90 deg points straight down the image.

Convex polygons are (N, 2) float arrays whose vertices carry a positive
shoelace sign (counter-clockwise when the y axis is drawn downward, which
is how every function here emits them).
"""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateGeometry, InvalidParameter

Point = tuple[float, float]

# Cross products below this fraction of the squared bbox diagonal are
# treated as collinear.
COLLINEAR_REL_TOL = 1e-9


def _as_points(pts: Iterable[Sequence[float]]) -> np.ndarray:
    arr = np.asarray(list(pts) if not isinstance(pts, np.ndarray) else pts, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidParameter(f"expected an (N, 2) point array, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise DegenerateGeometry("points contain NaN or infinite coordinates")
    return arr


def _bbox_diag_sq(pts: np.ndarray) -> float:
    span = pts.max(axis=0) - pts.min(axis=0)
    return float(span[0] ** 2 + span[1] ** 2)


def angle_of(v: Sequence[float]) -> float:
    """Direction angle of a displacement vector, in (-180, 180] degrees."""
    dx, dy = float(v[0]), float(v[1])
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("direction of a zero vector is undefined")
    deg = math.degrees(math.atan2(dy, dx))
    if deg <= -180.0:
        deg += 360.0
    return deg


def map_to_half_plane(direction: float) -> float:
    """Reduce a direction angle to its slope angle in (-90, 90] degrees.

    A direction and its 180-degree flip describe the same line, so both map
    to the same value.
    """
    r = math.fmod(direction, 180.0)
    if r > 90.0:
        r -= 180.0
    elif r <= -90.0:
        r += 180.0
    return r + 0.0 if r != 0.0 else 0.0


def signed_area(polygon: np.ndarray) -> float:
    """Shoelace area; positive for the canonical vertex order."""
    p = np.asarray(polygon, dtype=float)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def canonical_order(polygon: np.ndarray) -> np.ndarray:
    return polygon if signed_area(polygon) >= 0.0 else polygon[::-1].copy()


def _cross(o: np.ndarray, a: np.ndarray, b: np.ndarray) -> float:
    return float((a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]))


def convex_hull(points: Iterable[Sequence[float]]) -> np.ndarray:
    """Minimal convex polygon containing the input points (monotone chain).

    Raises DegenerateGeometry for fewer than three distinct points or an
    all-collinear set.
    """
    pts = _as_points(points)
    uniq = sorted({(float(x), float(y)) for x, y in pts})
    if len(uniq) < 3:
        raise DegenerateGeometry("convex hull needs at least 3 distinct points")
    arr = np.asarray(uniq, dtype=float)
    eps = COLLINEAR_REL_TOL * max(_bbox_diag_sq(arr), 1.0)

    def half(chain_pts):
        chain: list[np.ndarray] = []
        for p in chain_pts:
            while len(chain) >= 2 and _cross(chain[-2], chain[-1], p) <= eps:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(arr)
    upper = half(arr[::-1])
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateGeometry("points are collinear")
    return np.asarray(hull, dtype=float)


def scale_polygon(polygon: np.ndarray, sx: float, sy: float, center: Sequence[float]) -> np.ndarray:
    """Scale a polygon about an anchor point, per axis."""
    if sx <= 0.0 or sy <= 0.0:
        raise InvalidParameter(f"scale factors must be positive, got ({sx}, {sy})")
    p = _as_points(polygon)
    c = np.asarray(center, dtype=float)
    return c + (p - c) * np.asarray([sx, sy], dtype=float)


def area_centroid(polygon: np.ndarray) -> tuple[float, Point]:
    """Positive shoelace area and area-weighted centroid of a polygon."""
    p = _as_points(polygon)
    if len(p) < 3:
        raise DegenerateGeometry("polygon needs at least 3 vertices")
    x, y = p[:, 0], p[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    a = 0.5 * float(cross.sum())
    if abs(a) <= COLLINEAR_REL_TOL * max(_bbox_diag_sq(p), 1.0):
        raise DegenerateGeometry("polygon has (near) zero area")
    cx = float(((x + xn) * cross).sum() / (6.0 * a))
    cy = float(((y + yn) * cross).sum() / (6.0 * a))
    return abs(a), (cx, cy)


def clip_convex(subject: np.ndarray, clip: np.ndarray) -> np.ndarray | None:
    """Intersection of two convex polygons, or None when it is empty.

    Sutherland-Hodgman clipping of `subject` against every edge of `clip`.
    """
    subj = canonical_order(_as_points(subject))
    clp = canonical_order(_as_points(clip))
    scale_sq = max(_bbox_diag_sq(subj), _bbox_diag_sq(clp), 1.0)
    eps = COLLINEAR_REL_TOL * scale_sq

    output = [v for v in subj]
    n = len(clp)
    for i in range(n):
        a, b = clp[i], clp[(i + 1) % n]
        if not output:
            return None
        inputs = output
        output = []
        edge = b - a

        def side(p):
            return edge[0] * (p[1] - a[1]) - edge[1] * (p[0] - a[0])

        prev = inputs[-1]
        prev_side = side(prev)
        for cur in inputs:
            cur_side = side(cur)
            if cur_side >= -eps:
                if prev_side < -eps:
                    output.append(_edge_intersection(prev, cur, a, b))
                output.append(cur)
            elif prev_side >= -eps:
                output.append(_edge_intersection(prev, cur, a, b))
            prev, prev_side = cur, cur_side

    if len(output) < 3:
        return None
    poly = _dedupe_ring(np.asarray(output, dtype=float), math.sqrt(scale_sq))
    if poly is None or len(poly) < 3:
        return None
    if abs(signed_area(poly)) <= eps:
        return None
    return canonical_order(poly)


def _edge_intersection(p: np.ndarray, q: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d1 = q - p
    d2 = b - a
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if denom == 0.0:
        return q.copy()
    t = ((a[0] - p[0]) * d2[1] - (a[1] - p[1]) * d2[0]) / denom
    return p + t * d1


def _dedupe_ring(poly: np.ndarray, scale: float) -> np.ndarray | None:
    tol = 1e-9 * max(scale, 1.0)
    kept: list[np.ndarray] = []
    for v in poly:
        if not kept or np.hypot(*(v - kept[-1])) > tol:
            kept.append(v)
    if len(kept) >= 2 and np.hypot(*(kept[0] - kept[-1])) <= tol:
        kept.pop()
    if len(kept) < 3:
        return None
    return np.asarray(kept, dtype=float)


def sector_polygon(
    apex: Sequence[float],
    axis: float,
    half_angle: float,
    radius: float,
    arc_step: float,
) -> np.ndarray:
    """Inscribed polygon of the circular sector apex +- half_angle around axis.

    The arc [axis - half_angle, axis + half_angle] is split into
    ceil(2 * half_angle / arc_step) equal pieces, so both extreme rays are
    vertices and the effective step never exceeds arc_step. Refining
    arc_step therefore never loses area.
    """
    if not 0.0 < half_angle < 90.0:
        raise InvalidParameter(f"half_angle must lie in (0, 90), got {half_angle}")
    if radius <= 0.0:
        raise InvalidParameter(f"radius must be positive, got {radius}")
    if not 0.0 < arc_step <= half_angle:
        raise InvalidParameter(f"arc_step must lie in (0, half_angle], got {arc_step}")
    ax, ay = float(apex[0]), float(apex[1])
    n = math.ceil(2.0 * half_angle / arc_step)
    offsets = np.linspace(-half_angle, half_angle, n + 1)
    ang = np.radians(axis + offsets)
    xs = ax + radius * np.cos(ang)
    ys = ay + radius * np.sin(ang)
    verts = np.concatenate([[[ax, ay]], np.stack([xs, ys], axis=1)])
    return canonical_order(verts)


def point_in_convex(polygon: np.ndarray, point: Sequence[float], tol: float = 1e-9) -> bool:
    """True when the point lies inside or on the polygon boundary."""
    poly = canonical_order(_as_points(polygon))
    p = np.asarray(point, dtype=float)
    eps = tol * max(math.sqrt(_bbox_diag_sq(poly)), 1.0)
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        if _cross(a, b, p) < -eps:
            return False
    return True


def hausdorff(a: Iterable[Sequence[float]], b: Iterable[Sequence[float]]) -> float:
    """Symmetric Hausdorff distance between two finite point sets."""
    pa, pb = _as_points(a), _as_points(b)
    if len(pa) == 0 or len(pb) == 0:
        raise InvalidParameter("Hausdorff distance needs two non-empty point sets")
    d = np.sqrt(((pa[:, None, :] - pb[None, :, :]) ** 2).sum(axis=2))
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def sample_segment(a: Sequence[float], b: Sequence[float], spacing: float) -> np.ndarray:
    """Points along the segment a-b at parameter steps of `spacing` px,
    endpoints always included."""
    if spacing <= 0.0:
        raise InvalidParameter(f"spacing must be positive, got {spacing}")
    pa = np.asarray(a, dtype=float)
    pb = np.asarray(b, dtype=float)
    length = float(np.hypot(*(pb - pa)))
    if length == 0.0:
        raise DegenerateGeometry("cannot sample a zero-length segment")
    ts = np.arange(0.0, length, spacing) / length
    pts = pa + ts[:, None] * (pb - pa)
    return np.concatenate([pts, [pb]])
