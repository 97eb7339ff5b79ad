"""Gaze geometry: per-person gaze rays, gaze cones, their intersections
(action regions), and the aggregated slope that defines action lines.

A person's gaze proxy is anchored at the neck keypoint and passes through
the midpoint of the nose-midhip segment; an optional correction angle
rotates it toward the horizontal.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import DegenerateGeometry, InvalidParameter
from .geometry import Point
from .pose import MID_HIP, NECK, NOSE, PersonPose

log = logging.getLogger(__name__)

DEFAULT_OPENING = 50.0
DEFAULT_ARC_STEP = 5.0


@dataclass(frozen=True)
class GazeRay:
    origin: Point
    direction: float  # direction angle, degrees in (-180, 180]
    person_id: int


@dataclass(frozen=True)
class GazeCone:
    ray: GazeRay
    polygon: np.ndarray = field(compare=False)
    opening: float = DEFAULT_OPENING


@dataclass
class ActionRegion:
    """A connected cluster of pairwise cone intersections."""

    polygons: tuple[np.ndarray, ...]
    centroid: Point
    area: float
    contributing_pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class ActionLine:
    anchor: Point
    slope: float  # degrees in (-90, 90]


def gaze_vector(
    pose: PersonPose,
    correction: float = 0.0,
    min_confidence: float = 0.0,
    person_id: int = 0,
) -> GazeRay | None:
    """Gaze ray of one person, or None when nose, neck or midhip is missing.

    The raw ray runs from the neck through the midpoint of nose and midhip.
    A positive correction rotates it toward the horizontal: the applied
    rotation is correction * -sign(dy) * sign(dx), which mirrors correctly
    for left/right and up/down facing bodies.
    """
    nose = pose.keypoint(NOSE)
    neck = pose.keypoint(NECK)
    hip = pose.keypoint(MID_HIP)
    if not (nose.detected(min_confidence) and neck.detected(min_confidence) and hip.detected(min_confidence)):
        return None
    mid = (0.5 * (nose.x + hip.x), 0.5 * (nose.y + hip.y))
    dx, dy = mid[0] - neck.x, mid[1] - neck.y
    if dx == 0.0 and dy == 0.0:
        raise DegenerateGeometry("neck coincides with the nose-midhip midpoint")
    direction = geometry.angle_of((dx, dy))
    if correction != 0.0:
        sense = -float(np.sign(dy)) * float(np.sign(dx))
        direction = _wrap_direction(direction + correction * sense)
    return GazeRay(origin=neck.position, direction=direction, person_id=person_id)


def _wrap_direction(deg: float) -> float:
    wrapped = math.fmod(deg + 180.0, 360.0)
    if wrapped <= 0.0:
        wrapped += 360.0
    return wrapped - 180.0


def build_cone(
    ray: GazeRay,
    opening: float = DEFAULT_OPENING,
    radius: float = 1000.0,
    arc_step: float = DEFAULT_ARC_STEP,
) -> GazeCone:
    """Sector polygon of `opening` degrees around the ray, apex at its origin."""
    if not 0.0 < opening < 180.0:
        raise InvalidParameter(f"cone opening must lie in (0, 180), got {opening}")
    half = opening / 2.0
    polygon = geometry.sector_polygon(
        ray.origin, ray.direction, half, radius, min(arc_step, half)
    )
    return GazeCone(ray=ray, polygon=polygon, opening=opening)


def intersect_cones(cones: list[GazeCone], min_area: float = 0.0) -> list[ActionRegion]:
    """Cluster pairwise cone intersections into action regions.

    Pairs belonging to the same person are ignored. Intersection polygons
    that mutually overlap are merged into one region whose centroid is the
    area-weighted centroid of its members. Regions come back sorted by
    centroid (x, then y); an empty list means no cones intersect.
    """
    if len(cones) < 2:
        return []
    pieces: list[tuple[np.ndarray, float, Point, tuple[int, int]]] = []
    for i in range(len(cones)):
        for j in range(i + 1, len(cones)):
            if cones[i].ray.person_id == cones[j].ray.person_id:
                continue
            poly = geometry.clip_convex(cones[i].polygon, cones[j].polygon)
            if poly is None:
                continue
            area, centroid = geometry.area_centroid(poly)
            if area < min_area:
                log.debug("dropping sliver intersection of area %.3g", area)
                continue
            pieces.append((poly, area, centroid, (cones[i].ray.person_id, cones[j].ray.person_id)))

    if not pieces:
        return []

    # Connected components under the "polygons overlap" relation.
    parent = list(range(len(pieces)))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for m in range(len(pieces)):
        for n in range(m + 1, len(pieces)):
            if find(m) == find(n):
                continue
            if geometry.clip_convex(pieces[m][0], pieces[n][0]) is not None:
                parent[find(n)] = find(m)

    groups: dict[int, list[int]] = {}
    for idx in range(len(pieces)):
        groups.setdefault(find(idx), []).append(idx)

    regions = []
    for members in groups.values():
        total = sum(pieces[m][1] for m in members)
        cx = sum(pieces[m][1] * pieces[m][2][0] for m in members) / total
        cy = sum(pieces[m][1] * pieces[m][2][1] for m in members) / total
        pairs = sorted({pieces[m][3] for m in members})
        regions.append(
            ActionRegion(
                polygons=tuple(pieces[m][0] for m in members),
                centroid=(cx, cy),
                area=total,
                contributing_pairs=tuple(pairs),
            )
        )
    regions.sort(key=lambda r: r.centroid)
    return regions


def aggregate_slope(rays: list[GazeRay]) -> float:
    """Mean slope of all gaze rays, in (-90, 90] degrees.

    Directions are first folded into the half plane so that a ray and its
    180-degree flip contribute identically.
    """
    if not rays:
        raise InvalidParameter("cannot aggregate an empty set of gaze rays")
    slopes = [geometry.map_to_half_plane(r.direction) for r in rays]
    spread = max(slopes) - min(slopes)
    if spread > 90.0:
        log.warning(
            "gaze slopes span %.1f degrees; the mean slope is ambiguous near the +-90 wraparound",
            spread,
        )
    return geometry.map_to_half_plane(sum(slopes) / len(slopes))


def action_lines(regions: list[ActionRegion], slope: float) -> list[ActionLine]:
    """One action line per region: anchored at its centroid, shared slope."""
    return [ActionLine(anchor=r.centroid, slope=slope) for r in regions]
