"""Pose-informed foreground/background separation.

Body hulls (scaled up) drive inpainting; body cores (scaled down in y) elect
the foreground color clusters; elected clusters produce the colored and
binary output canvases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from . import geometry, imaging
from .errors import DegenerateGeometry, InvalidParameter, NoForegroundEvidence
from .pose import PersonPose

log = logging.getLogger(__name__)

HULL_UP = (1.7, 1.4)
HULL_DOWN = (1.0, 0.7)
FG_THRESHOLD = 0.06


@dataclass
class MaskPair:
    """Inpainting mask (hulls scaled up) and core mask (hulls scaled down)."""

    inpaint_mask: np.ndarray
    core_mask: np.ndarray


@dataclass(frozen=True)
class FgColorSet:
    """Cluster indices elected as foreground.

    `dominant` is the elected index covering the largest share of the core
    mask; `shares` records every cluster's share for reporting.
    """

    elected: tuple[int, ...]
    dominant: int
    shares: tuple[tuple[int, float], ...]

    def share_of(self, cluster: int) -> float:
        return dict(self.shares).get(cluster, 0.0)


def rasterize_convex(polygon: np.ndarray, dims: tuple[int, int]) -> np.ndarray:
    """Fill a convex polygon into a (H, W) {0,1} mask.

    A pixel (ix, iy) is set when the lattice point (ix, iy) lies inside the
    polygon; the polygon is clipped to the image bounds.
    """
    h, w = dims
    mask = np.zeros((h, w), dtype=np.uint8)
    poly = geometry.canonical_order(np.asarray(polygon, dtype=float))
    x0 = max(int(np.floor(poly[:, 0].min())), 0)
    x1 = min(int(np.ceil(poly[:, 0].max())), w - 1)
    y0 = max(int(np.floor(poly[:, 1].min())), 0)
    y1 = min(int(np.ceil(poly[:, 1].max())), h - 1)
    if x0 > x1 or y0 > y1:
        return mask
    xs = np.arange(x0, x1 + 1, dtype=float)
    ys = np.arange(y0, y1 + 1, dtype=float)
    gx, gy = np.meshgrid(xs, ys)
    inside = np.ones(gx.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        ax, ay = poly[i]
        bx, by = poly[(i + 1) % n]
        cross = (bx - ax) * (gy - ay) - (by - ay) * (gx - ax)
        inside &= cross >= -1e-9
    mask[y0 : y1 + 1, x0 : x1 + 1] = inside.astype(np.uint8)
    return mask


def body_masks(
    poses: list[PersonPose],
    dims: tuple[int, int],
    hull_up: tuple[float, float] = HULL_UP,
    hull_down: tuple[float, float] = HULL_DOWN,
    min_confidence: float = 0.0,
) -> MaskPair:
    """Union of per-person keypoint hulls, at two scales about each hull's
    centroid: `hull_up` for the inpainting mask, `hull_down` for the core
    mask. Persons without three non-collinear detected keypoints contribute
    nothing; if nobody qualifies, raises NoForegroundEvidence.
    """
    h, w = dims
    inpaint = np.zeros((h, w), dtype=np.uint8)
    core = np.zeros((h, w), dtype=np.uint8)
    eligible = 0
    for idx, pose in enumerate(poses):
        pts = [kp.position for kp in pose.detected_keypoints(min_confidence)]
        if len(pts) < 3:
            continue
        try:
            hull = geometry.convex_hull(pts)
        except DegenerateGeometry:
            log.debug("person %d: keypoints collinear, no hull", idx)
            continue
        eligible += 1
        _, centroid = geometry.area_centroid(hull)
        up = geometry.scale_polygon(hull, hull_up[0], hull_up[1], centroid)
        down = geometry.scale_polygon(hull, hull_down[0], hull_down[1], centroid)
        np.maximum(inpaint, rasterize_convex(up, dims), out=inpaint)
        np.maximum(core, rasterize_convex(down, dims), out=core)
    if eligible == 0:
        raise NoForegroundEvidence("no person provides 3 non-collinear detected keypoints")
    return MaskPair(inpaint_mask=inpaint, core_mask=core)


def elect_fg_colors(labels: np.ndarray, core_mask: np.ndarray, threshold: float = FG_THRESHOLD) -> FgColorSet:
    """Elect clusters covering more than `threshold` of the core mask.

    The comparison is strict. If nothing clears the threshold the single
    largest-share cluster is elected as a fallback (with a warning); the
    dominant index is the largest share, ties to the lowest cluster index.
    """
    if not 0.0 < threshold < 1.0:
        raise InvalidParameter(f"threshold must lie in (0, 1), got {threshold}")
    mask = imaging.require_mask(core_mask, labels.shape)
    total = int(mask.sum())
    if total == 0:
        raise NoForegroundEvidence("core mask is empty")
    under = labels[mask.astype(bool)]
    counts = np.bincount(under)
    shares = counts.astype(np.float64) / total
    elected = tuple(int(c) for c in np.flatnonzero(shares > threshold))
    dominant = int(np.argmax(shares))  # argmax keeps the lowest index on ties
    if not elected:
        log.warning(
            "no cluster exceeds %.1f%% of the core mask; electing argmax cluster %d",
            100.0 * threshold,
            dominant,
        )
        elected = (dominant,)
    share_items = tuple((int(c), float(shares[c])) for c in range(len(shares)))
    return FgColorSet(elected=elected, dominant=dominant, shares=share_items)


def colored_canvas(
    labels: np.ndarray,
    palette: np.ndarray,
    fg: FgColorSet,
    post_median: int = 5,
) -> np.ndarray:
    """Palette rendering of the labels with every foreground cluster repainted
    in the dominant foreground color, then median-filtered."""
    colors = np.clip(np.rint(np.asarray(palette, dtype=float)), 0, 255).astype(np.uint8)
    render = colors[labels]
    fg_px = np.isin(labels, fg.elected)
    render[fg_px] = colors[fg.dominant]
    return imaging.median_filter(render, post_median)


def binary_canvas(
    labels: np.ndarray,
    fg: FgColorSet,
    close_r: int = 1,
    open_r: int = 2,
) -> np.ndarray:
    """Foreground indicator mask, closed then opened to drop small fragments."""
    raw = np.isin(labels, fg.elected).astype(np.uint8)
    closed = imaging.morphology(raw, "close", close_r)
    return imaging.morphology(closed, "open", open_r)


def election_debug_image(labels: np.ndarray, palette: np.ndarray, fg: FgColorSet) -> np.ndarray:
    """Diagnostic rendering: elected clusters keep their palette color,
    rejected clusters show as blue."""
    colors = np.clip(np.rint(np.asarray(palette, dtype=float)), 0, 255).astype(np.uint8)
    render = colors[labels]
    rejected = ~np.isin(labels, fg.elected)
    render[rejected] = (40, 60, 230)
    return render
