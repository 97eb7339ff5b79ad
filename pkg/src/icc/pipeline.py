"""Full per-image pipeline: pose abstraction and gaze analysis on one
branch, filtering / inpainting / clustering / canvases on the other, merged
into a composition result plus rendered output rasters.
"""

from __future__ import annotations

import logging
import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from . import canvas as canvas_mod
from . import fgbg, gaze, imaging, pose
from .canvas import CompositionResult, RenderStyle
from .config import PipelineConfig
from .errors import (
    CompositionError,
    DegenerateGeometry,
    InpaintUnderconstrained,
    NoForegroundEvidence,
)
from .pose import PersonPose

log = logging.getLogger(__name__)


@contextmanager
def _stage(name: str, passthrough: tuple[type, ...] = ()):
    """Annotate escaping errors with the pipeline stage they came from."""
    try:
        yield
    except passthrough:
        raise
    except CompositionError as exc:
        raise type(exc)(f"[{name}] {exc}") from exc


@dataclass
class PipelineOutput:
    result: CompositionResult
    colored: np.ndarray
    binary: np.ndarray
    debug: dict[str, np.ndarray] = field(default_factory=dict)


def run_pipeline(
    image: np.ndarray,
    poses: list[PersonPose],
    cfg: PipelineConfig | None = None,
    image_id: str = "image",
) -> PipelineOutput:
    cfg = (cfg or PipelineConfig()).validate()
    imaging.require_image(image)
    h, w = image.shape[:2]
    diagonal = math.hypot(w, h)
    notes: list[str] = []
    debug: dict[str, np.ndarray] = {}

    # Branch 1: pose lines, gaze cones, action regions, action lines.
    pose_lines: list[pose.PoseLine] = []
    rays: list[gaze.GazeRay] = []
    for pid, person in enumerate(poses):
        triangle = pose.triangle_corners(person, cfg.min_confidence)
        if triangle is not None:
            try:
                pose_lines.append(pose.pose_line(triangle, person_id=pid))
            except DegenerateGeometry:
                log.warning("person %d: degenerate pose triangle, no pose line", pid)
        try:
            ray = gaze.gaze_vector(person, cfg.gaze_correction, cfg.min_confidence, person_id=pid)
        except DegenerateGeometry:
            log.warning("person %d: degenerate gaze geometry, skipped", pid)
            ray = None
        if ray is not None:
            rays.append(ray)

    with _stage("gaze-analysis"):
        cones = [gaze.build_cone(r, cfg.cone_opening, diagonal, cfg.arc_step) for r in rays]
        regions = gaze.intersect_cones(cones, min_area=1e-4 * w * h)
        if cones and not regions:
            notes.append("gaze cones do not intersect; no action region")
        slope = gaze.aggregate_slope(rays) if rays else None
        lines = gaze.action_lines(regions, slope) if regions and slope is not None else []

    # Branch 2: filtering, body-mask inpainting, clustering, canvases.
    with _stage("filtering"):
        filtered = imaging.bilateral_filter(
            imaging.median_filter(image, cfg.median_kernel),
            cfg.bilateral_diameter,
            cfg.bilateral_sigma_color,
            cfg.bilateral_sigma_space,
        )
    debug["filtered"] = filtered

    fg_set = None
    try:
        with _stage("body-masks", passthrough=(NoForegroundEvidence,)):
            masks = fgbg.body_masks(poses, (h, w), cfg.hull_up, cfg.hull_down, cfg.min_confidence)
        inpaint_mask = masks.inpaint_mask
        if cfg.frame_margin > 0:
            inpaint_mask = _with_frame_band(inpaint_mask, cfg.frame_margin)
        if inpaint_mask.all():
            notes.append("inpainting mask covers the whole image; skipped inpainting")
            inpainted = filtered
        else:
            try:
                with _stage("inpainting", passthrough=(InpaintUnderconstrained,)):
                    inpainted = imaging.inpaint_fmm(filtered, inpaint_mask, cfg.inpaint_radius)
            except InpaintUnderconstrained:
                notes.append("inpainting underconstrained; skipped inpainting")
                inpainted = filtered
        debug["inpainted"] = inpainted
        with _stage("clustering"):
            palette, labels = imaging.kmeans_colors(
                inpainted, cfg.k, cfg.seed, cfg.kmeans_max_iters, cfg.kmeans_tol
            )
        with _stage("foreground-election", passthrough=(NoForegroundEvidence,)):
            fg_set = fgbg.elect_fg_colors(labels, masks.core_mask, cfg.fg_threshold)
        with _stage("canvases"):
            colored = fgbg.colored_canvas(labels, palette, fg_set, cfg.post_median)
            binary = fgbg.binary_canvas(labels, fg_set, cfg.morph_close, cfg.morph_open)
        debug["clustered"] = np.clip(np.rint(palette), 0, 255).astype(np.uint8)[labels]
        debug["fg-election"] = fgbg.election_debug_image(labels, palette, fg_set)
    except NoForegroundEvidence as exc:
        notes.append(f"no foreground evidence: {exc}")
        with _stage("clustering"):
            palette, labels = imaging.kmeans_colors(
                filtered, cfg.k, cfg.seed, cfg.kmeans_max_iters, cfg.kmeans_tol
            )
        colored = imaging.median_filter(
            np.clip(np.rint(palette), 0, 255).astype(np.uint8)[labels], cfg.post_median
        )
        binary = np.zeros((h, w), dtype=np.uint8)
        debug["clustered"] = np.clip(np.rint(palette), 0, 255).astype(np.uint8)[labels]

    result = CompositionResult(
        image_id=image_id,
        image_dims=(w, h),
        pose_lines=pose_lines,
        action_regions=regions,
        action_lines=lines,
        global_slope=slope,
        fg_colors=fg_set,
        parameters=cfg.to_dict(),
        notes=notes,
    )
    rendered = canvas_mod.render_icc(colored, result, RenderStyle())
    return PipelineOutput(result=result, colored=rendered, binary=binary, debug=debug)


def _with_frame_band(mask: np.ndarray, margin: int) -> np.ndarray:
    """Add an image-border band to the inpainting mask (picture frames)."""
    out = mask.copy()
    out[:margin, :] = 1
    out[-margin:, :] = 1
    out[:, :margin] = 1
    out[:, -margin:] = 1
    return out
