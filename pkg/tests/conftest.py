"""Shared builders: synthetic people, scenes, and images."""

from __future__ import annotations

import math

import numpy as np
import pytest

from icc.pose import Keypoint, PersonPose


def make_person(entries: dict[int, tuple[float, float, float]]) -> PersonPose:
    """PersonPose with the given {index: (x, y, confidence)} entries and
    zeroed keypoints everywhere else."""
    kps = []
    for i in range(25):
        x, y, c = entries.get(i, (0.0, 0.0, 0.0))
        kps.append(Keypoint(x, y, c, i))
    return PersonPose(tuple(kps))


def gazing_person(
    neck: tuple[float, float],
    toward: tuple[float, float],
    body_half: float = 60.0,
    confidence: float = 0.9,
) -> PersonPose:
    """Minimal person whose gaze ray points exactly from `neck` at `toward`.

    The nose/midhip pair is placed so their midpoint sits 30 px from the
    neck along that direction; legs land below the hip so pose triangles
    work too.
    """
    nx, ny = neck
    d = math.hypot(toward[0] - nx, toward[1] - ny)
    ux, uy = (toward[0] - nx) / d, (toward[1] - ny) / d
    mx, my = nx + 30.0 * ux, ny + 30.0 * uy
    nose = (mx, my - body_half)
    hip = (mx, my + body_half)
    return make_person(
        {
            0: (nose[0], nose[1], confidence),
            1: (nx, ny, confidence),
            8: (hip[0], hip[1], confidence),
            11: (hip[0] - 15.0, hip[1] + 70.0, confidence),
            14: (hip[0] + 15.0, hip[1] + 70.0, confidence),
        }
    )


def stick_figure(
    cx: float,
    head_y: float,
    hip_y: float,
    lean: float = 0.0,
    neck_y: float | None = None,
    confidence: float = 0.9,
) -> PersonPose:
    """Upright figure at column cx; positive `lean` shifts the nose to the
    right, which tilts the gaze that way."""
    if neck_y is None:
        neck_y = head_y + 0.25 * (hip_y - head_y)
    foot_y = hip_y + 0.55 * (hip_y - head_y)
    return make_person(
        {
            0: (cx + lean, head_y, confidence + 0.05),
            1: (cx, neck_y, confidence),
            2: (cx - 14.0, neck_y + 4.0, confidence - 0.1),
            5: (cx + 14.0, neck_y + 4.0, confidence - 0.1),
            8: (cx, hip_y, confidence),
            9: (cx - 10.0, hip_y + 2.0, confidence - 0.2),
            10: (cx - 12.0, (hip_y + foot_y) / 2.0, confidence - 0.1),
            11: (cx - 14.0, foot_y, confidence),
            12: (cx + 10.0, hip_y + 2.0, confidence - 0.2),
            13: (cx + 12.0, (hip_y + foot_y) / 2.0, confidence - 0.1),
            14: (cx + 14.0, foot_y, confidence),
        }
    )


def two_figure_scene(width: int = 400, height: int = 300):
    """Two figures at x = 0.25 and 0.75 of the width, level heads, facing
    inward with a nearly horizontal gaze. Returns (image, poses)."""
    lx, rx = 0.25 * width, 0.75 * width
    head_y, hip_y = 0.30 * height, 0.70 * height
    neck_y = 0.49 * height  # just above the nose/hip midpoint: gaze ~horizontal
    left = stick_figure(lx, head_y, hip_y, lean=30.0, neck_y=neck_y)
    right = stick_figure(rx, head_y, hip_y, lean=-30.0, neck_y=neck_y)
    image = paint_scene(width, height, [lx, rx], head_y, hip_y)
    return image, [left, right]


def paint_scene(width: int, height: int, columns: list[float], head_y: float, hip_y: float) -> np.ndarray:
    """Flat two-band background with one solid 'body' blob per column."""
    img = np.zeros((height, width, 3), dtype=np.uint8)
    horizon = int(0.62 * height)
    img[:horizon] = (96, 130, 180)
    img[horizon:] = (150, 120, 70)
    for i, cx in enumerate(columns):
        x0 = max(int(cx - 0.05 * width), 0)
        x1 = min(int(cx + 0.05 * width), width - 1)
        y0 = max(int(head_y - 0.03 * height), 0)
        y1 = min(int(hip_y + 0.12 * height), height - 1)
        color = [(200, 60, 50), (60, 170, 90), (210, 190, 60), (140, 70, 160)][i % 4]
        img[y0 : y1 + 1, x0 : x1 + 1] = color
    return img


def focus_scene(rng: np.random.Generator, width: int = 400, height: int = 300):
    """2-4 people spread on a loose row, all gazing at a shared focus point
    near the middle of the group. Returns (poses, focus). Neighbors may end
    up close together with near-parallel gazes."""
    n = int(rng.integers(2, 5))
    xs = np.sort(rng.uniform(0.12 * width, 0.88 * width, size=n))
    ys = rng.uniform(0.38 * height, 0.52 * height, size=n)
    focus = (float(xs.mean() + rng.uniform(-0.04, 0.04) * width),
             float(ys.mean() + rng.uniform(0.0, 0.1) * height))
    poses = []
    for x, y in zip(xs, ys):
        if math.hypot(focus[0] - x, focus[1] - y) < 1.0:
            continue
        poses.append(gazing_person((float(x), float(y)), focus, body_half=0.2 * height))
    return poses, focus


def convergent_scene(rng: np.random.Generator, width: int = 400, height: int = 300):
    """2-4 people surrounding a focus point with clearly convergent gazes:
    viewing directions at least ~60 degrees apart. Returns (poses, focus)."""
    n = int(rng.integers(2, 5))
    focus = (
        float(rng.uniform(0.4, 0.6) * width),
        float(rng.uniform(0.4, 0.6) * height),
    )
    base = rng.uniform(0.0, 360.0)
    gap = 360.0 / n
    poses = []
    for i in range(n):
        theta = math.radians(base + i * gap + float(rng.uniform(-0.2, 0.2) * gap))
        dist = float(rng.uniform(0.3, 0.45)) * min(width, height)
        neck = (focus[0] + dist * math.cos(theta), focus[1] + dist * math.sin(theta))
        poses.append(gazing_person(neck, focus, body_half=0.2 * height))
    return poses, focus


def annotations_from_result(result, n_experts: int = 2, n_nonexperts: int = 2):
    """Annotation set echoing a composition result exactly: every annotator
    marks the predicted AR centroids and clipped action lines."""
    from icc.canvas import clip_line_to_rect
    from icc.metrics import AnnotationSet, AnnotatorLabels

    w, h = result.image_dims
    ar_points = [(r.centroid[0] / w, r.centroid[1] / h) for r in result.action_regions]
    lines = []
    for al in result.action_lines:
        seg = clip_line_to_rect(al.anchor, al.slope, w, h)
        if seg is not None:
            lines.append(((seg[0][0] / w, seg[0][1] / h), (seg[1][0] / w, seg[1][1] / h)))
    pose_lines = [
        ((pl.a[0] / w, pl.a[1] / h), (pl.b[0] / w, pl.b[1] / h)) for pl in result.pose_lines
    ]
    annotators = []
    for i in range(n_experts + n_nonexperts):
        annotators.append(
            AnnotatorLabels(
                annotator_id=f"a{i}",
                expert=i < n_experts,
                action_regions=list(ar_points),
                action_lines=list(lines),
                pose_lines=list(pose_lines),
            )
        )
    return AnnotationSet(image_id=result.image_id, annotators=annotators)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
