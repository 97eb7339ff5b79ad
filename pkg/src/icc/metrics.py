"""Annotation agreement metrics: action-region dispersion and centroid
distances in unit-square coordinates, line distances (Hausdorff) and axial
angular deviation in pixel coordinates.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from statistics import fmean

import numpy as np

from . import geometry
from .canvas import CompositionResult, clip_line_to_rect
from .errors import DegenerateGeometry, InvalidParameter, ParseError, SchemaError
from .geometry import Point

Segment = tuple[Point, Point]


@dataclass
class AnnotatorLabels:
    annotator_id: str
    expert: bool
    action_regions: list[Point] = field(default_factory=list)
    action_lines: list[Segment] = field(default_factory=list)
    pose_lines: list[Segment] = field(default_factory=list)


@dataclass
class AnnotationSet:
    image_id: str
    annotators: list[AnnotatorLabels]


@dataclass
class MetricsReport:
    """One row of agreement metrics; None marks metrics whose group or
    arity requirement is not met (absent, not zero)."""

    sd_ar_expert: float | None = None
    sd_ar_nonexpert: float | None = None
    l2_e_icc: float | None = None
    l2_ne_icc: float | None = None
    l2_e_ne: float | None = None
    hd_all_icc: float | None = None
    ad_all_icc: float | None = None


def parse_annotations(data: bytes | str) -> AnnotationSet:
    """Parse an annotation file (normalized unit-square coordinates)."""
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"annotation file is not valid JSON: {exc}") from exc

    def point(obj, where):
        try:
            x, y = float(obj[0]), float(obj[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise SchemaError(f"{where}: not a coordinate pair") from exc
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise SchemaError(f"{where}: coordinates must be normalized to [0, 1]")
        return (x, y)

    def segment(obj, where):
        if not isinstance(obj, (list, tuple)) or len(obj) != 2:
            raise SchemaError(f"{where}: a line needs exactly two endpoints")
        return (point(obj[0], where), point(obj[1], where))

    if not isinstance(doc, dict) or "image_id" not in doc or not isinstance(doc.get("annotators"), list):
        raise SchemaError('annotation file needs "image_id" and an "annotators" array')
    annotators = []
    for i, raw in enumerate(doc["annotators"]):
        where = f"annotators[{i}]"
        if not isinstance(raw, dict) or "expert" not in raw:
            raise SchemaError(f"{where}: every annotator needs an explicit expert flag")
        annotators.append(
            AnnotatorLabels(
                annotator_id=str(raw.get("annotator_id", f"annotator-{i}")),
                expert=bool(raw["expert"]),
                action_regions=[point(p, where) for p in raw.get("action_regions", [])],
                action_lines=[segment(s, where) for s in raw.get("action_lines", [])],
                pose_lines=[segment(s, where) for s in raw.get("pose_lines", [])],
            )
        )
    return AnnotationSet(image_id=str(doc["image_id"]), annotators=annotators)


def normalize_points(points: list[Point], dims: tuple[int, int]) -> list[Point]:
    """Map pixel coordinates into the unit square: (x / width, y / height)."""
    w, h = dims
    if w <= 0 or h <= 0:
        raise InvalidParameter(f"image dims must be positive, got {dims}")
    return [(x / w, y / h) for x, y in points]


def denormalize_points(points: list[Point], dims: tuple[int, int]) -> list[Point]:
    w, h = dims
    if w <= 0 or h <= 0:
        raise InvalidParameter(f"image dims must be positive, got {dims}")
    return [(x * w, y * h) for x, y in points]


def sd_ar(points: list[Point]) -> float:
    """Dispersion of action-region points: sqrt of summed per-axis
    population variances."""
    if len(points) < 2:
        raise InvalidParameter("dispersion needs at least 2 points")
    arr = np.asarray(points, dtype=float)
    return float(math.sqrt(arr[:, 0].var() + arr[:, 1].var()))


def l2_between_centroids(group_a: list[Point], group_b: list[Point]) -> float:
    """Euclidean distance between the means of two point groups."""
    if not group_a or not group_b:
        raise InvalidParameter("both groups must be non-empty")
    ca = np.asarray(group_a, dtype=float).mean(axis=0)
    cb = np.asarray(group_b, dtype=float).mean(axis=0)
    return float(np.hypot(*(ca - cb)))


def hd_lines(line_a: Segment, line_b: Segment, spacing: float = 1.0) -> float:
    """Hausdorff distance between two segments viewed as point sets sampled
    every `spacing` px."""
    pa = geometry.sample_segment(line_a[0], line_a[1], spacing)
    pb = geometry.sample_segment(line_b[0], line_b[1], spacing)
    return geometry.hausdorff(pa, pb)


def angular_deviation(line_a: Segment, line_b: Segment) -> float:
    """Axial angle between two line directions, arccos|u.v| in [0, 90] deg.

    Evaluated as atan2(|cross|, |dot|) so parallel and perpendicular pairs
    come out exactly 0 and 90.
    """
    va = np.asarray(line_a[1], dtype=float) - np.asarray(line_a[0], dtype=float)
    vb = np.asarray(line_b[1], dtype=float) - np.asarray(line_b[0], dtype=float)
    if (va == 0.0).all() or (vb == 0.0).all():
        raise DegenerateGeometry("angular deviation of a zero-length segment")
    cross = va[0] * vb[1] - va[1] * vb[0]
    dot = va[0] * vb[0] + va[1] * vb[1]
    return math.degrees(math.atan2(abs(cross), abs(dot)))


def evaluate(annotations: AnnotationSet, result: CompositionResult, spacing: float = 1.0) -> MetricsReport:
    """Compare an annotation set against a composition result.

    Action-region metrics run in unit-square space; line metrics run in
    pixel space. Annotated lines are matched to their nearest predicted
    action line by Hausdorff distance, and line metrics average first per
    annotator, then across annotators.
    """
    if annotations.image_id != result.image_id:
        raise InvalidParameter(
            f"annotation set is for {annotations.image_id!r}, result for {result.image_id!r}"
        )
    w, h = result.image_dims
    experts = [a for a in annotations.annotators if a.expert]
    nonexperts = [a for a in annotations.annotators if not a.expert]

    icc_ar_norm = normalize_points([r.centroid for r in result.action_regions], (w, h))
    icc_segments: list[Segment] = []
    for al in result.action_lines:
        seg = clip_line_to_rect(al.anchor, al.slope, w, h)
        if seg is not None:
            icc_segments.append(seg)

    report = MetricsReport()

    def pooled(group: list[AnnotatorLabels]) -> list[Point]:
        return [p for a in group for p in a.action_regions]

    def by_nearest_region(points: list[Point]) -> dict[int, list[Point]]:
        clusters: dict[int, list[Point]] = {}
        for p in points:
            best = min(
                range(len(icc_ar_norm)),
                key=lambda i: (p[0] - icc_ar_norm[i][0]) ** 2 + (p[1] - icc_ar_norm[i][1]) ** 2,
            )
            clusters.setdefault(best, []).append(p)
        return clusters

    def group_sd(points: list[Point]) -> float | None:
        # multi-region scenes: dispersion is measured around each predicted
        # region separately, then averaged
        if not icc_ar_norm:
            return sd_ar(points) if len(points) >= 2 else None
        vals = [sd_ar(pts) for pts in by_nearest_region(points).values() if len(pts) >= 2]
        return fmean(vals) if vals else None

    def group_l2(points: list[Point]) -> float | None:
        if not points or not icc_ar_norm:
            return None
        vals = []
        for idx, pts in by_nearest_region(points).items():
            centroid = np.asarray(pts, dtype=float).mean(axis=0)
            vals.append(float(np.hypot(*(centroid - np.asarray(icc_ar_norm[idx])))))
        return fmean(vals)

    e_points, ne_points = pooled(experts), pooled(nonexperts)
    report.sd_ar_expert = group_sd(e_points)
    report.sd_ar_nonexpert = group_sd(ne_points)
    report.l2_e_icc = group_l2(e_points)
    report.l2_ne_icc = group_l2(ne_points)
    if e_points and ne_points:
        report.l2_e_ne = l2_between_centroids(e_points, ne_points)

    if icc_segments:
        hd_per_annotator: list[float] = []
        ad_per_annotator: list[float] = []
        for annotator in annotations.annotators:
            hds, ads = [], []
            for seg in annotator.action_lines:
                seg_px = (
                    (seg[0][0] * w, seg[0][1] * h),
                    (seg[1][0] * w, seg[1][1] * h),
                )
                matches = [(hd_lines(seg_px, icc_seg, spacing), icc_seg) for icc_seg in icc_segments]
                best_hd, best_seg = min(matches, key=lambda m: m[0])
                hds.append(best_hd)
                ads.append(angular_deviation(seg_px, best_seg))
            if hds:
                hd_per_annotator.append(fmean(hds))
                ad_per_annotator.append(fmean(ads))
        if hd_per_annotator:
            report.hd_all_icc = fmean(hd_per_annotator)
            report.ad_all_icc = fmean(ad_per_annotator)

    return report


def format_report_table(report: MetricsReport) -> str:
    """Plain-text table with the SD / L2 / HD / AD column layout."""

    def cell(v: float | None, nd: int = 3) -> str:
        return "absent" if v is None else f"{v:.{nd}f}"

    headers = ["SD(E)", "SD(NE)", "L2 E/ICC", "L2 NE/ICC", "L2 E/NE", "HD ALL/ICC", "AD ALL/ICC"]
    values = [
        cell(report.sd_ar_expert),
        cell(report.sd_ar_nonexpert),
        cell(report.l2_e_icc),
        cell(report.l2_ne_icc),
        cell(report.l2_e_ne),
        cell(report.hd_all_icc, 2),
        cell(report.ad_all_icc, 2),
    ]
    widths = [max(len(h), len(v)) for h, v in zip(headers, values)]
    line1 = "  ".join(h.ljust(w) for h, w in zip(headers, widths))
    line2 = "  ".join(v.ljust(w) for v, w in zip(values, widths))
    return line1 + "\n" + line2
