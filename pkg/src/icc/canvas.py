"""Composition canvas assembly: overlay rendering and canonical JSON
serialization of the structured result.

The canonical JSON form uses sorted keys, no insignificant whitespace, and
floats printed with 9 significant digits, so serialize -> parse -> serialize
is byte-identical.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from PIL import Image, ImageDraw

from .errors import InvalidParameter, ParseError, SchemaError
from .fgbg import FgColorSet
from .gaze import ActionLine, ActionRegion
from .geometry import Point
from .pose import PoseLine


@dataclass
class RenderStyle:
    action_line_color: tuple[int, int, int] = (255, 215, 0)   # yellow
    pose_line_color: tuple[int, int, int] = (0, 200, 0)       # green
    region_fill: tuple[int, int, int, int] = (220, 40, 40, 90)
    centroid_color: tuple[int, int, int] = (255, 255, 255)
    line_width: int = 3
    centroid_radius: int = 4


@dataclass
class CompositionResult:
    """Everything the pipeline derives for one image."""

    image_id: str
    image_dims: tuple[int, int]  # (width, height)
    pose_lines: list[PoseLine] = field(default_factory=list)
    action_regions: list[ActionRegion] = field(default_factory=list)
    action_lines: list[ActionLine] = field(default_factory=list)
    global_slope: float | None = None
    fg_colors: FgColorSet | None = None
    parameters: dict[str, Any] = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


def clip_line_to_rect(anchor: Point, slope: float, width: int, height: int) -> tuple[Point, Point] | None:
    """Intersect the infinite line through `anchor` at `slope` degrees with
    the rectangle [0, width-1] x [0, height-1]; None when it misses."""
    dx = math.cos(math.radians(slope))
    dy = math.sin(math.radians(slope))
    x0, y0 = float(anchor[0]), float(anchor[1])
    t_min, t_max = -math.inf, math.inf
    for d, origin, lo, hi in ((dx, x0, 0.0, float(width - 1)), (dy, y0, 0.0, float(height - 1))):
        if abs(d) < 1e-12:
            if origin < lo or origin > hi:
                return None
            continue
        t0 = (lo - origin) / d
        t1 = (hi - origin) / d
        if t0 > t1:
            t0, t1 = t1, t0
        t_min = max(t_min, t0)
        t_max = min(t_max, t1)
    if not (math.isfinite(t_min) and math.isfinite(t_max)) or t_min > t_max:
        return None
    return (x0 + t_min * dx, y0 + t_min * dy), (x0 + t_max * dx, y0 + t_max * dy)


def render_icc(base: np.ndarray, result: CompositionResult, style: RenderStyle | None = None) -> np.ndarray:
    """Draw action regions, action lines, and pose lines over a base raster.

    The base may be an RGB image or a {0,1} mask (rendered black/white).
    Draw order: region fills, then action lines, then pose lines.
    """
    style = style or RenderStyle()
    arr = np.asarray(base)
    if arr.ndim == 2:
        arr = np.stack([arr.astype(np.uint8) * 255] * 3, axis=-1)
    h, w = arr.shape[:2]
    if (w, h) != tuple(result.image_dims):
        raise InvalidParameter(
            f"base raster is {w}x{h} but the result was computed for "
            f"{result.image_dims[0]}x{result.image_dims[1]}"
        )
    img = Image.fromarray(arr, mode="RGB").convert("RGBA")
    overlay = Image.new("RGBA", img.size, (0, 0, 0, 0))
    draw = ImageDraw.Draw(overlay)

    for region in result.action_regions:
        for poly in region.polygons:
            draw.polygon([(float(x), float(y)) for x, y in poly], fill=style.region_fill)
    for line in result.action_lines:
        seg = clip_line_to_rect(line.anchor, line.slope, w, h)
        if seg is None:
            continue
        draw.line([seg[0], seg[1]], fill=style.action_line_color + (255,), width=style.line_width)
    for region in result.action_regions:
        cx, cy = region.centroid
        r = style.centroid_radius
        draw.ellipse([cx - r, cy - r, cx + r, cy + r], fill=style.centroid_color + (255,))
    for pl in result.pose_lines:
        draw.line([pl.a, pl.b], fill=style.pose_line_color + (255,), width=style.line_width)

    return np.asarray(Image.alpha_composite(img, overlay).convert("RGB"))


# ---------------------------------------------------------------------------
# Canonical JSON

def _canon(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            raise InvalidParameter("cannot serialize NaN or infinite values")
        if v == 0.0:
            return "0"
        return format(v, ".9g")
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=True)
    if isinstance(value, dict):
        items = sorted(value.items())
        return "{" + ",".join(f"{json.dumps(str(k))}:{_canon(v)}" for k, v in items) + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(_canon(v) for v in value) + "]"
    if isinstance(value, np.ndarray):
        return _canon(value.tolist())
    raise InvalidParameter(f"cannot serialize value of type {type(value).__name__}")


def result_to_dict(result: CompositionResult) -> dict[str, Any]:
    fg = None
    if result.fg_colors is not None:
        fg = {
            "elected": list(result.fg_colors.elected),
            "dominant": result.fg_colors.dominant,
            "shares": {str(c): s for c, s in result.fg_colors.shares},
        }
    return {
        "image_id": result.image_id,
        "image_dims": [int(result.image_dims[0]), int(result.image_dims[1])],
        "pose_lines": [
            {"person_id": pl.person_id, "a": [pl.a[0], pl.a[1]], "b": [pl.b[0], pl.b[1]]}
            for pl in result.pose_lines
        ],
        "action_regions": [
            {
                "centroid": [r.centroid[0], r.centroid[1]],
                "area": r.area,
                "polygons": [p.tolist() for p in r.polygons],
                "contributing_pairs": [list(pair) for pair in r.contributing_pairs],
            }
            for r in result.action_regions
        ],
        "action_lines": [
            {"anchor": [al.anchor[0], al.anchor[1]], "slope_degrees": al.slope}
            for al in result.action_lines
        ],
        "global_slope_degrees": result.global_slope,
        "fg_colors": fg,
        "parameters": result.parameters,
        "notes": list(result.notes),
    }


def serialize_result(result: CompositionResult) -> bytes:
    return _canon(result_to_dict(result)).encode("utf-8")


def parse_result(data: bytes | str) -> CompositionResult:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise ParseError(f"result document is not valid JSON: {exc}") from exc
    try:
        fg = None
        if doc.get("fg_colors") is not None:
            raw = doc["fg_colors"]
            fg = FgColorSet(
                elected=tuple(int(c) for c in raw["elected"]),
                dominant=int(raw["dominant"]),
                shares=tuple(sorted((int(c), float(s)) for c, s in raw["shares"].items())),
            )
        regions = [
            ActionRegion(
                polygons=tuple(np.asarray(p, dtype=float) for p in r["polygons"]),
                centroid=(float(r["centroid"][0]), float(r["centroid"][1])),
                area=float(r["area"]),
                contributing_pairs=tuple((int(a), int(b)) for a, b in r["contributing_pairs"]),
            )
            for r in doc["action_regions"]
        ]
        lines = [
            ActionLine(anchor=(float(l["anchor"][0]), float(l["anchor"][1])), slope=float(l["slope_degrees"]))
            for l in doc["action_lines"]
        ]
        pose_lines = [
            PoseLine(
                a=(float(p["a"][0]), float(p["a"][1])),
                b=(float(p["b"][0]), float(p["b"][1])),
                person_id=None if p.get("person_id") is None else int(p["person_id"]),
            )
            for p in doc["pose_lines"]
        ]
        slope = doc.get("global_slope_degrees")
        return CompositionResult(
            image_id=str(doc["image_id"]),
            image_dims=(int(doc["image_dims"][0]), int(doc["image_dims"][1])),
            pose_lines=pose_lines,
            action_regions=regions,
            action_lines=lines,
            global_slope=None if slope is None else float(slope),
            fg_colors=fg,
            parameters=dict(doc.get("parameters", {})),
            notes=[str(n) for n in doc.get("notes", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"result document misses or mangles a field: {exc}") from exc
