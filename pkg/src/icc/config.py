"""Pipeline configuration: every tunable constant in one place, with the
defaults the rest of the package assumes."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path
from typing import Any

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from .errors import InvalidParameter, ParseError

OUTPUT_KINDS = ("colored", "binary", "json", "debug")


@dataclass
class PipelineConfig:
    cone_opening: float = 50.0
    gaze_correction: float = 0.0
    k: int = 7
    fg_threshold: float = 0.06
    hull_up: tuple[float, float] = (1.7, 1.4)
    hull_down: tuple[float, float] = (1.0, 0.7)
    median_kernel: int = 5
    bilateral_diameter: int = 9
    bilateral_sigma_color: float = 75.0
    bilateral_sigma_space: float = 75.0
    inpaint_radius: int = 3
    morph_close: int = 1
    morph_open: int = 2
    post_median: int = 5
    seed: int = 42
    min_confidence: float = 0.0
    arc_step: float = 5.0
    frame_margin: int = 0
    kmeans_max_iters: int = 50
    kmeans_tol: float = 0.5
    outputs: tuple[str, ...] = ("colored", "binary", "json")

    def validate(self) -> "PipelineConfig":
        if not 0.0 < self.cone_opening < 180.0:
            raise InvalidParameter(f"cone-opening must lie in (0, 180), got {self.cone_opening}")
        if self.k < 2:
            raise InvalidParameter(f"k must be >= 2, got {self.k}")
        if not 0.0 < self.fg_threshold < 1.0:
            raise InvalidParameter(f"fg-threshold must lie in (0, 1), got {self.fg_threshold}")
        for name in ("hull_up", "hull_down"):
            fx, fy = getattr(self, name)
            if fx <= 0.0 or fy <= 0.0:
                raise InvalidParameter(f"{name.replace('_', '-')} factors must be positive")
        for name in ("median_kernel", "bilateral_diameter", "post_median"):
            v = getattr(self, name)
            if v < 1 or v % 2 == 0:
                raise InvalidParameter(f"{name.replace('_', '-')} must be odd and >= 1, got {v}")
        if self.bilateral_sigma_color <= 0.0 or self.bilateral_sigma_space <= 0.0:
            raise InvalidParameter("bilateral sigmas must be positive")
        if self.inpaint_radius < 1:
            raise InvalidParameter(f"inpaint-radius must be >= 1, got {self.inpaint_radius}")
        if self.morph_close < 1 or self.morph_open < 1:
            raise InvalidParameter("morphology radii must be >= 1")
        if not 0.0 < self.arc_step <= self.cone_opening / 2.0:
            raise InvalidParameter(
                f"arc-step must lie in (0, cone-opening/2], got {self.arc_step}"
            )
        if self.frame_margin < 0:
            raise InvalidParameter(f"frame-margin must be >= 0, got {self.frame_margin}")
        if self.min_confidence < 0.0 or self.min_confidence >= 1.0:
            raise InvalidParameter(f"min-confidence must lie in [0, 1), got {self.min_confidence}")
        if self.kmeans_max_iters < 1 or self.kmeans_tol < 0.0:
            raise InvalidParameter("kmeans iteration controls out of range")
        for kind in self.outputs:
            if kind not in OUTPUT_KINDS:
                raise InvalidParameter(f"unknown output kind {kind!r}; choose from {OUTPUT_KINDS}")
        return self

    def to_dict(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["hull_up"] = list(self.hull_up)
        d["hull_down"] = list(self.hull_down)
        d["outputs"] = sorted(self.outputs)
        return d

    def replace(self, **changes: Any) -> "PipelineConfig":
        return dataclasses.replace(self, **changes)


_FIELD_NAMES = {f.name for f in dataclasses.fields(PipelineConfig)}


def config_from_mapping(mapping: dict[str, Any], base: PipelineConfig | None = None) -> PipelineConfig:
    """Build a config from a flat mapping; keys may be kebab- or snake-case."""
    cfg = base or PipelineConfig()
    changes: dict[str, Any] = {}
    for raw_key, value in mapping.items():
        key = str(raw_key).replace("-", "_")
        if key not in _FIELD_NAMES:
            raise InvalidParameter(f"unknown configuration key {raw_key!r}")
        if key in ("hull_up", "hull_down"):
            value = (float(value[0]), float(value[1]))
        elif key == "outputs":
            value = tuple(str(v) for v in value)
        changes[key] = value
    return cfg.replace(**changes).validate()


def load_config_file(path: str | Path, base: PipelineConfig | None = None) -> PipelineConfig:
    """Read a TOML config file with keys matching the CLI flags."""
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ParseError(f"config file {path} is not valid TOML: {exc}") from exc
    return config_from_mapping(data, base=base)
