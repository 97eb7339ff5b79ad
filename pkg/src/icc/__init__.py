"""Training-free reconstruction of compositional structure in figurative
images: pose lines, gaze-derived action regions, global action lines, and a
pose-informed foreground/background separation, rendered onto a composition
canvas."""

__version__ = "0.1.0"

from .canvas import CompositionResult, RenderStyle, parse_result, render_icc, serialize_result
from .config import PipelineConfig
from .errors import (
    CompositionError,
    DegenerateGeometry,
    InpaintUnderconstrained,
    InvalidParameter,
    NoForegroundEvidence,
    ParseError,
    SchemaError,
)
from .pipeline import PipelineOutput, run_pipeline

__all__ = [
    "CompositionResult",
    "RenderStyle",
    "PipelineConfig",
    "PipelineOutput",
    "run_pipeline",
    "render_icc",
    "serialize_result",
    "parse_result",
    "CompositionError",
    "DegenerateGeometry",
    "InvalidParameter",
    "ParseError",
    "SchemaError",
    "InpaintUnderconstrained",
    "NoForegroundEvidence",
    "__version__",
]
