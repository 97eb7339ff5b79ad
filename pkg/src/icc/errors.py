"""Exception hierarchy shared by all pipeline stages."""


class CompositionError(Exception):
    """Base class for every error raised by this package."""


class DegenerateGeometry(CompositionError):
    """Geometric input collapses to a lower dimension (zero vector, collinear
    points, zero-area polygon)."""


class InvalidParameter(CompositionError):
    """A parameter violates its documented precondition."""


class ParseError(CompositionError):
    """Input document is not syntactically valid."""


class SchemaError(CompositionError):
    """Input document parses but does not match the expected schema."""


class InpaintUnderconstrained(CompositionError):
    """Inpainting mask leaves no known pixels to fill from."""


class NoForegroundEvidence(CompositionError):
    """No detected person provides enough keypoints to build body masks."""
