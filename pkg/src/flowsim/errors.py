"""Exception and warning types shared across the package."""


class FlowsimError(Exception):
    """Base class for all library errors."""


class MalformedImage(FlowsimError):
    """Image bytes do not parse in the stated format."""


class UnsupportedFormat(FlowsimError):
    """Requested image format is not available in this build."""


class NotThinned(FlowsimError):
    """Operation requires a thinned image but found a 2x2 foreground block."""


class DegenerateShape(FlowsimError):
    """Component is too small to measure (fewer than 9 pixels)."""


class DegenerateMeasurement(FlowsimError):
    """Radial measurement has A = 0 or B = 0, so the ratios are undefined."""


class NotClosed(FlowsimError):
    """Outline is not a closed curve; the flood fill escaped to the border."""


class UnclassifiedShape(FlowsimError):
    """An Unknown shape class has no flowchart role."""


class MalformedIndex(FlowsimError):
    """Index file violates the JSON-lines schema."""

    def __init__(self, message: str, line_number: int | None = None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NotFound(FlowsimError):
    """No record with the requested figure id."""


class LayoutInvalid(FlowsimError):
    """Synthetic layout overlaps itself or does not fit the canvas."""


class MalformedReport(FlowsimError):
    """Query report input is missing the required JSON structure."""


class DuplicatePathWarning(UserWarning):
    """The same source path was indexed more than once."""


class EmptyQueryWarning(UserWarning):
    """Query image produced a zero feature vector; it will match nothing."""
