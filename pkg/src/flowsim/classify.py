"""Shape ratios, the classification cascade, flowchart roles, feature vectors.

Each measured shape is scored by four radial-distance formulas that all
evaluate to 1.0 (or 0 for the circle score) on the ideal continuous shape:

    circle_score    = A - B
    ellipse_ratio   = C / (pi * A * B)
    rectangle_ratio = C / (4 * B * sqrt(A^2 - B^2))
    diamond_ratio   = C * sqrt(A^2 - B^2) / (2 * A^2 * B)

The cascade tests them in that fixed order. The order is part of the
contract even where it misfires: a rectangle with aspect ratio near 3:4 has
an ellipse_ratio inside the acceptance band and is classified Ellipse.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .contour import ShapeMeasurement, measure_shape
from .errors import (
    DegenerateMeasurement,
    DegenerateShape,
    NotClosed,
    UnclassifiedShape,
)
from .raster import (
    BinaryImage,
    ConnectedComponent,
    Connectivity,
    component_mask,
    label_components,
)

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


class ShapeClass(Enum):
    CIRCLE = "circle"
    ELLIPSE = "ellipse"
    RECTANGLE = "rectangle"
    DIAMOND = "diamond"
    UNKNOWN = "unknown"


class FlowchartRole(Enum):
    CONNECTOR = "connector"
    START_STOP = "start_stop"
    DECISION = "decision"
    PROCESS = "process"


@dataclass(frozen=True)
class FeatureVector:
    """Counts of the four flowchart roles in one figure."""

    connector: int = 0
    start_stop: int = 0
    decision: int = 0
    process: int = 0

    def __post_init__(self):
        for name in ("connector", "start_stop", "decision", "process"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 0:
                raise ValueError(f"{name} must be a non-negative integer")

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.connector, self.start_stop, self.decision, self.process)

    def as_dict(self) -> dict[str, int]:
        return {
            "connector": self.connector,
            "start_stop": self.start_stop,
            "decision": self.decision,
            "process": self.process,
        }

    @property
    def total(self) -> int:
        return sum(self.as_tuple())


@dataclass(frozen=True)
class ShapeRatios:
    """Formula scores for one measurement.

    rectangle_ratio and diamond_ratio are None when A == B (a perfect
    circle), where their shared sqrt(A^2 - B^2) term vanishes.
    """

    circle_score: float
    ellipse_ratio: float
    rectangle_ratio: float | None
    diamond_ratio: float | None
    max_radius: float  # A, kept for the optional relative circle test


@dataclass(frozen=True)
class ClassifierConfig:
    circle_tolerance: float = 10.0  # absolute pixels, as in the source cascade
    ratio_low: float = 0.95
    ratio_high: float = 1.05
    strict_order: bool = True       # False picks the in-band ratio closest to 1
    relative_circle: bool = False   # opt-in: (A - B) / A < 0.1 instead

    def __post_init__(self):
        if not 0 < self.ratio_low < 1 < self.ratio_high:
            raise ValueError("need 0 < ratio_low < 1 < ratio_high")


def compute_ratios(m: ShapeMeasurement) -> ShapeRatios:
    """Evaluate the four formulas for a measurement with A, B > 0."""
    if m.A <= 0 or m.B <= 0:
        raise DegenerateMeasurement(f"cannot score a shape with A={m.A}, B={m.B}")
    spread = m.A * m.A - m.B * m.B
    if spread <= 0:
        rectangle = diamond = None
    else:
        root = math.sqrt(spread)
        rectangle = m.C / (4.0 * m.B * root)
        diamond = (m.C * root) / (2.0 * m.A * m.A * m.B)
    return ShapeRatios(
        circle_score=m.A - m.B,
        ellipse_ratio=m.C / (math.pi * m.A * m.B),
        rectangle_ratio=rectangle,
        diamond_ratio=diamond,
        max_radius=m.A,
    )


def _in_band(value: float | None, cfg: ClassifierConfig) -> bool:
    return value is not None and cfg.ratio_low < value < cfg.ratio_high


def classify(r: ShapeRatios, cfg: ClassifierConfig = ClassifierConfig()) -> ShapeClass:
    """Run the cascade: circle, then ellipse, rectangle, diamond, else Unknown."""
    if cfg.relative_circle:
        is_circle = r.circle_score < 0.1 * r.max_radius
    else:
        is_circle = r.circle_score < cfg.circle_tolerance
    if is_circle:
        return ShapeClass.CIRCLE
    if cfg.strict_order:
        if _in_band(r.ellipse_ratio, cfg):
            return ShapeClass.ELLIPSE
        if _in_band(r.rectangle_ratio, cfg):
            return ShapeClass.RECTANGLE
        if _in_band(r.diamond_ratio, cfg):
            return ShapeClass.DIAMOND
        return ShapeClass.UNKNOWN
    scored = [
        (ShapeClass.ELLIPSE, r.ellipse_ratio),
        (ShapeClass.RECTANGLE, r.rectangle_ratio),
        (ShapeClass.DIAMOND, r.diamond_ratio),
    ]
    scored = [(cls, value) for cls, value in scored if value is not None]
    cls, value = min(scored, key=lambda item: abs(item[1] - 1.0))
    return cls if _in_band(value, cfg) else ShapeClass.UNKNOWN


_ROLE_OF = {
    ShapeClass.CIRCLE: FlowchartRole.CONNECTOR,
    ShapeClass.ELLIPSE: FlowchartRole.START_STOP,
    ShapeClass.RECTANGLE: FlowchartRole.PROCESS,
    ShapeClass.DIAMOND: FlowchartRole.DECISION,
}


def role_of(c: ShapeClass) -> FlowchartRole:
    """Map a geometric class to its flowchart role (fixed convention)."""
    if c is ShapeClass.UNKNOWN:
        raise UnclassifiedShape("Unknown shapes have no flowchart role")
    return _ROLE_OF[c]


def fill_outline(
    component: ConnectedComponent, img: BinaryImage | None = None
) -> ConnectedComponent:
    """Flood-fill the interior of a closed outline.

    The interior is the background region not 4-connected to anything outside
    the outline's bounding box. Raises NotClosed when no such region exists
    (the curve is broken, or too small to enclose anything).
    """
    mask, (ox, oy) = component_mask(component, pad=1)
    background = ~mask
    labels, count = ndimage.label(background, structure=_STRUCTURE_4)
    border = np.unique(
        np.concatenate(
            (labels[0, :], labels[-1, :], labels[:, 0], labels[:, -1])
        )
    )
    border = border[border > 0]
    interior = background & ~np.isin(labels, border)
    if not interior.any():
        raise NotClosed(f"component {component.label} does not enclose an interior")
    filled = mask | interior
    ys, xs = np.nonzero(filled)
    pixels = np.column_stack((xs + ox, ys + oy)).astype(np.int32)
    return ConnectedComponent(
        label=component.label,
        pixels=pixels,
        bounding_box=component.bounding_box,
        area=int(pixels.shape[0]),
    )


def extract_feature_vector(
    img: BinaryImage, cfg: ClassifierConfig = ClassifierConfig()
) -> tuple[FeatureVector, list[tuple[ShapeMeasurement, ShapeClass]]]:
    """Classify every component of a preprocessed image and tally the roles.

    Each outline is filled, measured, scored, and classified; Unknown shapes
    appear in the returned listing but are excluded from the vector. Open
    curves (where the fill fails) are measured as-is and forced Unknown;
    components under the measurable size are skipped entirely.
    """
    counts = {role: 0 for role in FlowchartRole}
    listing: list[tuple[ShapeMeasurement, ShapeClass]] = []
    for comp in label_components(img, Connectivity.EIGHT):
        try:
            region = fill_outline(comp, img)
        except NotClosed:
            region = None
        try:
            measurement = measure_shape(region if region is not None else comp, img)
        except DegenerateShape:
            continue
        if region is None:
            cls = ShapeClass.UNKNOWN
        else:
            try:
                cls = classify(compute_ratios(measurement), cfg)
            except DegenerateMeasurement:
                cls = ShapeClass.UNKNOWN
        listing.append((measurement, cls))
        if cls is not ShapeClass.UNKNOWN:
            counts[role_of(cls)] += 1
    vector = FeatureVector(
        connector=counts[FlowchartRole.CONNECTOR],
        start_stop=counts[FlowchartRole.START_STOP],
        decision=counts[FlowchartRole.DECISION],
        process=counts[FlowchartRole.PROCESS],
    )
    return vector, listing
