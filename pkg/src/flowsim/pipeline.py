"""The shared image-to-feature-vector pipeline.

Database figures and queries must run through identical stages, otherwise
their vectors are not comparable. Both the index builder and the search
engine call run_pipeline with the same config type.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .classify import ClassifierConfig, FeatureVector, ShapeClass, extract_feature_vector
from .contour import CannyConfig, ShapeMeasurement, canny_edges
from .preprocess import (
    PreprocessConfig,
    PreprocessReport,
    remove_open_strokes,
    remove_text,
    thin,
)
from .raster import BinaryImage, GrayImage, binarize


@dataclass(frozen=True)
class PipelineConfig:
    """Everything that affects the vector extracted from an image.

    ``fixed_threshold=None`` selects Otsu binarization. ``from_edges``
    replaces binarization with a Canny edge map (the alternative path kept
    for fidelity; the preprocessed path is the default). ``apply_thin=False``
    is for inputs that are already skeletons.
    """

    fixed_threshold: int | None = None
    invert: bool = False
    from_edges: bool = False
    apply_thin: bool = True
    preprocess: PreprocessConfig = field(default_factory=PreprocessConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    canny: CannyConfig = field(default_factory=CannyConfig)


@dataclass
class PipelineResult:
    vector: FeatureVector
    listing: list[tuple[ShapeMeasurement, ShapeClass]]
    stages: dict[str, BinaryImage]
    report: PreprocessReport


def run_pipeline(image: GrayImage, cfg: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """binarize (or Canny) -> thin -> remove strokes -> remove text -> classify."""
    if cfg.invert:
        image = GrayImage(255 - image.pixels)
    if cfg.from_edges:
        binary = canny_edges(image, cfg.canny)
    else:
        binary = binarize(image, cfg.fixed_threshold)
    stages = {"binarized": binary}

    thinned = thin(binary) if cfg.apply_thin else binary
    stages["thinned"] = thinned
    if cfg.preprocess.keep_loops_only:
        loops = remove_open_strokes(thinned, cfg.preprocess.prune_iterations_max)
    else:
        loops = thinned
    stages["strokes_removed"] = loops
    cleaned, text_report = remove_text(loops, cfg.preprocess)
    stages["text_removed"] = cleaned
    report = PreprocessReport(
        removed_stroke_pixels=thinned.foreground_count() - loops.foreground_count(),
        removed_text_components=text_report.removed_text_components,
        skeleton_pixels=cleaned.foreground_count(),
    )

    vector, listing = extract_feature_vector(cleaned, cfg.classifier)
    return PipelineResult(vector=vector, listing=listing, stages=stages, report=report)
