"""Query-by-example retrieval: cosine ranking and the plagiarism percentage."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .classify import FeatureVector
from .errors import EmptyQueryWarning
from .index import MetadataDatabase, get_figure
from .pipeline import PipelineConfig, run_pipeline
from .raster import GrayImage


@dataclass(frozen=True)
class QueryVector:
    vector: FeatureVector

    @property
    def activity_count(self) -> int:
        return self.vector.total


@dataclass(frozen=True)
class RankedMatch:
    figure_id: int
    similarity: float


@dataclass(frozen=True)
class SearchConfig:
    threshold: float = 0.3  # retain matches strictly above this
    top_k: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")
        if self.top_k is not None and self.top_k < 0:
            raise ValueError("top_k must be non-negative")


def build_query_vector(
    image: GrayImage, cfg: PipelineConfig = PipelineConfig()
) -> QueryVector:
    """Extract the query's feature vector with the same pipeline as indexing.

    A zero vector is reported with EmptyQueryWarning but is not fatal; it
    simply matches nothing.
    """
    result = run_pipeline(image, cfg)
    if result.vector.total == 0:
        warnings.warn(
            "query image produced no recognizable shapes", EmptyQueryWarning
        )
    return QueryVector(result.vector)


def cosine_similarity(q: FeatureVector, d: FeatureVector) -> float:
    """cos of the angle between two count vectors, in [0, 1].

    Zero vectors similarity is defined as 0 (no evidence of copying). The
    single square root over the exact integer product keeps identical
    vectors at exactly 1.0.
    """
    qt, dt = q.as_tuple(), d.as_tuple()
    dot = sum(a * b for a, b in zip(qt, dt))
    qq = sum(a * a for a in qt)
    dd = sum(b * b for b in dt)
    if qq == 0 or dd == 0:
        return 0.0
    return min(1.0, max(0.0, dot / math.sqrt(qq * dd)))


def rank(
    db: MetadataDatabase, q: QueryVector, cfg: SearchConfig = SearchConfig()
) -> list[RankedMatch]:
    """Score every record, keep similarities above the threshold, sort.

    Ordering is descending similarity with ties broken by ascending
    figure_id; the optional top_k truncates the result.
    """
    matches = [
        RankedMatch(record.figure_id, cosine_similarity(q.vector, record.vector))
        for record in db.records
    ]
    matches = [m for m in matches if m.similarity > cfg.threshold]
    matches.sort(key=lambda m: (-m.similarity, m.figure_id))
    if cfg.top_k is not None:
        matches = matches[: cfg.top_k]
    return matches


def plagiarism_percentage(matches: list[RankedMatch]) -> float:
    """100 times the best similarity; 0 when nothing matched."""
    return 100.0 * max((m.similarity for m in matches), default=0.0)


@dataclass(frozen=True)
class MatchDetail:
    figure_id: int
    similarity: float
    source_path: str


@dataclass(frozen=True)
class QueryReport:
    query_vector: FeatureVector
    activity_count: int
    matches: tuple[MatchDetail, ...]
    plagiarism_percentage: float

    def to_dict(self) -> dict:
        return {
            "query_vector": self.query_vector.as_dict(),
            "activity_count": self.activity_count,
            "matches": [
                {
                    "figure_id": m.figure_id,
                    "similarity": m.similarity,
                    "source_path": m.source_path,
                }
                for m in self.matches
            ],
            "plagiarism_percentage": self.plagiarism_percentage,
        }


def query(
    db: MetadataDatabase,
    image: GrayImage,
    search_cfg: SearchConfig = SearchConfig(),
    pipeline_cfg: PipelineConfig = PipelineConfig(),
) -> QueryReport:
    """Full query: build the vector, rank the database, resolve sources."""
    qv = build_query_vector(image, pipeline_cfg)
    matches = rank(db, qv, search_cfg)
    details = tuple(
        MatchDetail(m.figure_id, m.similarity, get_figure(db, m.figure_id).source_path)
        for m in matches
    )
    return QueryReport(
        query_vector=qv.vector,
        activity_count=qv.activity_count,
        matches=details,
        plagiarism_percentage=plagiarism_percentage(matches),
    )
