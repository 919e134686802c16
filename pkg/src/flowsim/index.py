"""The dual database: a figure store on disk plus a metadata index.

The figure store is a plain directory convention (originals wherever they
live, preprocessed copies as ``<id>.pgm``). The metadata database is the
JSON-lines table searched in place of the images; once built, similarity
queries never re-read an image.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path

from .classify import FeatureVector
from .errors import DuplicatePathWarning, MalformedIndex, NotFound, UnsupportedFormat
from .pipeline import PipelineConfig, run_pipeline
from .raster import PNG_SUPPORTED, GrayImage, binary_to_gray, decode_image, encode_pgm

# JSON-lines schema, field order is part of the format
_FIELDS = (
    "figure_id",
    "connector",
    "start_stop",
    "decision",
    "process",
    "source_path",
    "preprocessed_path",
)

_EXTENSIONS = {".pgm": "pgm", ".png": "png"}


@dataclass(frozen=True)
class FigureRecord:
    figure_id: int
    source_path: str
    vector: FeatureVector
    preprocessed_path: str | None = None


@dataclass(frozen=True)
class MetadataDatabase:
    """Immutable sequence of records with strictly ascending figure ids."""

    records: tuple[FigureRecord, ...] = ()

    def __post_init__(self):
        previous = 0
        for record in self.records:
            if record.figure_id <= previous:
                raise ValueError("figure ids must be strictly ascending and >= 1")
            previous = record.figure_id

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def load_image_file(path: str | Path) -> GrayImage:
    path = Path(path)
    fmt = _EXTENSIONS.get(path.suffix.lower())
    if fmt is None:
        raise UnsupportedFormat(f"cannot infer image format from {path.name!r}")
    return decode_image(path.read_bytes(), fmt)


def add_figure(
    db: MetadataDatabase,
    source_path: str | Path,
    cfg: PipelineConfig = PipelineConfig(),
    preprocessed_dir: str | Path | None = None,
) -> tuple[MetadataDatabase, FigureRecord]:
    """Run the pipeline on one image and append its record.

    The new figure id is one past the current maximum (1 for an empty
    database). When ``preprocessed_dir`` is given, the cleaned outline image
    is stored there as ``<id>.pgm`` and referenced from the record.
    """
    source_path = str(source_path)
    if any(record.source_path == source_path for record in db.records):
        warnings.warn(
            f"source {source_path!r} is already indexed", DuplicatePathWarning
        )
    image = load_image_file(source_path)
    result = run_pipeline(image, cfg)
    figure_id = db.records[-1].figure_id + 1 if db.records else 1

    preprocessed_path = None
    if preprocessed_dir is not None:
        directory = Path(preprocessed_dir)
        directory.mkdir(parents=True, exist_ok=True)
        target = directory / f"{figure_id}.pgm"
        target.write_bytes(encode_pgm(binary_to_gray(result.stages["text_removed"])))
        preprocessed_path = str(target)

    record = FigureRecord(figure_id, source_path, result.vector, preprocessed_path)
    return MetadataDatabase(db.records + (record,)), record


def index_directory(
    figures_dir: str | Path,
    cfg: PipelineConfig = PipelineConfig(),
    preprocessed_dir: str | Path | None = None,
) -> MetadataDatabase:
    """Index every image in a directory, sorted by file name.

    The lexicographic ordering makes id assignment (and therefore the index
    file) reproducible run to run.
    """
    suffixes = {".pgm"} | ({".png"} if PNG_SUPPORTED else set())
    paths = sorted(
        p
        for p in Path(figures_dir).iterdir()
        if p.is_file() and p.suffix.lower() in suffixes
    )
    db = MetadataDatabase()
    for path in paths:
        db, _ = add_figure(db, path, cfg, preprocessed_dir)
    return db


def save_index(db: MetadataDatabase, path: str | Path) -> None:
    """Write one compact JSON object per record, ascending id, LF endings."""
    lines = []
    for r in db.records:
        obj = {
            "figure_id": r.figure_id,
            "connector": r.vector.connector,
            "start_stop": r.vector.start_stop,
            "decision": r.vector.decision,
            "process": r.vector.process,
            "source_path": r.source_path,
            "preprocessed_path": r.preprocessed_path,
        }
        lines.append(json.dumps(obj, separators=(",", ":")))
    data = "".join(line + "\n" for line in lines)
    Path(path).write_bytes(data.encode("utf-8"))


def load_index(path: str | Path) -> MetadataDatabase:
    """Parse and validate an index file; the inverse of save_index."""
    records: list[FigureRecord] = []
    seen: set[int] = set()
    previous = 0
    text = Path(path).read_text(encoding="utf-8")
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise MalformedIndex(f"invalid JSON ({exc.msg})", number) from exc
        if not isinstance(obj, dict) or set(obj) != set(_FIELDS):
            raise MalformedIndex(
                f"expected exactly the fields {', '.join(_FIELDS)}", number
            )
        figure_id = obj["figure_id"]
        if not isinstance(figure_id, int) or figure_id < 1:
            raise MalformedIndex(f"bad figure_id {figure_id!r}", number)
        if figure_id in seen:
            raise MalformedIndex(f"duplicate figure_id {figure_id}", number)
        if figure_id <= previous:
            raise MalformedIndex(f"figure_id {figure_id} out of order", number)
        counts = {}
        for key in ("connector", "start_stop", "decision", "process"):
            value = obj[key]
            if not isinstance(value, int) or value < 0:
                raise MalformedIndex(f"negative or non-integer {key}", number)
            counts[key] = value
        source = obj["source_path"]
        if not isinstance(source, str):
            raise MalformedIndex("source_path must be a string", number)
        preprocessed = obj["preprocessed_path"]
        if preprocessed is not None and not isinstance(preprocessed, str):
            raise MalformedIndex("preprocessed_path must be a string or null", number)
        seen.add(figure_id)
        previous = figure_id
        records.append(
            FigureRecord(figure_id, source, FeatureVector(**counts), preprocessed)
        )
    return MetadataDatabase(tuple(records))


def get_figure(db: MetadataDatabase, figure_id: int) -> FigureRecord:
    """Record with the given id, or NotFound."""
    for record in db.records:
        if record.figure_id == figure_id:
            return record
    raise NotFound(f"no figure with id {figure_id}")
