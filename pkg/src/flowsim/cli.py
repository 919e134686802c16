"""Command line interface: index, query, shapes, synth, report.

Machine-readable output (JSON by default, CSV on request) goes to stdout;
diagnostics go to stderr. Exit codes: 0 success, 1 usage error, 2 data error
(malformed image, index, or report), 3 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .classify import ClassifierConfig, ShapeClass, role_of
from .errors import FlowsimError, LayoutInvalid, MalformedReport
from .index import index_directory, load_image_file, load_index, save_index
from .pipeline import PipelineConfig, run_pipeline
from .preprocess import PreprocessConfig
from .raster import binary_to_gray, encode_pgm
from .report import render_similarity_curve, write_rank_csv
from .search import SearchConfig, query
from .synth import generate_corpus, layout_from_dict, render, truth_to_dict

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage errors with exit status 1, not 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _bool_flag(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {value!r}")


def _add_pipeline_options(sub, *, thinning: bool = True) -> None:
    group = sub.add_mutually_exclusive_group()
    group.add_argument("--otsu", action="store_true",
                       help="Otsu binarization (the default)")
    group.add_argument("--fixed-threshold", type=int, metavar="T",
                       help="fixed binarization threshold in [0, 255]")
    sub.add_argument("--invert", action="store_true",
                     help="invert luminance first (for light-on-dark inputs)")
    sub.add_argument("--from-edges", action="store_true",
                     help="start from a Canny edge map instead of binarization")
    sub.add_argument("--text-area-max", type=int, default=150, metavar="N",
                     help="components under N pixels are dropped as text (default 150)")
    if thinning:
        sub.add_argument("--no-thin", action="store_true",
                         help="skip thinning (input is already a skeleton)")
    sub.add_argument("--strict-order", type=_bool_flag, default=True, metavar="BOOL",
                     help="keep the fixed cascade order (default true); false picks "
                          "the ratio closest to 1")


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        fixed_threshold=args.fixed_threshold,
        invert=args.invert,
        from_edges=args.from_edges,
        apply_thin=not getattr(args, "no_thin", False),
        preprocess=PreprocessConfig(text_area_max=args.text_area_max),
        classifier=ClassifierConfig(strict_order=args.strict_order),
    )


def build_parser() -> _Parser:
    parser = _Parser(prog="flowsim",
                     description="shape-based flowchart figure retrieval")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("index", parents=[], help="index a figure directory")
    sub.add_argument("--figures", required=True, metavar="DIR")
    sub.add_argument("--out", required=True, metavar="FILE")
    sub.add_argument("--preprocessed-dir", metavar="DIR",
                     help="also store cleaned outline PGMs here")
    _add_pipeline_options(sub)

    sub = commands.add_parser("query", help="rank the database against a query image")
    sub.add_argument("--index", required=True, metavar="FILE")
    sub.add_argument("--image", required=True, metavar="FILE")
    sub.add_argument("--top-k", type=int, metavar="N")
    sub.add_argument("--threshold", type=float, default=0.3, metavar="X")
    sub.add_argument("--format", choices=("json", "csv"), default="json")
    _add_pipeline_options(sub)

    sub = commands.add_parser("shapes", help="per-shape diagnostics for one image")
    sub.add_argument("--image", required=True, metavar="FILE")
    sub.add_argument("--dump-stages", metavar="DIR",
                     help="write per-stage PGMs for inspection")
    _add_pipeline_options(sub)

    sub = commands.add_parser("synth", help="generate synthetic flowchart figures")
    sub.add_argument("--seed", type=int, metavar="N")
    sub.add_argument("--count", type=int, metavar="N")
    sub.add_argument("--spec", metavar="FILE", help="render one explicit layout JSON")
    sub.add_argument("--out", required=True, metavar="PATH",
                     help="output directory (corpus mode) or PGM file (spec mode)")

    sub = commands.add_parser("report", help="plot-ready rank/similarity data")
    sub.add_argument("--results", required=True, metavar="FILE",
                     help="JSON report produced by 'query --format json'")
    sub.add_argument("--out", required=True, metavar="FILE", help="CSV output path")
    sub.add_argument("--plot", metavar="FILE",
                     help="figure path (default: CSV path with .png suffix)")
    sub.add_argument("--no-plot", action="store_true", help="skip the figure")
    return parser


def _cmd_index(args) -> int:
    db = index_directory(args.figures, _pipeline_config(args), args.preprocessed_dir)
    save_index(db, args.out)
    print(json.dumps({"figures": len(db), "index": str(args.out)}))
    return EXIT_OK


def _cmd_query(args) -> int:
    db = load_index(args.index)
    image = load_image_file(args.image)
    search_cfg = SearchConfig(threshold=args.threshold, top_k=args.top_k)
    result = query(db, image, search_cfg, _pipeline_config(args))
    if args.format == "json":
        print(json.dumps(result.to_dict()))
    else:
        lines = ["rank,figure_id,similarity,source_path"]
        for rank_number, match in enumerate(result.matches, start=1):
            lines.append(
                f"{rank_number},{match.figure_id},{match.similarity!r},{match.source_path}"
            )
        print("\n".join(lines))
    return EXIT_OK


def _cmd_shapes(args) -> int:
    image = load_image_file(args.image)
    result = run_pipeline(image, _pipeline_config(args))
    if args.dump_stages:
        directory = Path(args.dump_stages)
        directory.mkdir(parents=True, exist_ok=True)
        for name, stage in result.stages.items():
            (directory / f"{name}.pgm").write_bytes(encode_pgm(binary_to_gray(stage)))
    shapes = []
    for label, (m, cls) in enumerate(result.listing, start=1):
        shapes.append(
            {
                "label": label,
                "centroid": [m.centroid[0], m.centroid[1]],
                "A": m.A,
                "B": m.B,
                "C": m.C,
                "chain_length": len(m.boundary),
                "shape_class": cls.value,
                "role": role_of(cls).value if cls is not ShapeClass.UNKNOWN else None,
            }
        )
    print(json.dumps({"shapes": shapes, "vector": result.vector.as_dict()}))
    return EXIT_OK


def _cmd_synth(args) -> int:
    parser_error = None
    if args.spec is not None:
        if args.seed is not None or args.count is not None:
            parser_error = "--spec cannot be combined with --seed/--count"
    elif args.seed is None or args.count is None:
        parser_error = "need either --spec FILE or both --seed and --count"
    if parser_error:
        print(f"flowsim synth: error: {parser_error}", file=sys.stderr)
        return EXIT_USAGE

    if args.spec is not None:
        try:
            doc = json.loads(Path(args.spec).read_text(encoding="utf-8"))
        except (json.JSONDecodeError, UnicodeDecodeError) as exc:
            raise LayoutInvalid(f"layout file is not valid JSON: {exc}") from exc
        nodes, edges, canvas = layout_from_dict(doc)
        image, truth = render(nodes, edges, canvas)
        out = Path(args.out)
        out.write_bytes(encode_pgm(image))
        out.with_suffix(".truth.json").write_text(
            json.dumps(truth_to_dict(truth)) + "\n", encoding="utf-8"
        )
        print(json.dumps({"out": str(out)}))
        return EXIT_OK

    directory = Path(args.out)
    directory.mkdir(parents=True, exist_ok=True)
    figures = generate_corpus(args.seed, args.count)
    for i, (image, truth) in enumerate(figures, start=1):
        (directory / f"{i}.pgm").write_bytes(encode_pgm(image))
        (directory / f"{i}.truth.json").write_text(
            json.dumps(truth_to_dict(truth)) + "\n", encoding="utf-8"
        )
    print(json.dumps({"count": len(figures), "dir": str(directory)}))
    return EXIT_OK


def _cmd_report(args) -> int:
    try:
        doc = json.loads(Path(args.results).read_text(encoding="utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise MalformedReport(f"results file is not valid JSON: {exc}") from exc
    rows = write_rank_csv(doc, args.out)
    plot_path = None
    if not args.no_plot:
        plot_path = Path(args.plot) if args.plot else Path(args.out).with_suffix(".png")
        render_similarity_curve(rows, plot_path)
    print(
        json.dumps(
            {
                "rows": len(rows),
                "csv": str(args.out),
                "plot": str(plot_path) if plot_path else None,
            }
        )
    )
    return EXIT_OK


_COMMANDS = {
    "index": _cmd_index,
    "query": _cmd_query,
    "shapes": _cmd_shapes,
    "synth": _cmd_synth,
    "report": _cmd_report,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except FlowsimError as exc:
        print(f"flowsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"flowsim {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive
        print(f"flowsim {args.command}: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
