"""Rank/similarity report: plot-ready CSV plus a rendered similarity curve.

The CSV carries one row per retrieved rank (header ``rank,similarity``); the
companion PNG shows the descending similarity curve for a query.
"""
from __future__ import annotations

from pathlib import Path

from .errors import MalformedReport


def validate_query_report(doc) -> list[float]:
    """Check the query-report JSON structure and pull out the similarities."""
    if not isinstance(doc, dict) or "matches" not in doc:
        raise MalformedReport("query report must be an object with a 'matches' list")
    matches = doc["matches"]
    if not isinstance(matches, list):
        raise MalformedReport("'matches' must be a list")
    similarities = []
    for i, match in enumerate(matches):
        if not isinstance(match, dict) or "similarity" not in match:
            raise MalformedReport(f"match {i} has no 'similarity' field")
        value = match["similarity"]
        if not isinstance(value, (int, float)):
            raise MalformedReport(f"match {i} similarity is not a number")
        similarities.append(float(value))
    return similarities


def write_rank_csv(doc: dict, out_path: str | Path) -> list[tuple[int, float]]:
    """Write ``rank,similarity`` rows for a query report; returns the rows."""
    similarities = validate_query_report(doc)
    rows = [(i + 1, s) for i, s in enumerate(similarities)]
    body = "rank,similarity\n" + "".join(f"{r},{s!r}\n" for r, s in rows)
    Path(out_path).write_bytes(body.encode("utf-8"))
    return rows


def render_similarity_curve(
    rows: list[tuple[int, float]], png_path: str | Path, threshold: float | None = None
) -> None:
    """Plot similarity against rank (the descending retrieval curve)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5.5, 3.5))
    if rows:
        ranks = [r for r, _ in rows]
        sims = [s for _, s in rows]
        ax.plot(ranks, sims, marker="o", color="tab:blue")
        if len(ranks) <= 20:
            ax.set_xticks(ranks)
    else:
        ax.text(0.5, 0.5, "no matches", ha="center", va="center", transform=ax.transAxes)
    if threshold is not None:
        ax.axhline(threshold, color="tab:red", linestyle="--", linewidth=1,
                   label=f"threshold {threshold}")
        ax.legend(loc="upper right", fontsize=8)
    ax.set_xlabel("rank")
    ax.set_ylabel("cosine similarity")
    ax.set_ylim(0.0, 1.05)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(png_path, dpi=120)
    plt.close(fig)
