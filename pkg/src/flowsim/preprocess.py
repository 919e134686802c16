"""Cleanup pipeline: thinning, open-stroke removal, text removal.

The stages turn raw flowchart line art into an image containing only the
closed node outlines: thinning reduces strokes to 1-pixel skeletons, open
curves (flow lines, arrowheads) are eroded away from their endpoints, and
small leftover components (text stand-ins) are dropped by area.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotThinned
from .raster import BinaryImage, Connectivity, label_components


@dataclass(frozen=True)
class PreprocessConfig:
    text_area_max: int = 150  # components strictly smaller than this count as text
    prune_iterations_max: int = 10000  # safety cap for endpoint erosion
    keep_loops_only: bool = True

    def __post_init__(self):
        if self.text_area_max < 1:
            raise ValueError("text_area_max must be >= 1")
        if self.prune_iterations_max < 1:
            raise ValueError("prune_iterations_max must be >= 1")


@dataclass(frozen=True)
class PreprocessReport:
    removed_stroke_pixels: int = 0
    removed_text_components: int = 0
    skeleton_pixels: int = 0


def _neighbor_planes(grid: np.ndarray):
    """The 8 neighbor planes P2..P9 (N, NE, E, SE, S, SW, W, NW)."""
    p = np.pad(grid, 1)
    return (
        p[:-2, 1:-1],  # N
        p[:-2, 2:],    # NE
        p[1:-1, 2:],   # E
        p[2:, 2:],     # SE
        p[2:, 1:-1],   # S
        p[2:, :-2],    # SW
        p[1:-1, :-2],  # W
        p[:-2, :-2],   # NW
    )


def _neighbor_count(grid: np.ndarray) -> np.ndarray:
    planes = _neighbor_planes(grid)
    total = planes[0].astype(np.uint8)
    for plane in planes[1:]:
        total = total + plane
    return total


def _transition_count(planes) -> np.ndarray:
    """0->1 steps around the cyclic sequence P2, P3, ..., P9, P2."""
    total = np.zeros(planes[0].shape, dtype=np.uint8)
    for cur, nxt in zip(planes, planes[1:] + planes[:1]):
        total = total + (~cur & nxt)
    return total


def has_2x2_block(grid: np.ndarray) -> bool:
    return bool((grid[:-1, :-1] & grid[1:, :-1] & grid[:-1, 1:] & grid[1:, 1:]).any())


def _is_simple(grid: np.ndarray, y: int, x: int) -> bool:
    """True when deleting (x, y) cannot change local connectivity.

    The pixel's foreground neighbors must form a single arc (one 0->1
    transition around the ring) that is neither empty nor the full ring.
    """
    h, w = grid.shape
    ring = []
    for dy, dx in ((-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)):
        ny, nx = y + dy, x + dx
        ring.append(bool(grid[ny, nx]) if 0 <= ny < h and 0 <= nx < w else False)
    count = sum(ring)
    if not 2 <= count <= 7:
        return False
    transitions = sum(1 for a, b in zip(ring, ring[1:] + ring[:1]) if not a and b)
    return transitions == 1


def _clear_2x2_blocks(grid: np.ndarray) -> bool:
    """Delete one simple pixel per remaining 2x2 block, in raster order.

    Returns True if anything was deleted. Blocks whose four pixels are all
    non-simple (thick crossings) are left alone rather than disconnected.
    """
    deleted_any = False
    while True:
        blocks = grid[:-1, :-1] & grid[1:, :-1] & grid[:-1, 1:] & grid[1:, 1:]
        ys, xs = np.nonzero(blocks)
        if ys.size == 0:
            return deleted_any
        progressed = False
        for y, x in zip(ys, xs):
            for py, px in ((y, x), (y, x + 1), (y + 1, x), (y + 1, x + 1)):
                if grid[py, px] and _is_simple(grid, py, px):
                    grid[py, px] = False
                    deleted_any = progressed = True
                    break
            if progressed:
                break  # recompute the block set after each deletion
        if not progressed:
            return deleted_any


def thin(img: BinaryImage) -> BinaryImage:
    """Zhang-Suen thinning to a 1-pixel-wide skeleton.

    Both subiterations run until a full pass deletes nothing. The classic
    algorithm can leave 2x2 blocks at thick crossings, so a final cleanup
    deletes one simple pixel per residual block; the result is stable under
    re-thinning and never adds foreground.
    """
    grid = img.pixels.copy()
    while True:
        changed = False
        for phase in (0, 1):
            planes = _neighbor_planes(grid)
            p2, p4, p6, p8 = planes[0], planes[2], planes[4], planes[6]
            b = planes[0].astype(np.uint8)
            for plane in planes[1:]:
                b = b + plane
            a = _transition_count(planes)
            candidates = grid & (b >= 2) & (b <= 6) & (a == 1)
            if phase == 0:
                candidates &= ~(p2 & p4 & p6) & ~(p4 & p6 & p8)
            else:
                candidates &= ~(p2 & p4 & p8) & ~(p2 & p6 & p8)
            if candidates.any():
                grid &= ~candidates
                changed = True
        if not changed:
            # cleanup may expose new deletable pixels, so loop until both
            # the subiterations and the cleanup are quiescent
            if not _clear_2x2_blocks(grid):
                break
    return BinaryImage(grid)


def remove_open_strokes(img: BinaryImage, max_iterations: int = 10000) -> BinaryImage:
    """Erode endpoint pixels until none remain, then drop isolated pixels.

    Open polylines (flow lines and arrowheads) vanish because they erode
    from their free ends; closed loops have no endpoints and survive
    untouched. Requires a thinned input: any 2x2 foreground block raises
    NotThinned, signalling that thin() was skipped.
    """
    if has_2x2_block(img.pixels):
        raise NotThinned("input contains a 2x2 foreground block; run thin() first")

    grid = img.pixels.copy()
    # endpoint erosion is confluent (leaf removal reaches the unique 2-core
    # in any order), so each component can be eroded inside its own crop;
    # bounding boxes may overlap, so only this component's pixels are cleared
    for comp in label_components(img, Connectivity.EIGHT):
        x0, y0, x1, y1 = comp.bounding_box
        membership = np.zeros((y1 - y0 + 1, x1 - x0 + 1), dtype=bool)
        membership[comp.pixels[:, 1] - y0, comp.pixels[:, 0] - x0] = True
        local = membership.copy()
        for _ in range(max_iterations):
            endpoints = local & (_neighbor_count(local) == 1)
            if not endpoints.any():
                break
            local &= ~endpoints
        grid[y0 : y1 + 1, x0 : x1 + 1] &= ~(membership & ~local)
    isolated = grid & (_neighbor_count(grid) == 0)
    grid &= ~isolated
    return BinaryImage(grid)


def remove_text(
    img: BinaryImage, cfg: PreprocessConfig = PreprocessConfig()
) -> tuple[BinaryImage, PreprocessReport]:
    """Drop connected components with area strictly below cfg.text_area_max."""
    grid = img.pixels.copy()
    removed = 0
    for comp in label_components(img, Connectivity.EIGHT):
        if comp.area < cfg.text_area_max:
            grid[comp.pixels[:, 1], comp.pixels[:, 0]] = False
            removed += 1
    cleaned = BinaryImage(grid)
    return cleaned, PreprocessReport(
        removed_stroke_pixels=0,
        removed_text_components=removed,
        skeleton_pixels=cleaned.foreground_count(),
    )


def preprocess(
    img: BinaryImage, cfg: PreprocessConfig = PreprocessConfig()
) -> tuple[BinaryImage, PreprocessReport]:
    """Full cleanup: thin, then remove open strokes, then remove text.

    The stage order is fixed; the output contains only closed outlines (plus
    any closed structure larger than the text threshold).
    """
    thinned = thin(img)
    if cfg.keep_loops_only:
        loops = remove_open_strokes(thinned, cfg.prune_iterations_max)
    else:
        loops = thinned
    cleaned, text_report = remove_text(loops, cfg)
    return cleaned, PreprocessReport(
        removed_stroke_pixels=thinned.foreground_count() - loops.foreground_count(),
        removed_text_components=text_report.removed_text_components,
        skeleton_pixels=cleaned.foreground_count(),
    )
