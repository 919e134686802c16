"""Independent reference implementations used as test oracles.

Everything here is deliberately written in a different style from the
library (per-pixel loops over coordinate sets, no shared helpers) so the
tests compare two independent routes to the same answer.
"""
from __future__ import annotations

import math

import numpy as np

from flowsim.raster import BinaryImage


def ascii_image(art: str) -> BinaryImage:
    """Build a mask from ASCII art; '#' is foreground."""
    rows = [line for line in art.splitlines() if line.strip() != ""]
    width = max(len(r) for r in rows)
    grid = np.zeros((len(rows), width), dtype=bool)
    for y, row in enumerate(rows):
        for x, ch in enumerate(row):
            grid[y, x] = ch == "#"
    return BinaryImage(grid)


def reference_zhang_suen(img: BinaryImage) -> np.ndarray:
    """Textbook two-subiteration thinning, one pixel at a time."""
    grid = img.pixels.copy()
    h, w = grid.shape

    def neighbors(y, x):
        order = [(-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1)]
        vals = []
        for dy, dx in order:  # P2..P9
            ny, nx = y + dy, x + dx
            vals.append(bool(grid[ny, nx]) if 0 <= ny < h and 0 <= nx < w else False)
        return vals

    while True:
        total_deleted = 0
        for phase in (0, 1):
            marked = []
            for y in range(h):
                for x in range(w):
                    if not grid[y, x]:
                        continue
                    p = neighbors(y, x)
                    b = sum(p)
                    if not 2 <= b <= 6:
                        continue
                    a = sum(
                        1 for i in range(8) if not p[i] and p[(i + 1) % 8]
                    )
                    if a != 1:
                        continue
                    p2, p4, p6, p8 = p[0], p[2], p[4], p[6]
                    if phase == 0:
                        if (p2 and p4 and p6) or (p4 and p6 and p8):
                            continue
                    else:
                        if (p2 and p4 and p8) or (p2 and p6 and p8):
                            continue
                    marked.append((y, x))
            for y, x in marked:
                grid[y, x] = False
            total_deleted += len(marked)
        if total_deleted == 0:
            return grid


def reference_moore_trace(pixels: set[tuple[int, int]]) -> list[tuple[int, int]]:
    """Clockwise outer-boundary walk over a set of (x, y) pixels.

    Returns the visited pixel sequence starting (and ending) at the
    uppermost-leftmost pixel. Independent of the library's chain codes.
    """
    start = min(pixels, key=lambda p: (p[1], p[0]))
    # clockwise ring starting east, in screen coordinates (y down)
    ring = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]

    def find_next(cur, backtrack):
        idx = ring.index((backtrack[0] - cur[0], backtrack[1] - cur[1]))
        for step in range(1, 9):
            cand_dir = ring[(idx + step) % 8]
            cand = (cur[0] + cand_dir[0], cur[1] + cand_dir[1])
            if cand in pixels:
                before = ring[(idx + step - 1) % 8]
                return cand, (cur[0] + before[0], cur[1] + before[1])
        return None, backtrack

    visited = [start]
    cur = start
    backtrack = (start[0] - 1, start[1])
    nxt, backtrack = find_next(cur, backtrack)
    if nxt is None:
        return visited
    first_hop = (cur, nxt)
    for _ in range(8 * len(pixels) + 8):
        visited.append(nxt)
        cur = nxt
        nxt, backtrack = find_next(cur, backtrack)
        if (cur, nxt) == first_hop:
            break
    return visited


def radial_stats(pixels: set[tuple[int, int]]) -> tuple[float, float, float, int]:
    """(A, B, centroid-free) oracle: max/min boundary distance and area.

    Boundary pixels come from the independent Moore walk; distances are
    measured from the arithmetic-mean centroid of all pixels.
    """
    n = len(pixels)
    cx = sum(p[0] for p in pixels) / n
    cy = sum(p[1] for p in pixels) / n
    boundary = set(reference_moore_trace(pixels))
    dists = [math.hypot(x - cx, y - cy) for x, y in boundary]
    return max(dists), min(dists), (cx, cy), n


def mask_pixels(img: BinaryImage) -> set[tuple[int, int]]:
    ys, xs = np.nonzero(img.pixels)
    return {(int(x), int(y)) for x, y in zip(xs, ys)}
