"""Boundary tracing, Freeman chain codes, and radial shape measurement.

A shape is summarized by its centroid, the largest (A) and smallest (B)
centroid-to-boundary Euclidean distances, and its pixel count (C). Boundary
pixels are the ones visited by a clockwise Moore trace of the outer contour.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import DegenerateShape
from .raster import BinaryImage, ConnectedComponent, GrayImage, component_mask

# Freeman 8-direction code: 0 = east, counter-clockwise. The image y axis
# grows downward, so code 2 (north) is dy = -1.
MOVES = ((1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1))
_CODE_OF = {d: c for c, d in enumerate(MOVES)}
# neighbor ring in clockwise screen order starting east
_CLOCKWISE = (0, 7, 6, 5, 4, 3, 2, 1)


@dataclass(frozen=True)
class ChainCode:
    """Closed-boundary encoding: a start pixel plus Freeman moves."""

    start: tuple[int, int]
    moves: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.moves)

    def displacement(self) -> tuple[int, int]:
        """Vector sum of the moves; (0, 0) for a closed boundary."""
        dx = sum(MOVES[m][0] for m in self.moves)
        dy = sum(MOVES[m][1] for m in self.moves)
        return dx, dy

    def points(self) -> list[tuple[int, int]]:
        """Every pixel visited by the trace, in order, starting at start."""
        x, y = self.start
        out = [(x, y)]
        for m in self.moves:
            x += MOVES[m][0]
            y += MOVES[m][1]
            out.append((x, y))
        return out


@dataclass(frozen=True)
class ShapeMeasurement:
    centroid: tuple[float, float]
    A: float  # max centroid-to-boundary distance
    B: float  # min centroid-to-boundary distance
    C: int    # pixel count of the (filled) shape
    boundary: ChainCode


def trace_boundary(
    component: ConnectedComponent, img: BinaryImage | None = None
) -> ChainCode:
    """Clockwise Moore trace of a component's outer boundary.

    Starts at the top-most then left-most pixel; inner holes are never
    entered. The ``img`` argument is accepted for interface symmetry but the
    trace runs on the component's own pixel set, which is what keeps
    diagonal 4-connected neighbors from leaking into the chain.
    """
    mask, (ox, oy) = component_mask(component, pad=1)
    start = (int(component.pixels[0, 0]), int(component.pixels[0, 1]))
    sx, sy = start[0] - ox, start[1] - oy

    def next_step(cur, back_idx):
        """First foreground neighbor clockwise after the backtrack, if any."""
        for k in range(1, 9):
            idx = (back_idx + k) % 8
            dx, dy = MOVES[_CLOCKWISE[idx]]
            cand = (cur[0] + dx, cur[1] + dy)
            if mask[cand[1], cand[0]]:
                # the neighbor checked just before cand is background; its
                # direction seen from cand becomes the new backtrack
                pdx, pdy = MOVES[_CLOCKWISE[(idx - 1) % 8]]
                prev = (cur[0] + pdx, cur[1] + pdy)
                new_back = _CLOCKWISE.index(
                    _CODE_OF[(prev[0] - cand[0], prev[1] - cand[1])]
                )
                return cand, new_back
        return None, back_idx

    # initial backtrack is the west neighbor, background by choice of start
    cur = (sx, sy)
    back_idx = _CLOCKWISE.index(4)
    nxt, back_idx = next_step(cur, back_idx)
    if nxt is None:
        return ChainCode(start=start, moves=())  # single pixel

    first_pair = (cur, nxt)
    moves: list[int] = []
    max_steps = 4 * component.area + 8
    for _ in range(max_steps):
        moves.append(_CODE_OF[(nxt[0] - cur[0], nxt[1] - cur[1])])
        cur = nxt
        nxt, back_idx = next_step(cur, back_idx)
        # Jacob's criterion: stop when about to repeat the first transition
        if (cur, nxt) == first_pair:
            break
    return ChainCode(start=start, moves=tuple(moves))


def measure_shape(
    component: ConnectedComponent, img: BinaryImage | None = None
) -> ShapeMeasurement:
    """Centroid, radial extremes A/B, and pixel count C of a filled component."""
    if component.area < 9:
        raise DegenerateShape(
            f"component of {component.area} pixels is too small to measure"
        )
    pts = component.pixels.astype(np.float64)
    cx, cy = pts[:, 0].mean(), pts[:, 1].mean()
    chain = trace_boundary(component, img)
    boundary = np.array(sorted(set(chain.points())), dtype=np.float64)
    dist = np.hypot(boundary[:, 0] - cx, boundary[:, 1] - cy)
    return ShapeMeasurement(
        centroid=(float(cx), float(cy)),
        A=float(dist.max()),
        B=float(dist.min()),
        C=component.area,
        boundary=chain,
    )


@dataclass(frozen=True)
class CannyConfig:
    gaussian_sigma: float = 1.0
    low_threshold: float = 0.1   # fraction of the max gradient magnitude
    high_threshold: float = 0.3

    def __post_init__(self):
        if self.gaussian_sigma <= 0:
            raise ValueError("gaussian_sigma must be positive")
        if not 0 < self.low_threshold < self.high_threshold:
            raise ValueError("need 0 < low_threshold < high_threshold")


def _gaussian_kernel(sigma: float) -> np.ndarray:
    radius = math.ceil(3 * sigma)
    offsets = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(offsets**2) / (2 * sigma * sigma))
    return kernel / kernel.sum()


def gradient_field(img: GrayImage, sigma: float) -> tuple[np.ndarray, np.ndarray]:
    """Sobel gradients (gx, gy) of the Gaussian-smoothed image."""
    smoothed = img.pixels.astype(np.float64)
    kernel = _gaussian_kernel(sigma)
    smoothed = ndimage.convolve1d(smoothed, kernel, axis=0, mode="reflect")
    smoothed = ndimage.convolve1d(smoothed, kernel, axis=1, mode="reflect")
    kx = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
    ky = np.array([[-1, -2, -1], [0, 0, 0], [1, 2, 1]], dtype=np.float64)
    gx = ndimage.convolve(smoothed, kx, mode="reflect")
    gy = ndimage.convolve(smoothed, ky, mode="reflect")
    return gx, gy


def suppress_non_maxima(magnitude: np.ndarray, gx: np.ndarray, gy: np.ndarray) -> np.ndarray:
    """Zero out pixels with a strictly larger neighbor along the gradient.

    The gradient direction is quantized to the four axes (0, 45, 90, 135
    degrees); ties are kept so ridges stay connected.
    """
    angle = np.degrees(np.arctan2(gy, gx)) % 180.0
    padded = np.pad(magnitude, 1)

    shift = {
        (0, 1): padded[1:-1, 2:],
        (0, -1): padded[1:-1, :-2],
        (1, 0): padded[2:, 1:-1],
        (-1, 0): padded[:-2, 1:-1],
        (1, 1): padded[2:, 2:],
        (-1, -1): padded[:-2, :-2],
        (1, -1): padded[2:, :-2],
        (-1, 1): padded[:-2, 2:],
    }
    sector0 = (angle < 22.5) | (angle >= 157.5)           # east-west
    sector45 = (angle >= 22.5) & (angle < 67.5)           # diagonal /
    sector90 = (angle >= 67.5) & (angle < 112.5)          # north-south
    sector135 = (angle >= 112.5) & (angle < 157.5)        # diagonal \

    ahead = np.where(
        sector0, shift[(0, 1)],
        np.where(sector45, shift[(1, 1)], np.where(sector90, shift[(1, 0)], shift[(1, -1)])),
    )
    behind = np.where(
        sector0, shift[(0, -1)],
        np.where(sector45, shift[(-1, -1)], np.where(sector90, shift[(-1, 0)], shift[(-1, 1)])),
    )
    keep = (magnitude >= ahead) & (magnitude >= behind)
    return np.where(keep, magnitude, 0.0)


def canny_edges(img: GrayImage, cfg: CannyConfig = CannyConfig()) -> BinaryImage:
    """Standard Canny edge detection.

    Gaussian smoothing, Sobel gradients, non-maximum suppression along the
    quantized gradient direction, then double-threshold hysteresis with
    8-connected linking. Thresholds are fractions of the maximum gradient
    magnitude.
    """
    gx, gy = gradient_field(img, cfg.gaussian_sigma)
    magnitude = np.hypot(gx, gy)
    peak = magnitude.max()
    if peak == 0:
        return BinaryImage(np.zeros_like(magnitude, dtype=bool))
    ridge = suppress_non_maxima(magnitude, gx, gy)
    strong = ridge >= cfg.high_threshold * peak
    weak = ridge >= cfg.low_threshold * peak
    labels, _ = ndimage.label(weak, structure=np.ones((3, 3), dtype=bool))
    keep = np.unique(labels[strong])
    keep = keep[keep > 0]
    edges = np.isin(labels, keep) & weak
    return BinaryImage(edges)
