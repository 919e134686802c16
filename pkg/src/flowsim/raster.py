"""Raster primitives: PGM/PNG decoding, binarization, connected components.

Images are dark ink on a light background throughout the pipeline, so the
foreground of a binary image is the set of pixels *below* the threshold.
"""
from __future__ import annotations

import io
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import ndimage

from .errors import MalformedImage, UnsupportedFormat

try:
    from PIL import Image as _PilImage

    PNG_SUPPORTED = True
except ImportError:  # pragma: no cover - Pillow is an optional extra
    _PilImage = None
    PNG_SUPPORTED = False

# Rec.601 weights for reducing color to luminance.
_LUMA = (0.299, 0.587, 0.114)

_STRUCTURE_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCTURE_8 = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class GrayImage:
    """8-bit grayscale image; ``pixels[y, x]`` is the luminance at (x, y)."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be 2-D with positive dimensions")
        if px.dtype != np.uint8:
            if px.size and (px.min() < 0 or px.max() > 255):
                raise ValueError("luminance values must lie in [0, 255]")
            px = px.astype(np.uint8)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class BinaryImage:
    """Foreground mask; ``pixels[y, x]`` is True where there is ink."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.array(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be 2-D with positive dimensions")
        px = px.astype(bool)
        px.flags.writeable = False
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def foreground_count(self) -> int:
        return int(self.pixels.sum())


class Connectivity(Enum):
    FOUR = 4
    EIGHT = 8


@dataclass(frozen=True)
class ConnectedComponent:
    """One maximal connected set of foreground pixels.

    ``pixels`` is an (n, 2) array of (x, y) pairs in raster-scan order and
    ``bounding_box`` is the inclusive (min_x, min_y, max_x, max_y).
    """

    label: int
    pixels: np.ndarray
    bounding_box: tuple[int, int, int, int]
    area: int


def decode_image(data: bytes, fmt: str = "pgm") -> GrayImage:
    """Decode image bytes in the given format ("pgm" or "png").

    PGM covers both the ASCII (P2) and binary (P5) variants with maxval 255.
    PNG requires the optional Pillow dependency; color inputs are reduced to
    luminance with the Rec.601 weighting, rounded to nearest.
    """
    fmt = fmt.lower()
    if fmt == "pgm":
        return _decode_pgm(data)
    if fmt == "png":
        if not PNG_SUPPORTED:
            raise UnsupportedFormat("PNG support requires Pillow (install the 'png' extra)")
        return _decode_png(data)
    raise UnsupportedFormat(f"unknown image format: {fmt!r}")


def _tokens(data: bytes, count: int, start: int = 0) -> tuple[list[bytes], int]:
    """Read whitespace-separated PGM header tokens, skipping # comments."""
    out: list[bytes] = []
    i, n = start, len(data)
    while len(out) < count:
        while i < n and data[i : i + 1].isspace():
            i += 1
        if i < n and data[i] == 0x23:  # '#' comment runs to end of line
            while i < n and data[i] not in (0x0A, 0x0D):
                i += 1
            continue
        j = i
        while j < n and not data[j : j + 1].isspace() and data[j] != 0x23:
            j += 1
        if j == i:
            raise MalformedImage("truncated PGM header")
        out.append(data[i:j])
        i = j
    return out, i


def _decode_pgm(data: bytes) -> GrayImage:
    if len(data) < 2:
        raise MalformedImage("not a PGM file")
    magic = data[:2]
    if magic not in (b"P2", b"P5"):
        raise MalformedImage(f"bad PGM magic {magic!r}")
    try:
        fields, pos = _tokens(data, 3, start=2)
        width, height, maxval = (int(f) for f in fields)
    except (ValueError, MalformedImage) as exc:
        raise MalformedImage(f"invalid PGM header: {exc}") from exc
    if width < 1 or height < 1:
        raise MalformedImage("PGM dimensions must be positive")
    if maxval != 255:
        raise MalformedImage(f"only maxval 255 is supported, got {maxval}")

    if magic == b"P5":
        # exactly one whitespace byte separates the header from the raster
        pos += 1
        raster = data[pos : pos + width * height]
        if len(raster) < width * height:
            raise MalformedImage("truncated PGM raster")
        pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width)
    else:
        try:
            values = np.array(data[pos:].split(), dtype=np.int64)
        except ValueError as exc:
            raise MalformedImage("non-numeric PGM sample") from exc
        if values.size != width * height:
            raise MalformedImage(
                f"expected {width * height} samples, got {values.size}"
            )
        if values.size and (values.min() < 0 or values.max() > 255):
            raise MalformedImage("PGM sample out of range")
        pixels = values.astype(np.uint8).reshape(height, width)
    return GrayImage(pixels)


def _decode_png(data: bytes) -> GrayImage:
    try:
        with _PilImage.open(io.BytesIO(data)) as img:
            img.load()
            if img.mode == "L":
                return GrayImage(np.asarray(img))
            rgb = np.asarray(img.convert("RGB"), dtype=np.float64)
    except MalformedImage:
        raise
    except Exception as exc:
        raise MalformedImage(f"invalid PNG data: {exc}") from exc
    luma = rgb[..., 0] * _LUMA[0] + rgb[..., 1] * _LUMA[1] + rgb[..., 2] * _LUMA[2]
    return GrayImage(np.rint(luma).astype(np.uint8))


def encode_pgm(img: GrayImage, binary: bool = True) -> bytes:
    """Encode as P5 (binary, default) or P2 (ASCII) with maxval 255."""
    header = f"{'P5' if binary else 'P2'}\n{img.width} {img.height}\n255\n"
    if binary:
        return header.encode("ascii") + img.pixels.tobytes()
    # 17 samples per line keeps rows under Netpbm's 70-character guidance
    flat = img.pixels.ravel()
    lines = (
        " ".join(str(v) for v in flat[i : i + 17]) for i in range(0, flat.size, 17)
    )
    return (header + "\n".join(lines) + "\n").encode("ascii")


def binary_to_gray(img: BinaryImage) -> GrayImage:
    """Render a mask as ink: foreground becomes 0, background 255."""
    return GrayImage(np.where(img.pixels, 0, 255).astype(np.uint8))


def otsu_threshold(img: GrayImage) -> int:
    """Threshold t in [1, 255] maximizing the between-class variance.

    Classes are {luminance < t} and {luminance >= t}, matching the rule
    binarize applies; on ties the smallest t wins.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.float64)
    count = np.cumsum(hist)
    mass = np.cumsum(hist * np.arange(256))
    # class statistics for every candidate t = 1..255
    n0 = count[:-1]
    n1 = count[-1] - n0
    s0 = mass[:-1]
    s1 = mass[-1] - s0
    with np.errstate(divide="ignore", invalid="ignore"):
        mu0 = np.where(n0 > 0, s0 / n0, 0.0)
        mu1 = np.where(n1 > 0, s1 / n1, 0.0)
    between = np.where((n0 > 0) & (n1 > 0), n0 * n1 * (mu0 - mu1) ** 2, 0.0)
    return int(np.argmax(between)) + 1


def binarize(img: GrayImage, threshold: int | None = None) -> BinaryImage:
    """Threshold to a dark-foreground mask: foreground where luminance < t.

    ``threshold=None`` selects t with Otsu's method; a fixed integer in
    [0, 255] applies that value directly.
    """
    if threshold is None:
        threshold = otsu_threshold(img)
    elif not 0 <= threshold <= 255:
        raise ValueError(f"fixed threshold must be in [0, 255], got {threshold}")
    return BinaryImage(img.pixels < threshold)


def label_components(
    img: BinaryImage, connectivity: Connectivity = Connectivity.EIGHT
) -> list[ConnectedComponent]:
    """Partition the foreground into connected components.

    Labels start at 1 and follow the raster-scan order of each component's
    first-encountered pixel, so the listing is deterministic.
    """
    structure = _STRUCTURE_8 if connectivity is Connectivity.EIGHT else _STRUCTURE_4
    labels, count = ndimage.label(img.pixels, structure=structure)
    if count == 0:
        return []

    ys, xs = np.nonzero(labels)  # raster order
    raw = labels[ys, xs]
    raw_ids, first_pos = np.unique(raw, return_index=True)
    order = np.argsort(first_pos, kind="stable")
    remap = np.zeros(count + 1, dtype=np.int64)
    remap[raw_ids[order]] = np.arange(1, count + 1)
    relabeled = remap[raw]

    components = []
    for new_label in range(1, count + 1):
        sel = relabeled == new_label
        cx = xs[sel]
        cy = ys[sel]
        pixels = np.column_stack((cx, cy)).astype(np.int32)
        bbox = (int(cx.min()), int(cy.min()), int(cx.max()), int(cy.max()))
        components.append(
            ConnectedComponent(new_label, pixels, bbox, int(pixels.shape[0]))
        )
    return components


def component_mask(component: ConnectedComponent, pad: int = 1) -> tuple[np.ndarray, tuple[int, int]]:
    """Rasterize a component into a cropped mask.

    Returns (mask, (origin_x, origin_y)) where mask[y, x] covers the
    component's bounding box plus ``pad`` pixels on every side.
    """
    x0, y0, x1, y1 = component.bounding_box
    mask = np.zeros((y1 - y0 + 1 + 2 * pad, x1 - x0 + 1 + 2 * pad), dtype=bool)
    mask[component.pixels[:, 1] - y0 + pad, component.pixels[:, 0] - x0 + pad] = True
    return mask, (x0 - pad, y0 - pad)
