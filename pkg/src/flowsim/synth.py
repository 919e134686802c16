"""Synthetic flowchart renderer with exact ground truth.

Figures are rasterized by pixel-center inclusion tests, so every node's
analytic radial values (A, B) and area (C) are known in closed form. Strokes
are centered on the nominal curve (half a stroke width in, half out), which
keeps the thinned skeleton on the nominal boundary. A provenance array tags
each foreground pixel as node outline, node fill, edge, or text, enabling
exact scoring of what the cleanup stages remove.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .classify import FeatureVector, FlowchartRole
from .errors import LayoutInvalid
from .raster import GrayImage

# provenance tags
PROV_BACKGROUND = 0
PROV_NODE_OUTLINE = 1
PROV_NODE_FILL = 2
PROV_EDGE = 3
PROV_TEXT = 4

PROV_NAMES = {
    PROV_NODE_OUTLINE: "node_outline",
    PROV_NODE_FILL: "node_fill",
    PROV_EDGE: "edge",
    PROV_TEXT: "text",
}

_STROKE_HALF = 1.0  # outlines span the nominal curve plus/minus one pixel


class Lcg:
    """32-bit linear congruential generator.

    state[n+1] = (1664525 * state[n] + 1013904223) mod 2**32 (the Numerical
    Recipes constants). Fixed here so seeded corpora are identical across
    implementations and platforms.
    """

    MULTIPLIER = 1664525
    INCREMENT = 1013904223
    MODULUS = 1 << 32

    def __init__(self, seed: int):
        self._state = seed % self.MODULUS

    def next_u32(self) -> int:
        self._state = (self.MULTIPLIER * self._state + self.INCREMENT) % self.MODULUS
        return self._state

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        return lo + (hi - lo) * (self.next_u32() / self.MODULUS)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform-ish integer in [lo, hi] (modulo bias is irrelevant here)."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u32() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.next_u32() % len(seq)]


@dataclass(frozen=True)
class NodeSpec:
    """One flowchart node.

    ``size`` depends on the role: (radius,) for a connector circle, semi-axes
    (a, b) for a start/stop ellipse, full extents (w, h) for a process
    rectangle, and half-diagonals (p, q) for a decision diamond.
    ``label_blobs`` are (x, y, radius) disks standing in for label text.
    """

    role: FlowchartRole
    center: tuple[int, int]
    size: tuple[float, ...]
    filled: bool = False
    label_blobs: tuple[tuple[int, int, float], ...] = ()


@dataclass(frozen=True)
class EdgeSpec:
    """A flow arrow: a polyline with an optional arrowhead at the last point."""

    src: int
    dst: int
    waypoints: tuple[tuple[int, int], ...]
    arrowhead: bool = True


@dataclass(frozen=True)
class NodeTruth:
    role: FlowchartRole
    A: float
    B: float
    C: float


@dataclass
class GroundTruth:
    vector: FeatureVector
    nodes: tuple[NodeTruth, ...]
    provenance: np.ndarray  # uint8 tag per pixel

    def provenance_counts(self) -> dict:
        return {
            name: int((self.provenance == tag).sum())
            for tag, name in PROV_NAMES.items()
        }


def _diamond_inradius(p: float, q: float) -> float:
    return p * q / math.hypot(p, q)


def node_truth(spec: NodeSpec) -> NodeTruth:
    """Closed-form A, B, C of the nominal continuous shape."""
    role, size = spec.role, spec.size
    if role is FlowchartRole.CONNECTOR:
        (r,) = size
        return NodeTruth(role, float(r), float(r), math.pi * r * r)
    if role is FlowchartRole.START_STOP:
        a, b = size
        return NodeTruth(role, float(max(a, b)), float(min(a, b)), math.pi * a * b)
    if role is FlowchartRole.PROCESS:
        w, h = size
        return NodeTruth(role, math.hypot(w, h) / 2.0, min(w, h) / 2.0, float(w * h))
    p, q = size
    return NodeTruth(role, float(max(p, q)), _diamond_inradius(p, q), 2.0 * p * q)


def _filled_mask(spec: NodeSpec, grow: float, shape: tuple[int, int]) -> np.ndarray:
    """Pixel-center inclusion mask of the node grown by ``grow`` pixels.

    Rectangles use half-open extents so a w-by-h rectangle covers exactly
    w*h pixel centers; diamonds grow by scaling about the center so the
    offset edge stays parallel.
    """
    h, w = shape
    cx, cy = spec.center
    ys, xs = np.ogrid[0:h, 0:w]
    role, size = spec.role, spec.size
    empty = np.zeros(shape, dtype=bool)
    if role is FlowchartRole.CONNECTOR:
        (r,) = size
        r = r + grow
        if r <= 0:
            return empty
        return (xs - cx) ** 2 + (ys - cy) ** 2 <= r * r
    if role is FlowchartRole.START_STOP:
        a, b = size
        a, b = a + grow, b + grow
        if a <= 0 or b <= 0:
            return empty
        return ((xs - cx) / a) ** 2 + ((ys - cy) / b) ** 2 <= 1.0
    if role is FlowchartRole.PROCESS:
        w2, h2 = size[0] / 2.0 + grow, size[1] / 2.0 + grow
        return (
            (xs >= cx - w2) & (xs < cx + w2) & (ys >= cy - h2) & (ys < cy + h2)
        )
    p, q = size
    scale = 1.0 + grow / _diamond_inradius(p, q)
    if scale <= 0:
        return empty
    return np.abs(xs - cx) / (p * scale) + np.abs(ys - cy) / (q * scale) <= 1.0


def node_half_extents(spec: NodeSpec, grow: float = _STROKE_HALF) -> tuple[float, float]:
    """Half width/height of the node grown by ``grow`` (the outer outline)."""
    role, size = spec.role, spec.size
    if role is FlowchartRole.CONNECTOR:
        return size[0] + grow, size[0] + grow
    if role is FlowchartRole.START_STOP:
        return size[0] + grow, size[1] + grow
    if role is FlowchartRole.PROCESS:
        return size[0] / 2.0 + grow, size[1] / 2.0 + grow
    p, q = size
    scale = 1.0 + grow / _diamond_inradius(p, q)
    return p * scale, q * scale


def _line_pixels(p0: tuple[int, int], p1: tuple[int, int]) -> list[tuple[int, int]]:
    """Bresenham segment from p0 to p1, inclusive."""
    x0, y0 = p0
    x1, y1 = p1
    dx, dy = abs(x1 - x0), -abs(y1 - y0)
    sx = 1 if x0 < x1 else -1
    sy = 1 if y0 < y1 else -1
    err = dx + dy
    pts = []
    while True:
        pts.append((x0, y0))
        if x0 == x1 and y0 == y1:
            return pts
        e2 = 2 * err
        if e2 >= dy:
            err += dy
            x0 += sx
        if e2 <= dx:
            err += dx
            y0 += sy


def _triangle_pixels(tip, base_center, half_width) -> list[tuple[int, int]]:
    """Filled arrowhead triangle given its tip and base midpoint."""
    tx, ty = tip
    bx, by = base_center
    length = math.hypot(tx - bx, ty - by)
    if length == 0:
        return [(int(round(tx)), int(round(ty)))]
    px, py = -(ty - by) / length, (tx - bx) / length  # unit perpendicular
    verts = [
        (tx, ty),
        (bx + px * half_width, by + py * half_width),
        (bx - px * half_width, by - py * half_width),
    ]
    min_x = math.floor(min(v[0] for v in verts))
    max_x = math.ceil(max(v[0] for v in verts))
    min_y = math.floor(min(v[1] for v in verts))
    max_y = math.ceil(max(v[1] for v in verts))

    def edge(a, b, x, y):
        return (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0])

    pts = []
    eps = 1e-9
    for y in range(min_y, max_y + 1):
        for x in range(min_x, max_x + 1):
            d0 = edge(verts[0], verts[1], x, y)
            d1 = edge(verts[1], verts[2], x, y)
            d2 = edge(verts[2], verts[0], x, y)
            inside = (d0 >= -eps and d1 >= -eps and d2 >= -eps) or (
                d0 <= eps and d1 <= eps and d2 <= eps
            )
            if inside:
                pts.append((x, y))
    return pts


def render(
    nodes: tuple[NodeSpec, ...] | list[NodeSpec],
    edges: tuple[EdgeSpec, ...] | list[EdgeSpec] = (),
    canvas: tuple[int, int] = (400, 400),
) -> tuple[GrayImage, GroundTruth]:
    """Rasterize a layout into black-on-white line art plus ground truth.

    Nodes must fit the canvas with a 2 pixel margin and must not overlap each
    other (LayoutInvalid otherwise). Edge and text pixels never overwrite
    node pixels in the provenance map.
    """
    width, height = canvas
    if width < 8 or height < 8:
        raise LayoutInvalid(f"canvas {canvas} is too small")
    prov = np.zeros((height, width), dtype=np.uint8)

    counts = {role: 0 for role in FlowchartRole}
    truths = []
    for i, spec in enumerate(nodes):
        hw, hh = node_half_extents(spec)
        cx, cy = spec.center
        if cx - hw < 2 or cx + hw > width - 3 or cy - hh < 2 or cy + hh > height - 3:
            raise LayoutInvalid(f"node {i} does not fit the canvas with margin 2")
        if spec.filled:
            solid = _filled_mask(spec, 0.0, prov.shape)
            if (prov[solid] != PROV_BACKGROUND).any():
                raise LayoutInvalid(f"node {i} overlaps an earlier node")
            prov[solid] = PROV_NODE_FILL
        else:
            outer = _filled_mask(spec, _STROKE_HALF, prov.shape)
            if (prov[outer] != PROV_BACKGROUND).any():
                raise LayoutInvalid(f"node {i} overlaps an earlier node")
            inner = _filled_mask(spec, -_STROKE_HALF, prov.shape)
            prov[outer & ~inner] = PROV_NODE_OUTLINE
        counts[spec.role] += 1
        truths.append(node_truth(spec))

    def paint(points, tag):
        for x, y in points:
            if not (0 <= x < width and 0 <= y < height):
                raise LayoutInvalid(f"pixel ({x}, {y}) is outside the canvas")
            if prov[y, x] == PROV_BACKGROUND:
                prov[y, x] = tag

    for e in edges:
        pts = list(e.waypoints)
        if len(pts) < 2:
            raise LayoutInvalid("an edge needs at least two waypoints")
        for a, b in zip(pts, pts[1:]):
            paint(_line_pixels(a, b), PROV_EDGE)
        if e.arrowhead:
            tip = pts[-1]
            prev = pts[-2]
            d = math.hypot(tip[0] - prev[0], tip[1] - prev[1])
            if d > 0:
                ux, uy = (tip[0] - prev[0]) / d, (tip[1] - prev[1]) / d
                base = (tip[0] - 6 * ux, tip[1] - 6 * uy)
                paint(_triangle_pixels(tip, base, 3.0), PROV_EDGE)

    for spec in nodes:
        for bx, by, radius in spec.label_blobs:
            blob = NodeSpec(FlowchartRole.CONNECTOR, (bx, by), (radius,))
            mask = _filled_mask(blob, 0.0, prov.shape)
            ys, xs = np.nonzero(mask)
            paint(zip(xs.tolist(), ys.tolist()), PROV_TEXT)

    vector = FeatureVector(
        connector=counts[FlowchartRole.CONNECTOR],
        start_stop=counts[FlowchartRole.START_STOP],
        decision=counts[FlowchartRole.DECISION],
        process=counts[FlowchartRole.PROCESS],
    )
    gray = GrayImage(np.where(prov != PROV_BACKGROUND, 0, 255).astype(np.uint8))
    return gray, GroundTruth(vector, tuple(truths), prov)


@dataclass(frozen=True)
class CorpusConstraints:
    min_nodes: int = 3
    max_nodes: int = 15
    safe_shapes: bool = True   # keep sizes/aspects out of known cascade traps
    include_edges: bool = True
    include_text: bool = True
    filled: bool = False
    canvas_width: int = 380

    def __post_init__(self):
        if not 1 <= self.min_nodes <= self.max_nodes:
            raise ValueError("need 1 <= min_nodes <= max_nodes")


# middle-of-chart role mix, weighted toward process boxes
_ROLE_POOL = (
    [FlowchartRole.PROCESS] * 5
    + [FlowchartRole.DECISION] * 3
    + [FlowchartRole.CONNECTOR] * 2
    + [FlowchartRole.START_STOP]
)


def sample_node_size(role: FlowchartRole, rng: Lcg, safe_shapes: bool = True) -> tuple:
    """Random size tuple for a role.

    Safe mode keeps every shape where the cascade is reliable: rectangles out
    of the 3:4 ellipse-collision aspect band, every non-circle with A - B
    comfortably above the 10 px circle tolerance, and discretization error
    inside the 0.95..1.05 ratio bands.
    """
    if role is FlowchartRole.CONNECTOR:
        # below r = 27 a thinned ring drops under the 150 px text filter
        return (rng.randint(27, 36),) if safe_shapes else (rng.randint(10, 30),)
    if role is FlowchartRole.START_STOP:
        if safe_shapes:
            b = rng.randint(30, 40)
            return (b + rng.randint(16, 30), b)
        b = rng.randint(12, 34)
        return (b + rng.randint(4, 36), b)
    if role is FlowchartRole.PROCESS:
        if safe_shapes:
            h = rng.randint(44, 62)
            return (round(h * rng.uniform(1.8, 2.6)), h)
        h = rng.randint(20, 64)
        return (round(h * rng.uniform(1.0, 3.0)), h)
    if safe_shapes:
        p = rng.randint(72, 84)
        return (p, round(p * rng.uniform(0.60, 0.75)))
    p = rng.randint(16, 62)
    return (p, max(8, round(p * rng.uniform(0.3, 0.95))))


def _interior_box(spec: NodeSpec) -> tuple[float, float]:
    """Half extents of a text-safe box inside the node."""
    role, size = spec.role, spec.size
    if role is FlowchartRole.CONNECTOR:
        half = size[0] / math.sqrt(2.0)
        return half - 5.0, half - 5.0
    if role is FlowchartRole.START_STOP:
        return size[0] / math.sqrt(2.0) - 5.0, size[1] / math.sqrt(2.0) - 5.0
    if role is FlowchartRole.PROCESS:
        return size[0] / 2.0 - 6.0, size[1] / 2.0 - 6.0
    return size[0] / 2.0 - 6.0, size[1] / 2.0 - 6.0


def generate_flowchart_layout(
    rng: Lcg, constraints: CorpusConstraints = CorpusConstraints()
) -> tuple[list[NodeSpec], list[EdgeSpec], tuple[int, int]]:
    """One random top-to-bottom flowchart layout.

    Nodes are stacked in a single column with horizontal jitter; every
    consecutive pair is joined by an arrow that stops a few pixels short of
    both outlines, so strokes never touch node outlines.
    """
    count = rng.randint(constraints.min_nodes, constraints.max_nodes)
    roles = []
    for i in range(count):
        if count >= 2 and i in (0, count - 1):
            roles.append(FlowchartRole.START_STOP)
        else:
            roles.append(rng.choice(_ROLE_POOL))

    width = constraints.canvas_width
    margin = 14
    cursor = margin
    nodes: list[NodeSpec] = []
    tops: list[int] = []
    bottoms: list[int] = []
    for i, role in enumerate(roles):
        size = sample_node_size(role, rng, constraints.safe_shapes)
        probe = NodeSpec(role, (0, 0), size)
        hw, hh = node_half_extents(probe)
        hw_i, hh_i = math.ceil(hw), math.ceil(hh)
        cx = width // 2 + rng.randint(-26, 26)
        cx = min(max(cx, hw_i + 4), width - hw_i - 5)
        cy = cursor + hh_i
        blobs = []
        if constraints.include_text and not constraints.filled:
            bx_half, by_half = _interior_box(probe)
            if bx_half >= 1 and by_half >= 1:
                for _ in range(rng.randint(1, 2)):
                    blobs.append(
                        (
                            cx + rng.randint(-int(bx_half), int(bx_half)),
                            cy + rng.randint(-int(by_half), int(by_half)),
                            rng.uniform(1.4, 2.8),
                        )
                    )
        nodes.append(
            NodeSpec(role, (cx, cy), size, constraints.filled, tuple(blobs))
        )
        tops.append(cy - hh_i)
        bottoms.append(cy + hh_i)
        cursor = cy + hh_i + rng.randint(34, 52)

    height = bottoms[-1] + margin
    edges: list[EdgeSpec] = []
    if constraints.include_edges:
        for i in range(count - 1):
            x0, x1 = nodes[i].center[0], nodes[i + 1].center[0]
            start = (x0, bottoms[i] + 3)
            end = (x1, tops[i + 1] - 3)
            if x0 == x1:
                waypoints = (start, end)
            else:
                mid = (start[1] + end[1]) // 2
                waypoints = (start, (x0, mid), (x1, mid), end)
            edges.append(EdgeSpec(i, i + 1, waypoints, arrowhead=True))
    return nodes, edges, (width, height)


def single_node_layout(
    role: FlowchartRole, rng: Lcg, filled: bool = False, safe_shapes: bool = True
) -> tuple[list[NodeSpec], list[EdgeSpec], tuple[int, int]]:
    """A canvas holding one randomly sized node, for classifier tests."""
    size = sample_node_size(role, rng, safe_shapes)
    probe = NodeSpec(role, (0, 0), size, filled)
    hw, hh = node_half_extents(probe)
    hw_i, hh_i = math.ceil(hw) + 8, math.ceil(hh) + 8
    spec = NodeSpec(role, (hw_i, hh_i), size, filled)
    return [spec], [], (2 * hw_i + 1, 2 * hh_i + 1)


def generate_corpus(
    seed: int, count: int, constraints: CorpusConstraints = CorpusConstraints()
) -> list[tuple[GrayImage, GroundTruth]]:
    """``count`` deterministic flowchart figures for the given seed.

    Each figure draws from its own sub-generator seeded off the master
    stream, so a longer corpus extends a shorter one with the same seed.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    master = Lcg(seed)
    figures = []
    for _ in range(count):
        rng = Lcg(master.next_u32())
        nodes, edges, canvas = generate_flowchart_layout(rng, constraints)
        figures.append(render(nodes, edges, canvas))
    return figures


def layout_from_dict(doc: dict) -> tuple[list[NodeSpec], list[EdgeSpec], tuple[int, int]]:
    """Parse the layout JSON accepted by the synth CLI.

    Schema: {"canvas": [w, h], "nodes": [{"role", "center", "size",
    "filled"?, "label_blobs"?}], "edges": [{"from", "to", "waypoints",
    "arrowhead"?}]}. Roles are the FlowchartRole values.
    """
    try:
        canvas = (int(doc["canvas"][0]), int(doc["canvas"][1]))
        nodes = [
            NodeSpec(
                role=FlowchartRole(n["role"]),
                center=(int(n["center"][0]), int(n["center"][1])),
                size=tuple(float(v) for v in n["size"]),
                filled=bool(n.get("filled", False)),
                label_blobs=tuple(
                    (int(b[0]), int(b[1]), float(b[2]))
                    for b in n.get("label_blobs", ())
                ),
            )
            for n in doc["nodes"]
        ]
        edges = [
            EdgeSpec(
                src=int(e["from"]),
                dst=int(e["to"]),
                waypoints=tuple((int(p[0]), int(p[1])) for p in e["waypoints"]),
                arrowhead=bool(e.get("arrowhead", True)),
            )
            for e in doc.get("edges", ())
        ]
    except (KeyError, ValueError, TypeError, IndexError) as exc:
        raise LayoutInvalid(f"bad layout document: {exc}") from exc
    return nodes, edges, canvas


def truth_to_dict(truth: GroundTruth) -> dict:
    """JSON-ready summary written next to each generated figure."""
    return {
        "vector": truth.vector.as_dict(),
        "activity_count": truth.vector.total,
        "nodes": [
            {"role": t.role.value, "A": t.A, "B": t.B, "C": t.C}
            for t in truth.nodes
        ],
        "provenance_counts": truth.provenance_counts(),
    }
