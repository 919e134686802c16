import json
import math

import numpy as np
import pytest

from flowsim.classify import FlowchartRole
from flowsim.errors import LayoutInvalid
from flowsim.raster import binarize
from flowsim.synth import (
    PROV_BACKGROUND,
    PROV_EDGE,
    PROV_NODE_FILL,
    PROV_NODE_OUTLINE,
    PROV_TEXT,
    CorpusConstraints,
    EdgeSpec,
    Lcg,
    NodeSpec,
    generate_corpus,
    generate_flowchart_layout,
    layout_from_dict,
    render,
    truth_to_dict,
)


class TestLcg:
    def test_documented_recurrence(self):
        rng = Lcg(1)
        assert rng.next_u32() == (1664525 * 1 + 1013904223) % (1 << 32)

    def test_determinism(self):
        a = [Lcg(99).next_u32() for _ in range(5)]
        b = [Lcg(99).next_u32() for _ in range(5)]
        assert a == b

    def test_randint_bounds(self):
        rng = Lcg(3)
        values = [rng.randint(4, 9) for _ in range(200)]
        assert min(values) >= 4 and max(values) <= 9
        assert len(set(values)) == 6


class TestRender:
    def test_filled_rectangle_pixel_count(self):
        node = NodeSpec(FlowchartRole.PROCESS, (60, 40), (80, 40), filled=True)
        image, truth = render([node], [], (130, 90))
        assert binarize(image, 128).foreground_count() == 3200
        assert truth.nodes[0].C == 3200
        assert truth.nodes[0].B == 20.0

    def test_filled_circle_area(self):
        node = NodeSpec(FlowchartRole.CONNECTOR, (60, 60), (50,), filled=True)
        image, truth = render([node], [], (121, 121))
        count = binarize(image, 128).foreground_count()
        assert abs(count - math.pi * 2500) <= 0.02 * math.pi * 2500
        assert truth.nodes[0].A == truth.nodes[0].B == 50.0

    def test_truth_vector_and_provenance_partition(self):
        rng = Lcg(8)
        constraints = CorpusConstraints(min_nodes=4, max_nodes=4)
        nodes, edges, canvas = generate_flowchart_layout(rng, constraints)
        image, truth = render(nodes, edges, canvas)
        roles = [n.role for n in nodes]
        assert truth.vector.as_tuple() == (
            roles.count(FlowchartRole.CONNECTOR),
            roles.count(FlowchartRole.START_STOP),
            roles.count(FlowchartRole.DECISION),
            roles.count(FlowchartRole.PROCESS),
        )
        assert len(edges) == 3
        # provenance tags exactly the foreground
        fg = binarize(image, 128).pixels
        assert np.array_equal(truth.provenance != PROV_BACKGROUND, fg)
        present = set(np.unique(truth.provenance).tolist())
        assert {PROV_NODE_OUTLINE, PROV_EDGE, PROV_TEXT} <= present
        assert PROV_NODE_FILL not in present

    def test_render_is_deterministic(self):
        rng = Lcg(21)
        nodes, edges, canvas = generate_flowchart_layout(rng)
        a, _ = render(nodes, edges, canvas)
        b, _ = render(nodes, edges, canvas)
        assert np.array_equal(a.pixels, b.pixels)

    def test_overlap_rejected(self):
        nodes = [
            NodeSpec(FlowchartRole.PROCESS, (60, 40), (80, 40)),
            NodeSpec(FlowchartRole.PROCESS, (70, 50), (80, 40)),
        ]
        with pytest.raises(LayoutInvalid):
            render(nodes, [], (200, 200))

    def test_out_of_canvas_rejected(self):
        node = NodeSpec(FlowchartRole.CONNECTOR, (10, 10), (30,))
        with pytest.raises(LayoutInvalid):
            render([node], [], (100, 100))

    def test_edge_outside_canvas_rejected(self):
        node = NodeSpec(FlowchartRole.CONNECTOR, (60, 60), (20,))
        edge = EdgeSpec(0, 0, ((60, 90), (60, 300)))
        with pytest.raises(LayoutInvalid):
            render([node], [edge], (120, 120))


class TestGenerateCorpus:
    def test_same_seed_identical(self):
        a = generate_corpus(123, 4)
        b = generate_corpus(123, 4)
        for (img_a, truth_a), (img_b, truth_b) in zip(a, b):
            assert np.array_equal(img_a.pixels, img_b.pixels)
            assert truth_a.vector == truth_b.vector
            assert np.array_equal(truth_a.provenance, truth_b.provenance)

    def test_prefix_property(self):
        long = generate_corpus(123, 6)
        short = generate_corpus(123, 4)
        for (img_a, _), (img_b, _) in zip(short, long):
            assert np.array_equal(img_a.pixels, img_b.pixels)

    def test_twenty_figures_nonzero_vectors(self):
        figures = generate_corpus(7, 20)
        assert len(figures) == 20
        assert all(truth.vector.total > 0 for _, truth in figures)

    def test_node_count_range(self):
        for _, truth in generate_corpus(55, 10):
            assert 3 <= len(truth.nodes) <= 15

    def test_safe_sizes_keep_min_dimension(self):
        for _, truth in generate_corpus(17, 10):
            for node in truth.nodes:
                assert 2 * node.B >= 20


class TestLayoutJson:
    def test_roundtrip_render(self):
        doc = {
            "canvas": [140, 220],
            "nodes": [
                {"role": "start_stop", "center": [70, 45], "size": [44, 28]},
                {
                    "role": "process",
                    "center": [70, 160],
                    "size": [84, 46],
                    "label_blobs": [[70, 160, 2.0]],
                },
            ],
            "edges": [
                {"from": 0, "to": 1, "waypoints": [[70, 78], [70, 128]]}
            ],
        }
        nodes, edges, canvas = layout_from_dict(doc)
        image, truth = render(nodes, edges, canvas)
        assert truth.vector.as_tuple() == (0, 1, 0, 1)
        assert image.width == 140 and image.height == 220

    def test_bad_document(self):
        with pytest.raises(LayoutInvalid):
            layout_from_dict({"nodes": []})
        with pytest.raises(LayoutInvalid):
            layout_from_dict({"canvas": [10, 10], "nodes": [{"role": "nope"}]})

    def test_truth_summary_is_json_ready(self):
        figures = generate_corpus(2, 1)
        doc = truth_to_dict(figures[0][1])
        text = json.dumps(doc)
        parsed = json.loads(text)
        assert parsed["activity_count"] == sum(parsed["vector"].values())
        assert set(parsed["provenance_counts"]) == {
            "node_outline",
            "node_fill",
            "edge",
            "text",
        }


def test_analytic_truth_matches_measurements(small_corpus, fixed_cfg):
    """Per-node analytic A, B, C stay within 2 percent of pipeline values."""
    from flowsim.classify import fill_outline
    from flowsim.contour import measure_shape
    from flowsim.preprocess import preprocess
    from flowsim.raster import label_components

    image, truth = small_corpus[0]
    cleaned, _ = preprocess(binarize(image, 128))
    comps = label_components(cleaned)
    assert len(comps) == len(truth.nodes)
    # components are labeled in raster order; nodes are stacked top to bottom
    for comp, node in zip(comps, truth.nodes):
        m = measure_shape(fill_outline(comp))
        assert abs(m.A - node.A) <= 0.02 * node.A + 1.0
        assert abs(m.B - node.B) <= 0.02 * node.B + 1.0
        assert abs(m.C - node.C) <= 0.035 * node.C
