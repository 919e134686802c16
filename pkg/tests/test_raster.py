import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import flowsim.raster as raster
from flowsim.errors import MalformedImage, UnsupportedFormat
from flowsim.raster import (
    BinaryImage,
    Connectivity,
    GrayImage,
    binarize,
    binary_to_gray,
    decode_image,
    encode_pgm,
    label_components,
    otsu_threshold,
)


class TestDecodePgm:
    def test_ascii_2x2(self):
        data = b"P2\n2 2\n255\n0 255\n128 64\n"
        img = decode_image(data, "pgm")
        assert (img.width, img.height) == (2, 2)
        assert img.pixels.tolist() == [[0, 255], [128, 64]]

    def test_pure_white(self):
        data = b"P2\n10 10\n255\n" + b"255 " * 100
        img = decode_image(data)
        assert img.pixels.min() == 255

    def test_header_comments(self):
        data = b"P2\n# a comment\n2 1 # trailing\n255\n7 9\n"
        img = decode_image(data)
        assert img.pixels.tolist() == [[7, 9]]

    def test_binary_roundtrip(self):
        rng = np.random.default_rng(0)
        img = GrayImage(rng.integers(0, 256, size=(17, 23), dtype=np.uint8))
        assert np.array_equal(decode_image(encode_pgm(img)).pixels, img.pixels)

    def test_ascii_roundtrip(self):
        rng = np.random.default_rng(1)
        img = GrayImage(rng.integers(0, 256, size=(5, 9), dtype=np.uint8))
        assert np.array_equal(
            decode_image(encode_pgm(img, binary=False)).pixels, img.pixels
        )

    @given(
        arrays(np.uint8, st.tuples(st.integers(1, 12), st.integers(1, 12)))
    )
    @settings(max_examples=40, deadline=None)
    def test_roundtrip_property(self, pixels):
        img = GrayImage(pixels)
        for binary in (True, False):
            again = decode_image(encode_pgm(img, binary=binary))
            assert np.array_equal(again.pixels, img.pixels)

    @pytest.mark.parametrize(
        "data",
        [
            b"",
            b"P3\n1 1\n255\n0",          # wrong magic
            b"P2\n2 2\n255\n0 1 2",       # missing sample
            b"P2\n1 1\n65535\n0",         # unsupported maxval
            b"P2\n1 1\n255\nzz",          # non-numeric
            b"P5\n4 4\n255\n\x00\x01",    # truncated raster
            b"P2\n0 3\n255\n",            # zero dimension
        ],
    )
    def test_malformed(self, data):
        with pytest.raises(MalformedImage):
            decode_image(data)

    def test_unknown_format(self):
        with pytest.raises(UnsupportedFormat):
            decode_image(b"anything", "tiff")


@pytest.mark.skipif(not raster.PNG_SUPPORTED, reason="Pillow not installed")
class TestDecodePng:
    def test_rec601_luminance(self, tmp_path):
        from PIL import Image

        rgb = np.zeros((2, 2, 3), dtype=np.uint8)
        rgb[0, 0] = (255, 0, 0)
        rgb[0, 1] = (0, 255, 0)
        rgb[1, 0] = (0, 0, 255)
        rgb[1, 1] = (10, 20, 30)
        path = tmp_path / "t.png"
        Image.fromarray(rgb).save(path)
        img = decode_image(path.read_bytes(), "png")
        # 0.299 R + 0.587 G + 0.114 B, rounded to nearest
        assert img.pixels.tolist() == [[76, 150], [29, 18]]

    def test_gray_png_identity(self, tmp_path):
        from PIL import Image

        gray = np.arange(16, dtype=np.uint8).reshape(4, 4) * 16
        path = tmp_path / "g.png"
        Image.fromarray(gray, mode="L").save(path)
        img = decode_image(path.read_bytes(), "png")
        assert np.array_equal(img.pixels, gray)


class TestBinarize:
    def test_all_white_fixed(self):
        img = GrayImage(np.full((4, 4), 255, dtype=np.uint8))
        assert binarize(img, 128).foreground_count() == 0

    def test_all_black_fixed(self):
        img = GrayImage(np.zeros((4, 4), dtype=np.uint8))
        assert binarize(img, 128).foreground_count() == 16

    def test_otsu_bimodal(self):
        # expected threshold frozen from a brute-force scan over all t
        pixels = np.zeros((100, 100), dtype=np.uint8)
        pixels[:50] = 20
        pixels[50:] = 230
        img = GrayImage(pixels)

        def brute_force_otsu(values):
            best_t, best_var = 1, -1.0
            flat = values.ravel().astype(float)
            for t in range(1, 256):
                lo = flat[flat < t]
                hi = flat[flat >= t]
                if lo.size == 0 or hi.size == 0:
                    continue
                var = lo.size * hi.size * (lo.mean() - hi.mean()) ** 2
                if var > best_var + 1e-9:
                    best_var, best_t = var, t
            return best_t

        t = otsu_threshold(img)
        assert t == brute_force_otsu(img.pixels)
        assert 20 < t <= 230  # separates the modes
        assert binarize(img).foreground_count() == 5000

    def test_fixed_threshold_bounds(self):
        img = GrayImage(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            binarize(img, 300)

    @given(st.integers(0, 255), st.integers(0, 255))
    @settings(max_examples=40, deadline=None)
    def test_foreground_monotone_in_threshold(self, t1, t2):
        rng = np.random.default_rng(7)
        img = GrayImage(rng.integers(0, 256, size=(12, 12), dtype=np.uint8))
        lo, hi = sorted((t1, t2))
        assert (
            binarize(img, lo).foreground_count()
            <= binarize(img, hi).foreground_count()
        )


class TestLabelComponents:
    def test_empty(self):
        img = BinaryImage(np.zeros((5, 5), dtype=bool))
        assert label_components(img) == []

    def test_two_squares(self):
        grid = np.zeros((10, 10), dtype=bool)
        grid[1:4, 1:4] = True
        grid[6:9, 6:9] = True
        comps = label_components(BinaryImage(grid))
        assert [c.area for c in comps] == [9, 9]
        assert [c.label for c in comps] == [1, 2]
        assert comps[0].bounding_box == (1, 1, 3, 3)

    def test_diagonal_connectivity(self):
        grid = np.zeros((4, 4), dtype=bool)
        grid[1, 1] = grid[2, 2] = True
        img = BinaryImage(grid)
        assert len(label_components(img, Connectivity.EIGHT)) == 1
        assert len(label_components(img, Connectivity.FOUR)) == 2

    def test_labels_follow_raster_order(self):
        grid = np.zeros((6, 12), dtype=bool)
        grid[4, 1] = True   # later row, early column
        grid[0, 9] = True   # first row, late column: must get label 1
        grid[2, 4] = True
        comps = label_components(BinaryImage(grid))
        firsts = [tuple(c.pixels[0]) for c in comps]
        assert firsts == [(9, 0), (4, 2), (1, 4)]

    def test_determinism(self):
        rng = np.random.default_rng(3)
        grid = rng.random((30, 30)) < 0.4
        a = label_components(BinaryImage(grid))
        b = label_components(BinaryImage(grid.copy()))
        assert len(a) == len(b)
        for ca, cb in zip(a, b):
            assert ca.label == cb.label
            assert np.array_equal(ca.pixels, cb.pixels)
            assert ca.bounding_box == cb.bounding_box

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_areas_partition_foreground(self, seed):
        rng = np.random.default_rng(seed)
        grid = rng.random((20, 20)) < 0.35
        img = BinaryImage(grid)
        comps = label_components(img)
        assert sum(c.area for c in comps) == img.foreground_count()
        # bounding boxes are tight
        for c in comps:
            x0, y0, x1, y1 = c.bounding_box
            assert c.pixels[:, 0].min() == x0 and c.pixels[:, 0].max() == x1
            assert c.pixels[:, 1].min() == y0 and c.pixels[:, 1].max() == y1


def test_binary_to_gray_convention():
    grid = np.zeros((2, 2), dtype=bool)
    grid[0, 0] = True
    gray = binary_to_gray(BinaryImage(grid))
    assert gray.pixels[0, 0] == 0 and gray.pixels[1, 1] == 255


def test_synth_render_pgm_roundtrip(small_corpus):
    image, _ = small_corpus[0]
    again = decode_image(encode_pgm(image))
    assert np.array_equal(again.pixels, image.pixels)
