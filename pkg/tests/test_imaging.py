import math

import numpy as np
import pytest

from icc import imaging
from icc.errors import InpaintUnderconstrained, InvalidParameter

from oracles import brute_median, brute_morphology


def rgb(h, w, value=0):
    return np.full((h, w, 3), value, dtype=np.uint8)


def noise_image(rng, h=24, w=32):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


def gradient_image(w=400, h=200):
    ramp = np.round(np.linspace(0.0, 255.0, w)).astype(np.uint8)
    return np.stack([np.tile(ramp, (h, 1))] * 3, axis=-1)


class TestMedianFilter:
    def test_kernel_one_is_identity(self, rng):
        img = noise_image(rng)
        assert np.array_equal(imaging.median_filter(img, 1), img)

    def test_constant_image_unchanged(self):
        img = rgb(10, 12, 77)
        assert np.array_equal(imaging.median_filter(img, 5), img)

    def test_salt_pixel_removed(self):
        img = rgb(9, 9, 10)
        img[4, 4] = 250
        out = imaging.median_filter(img, 3)
        assert (out == 10).all()

    def test_matches_brute_force_oracle(self, rng):
        img = noise_image(rng, 14, 11)
        for kernel in (3, 5):
            assert np.array_equal(imaging.median_filter(img, kernel), brute_median(img, kernel))

    def test_preserves_shape_and_range(self, rng):
        img = noise_image(rng)
        out = imaging.median_filter(img, 5)
        assert out.shape == img.shape and out.dtype == np.uint8

    def test_even_kernel_rejected(self):
        with pytest.raises(InvalidParameter):
            imaging.median_filter(rgb(4, 4), 4)


class TestBilateralFilter:
    def test_constant_image_unchanged(self):
        img = rgb(12, 10, 123)
        out = imaging.bilateral_filter(img, 9, 75.0, 75.0)
        assert np.array_equal(out, img)

    def test_step_edge_preserved_with_small_sigma_color(self):
        img = rgb(16, 20, 20)
        img[:, 10:] = 220
        out = imaging.bilateral_filter(img, 7, 5.0, 10.0)
        assert np.array_equal(out, img)

    def test_large_sigma_color_converges_to_gaussian(self, rng):
        img = noise_image(rng, 18, 25)
        diameter, sigma_space = 7, 2.0
        out = imaging.bilateral_filter(img, diameter, 1e9, sigma_space)
        # oracle: plain windowed Gaussian with the same clamped square window
        r = diameter // 2
        src = img.astype(np.float64)
        padded = np.pad(src, ((r, r), (r, r), (0, 0)), mode="edge")
        num = np.zeros_like(src)
        den = 0.0
        for dy in range(-r, r + 1):
            for dx in range(-r, r + 1):
                w = math.exp(-(dx * dx + dy * dy) / (2 * sigma_space**2))
                num += w * padded[r + dy : r + dy + 18, r + dx : r + dx + 25]
                den += w
        oracle = num / den
        assert np.abs(out.astype(float) - oracle).max() <= 1.0

    def test_parameter_validation(self):
        with pytest.raises(InvalidParameter):
            imaging.bilateral_filter(rgb(4, 4), 4, 75.0, 75.0)
        with pytest.raises(InvalidParameter):
            imaging.bilateral_filter(rgb(4, 4), 9, 0.0, 75.0)
        with pytest.raises(InvalidParameter):
            imaging.bilateral_filter(rgb(4, 4), 9, 75.0, -1.0)

    def test_preserves_range(self, rng):
        out = imaging.bilateral_filter(noise_image(rng), 5, 30.0, 3.0)
        assert out.dtype == np.uint8


class TestInpaint:
    def test_empty_mask_identity(self, rng):
        img = noise_image(rng)
        mask = np.zeros(img.shape[:2], np.uint8)
        assert np.array_equal(imaging.inpaint_fmm(img, mask, 3), img)

    def test_constant_image_stays_constant(self):
        img = rgb(30, 30, 99)
        mask = np.zeros((30, 30), np.uint8)
        mask[10:20, 12:22] = 1
        out = imaging.inpaint_fmm(img, mask, 3)
        assert (out == 99).all()

    def test_untouched_pixels_bit_exact(self, rng):
        img = noise_image(rng, 40, 40)
        mask = np.zeros((40, 40), np.uint8)
        mask[15:25, 10:30] = 1
        out = imaging.inpaint_fmm(img, mask, 3)
        keep = mask == 0
        assert np.array_equal(out[keep], img[keep])

    def test_gradient_hole_reconstruction(self):
        img = gradient_image()
        mask = np.zeros(img.shape[:2], np.uint8)
        mask[90:110, 190:210] = 1
        out = imaging.inpaint_fmm(img, mask, 3)
        err = np.abs(out.astype(int) - img.astype(int))[mask == 1]
        assert err.max() < 10

    def test_full_mask_rejected(self):
        img = rgb(8, 8)
        with pytest.raises(InpaintUnderconstrained):
            imaging.inpaint_fmm(img, np.ones((8, 8), np.uint8), 3)

    def test_mask_shape_mismatch(self):
        with pytest.raises(InvalidParameter):
            imaging.inpaint_fmm(rgb(8, 8), np.zeros((9, 8), np.uint8), 3)

    def test_radius_validation(self):
        with pytest.raises(InvalidParameter):
            imaging.inpaint_fmm(rgb(8, 8), np.zeros((8, 8), np.uint8), 0)

    def test_deterministic(self, rng):
        img = noise_image(rng, 30, 30)
        mask = np.zeros((30, 30), np.uint8)
        mask[5:25, 8:20] = 1
        a = imaging.inpaint_fmm(img, mask, 3)
        b = imaging.inpaint_fmm(img, mask, 3)
        assert np.array_equal(a, b)


class TestKmeans:
    def test_two_color_image_exact(self):
        img = rgb(10, 10, 0)
        img[:, 5:] = 200
        palette, labels = imaging.kmeans_colors(img, 2, seed=42)
        got = {tuple(np.round(c).astype(int)) for c in palette}
        assert got == {(0, 0, 0), (200, 200, 200)}
        # zero inertia: every pixel sits exactly on its centroid
        render = palette[labels]
        assert np.abs(render - img).max() == 0

    def test_determinism_same_seed(self, rng):
        img = noise_image(rng, 20, 20)
        runs = [imaging.kmeans_colors(img, 5, seed=7) for _ in range(3)]
        for palette, labels in runs[1:]:
            assert np.array_equal(palette, runs[0][0])
            assert np.array_equal(labels, runs[0][1])

    def test_k_reduced_to_distinct_colors(self):
        img = rgb(12, 12, 0)
        colors = [(10, 0, 0), (0, 200, 0), (0, 0, 150), (90, 90, 90), (255, 255, 0), (0, 255, 255)]
        for i, c in enumerate(colors):
            img[:, 2 * i : 2 * i + 2] = c
        palette, labels = imaging.kmeans_colors(img, 7, seed=1)
        assert len(palette) == 6
        assert labels.max() < 6
        render = palette[labels]
        assert np.abs(render - img).max() < 1e-9

    def test_inertia_monotone_nonincreasing(self, rng):
        img = noise_image(rng, 25, 25)
        px = img.reshape(-1, 3).astype(np.int32)
        codes = (px[:, 0] << 16) | (px[:, 1] << 8) | px[:, 2]
        uniq, counts = np.unique(codes, return_counts=True)
        colors = np.stack([(uniq >> 16) & 255, (uniq >> 8) & 255, uniq & 255], 1).astype(float)
        gen = np.random.default_rng(3)
        init = colors[gen.choice(len(colors), size=4, replace=False)]
        _, _, history = imaging.lloyd_iterations(colors, counts.astype(float), init, 50, 0.0)
        assert len(history) > 1
        assert all(a >= b - 1e-6 for a, b in zip(history, history[1:]))

    def test_labels_are_nearest_centroid(self, rng):
        img = noise_image(rng, 16, 16)
        palette, labels = imaging.kmeans_colors(img, 4, seed=9)
        d = ((img[..., None, :].astype(float) - palette[None, None, :, :]) ** 2).sum(-1)
        assert np.array_equal(labels, np.argmin(d, axis=-1))

    def test_k_validation(self):
        with pytest.raises(InvalidParameter):
            imaging.kmeans_colors(rgb(4, 4), 1, seed=0)


class TestMorphology:
    def test_open_removes_isolated_pixel(self):
        mask = np.zeros((15, 15), np.uint8)
        mask[7, 7] = 1
        assert imaging.morphology(mask, "open", 1).sum() == 0

    def test_close_fills_pinhole(self):
        mask = np.ones((15, 15), np.uint8)
        mask[7, 7] = 0
        assert imaging.morphology(mask, "close", 1).sum() == 15 * 15

    def test_dilate_then_erode_recovers_rectangle(self):
        mask = np.zeros((64, 64), np.uint8)
        mask[10:50, 12:55] = 1
        closed = imaging.morphology(mask, "close", 3)
        assert np.array_equal(closed, mask)

    def test_matches_set_definition_oracle(self, rng):
        mask = (rng.random((64, 64)) < 0.4).astype(np.uint8)
        for op in ("dilate", "erode"):
            for r in (1, 2):
                assert np.array_equal(
                    imaging.morphology(mask, op, r), brute_morphology(mask, op, r)
                )

    def test_duality(self, rng):
        mask = (rng.random((40, 40)) < 0.5).astype(np.uint8)
        dilated = imaging.morphology(mask, "dilate", 2)
        dual = 1 - imaging.morphology(1 - mask, "erode", 2)
        assert np.array_equal(dilated, dual)

    def test_iterations_compose(self):
        mask = np.zeros((32, 32), np.uint8)
        mask[16, 16] = 1
        twice = imaging.morphology(mask, "dilate", 1, iterations=2)
        once_big = imaging.morphology(mask, "dilate", 2)
        assert np.array_equal(twice, once_big)

    def test_validation(self):
        mask = np.zeros((4, 4), np.uint8)
        with pytest.raises(InvalidParameter):
            imaging.morphology(mask, "blur", 1)
        with pytest.raises(InvalidParameter):
            imaging.morphology(mask, "open", 0)
        with pytest.raises(InvalidParameter):
            imaging.morphology(np.full((4, 4), 3, np.uint8), "open", 1)


class TestIO:
    def test_png_round_trip(self, rng, tmp_path):
        img = noise_image(rng)
        imaging.write_png(tmp_path / "x.png", img)
        assert np.array_equal(imaging.read_image(tmp_path / "x.png"), img)

    def test_mask_written_as_0_255(self, tmp_path):
        mask = np.zeros((6, 6), np.uint8)
        mask[2:4, 2:4] = 1
        imaging.write_png(tmp_path / "m.png", mask)
        from PIL import Image

        stored = np.asarray(Image.open(tmp_path / "m.png"))
        assert set(np.unique(stored)) == {0, 255}

    def test_jpeg_readable(self, rng, tmp_path):
        from PIL import Image

        img = noise_image(rng)
        Image.fromarray(img).save(tmp_path / "x.jpg", quality=95)
        out = imaging.read_image(tmp_path / "x.jpg")
        assert out.shape == img.shape

    def test_write_is_atomic_no_temp_left(self, rng, tmp_path):
        imaging.write_png(tmp_path / "y.png", noise_image(rng))
        leftovers = [p for p in tmp_path.iterdir() if p.suffix == ".tmp"]
        assert leftovers == []
