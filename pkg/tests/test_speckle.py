import numpy as np
import pytest

from ilsc.errors import IndistinguishableClassesError, ValidationError
from ilsc.speckle import (
    SpeckleImage,
    SynthParams,
    add_bright_spot,
    apply_blur,
    generate_fully_developed,
    speckle_contrast,
    synthesize_intensity,
    two_class_corpus,
)


def autocorr_half_width(intensity):
    """Lag (px, along x) where the normalized intensity autocovariance first drops below 1/2.

    Computed with an FFT, independently of how the field was synthesized.
    """
    d = intensity - intensity.mean()
    power = np.abs(np.fft.fft2(d)) ** 2
    acov = np.real(np.fft.ifft2(power))
    profile = acov[0] / acov[0, 0]
    lag = int(np.argmax(profile < 0.5))
    # linear interpolation between lag-1 and lag
    a, b = profile[lag - 1], profile[lag]
    return lag - 1 + (a - 0.5) / (a - b)


class TestContrast:
    def test_constant(self):
        c = speckle_contrast(np.full((10, 10), 100, dtype=np.uint8))
        assert (c.mean, c.std_dev, c.k) == (100.0, 0.0, 0.0)

    def test_two_point(self):
        px = np.zeros((8, 8))
        px[:4] = 200
        c = speckle_contrast(px)
        assert (c.mean, c.std_dev, c.k) == (100.0, 100.0, 1.0)

    def test_exponential_samples(self):
        # sigma == mean for the exponential law; across 200 seeds the
        # 512x512 sample K stayed within 0.993..1.007
        rng = np.random.default_rng(2024)
        c = speckle_contrast(rng.exponential(50.0, size=(512, 512)))
        assert 0.99 <= c.k <= 1.01

    def test_region(self):
        px = np.full((10, 10), 7.0)
        px[2:4, 2:4] = [[0, 200], [200, 0]]
        c = speckle_contrast(px, region=(2, 2, 2, 2))
        assert c.k == 1.0

    def test_errors(self):
        with pytest.raises(ValidationError, match="empty region"):
            speckle_contrast(np.zeros((0, 3)))
        with pytest.raises(ValidationError, match="zero mean"):
            speckle_contrast(np.zeros((3, 3)))

    def test_k_is_ratio(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            c = speckle_contrast(rng.integers(1, 256, size=(17, 23)))
            assert c.k == pytest.approx(c.std_dev / c.mean, rel=1e-15)


class TestGenerate:
    def test_grain_one(self):
        p = SynthParams(mean_intensity=60, grain_size_px=1, blur_radius_px=0, seed=7)
        img = generate_fully_developed(p, quantized=False)
        c = speckle_contrast(img)
        assert 0.97 <= c.k <= 1.03
        assert abs(c.mean - 60) <= 0.05 * 60

    def test_grain_four_wider_correlation(self):
        fine = synthesize_intensity(SynthParams(60, 1, 0, 7))
        coarse = synthesize_intensity(SynthParams(60, 4, 0, 7))
        assert 0.95 <= speckle_contrast(coarse).k <= 1.05
        assert autocorr_half_width(coarse) > autocorr_half_width(fine)

    def test_grain_sets_correlation_width(self):
        # half width at half maximum of the intensity autocorrelation is grain / 2
        field = synthesize_intensity(SynthParams(60, 6, 0, 1, 512, 512))
        assert autocorr_half_width(field) == pytest.approx(3.0, abs=0.4)

    def test_deterministic(self):
        p = SynthParams(60, 2, 1, 99)
        a = generate_fully_developed(p).pixels
        b = generate_fully_developed(p).pixels
        assert a.dtype == np.uint8 and np.array_equal(a, b)
        assert not np.array_equal(a, generate_fully_developed(SynthParams(60, 2, 1, 100)).pixels)

    def test_quantized_range_and_clipping(self):
        img = generate_fully_developed(SynthParams(60, 1, 0, 5))
        assert img.pixels.dtype == np.uint8
        # exponential tail above 255 is exp(-255/60) ~ 1.4 %
        assert img.clipped_fraction == pytest.approx(np.exp(-255 / 60), abs=0.002)

    @pytest.mark.parametrize("bad", [
        dict(mean_intensity=0), dict(mean_intensity=-1), dict(grain_size_px=0.5),
        dict(blur_radius_px=-1), dict(grain_size_px=64), dict(width=100, height=40, grain_size_px=10),
    ])
    def test_invalid_params(self, bad):
        with pytest.raises(ValidationError):
            generate_fully_developed(SynthParams(**bad))

    def test_grain_error_message(self):
        with pytest.raises(ValidationError, match="grain too large for field"):
            generate_fully_developed(SynthParams(grain_size_px=64))


class TestBlur:
    def test_radius_zero_identity(self):
        img = generate_fully_developed(SynthParams(seed=1))
        out = apply_blur(img, 0)
        assert np.array_equal(out.pixels, img.pixels)
        assert out.pixels is not img.pixels

    @pytest.mark.parametrize("radius", [1, 2, 5])
    def test_constant_fixed(self, radius):
        img = SpeckleImage(np.full((20, 30), 77, dtype=np.uint8))
        assert np.array_equal(apply_blur(img, radius).pixels, img.pixels)

    def test_mean_preserved_within_quantization(self):
        for seed in range(5):
            img = generate_fully_developed(SynthParams(60, 2, 0, seed))
            out = apply_blur(img, 2)
            assert abs(speckle_contrast(out).mean - speckle_contrast(img).mean) <= 1.0

    def test_k_monotone_over_seeds(self):
        for seed in range(20):
            img = generate_fully_developed(SynthParams(60, 2, 0, seed), quantized=False)
            ks = [speckle_contrast(apply_blur(img, r)).k for r in (0, 1, 2)]
            assert ks[2] < ks[1] < ks[0]

    def test_edge_clamp(self):
        px = np.zeros((5, 5))
        px[0, 0] = 9.0
        out = apply_blur(SpeckleImage(px), 1).pixels
        # clamped borders replicate the corner into 4 of the 9 taps
        assert out[0, 0] == pytest.approx(4.0)

    def test_negative_radius(self):
        with pytest.raises(ValidationError):
            apply_blur(SpeckleImage(np.ones((3, 3))), -1)


class TestCorpus:
    def test_classes_separate_by_contrast(self):
        corpus = two_class_corpus(SynthParams(60, 2, 0), SynthParams(60, 2, 2), 20, 11)
        assert len(corpus) == 40
        k = {lab: np.array([speckle_contrast(it.image).k for it in corpus if it.label == lab])
             for lab in ("h", "d")}
        pooled_se = np.sqrt(k["h"].var(ddof=1) / 20 + k["d"].var(ddof=1) / 20)
        assert abs(k["h"].mean() - k["d"].mean()) > 3 * pooled_se

    def test_single_image_per_class(self):
        corpus = two_class_corpus(SynthParams(60, 2, 0), SynthParams(60, 2, 2), 1, 0)
        assert corpus.labels == ["h", "d"]

    def test_distinct_derived_seeds(self):
        corpus = two_class_corpus(SynthParams(60, 1, 0), SynthParams(60, 1, 1), 5, 3)
        assert len({it.seed for it in corpus}) == 10

    def test_identical_params(self):
        with pytest.raises(IndistinguishableClassesError, match="indistinguishable"):
            two_class_corpus(SynthParams(60, 2, 0, seed=1), SynthParams(60, 2, 0, seed=2), 3, 0)

    def test_order_independent_of_executor(self):
        from concurrent.futures import ThreadPoolExecutor

        args = (SynthParams(60, 2, 0, width=64, height=64), SynthParams(60, 2, 1, width=64, height=64), 4, 5)
        serial = two_class_corpus(*args)
        with ThreadPoolExecutor(4) as pool:
            parallel = two_class_corpus(*args, executor=pool)
        for a, b in zip(serial, parallel):
            assert a.name == b.name and np.array_equal(a.image.pixels, b.image.pixels)


def test_bright_spot_overlay_saturates():
    img = SpeckleImage(np.full((50, 60), 10, dtype=np.uint8))
    out = add_bright_spot(img, 30, 25, sigma=5)
    assert out.pixels[25, 30] == 255
    assert out.pixels[0, 0] == 10
