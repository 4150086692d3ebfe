"""Speckle contrast and synthetic speckle images.

Fully developed speckle is simulated by drawing a circular complex Gaussian
field, optionally low-pass filtering it to set the grain size, and taking
the squared magnitude.  The resulting intensity follows the negative
exponential law, so its contrast ``K = std / mean`` is 1.  Box blurring in
the intensity domain pulls ``K`` towards 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .errors import IndistinguishableClassesError, ValidationError

DEFAULT_RESOLUTION_UM_PER_PX = 2.8
# grain size is the FWHM of the intensity autocorrelation
_FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


@dataclass
class SpeckleImage:
    """A 2-D grayscale intensity grid, stored row-major as ``pixels[y, x]``.

    ``pixels`` is ``uint8`` once quantized; synthesis can also hand back the
    non-negative ``float64`` grid it produced before quantization.
    """

    pixels: np.ndarray
    resolution_um_per_px: float = DEFAULT_RESOLUTION_UM_PER_PX
    clipped_fraction: float = 0.0
    resolution_defaulted: bool = False

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim != 2 or px.shape[0] < 1 or px.shape[1] < 1:
            raise ValidationError(f"image must be a non-empty 2-D grid, got shape {px.shape}")
        if px.dtype == np.uint8:
            pass
        elif np.issubdtype(px.dtype, np.integer):
            if px.min() < 0 or px.max() > 255:
                raise ValidationError("quantized intensities must lie in [0, 255]")
            px = px.astype(np.uint8)
        else:
            px = px.astype(np.float64)
            if not np.all(np.isfinite(px)) or px.min() < 0:
                raise ValidationError("intensities must be finite and non-negative")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def quantized(self) -> bool:
        return self.pixels.dtype == np.uint8


@dataclass(frozen=True)
class SynthParams:
    mean_intensity: float = 60.0
    grain_size_px: float = 1.0
    blur_radius_px: int = 0
    seed: int = 0
    width: int = 256
    height: int = 256

    def validate(self):
        if not self.mean_intensity > 0:
            raise ValidationError(f"mean_intensity must be > 0, got {self.mean_intensity}")
        if not self.grain_size_px >= 1:
            raise ValidationError(f"grain_size_px must be >= 1, got {self.grain_size_px}")
        if self.blur_radius_px < 0 or int(self.blur_radius_px) != self.blur_radius_px:
            raise ValidationError(f"blur_radius_px must be a non-negative integer, got {self.blur_radius_px}")
        if self.width < 1 or self.height < 1:
            raise ValidationError(f"field size must be positive, got {self.width}x{self.height}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 bits")
        if self.grain_size_px >= min(self.width, self.height) / 4:
            raise ValidationError("grain too large for field")

    def statistical_key(self):
        """Every field except the seed."""
        return (self.mean_intensity, self.grain_size_px, self.blur_radius_px, self.width, self.height)


@dataclass(frozen=True)
class ContrastReport:
    mean: float
    std_dev: float
    k: float


def _as_array(image) -> np.ndarray:
    if isinstance(image, SpeckleImage):
        return image.pixels
    return np.asarray(image)


def speckle_contrast(image, region=None) -> ContrastReport:
    """Population mean, population standard deviation and their ratio K.

    ``region`` is an optional ``(x, y, width, height)`` rectangle; without it
    the whole grid is used.
    """
    px = _as_array(image)
    if region is not None:
        x, y, w, h = region
        px = px[y:y + h, x:x + w]
    if px.size == 0:
        raise ValidationError("empty region")
    values = px.astype(np.float64, copy=False)
    mean = float(values.mean())
    if mean == 0:
        raise ValidationError("zero mean intensity, contrast undefined")
    std = float(values.std())
    return ContrastReport(mean=mean, std_dev=std, k=std / mean)


def _box_filter(values: np.ndarray, radius: int) -> np.ndarray:
    return ndimage.uniform_filter(values, size=2 * radius + 1, mode="nearest")


def quantize(values: np.ndarray) -> tuple[np.ndarray, float]:
    """Round to 8 bits, saturating at 255.  Returns pixels and clipped fraction."""
    clipped = float(np.count_nonzero(values > 255.0)) / values.size
    return np.clip(np.rint(values), 0, 255).astype(np.uint8), clipped


def synthesize_intensity(params: SynthParams) -> np.ndarray:
    """Pre-quantization intensity grid for ``params`` (no blur applied)."""
    params.validate()
    rng = np.random.Generator(np.random.PCG64(params.seed))
    shape = (params.height, params.width)
    field = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    if params.grain_size_px > 1:
        sigma = params.grain_size_px / _FWHM_PER_SIGMA
        # periodic borders keep the field statistically stationary
        field = (ndimage.gaussian_filter(field.real, sigma, mode="wrap")
                 + 1j * ndimage.gaussian_filter(field.imag, sigma, mode="wrap"))
    intensity = field.real ** 2 + field.imag ** 2
    return intensity * (params.mean_intensity / intensity.mean())


def generate_fully_developed(params: SynthParams, quantized: bool = True,
                             resolution_um_per_px: float = DEFAULT_RESOLUTION_UM_PER_PX) -> SpeckleImage:
    intensity = synthesize_intensity(params)
    if params.blur_radius_px > 0:
        intensity = _box_filter(intensity, int(params.blur_radius_px))
    if not quantized:
        return SpeckleImage(intensity, resolution_um_per_px)
    pixels, clipped = quantize(intensity)
    return SpeckleImage(pixels, resolution_um_per_px, clipped_fraction=clipped)


def apply_blur(image: SpeckleImage, radius: int) -> SpeckleImage:
    """Box-average intensities over a ``(2r+1)`` square with edge clamping.

    Quantized images stay quantized (rounded back to 8 bits).
    """
    if radius < 0 or int(radius) != radius:
        raise ValidationError(f"blur radius must be a non-negative integer, got {radius}")
    if radius == 0:
        return replace(image, pixels=image.pixels.copy())
    blurred = _box_filter(image.pixels.astype(np.float64), int(radius))
    if image.quantized:
        blurred = np.clip(np.rint(blurred), 0, 255).astype(np.uint8)
    return replace(image, pixels=blurred)


def add_bright_spot(image: SpeckleImage, center_x: float, center_y: float,
                    sigma: float, peak: float = 255.0) -> SpeckleImage:
    """Superimpose a Gaussian blob, mimicking the directly lit laser spot."""
    yy, xx = np.mgrid[0:image.height, 0:image.width]
    blob = peak * np.exp(-((xx - center_x) ** 2 + (yy - center_y) ** 2) / (2.0 * sigma ** 2))
    values = image.pixels.astype(np.float64) + blob
    if image.quantized:
        pixels, clipped = quantize(values)
        return replace(image, pixels=pixels, clipped_fraction=clipped)
    return replace(image, pixels=values)


def derive_seed(base_seed: int, class_index: int, index: int) -> int:
    ss = np.random.SeedSequence([base_seed, class_index, index])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class LabeledImage:
    image: SpeckleImage
    label: str
    seed: int
    name: str = ""


@dataclass
class Corpus:
    items: list[LabeledImage] = field(default_factory=list)

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    @property
    def labels(self) -> list[str]:
        return [item.label for item in self.items]


def two_class_corpus(params_healthy: SynthParams, params_diseased: SynthParams,
                     n_per_class: int, base_seed: int, labels=("h", "d"),
                     executor=None) -> Corpus:
    """Generate ``n_per_class`` images per class with per-image derived seeds.

    The seed fields of the two parameter sets are ignored.  ``executor`` may
    be any object with an order-preserving ``map`` (e.g. a thread pool).
    """
    if n_per_class < 1:
        raise ValidationError("n_per_class must be >= 1")
    if params_healthy.statistical_key() == params_diseased.statistical_key():
        raise IndistinguishableClassesError("classes statistically indistinguishable by construction")
    params_healthy.validate()
    params_diseased.validate()

    jobs = []
    for class_index, (params, label) in enumerate(zip((params_healthy, params_diseased), labels)):
        for i in range(n_per_class):
            seed = derive_seed(base_seed, class_index, i)
            jobs.append((replace(params, seed=seed), label, f"{label}_{i:03d}.pgm"))

    mapper = executor.map if executor is not None else map
    images = list(mapper(lambda job: generate_fully_developed(job[0]), jobs))
    return Corpus([LabeledImage(img, label, p.seed, name)
                   for img, (p, label, name) in zip(images, jobs)])
