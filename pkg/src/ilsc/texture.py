"""Windowed texture statistics over the two speckle sampling bands.

Each speckle image yields nine attributes: four measures (russ, levine,
sigm, skew) from an interior band window placed on the edge of the laser
bright spot, the same four from an exterior band window further out, and
one global standard deviation over both windows.

Operator definitions:

* ``sigm``   mean over every 3x3 scan window of the population std
* ``levine`` ``sigm ** 2``
* ``skew``   mean over scan windows of the third standardized moment
             (0 for flat windows)
* ``russ``   mean over pixels of the summed absolute difference to the
             8 neighbours
* ``stdev``  population std over the union of both sample windows
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ValidationError
from .speckle import SpeckleImage

ATTRIBUTE_NAMES = ("russ1", "levine1", "sigm1", "skew1",
                   "russ2", "levine2", "sigm2", "skew2", "stdev")
DEFAULT_SIDE = 200


class Band(enum.Enum):
    INTERIOR = "interior"
    EXTERIOR = "exterior"


@dataclass(frozen=True)
class SampleRegion:
    origin_x: int
    origin_y: int
    side: int = DEFAULT_SIDE
    band: Band = Band.INTERIOR

    def __post_init__(self):
        if self.side < 3:
            raise ValidationError(f"region side must be >= 3, got {self.side}")

    @property
    def center(self) -> tuple[int, int]:
        return self.origin_x + self.side // 2, self.origin_y + self.side // 2

    def fits(self, width: int, height: int) -> bool:
        return (self.origin_x >= 0 and self.origin_y >= 0
                and self.origin_x + self.side <= width
                and self.origin_y + self.side <= height)

    def overlaps(self, other: "SampleRegion") -> bool:
        return (self.origin_x < other.origin_x + other.side
                and other.origin_x < self.origin_x + self.side
                and self.origin_y < other.origin_y + other.side
                and other.origin_y < self.origin_y + self.side)

    def view(self, image) -> np.ndarray:
        px = image.pixels if isinstance(image, SpeckleImage) else np.asarray(image)
        height, width = px.shape
        if not self.fits(width, height):
            raise ValidationError(
                f"{self.band.value} region at ({self.origin_x}, {self.origin_y}) side {self.side} "
                f"lies outside the {width}x{height} image")
        return px[self.origin_y:self.origin_y + self.side, self.origin_x:self.origin_x + self.side]


@dataclass
class TextureFeatures:
    russ1: float
    levine1: float
    sigm1: float
    skew1: float
    russ2: float
    levine2: float
    sigm2: float
    skew2: float
    stdev: float
    label: str | None = None

    def values(self) -> list[float]:
        return [getattr(self, name) for name in ATTRIBUTE_NAMES]

    @classmethod
    def from_values(cls, values, label=None) -> "TextureFeatures":
        values = list(values)
        if len(values) != len(ATTRIBUTE_NAMES):
            raise ValidationError(f"expected {len(ATTRIBUTE_NAMES)} values, got {len(values)}")
        return cls(*map(float, values), label=label)


@dataclass(frozen=True)
class LocalStats:
    sigma: float
    levine: float
    skew: float


@dataclass(frozen=True)
class BrightSpot:
    center_x: float
    center_y: float
    radius: float


def _as_float(region) -> np.ndarray:
    return np.asarray(region, dtype=np.float64)


def local_stats(region, window_side: int = 3) -> LocalStats:
    values = _as_float(region)
    if window_side < 3 or window_side % 2 == 0:
        raise ValidationError(f"window side must be odd and >= 3, got {window_side}")
    if values.ndim != 2 or min(values.shape) < window_side:
        raise ValidationError(f"region {values.shape} smaller than {window_side}x{window_side} window")

    windows = sliding_window_view(values, (window_side, window_side))
    h = window_side // 2
    # offsetting by the window centre keeps flat windows exactly flat
    centred = windows - values[h:values.shape[0] - h, h:values.shape[1] - h, None, None]
    dev = centred - centred.mean(axis=(2, 3), keepdims=True)
    var = (dev ** 2).mean(axis=(2, 3))
    m3 = (dev ** 3).mean(axis=(2, 3))
    std = np.sqrt(var)
    flat = var == 0
    skew = np.zeros_like(var)
    np.divide(m3, var * std, out=skew, where=~flat)

    sigma = float(std.mean())
    return LocalStats(sigma=sigma, levine=sigma * sigma, skew=float(skew.mean()))


def russ_response(region) -> float:
    values = _as_float(region)
    if values.ndim != 2 or min(values.shape) < 3:
        raise ValidationError(f"region {values.shape} smaller than 3x3")
    rows, cols = values.shape
    centre = values[1:-1, 1:-1]
    total = np.zeros_like(centre)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            total += np.abs(centre - values[1 + dy:rows - 1 + dy, 1 + dx:cols - 1 + dx])
    return float(total.mean())


def area_stdev(image, region_a: SampleRegion, region_b: SampleRegion) -> float:
    """Population standard deviation over the union of two sample regions."""
    px = image.pixels if isinstance(image, SpeckleImage) else np.asarray(image)
    mask = np.zeros(px.shape, dtype=bool)
    for region in (region_a, region_b):
        region.view(px)
        mask[region.origin_y:region.origin_y + region.side,
             region.origin_x:region.origin_x + region.side] = True
    return float(px[mask].astype(np.float64).std())


def locate_bright_spot(image, percentile: float = 99.0, min_pixels: int = 10) -> BrightSpot:
    px = image.pixels if isinstance(image, SpeckleImage) else np.asarray(image)
    if px.min() == px.max():
        raise ValidationError("no bright spot")
    threshold = np.percentile(px, percentile)
    ys, xs = np.nonzero(px >= threshold)
    if len(xs) < min_pixels:
        raise ValidationError("spot too small")
    return BrightSpot(center_x=float(xs.mean()), center_y=float(ys.mean()),
                      radius=math.sqrt(len(xs) / math.pi))


def default_regions(image, spot: BrightSpot, side: int = DEFAULT_SIDE) -> tuple[SampleRegion, SampleRegion]:
    """Interior window straddling the spot edge, exterior window at 2.5 radii.

    Both windows sit on the +x axis through the spot centre and are clamped
    inside the image.
    """
    px = image.pixels if isinstance(image, SpeckleImage) else np.asarray(image)
    height, width = px.shape
    if side > width or side > height:
        raise ValidationError(f"image {width}x{height} too small for {side}px sample windows")

    def place(distance, band):
        cx = int(round(spot.center_x + distance))
        cy = int(round(spot.center_y))
        x0 = min(max(cx - side // 2, 0), width - side)
        y0 = min(max(cy - side // 2, 0), height - side)
        return SampleRegion(x0, y0, side, band)

    interior = place(spot.radius, Band.INTERIOR)
    exterior = place(2.5 * spot.radius, Band.EXTERIOR)
    if interior.overlaps(exterior):
        raise ValidationError("image too small to host non-overlapping sample windows")
    return interior, exterior


def extract_features(image, region_a: SampleRegion, region_b: SampleRegion,
                     label: str | None = None) -> TextureFeatures:
    if region_a.overlaps(region_b):
        raise ValidationError("sample regions overlap")
    view_a, view_b = region_a.view(image), region_b.view(image)
    a, b = local_stats(view_a), local_stats(view_b)
    return TextureFeatures(
        russ1=russ_response(view_a), levine1=a.levine, sigm1=a.sigma, skew1=a.skew,
        russ2=russ_response(view_b), levine2=b.levine, sigm2=b.sigma, skew2=b.skew,
        stdev=area_stdev(image, region_a, region_b), label=label,
    )

