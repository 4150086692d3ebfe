"""Laser speckle texture features and threshold-selected Bayesian network classification."""

from .errors import FormatError, ILSCError, UnsupportedFormatError, ValidationError
from .speckle import (ContrastReport, SpeckleImage, SynthParams, apply_blur, generate_fully_developed,
                      speckle_contrast, two_class_corpus)
from .texture import ATTRIBUTE_NAMES, SampleRegion, TextureFeatures, extract_features

__version__ = "0.1.0"
