"""Equal-frequency discretization.

Cut points sit at the midpoint between neighbouring distinct sorted values
so each bin receives ``n // n_bins`` or ``n // n_bins + 1`` training
values.  A cut that would separate equal values is moved to the nearest
position where the sorted values change.  A value equal to a cut falls into
the lower bin.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .data import Dataset, DiscreteData


@dataclass
class Discretization:
    attribute_names: tuple[str, ...]
    cuts: list[np.ndarray]
    n_bins: int
    occupancy: list[list[int]]
    degenerate: list[bool]

    @property
    def n_states(self) -> list[int]:
        return [len(c) + 1 for c in self.cuts]

    @property
    def any_degenerate(self) -> bool:
        return any(self.degenerate)

    def bin_values(self, values, attribute_index: int) -> np.ndarray:
        return np.searchsorted(self.cuts[attribute_index], values, side="left")

    def to_dict(self) -> dict:
        return {
            "attribute_names": list(self.attribute_names),
            "n_bins": self.n_bins,
            "cuts": [[float(x) for x in c] for c in self.cuts],
            "occupancy": [list(map(int, o)) for o in self.occupancy],
            "degenerate": list(self.degenerate),
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "Discretization":
        return cls(tuple(doc["attribute_names"]), [np.array(c, dtype=np.float64) for c in doc["cuts"]],
                   int(doc["n_bins"]), [list(o) for o in doc["occupancy"]], list(doc["degenerate"]))


def _cut_between(lo: float, hi: float) -> float:
    mid = lo + (hi - lo) / 2.0
    # adjacent floats can round the midpoint up onto ``hi``
    return mid if lo <= mid < hi else lo


def equal_frequency_cuts(values, n_bins: int) -> tuple[np.ndarray, bool]:
    """Cut points for one attribute plus a flag set when fewer bins result."""
    if n_bins < 2:
        raise ValidationError(f"n_bins must be >= 2, got {n_bins}")
    s = np.sort(np.asarray(values, dtype=np.float64))
    n = len(s)
    if n == 0:
        raise ValidationError("cannot discretize an empty column")
    # boundary p separates s[p-1] and s[p]
    boundaries = np.flatnonzero(s[1:] > s[:-1]) + 1
    if len(boundaries) + 1 <= n_bins:
        chosen = list(boundaries)
    else:
        base, extra = divmod(n, n_bins)
        targets = np.cumsum([base + (1 if k < extra else 0) for k in range(n_bins)])[:-1]
        chosen = []
        for target in targets:
            candidates = boundaries[boundaries > (chosen[-1] if chosen else 0)]
            if len(candidates) == 0:
                break
            # nearest boundary; ties go to the lower position
            chosen.append(int(candidates[np.argmin(np.abs(candidates - target))]))
    cuts = np.array([_cut_between(s[p - 1], s[p]) for p in chosen], dtype=np.float64)
    return cuts, len(cuts) + 1 < n_bins


def fit_equal_frequency(dataset: Dataset, n_bins: int = 3) -> Discretization:
    cuts, flags, occupancy = [], [], []
    for k in range(len(dataset.attribute_names)):
        column = dataset.values[:, k]
        c, degenerate = equal_frequency_cuts(column, n_bins)
        cuts.append(c)
        flags.append(degenerate)
        bins = np.searchsorted(c, column, side="left")
        occupancy.append(np.bincount(bins, minlength=len(c) + 1).tolist())
    return Discretization(dataset.attribute_names, cuts, n_bins, occupancy, flags)


def discretize(dataset: Dataset, d: Discretization) -> DiscreteData:
    if tuple(dataset.attribute_names) != tuple(d.attribute_names):
        raise ValidationError(
            f"attribute mismatch: data has {list(dataset.attribute_names)}, "
            f"discretization has {list(d.attribute_names)}")
    states = np.column_stack([d.bin_values(dataset.values[:, k], k)
                              for k in range(len(d.attribute_names))]).astype(np.int64)
    return DiscreteData(states, dataset.class_indices, dataset.attribute_names,
                        list(dataset.class_values), d.n_states)
