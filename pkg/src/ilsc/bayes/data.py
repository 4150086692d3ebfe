from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ValidationError
from ..texture import ATTRIBUTE_NAMES

CLASS_NODE = "Class"


@dataclass
class Dataset:
    """Labeled continuous feature rows.

    ``values`` has shape ``(n_rows, n_attributes)``.  ``sample_ids`` are the
    1-based sample numbers used by the feature CSV; they default to
    ``1..n``.  ``class_values`` keeps first-appearance order unless given.
    """

    values: np.ndarray
    labels: list[str]
    attribute_names: tuple[str, ...] = ATTRIBUTE_NAMES
    class_values: list[str] = field(default_factory=list)
    sample_ids: list[int] = field(default_factory=list)

    def __post_init__(self):
        self.attribute_names = tuple(self.attribute_names)
        if not self.attribute_names:
            raise ValidationError("dataset needs at least one attribute")
        if CLASS_NODE in self.attribute_names:
            raise ValidationError(f"attribute name {CLASS_NODE!r} is reserved")
        self.values = np.asarray(self.values, dtype=np.float64).reshape(-1, len(self.attribute_names))
        self.labels = [str(lab) for lab in self.labels]
        if len(self.labels) != len(self.values):
            raise ValidationError(f"{len(self.values)} rows but {len(self.labels)} labels")
        if len(self.values) < 2:
            raise ValidationError("fewer than 2 rows")
        if not np.all(np.isfinite(self.values)):
            raise ValidationError("feature values must be finite")
        seen = list(dict.fromkeys(self.labels))
        if self.class_values:
            self.class_values = list(self.class_values)
            unknown = [lab for lab in seen if lab not in self.class_values]
            if unknown:
                raise ValidationError(f"labels {unknown} not among class values {self.class_values}")
        else:
            self.class_values = seen
        if self.sample_ids:
            self.sample_ids = [int(s) for s in self.sample_ids]
            if len(self.sample_ids) != len(self.labels):
                raise ValidationError("sample_ids length does not match row count")
        else:
            self.sample_ids = list(range(1, len(self.labels) + 1))

    def __len__(self):
        return len(self.labels)

    @property
    def class_indices(self) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.class_values)}
        return np.array([lookup[lab] for lab in self.labels], dtype=np.int64)

    def subset(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=np.int64)
        return Dataset(self.values[rows], [self.labels[i] for i in rows], self.attribute_names,
                       list(self.class_values), [self.sample_ids[i] for i in rows])

    def with_labels(self, labels) -> "Dataset":
        return Dataset(self.values.copy(), list(labels), self.attribute_names,
                       sample_ids=list(self.sample_ids))

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.attribute_names.index(name)]


@dataclass
class DiscreteData:
    """Integer-coded dataset: ``states[:, k]`` is the bin of attribute ``k``."""

    states: np.ndarray
    classes: np.ndarray
    attribute_names: tuple[str, ...]
    class_values: list[str]
    n_states: list[int]

    def __len__(self):
        return len(self.classes)

    def table(self) -> np.ndarray:
        """Columns ``[attr_0, ..., attr_{m-1}, Class]``."""
        return np.column_stack([self.states, self.classes])

    @property
    def class_column(self) -> int:
        return len(self.attribute_names)
