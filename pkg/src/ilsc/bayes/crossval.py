from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .data import Dataset
from .network import BayesNet, posterior, train


@dataclass
class CVResult:
    accuracy: float
    confusion: np.ndarray  # rows: true class, columns: predicted class
    class_values: list[str]
    folds: np.ndarray
    predictions: list[str]
    selected_per_fold: list[list[str]]

    @property
    def n_correct(self) -> int:
        return int(np.trace(self.confusion))


def stratified_folds(dataset: Dataset, k: int, seed: int) -> np.ndarray:
    """Fold index per row; each class is shuffled then dealt round-robin."""
    if k < 2:
        raise ValidationError(f"k must be >= 2, got {k}")
    classes = dataset.class_indices
    for c, name in enumerate(dataset.class_values):
        if np.count_nonzero(classes == c) < k:
            raise ValidationError(f"cannot stratify: class {name!r} has fewer than {k} rows")
    rng = np.random.Generator(np.random.PCG64(seed))
    folds = np.empty(len(dataset), dtype=np.int64)
    for c in range(len(dataset.class_values)):
        members = np.flatnonzero(classes == c)
        members = members[rng.permutation(len(members))]
        folds[members] = np.arange(len(members)) % k
    return folds


def cross_validate(dataset: Dataset, k: int = 5, n_bins: int = 3, t: float = 0.1,
                   alpha: float = 1.0, seed: int = 0) -> CVResult:
    folds = stratified_folds(dataset, k, seed)
    n_classes = len(dataset.class_values)
    confusion = np.zeros((n_classes, n_classes), dtype=np.int64)
    predictions: list[str | None] = [None] * len(dataset)
    selected = []
    truth = dataset.class_indices
    for fold in range(k):
        test = np.flatnonzero(folds == fold)
        net: BayesNet = train(dataset.subset(np.flatnonzero(folds != fold)), n_bins, t, alpha)
        selected.append(net.selected_attributes)
        for row in test:
            # the training subset keeps the full class-value list, so indices line up
            pred = int(np.argmax(posterior(net, dataset.values[row])))
            confusion[truth[row], pred] += 1
            predictions[row] = dataset.class_values[pred]
    return CVResult(float(np.trace(confusion)) / len(dataset), confusion, list(dataset.class_values),
                    folds, predictions, selected)


def resubstitution_accuracy(dataset: Dataset, n_bins: int = 3, t: float = 0.1, alpha: float = 1.0) -> float:
    net = train(dataset, n_bins, t, alpha)
    hits = sum(net.class_values[int(np.argmax(posterior(net, x)))] == label
               for x, label in zip(dataset.values, dataset.labels))
    return hits / len(dataset)
