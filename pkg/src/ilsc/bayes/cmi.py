"""Plug-in (conditional) mutual information from integer-coded samples."""

from __future__ import annotations

import math
from collections import Counter

import numpy as np

from ..errors import ValidationError


def conditional_mutual_information(table, i: int, j: int, conditioning=()) -> float:
    """``I(X_i; X_j | X_C)`` in bits from empirical frequencies.

    ``table`` is an ``(n, v)`` integer array of variable states.  Zero-count
    cells contribute nothing; an empty conditioning set gives the ordinary
    mutual information.  The sum is evaluated with ``math.fsum`` so the
    result does not depend on term order, which makes it exactly symmetric
    in ``i`` and ``j``.
    """
    data = np.asarray(table)
    conditioning = tuple(conditioning)
    if i == j:
        raise ValidationError("CMI needs two distinct variables")
    if i in conditioning or j in conditioning:
        raise ValidationError("conditioning set must exclude both variables")
    n = len(data)
    if n == 0:
        raise ValidationError("CMI of an empty dataset")

    cond = [tuple(row) for row in data[:, list(conditioning)].tolist()] if conditioning else [()] * n
    xi = data[:, i].tolist()
    xj = data[:, j].tolist()

    n_xyc = Counter(zip(xi, xj, cond))
    n_xc = Counter(zip(xi, cond))
    n_yc = Counter(zip(xj, cond))
    n_c = Counter(cond)

    terms = []
    for (x, y, c), count in n_xyc.items():
        ratio = (count * n_c[c]) / (n_xc[(x, c)] * n_yc[(y, c)])
        terms.append(count * math.log2(ratio))
    return max(math.fsum(terms) / n, 0.0)


def mutual_information(table, i: int, j: int) -> float:
    return conditional_mutual_information(table, i, j, ())
