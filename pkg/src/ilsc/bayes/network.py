"""Threshold-selected Bayesian network classifier.

Structure learning is a selective augmented naive Bayes:

1. ``Class -> X_k`` for every attribute whose mutual information with the
   class reaches the threshold ``t`` (bits).
2. For selected pairs ``k < l`` (column order), ``X_k -> X_l`` when
   ``I(X_k; X_l | Class) >= t`` and ``X_l`` has no attribute parent yet.

Attributes that fail the first test stay in the model as isolated nodes.
The joint distribution factorizes as the product of every node's
conditional table, and classification normalizes that product over class
values.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import ValidationError
from .cmi import conditional_mutual_information
from .data import CLASS_NODE, Dataset, DiscreteData
from .discretize import Discretization, discretize, fit_equal_frequency

MAX_ATTRIBUTE_PARENTS = 1


@dataclass
class BayesNet:
    attribute_names: tuple[str, ...]
    class_values: list[str]
    n_states: list[int]
    parents: dict[str, tuple[str, ...]]
    threshold: float
    class_information: dict[str, float] = field(default_factory=dict)
    pair_information: dict[tuple[str, str], float] = field(default_factory=dict)
    cpts: dict[str, np.ndarray] = field(default_factory=dict)
    alpha: float | None = None
    discretization: Discretization | None = None
    # nodes whose CPT contains a parent context never seen with alpha = 0
    unseen_contexts: list[str] = field(default_factory=list)

    @property
    def nodes(self) -> list[str]:
        return [CLASS_NODE, *self.attribute_names]

    @property
    def edges(self) -> list[tuple[str, str]]:
        return [(p, child) for child in self.nodes for p in self.parents.get(child, ())]

    @property
    def selected_attributes(self) -> list[str]:
        return [a for a in self.attribute_names if CLASS_NODE in self.parents.get(a, ())]

    @property
    def n_bins(self) -> int | None:
        return self.discretization.n_bins if self.discretization is not None else None

    def cardinality(self, node: str) -> int:
        if node == CLASS_NODE:
            return len(self.class_values)
        return self.n_states[self.attribute_names.index(node)]

    def topological_order(self) -> list[str]:
        order, done = [], set()
        pending = list(self.nodes)
        while pending:
            progressed = False
            for node in list(pending):
                if all(p in done for p in self.parents.get(node, ())):
                    order.append(node)
                    done.add(node)
                    pending.remove(node)
                    progressed = True
            if not progressed:
                raise ValidationError(f"network has a cycle among {pending}")
        return order

    def validate(self):
        if self.parents.get(CLASS_NODE):
            raise ValidationError("Class node must not have parents")
        known = set(self.nodes)
        for child, ps in self.parents.items():
            if child not in known or any(p not in known for p in ps):
                raise ValidationError(f"edge into {child!r} references an unknown node")
        self.topological_order()


def learn_structure(data: DiscreteData, t: float) -> BayesNet:
    if not t > 0:
        raise ValidationError(f"threshold must be > 0, got {t}")
    if data.classes is None or len(data.classes) != len(data.states):
        raise ValidationError("no class column")
    table = data.table()
    class_col = data.class_column
    names = data.attribute_names

    parents: dict[str, tuple[str, ...]] = {CLASS_NODE: ()}
    class_info = {}
    selected = []
    for k, name in enumerate(names):
        class_info[name] = conditional_mutual_information(table, k, class_col)
        if class_info[name] >= t:
            parents[name] = (CLASS_NODE,)
            selected.append(k)
        else:
            parents[name] = ()

    pair_info = {}
    for k, l in itertools.combinations(selected, 2):
        value = conditional_mutual_information(table, k, l, (class_col,))
        pair_info[(names[k], names[l])] = value
        if value >= t and len(parents[names[l]]) < 1 + MAX_ATTRIBUTE_PARENTS:
            parents[names[l]] = parents[names[l]] + (names[k],)

    return BayesNet(tuple(names), list(data.class_values), list(data.n_states), parents, t,
                    class_info, pair_info)


def _node_column(data: DiscreteData, net: BayesNet, node: str) -> np.ndarray:
    if node == CLASS_NODE:
        return data.classes
    return data.states[:, net.attribute_names.index(node)]


def fit_cpts(structure: BayesNet, data: DiscreteData, alpha: float = 1.0) -> BayesNet:
    """Smoothed relative-frequency tables ``(count + a) / (total + a * states)``.

    Each table has shape ``(*parent_cardinalities, node_cardinality)``.
    With ``alpha == 0`` a parent context with no training rows gets a
    uniform row and the node is listed in ``unseen_contexts``.
    """
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    structure.validate()
    cpts, unseen = {}, []
    for node in structure.nodes:
        ps = structure.parents.get(node, ())
        shape = tuple(structure.cardinality(p) for p in ps) + (structure.cardinality(node),)
        counts = np.zeros(shape, dtype=np.float64)
        index = tuple(_node_column(data, structure, p) for p in ps) + (_node_column(data, structure, node),)
        np.add.at(counts, index, 1.0)
        totals = counts.sum(axis=-1, keepdims=True)
        denom = totals + alpha * shape[-1]
        empty = denom == 0
        table = np.divide(counts + alpha, denom, out=np.zeros_like(counts), where=~empty)
        if np.any(empty):
            table = np.where(empty, 1.0 / shape[-1], table)
            unseen.append(node)
        cpts[node] = table
    return replace(structure, cpts=cpts, alpha=alpha, unseen_contexts=unseen)


def joint_scores(net: BayesNet, states) -> np.ndarray:
    """Unnormalized ``P(Class = c, x)`` for every class value ``c``."""
    if not net.cpts:
        raise ValidationError("network has no fitted CPTs")
    states = [int(s) for s in states]
    if len(states) != len(net.attribute_names):
        raise ValidationError(f"expected {len(net.attribute_names)} attribute states, got {len(states)}")
    scores = np.empty(len(net.class_values), dtype=np.float64)
    for c in range(len(net.class_values)):
        assignment = {CLASS_NODE: c, **dict(zip(net.attribute_names, states))}
        score = 1.0
        for node in net.nodes:
            idx = tuple(assignment[p] for p in net.parents.get(node, ())) + (assignment[node],)
            score *= net.cpts[node][idx]
        scores[c] = score
    return scores


def posterior_from_states(net: BayesNet, states) -> np.ndarray:
    scores = joint_scores(net, states)
    total = scores.sum()
    if total == 0:
        return np.full(len(scores), 1.0 / len(scores))
    return scores / total


def posterior(net: BayesNet, instance) -> np.ndarray:
    """Class distribution for one continuous feature vector.

    ``instance`` is either a sequence in attribute order or a mapping from
    attribute name to value.
    """
    if net.discretization is None:
        raise ValidationError("network has no stored discretization")
    if isinstance(instance, dict):
        missing = [a for a in net.attribute_names if a not in instance]
        if missing:
            raise ValidationError(f"missing attribute {missing[0]!r}")
        values = [instance[a] for a in net.attribute_names]
    else:
        values = list(instance)
        if len(values) != len(net.attribute_names):
            raise ValidationError(
                f"missing attribute {net.attribute_names[len(values)]!r}" if len(values) < len(net.attribute_names)
                else f"expected {len(net.attribute_names)} attributes, got {len(values)}")
    states = [int(net.discretization.bin_values(v, k)) for k, v in enumerate(values)]
    return posterior_from_states(net, states)


def predict(net: BayesNet, instance) -> str:
    # np.argmax returns the first maximum, i.e. class-value order breaks ties
    return net.class_values[int(np.argmax(posterior(net, instance)))]


def train(dataset: Dataset, n_bins: int = 3, t: float = 0.1, alpha: float = 1.0) -> BayesNet:
    disc = fit_equal_frequency(dataset, n_bins)
    data = discretize(dataset, disc)
    net = fit_cpts(learn_structure(data, t), data, alpha)
    net.discretization = disc
    return net


def to_document(net: BayesNet) -> dict:
    return {
        "format": "ilsc-bayes-net",
        "version": 1,
        "attribute_names": list(net.attribute_names),
        "class_values": list(net.class_values),
        "n_states": list(net.n_states),
        "threshold": net.threshold,
        "n_bins": net.n_bins,
        "alpha": net.alpha,
        "edges": [list(e) for e in net.edges],
        "class_information": dict(net.class_information),
        "pair_information": [[a, b, v] for (a, b), v in net.pair_information.items()],
        "unseen_contexts": list(net.unseen_contexts),
        "discretization": net.discretization.to_dict() if net.discretization is not None else None,
        "cpts": {node: {"parents": list(net.parents.get(node, ())),
                        "shape": list(table.shape),
                        "values": [float(v) for v in table.ravel()]}
                 for node, table in net.cpts.items()},
    }


def from_document(doc: dict) -> BayesNet:
    if doc.get("format") != "ilsc-bayes-net":
        raise ValidationError("not a bayes-net model document")
    names = tuple(doc["attribute_names"])
    parents = {node: () for node in [CLASS_NODE, *names]}
    for p, child in doc["edges"]:
        parents[child] = parents[child] + (p,)
    cpts = {node: np.array(entry["values"], dtype=np.float64).reshape(entry["shape"])
            for node, entry in doc["cpts"].items()}
    for node, entry in doc["cpts"].items():
        if tuple(entry["parents"]) != parents[node]:
            raise ValidationError(f"CPT parents for {node!r} disagree with the edge list")
    disc = doc.get("discretization")
    net = BayesNet(
        names, list(doc["class_values"]), list(doc["n_states"]), parents, float(doc["threshold"]),
        dict(doc.get("class_information", {})),
        {(a, b): v for a, b, v in doc.get("pair_information", [])},
        cpts, doc.get("alpha"),
        Discretization.from_dict(disc) if disc is not None else None,
        list(doc.get("unseen_contexts", [])),
    )
    net.validate()
    return net
