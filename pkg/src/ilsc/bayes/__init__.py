from .cmi import conditional_mutual_information, mutual_information
from .crossval import CVResult, cross_validate, resubstitution_accuracy, stratified_folds
from .data import CLASS_NODE, Dataset, DiscreteData
from .discretize import Discretization, discretize, equal_frequency_cuts, fit_equal_frequency
from .network import (
    BayesNet,
    fit_cpts,
    from_document,
    joint_scores,
    learn_structure,
    posterior,
    posterior_from_states,
    predict,
    to_document,
    train,
)

__all__ = [
    "CLASS_NODE", "BayesNet", "CVResult", "Dataset", "DiscreteData", "Discretization",
    "conditional_mutual_information", "cross_validate", "discretize", "equal_frequency_cuts",
    "fit_cpts", "fit_equal_frequency", "from_document", "joint_scores", "learn_structure",
    "mutual_information", "posterior", "posterior_from_states", "predict",
    "resubstitution_accuracy", "stratified_folds", "to_document", "train",
]
