from .gmm import GaussianMixture, gmm_fit_predict
from .iforest import IsolationForest, IsolationTree, average_path_length, iforest_fit_score, n_flagged
from .tree import DecisionTree, dtree_fit

__all__ = [
    "DecisionTree",
    "GaussianMixture",
    "IsolationForest",
    "IsolationTree",
    "average_path_length",
    "dtree_fit",
    "gmm_fit_predict",
    "iforest_fit_score",
    "n_flagged",
]
