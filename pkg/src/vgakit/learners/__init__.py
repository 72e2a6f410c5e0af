"""Supervised learning schemes: ZeroR, OneR, naive Bayes and the pruned tree."""

from .baseline import OneRModel, ZeroRModel, train_oner, train_zeror
from .bayes import NaiveBayesModel, nb_predict, train_naive_bayes
from .tree import (
    DecisionTree,
    EbpPruning,
    RepPruning,
    ebp_prune,
    rep_prune,
    train_tree,
    tree_predict,
)

__all__ = [
    "ZeroRModel",
    "OneRModel",
    "NaiveBayesModel",
    "DecisionTree",
    "RepPruning",
    "EbpPruning",
    "train_zeror",
    "train_oner",
    "train_naive_bayes",
    "nb_predict",
    "train_tree",
    "tree_predict",
    "rep_prune",
    "ebp_prune",
]
