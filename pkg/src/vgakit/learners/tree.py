"""Top-down decision tree with reduced-error and error-based pruning.

Induction greedily maximizes information gain (entropy in bits); numeric
attributes split at midpoints between class-changing sorted values, nominal
attributes branch per declared value.  A split is admissible only when every
child would cover at least ``min_leaf`` training instances (default 50), so
every leaf of the grown tree respects the floor.

Reduced-error pruning holds out a seeded stratified third of the training
data, then bottom-up replaces any subtree whose leaf version does not
increase held-out error.  Error-based pruning needs no holdout: it compares
the pessimistic error of a node as a leaf against the sum over its subtree's
leaves, where the pessimistic error is N times the upper confidence limit of
the observed error rate under the normal approximation

    e = (f + z^2/2N + z sqrt(f/N - f^2/N + z^2/4N^2)) / (1 + z^2/N).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from statistics import NormalDist

import numpy as np

from ..errors import InfeasibleError, NumericError, SchemaError
from ..ingest import Dataset
from ..labels import CLASS_ORDER, N_CLASSES

#: Gains at or below this are treated as zero (guards float rounding noise).
GAIN_EPS = 1e-12


@dataclass
class RepPruning:
    folds: int = 3
    seed: int = 0


@dataclass
class EbpPruning:
    confidence: float = 0.25


def class_entropy(counts: np.ndarray) -> float:
    """Shannon entropy in bits of a class-count vector."""
    counts = np.asarray(counts, dtype=float)
    n = counts.sum()
    if n == 0:
        return 0.0
    p = counts[counts > 0] / n
    return float(-(p * np.log2(p)).sum())


def information_gain(parent_counts: np.ndarray, child_counts: list[np.ndarray]) -> float:
    """Entropy gain of a split; never negative (rounding noise clamps to 0)."""
    n = float(np.asarray(parent_counts).sum())
    gain = class_entropy(parent_counts)
    for c in child_counts:
        gain -= (np.asarray(c).sum() / n) * class_entropy(c)
    return 0.0 if gain <= GAIN_EPS else gain


def _rows_entropy(count_rows: np.ndarray) -> np.ndarray:
    """Entropy in bits of each row of a count matrix."""
    n = count_rows.sum(axis=1, keepdims=True).astype(float)
    p = np.divide(count_rows, n, out=np.zeros(count_rows.shape, dtype=float), where=n > 0)
    t = np.zeros_like(p)
    mask = p > 0
    t[mask] = p[mask] * np.log2(p[mask])
    return -t.sum(axis=1)


@dataclass
class TreeNode:
    counts: np.ndarray
    n: int
    class_code: int
    attr_index: int | None = None
    attr_name: str | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    branches: "dict[int, TreeNode] | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.attr_index is None

    def children(self) -> list["TreeNode"]:
        if self.is_leaf:
            return []
        if self.branches is not None:
            return [self.branches[c] for c in sorted(self.branches)]
        return [self.left, self.right]

    def size(self) -> int:
        return 1 + sum(c.size() for c in self.children())

    def leaf_count(self) -> int:
        if self.is_leaf:
            return 1
        return sum(c.leaf_count() for c in self.children())

    def as_leaf(self) -> "TreeNode":
        return TreeNode(counts=self.counts.copy(), n=self.n, class_code=self.class_code)


@dataclass
class DecisionTree:
    root: TreeNode
    attribute_names: tuple[str, ...]
    attribute_kinds: tuple[str, ...]
    min_leaf: int
    pruning: str = "none"
    criterion: str = "information_gain"

    def size(self) -> int:
        return self.root.size()

    def leaf_count(self) -> int:
        return self.root.leaf_count()

    def predict(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array([tree_predict(self, X[i]) for i in range(len(X))], dtype=np.int64)

    def to_json(self) -> str:
        def enc(node: TreeNode):
            d = {
                "n": node.n,
                "counts": node.counts.tolist(),
                "class": CLASS_ORDER[node.class_code].name,
            }
            if not node.is_leaf:
                d["attribute"] = node.attr_name
                if node.branches is not None:
                    d["branches"] = {str(c): enc(node.branches[c]) for c in sorted(node.branches)}
                else:
                    d["threshold"] = node.threshold
                    d["left"] = enc(node.left)
                    d["right"] = enc(node.right)
            return d

        return json.dumps(
            {
                "model": "decision_tree",
                "attributes": list(self.attribute_names),
                "kinds": list(self.attribute_kinds),
                "min_leaf": self.min_leaf,
                "pruning": self.pruning,
                "criterion": self.criterion,
                "size": self.size(),
                "leaves": self.leaf_count(),
                "root": enc(self.root),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "DecisionTree":
        d = json.loads(text)
        if d.get("model") != "decision_tree":
            raise SchemaError("not a decision tree model file")
        names = tuple(d["attributes"])
        code = {c.name: i for i, c in enumerate(CLASS_ORDER)}

        def dec(nd) -> TreeNode:
            node = TreeNode(
                counts=np.array(nd["counts"], dtype=np.int64),
                n=int(nd["n"]),
                class_code=code[nd["class"]],
            )
            if "attribute" in nd:
                node.attr_name = nd["attribute"]
                node.attr_index = names.index(nd["attribute"])
                if "branches" in nd:
                    node.branches = {int(c): dec(sub) for c, sub in nd["branches"].items()}
                else:
                    node.threshold = float(nd["threshold"])
                    node.left = dec(nd["left"])
                    node.right = dec(nd["right"])
            return node

        return cls(
            root=dec(d["root"]),
            attribute_names=names,
            attribute_kinds=tuple(d["kinds"]),
            min_leaf=int(d["min_leaf"]),
            pruning=d["pruning"],
            criterion=d["criterion"],
        )


def _make_node(y: np.ndarray, idx: np.ndarray) -> TreeNode:
    counts = np.bincount(y[idx], minlength=N_CLASSES).astype(np.int64)
    return TreeNode(counts=counts, n=len(idx), class_code=int(np.argmax(counts)))


def _best_numeric_split(vals, ys, min_leaf, parent_entropy, use_gain_ratio):
    """Best midpoint threshold for one numeric attribute, or None."""
    n = len(vals)
    order = np.argsort(vals, kind="stable")
    sv = vals[order]
    sy = ys[order]
    change = np.flatnonzero(sv[1:] != sv[:-1])  # boundary after sorted position p
    if len(change) == 0:
        return None
    onehot = np.zeros((n, N_CLASSES), dtype=np.int64)
    onehot[np.arange(n), sy] = 1
    cum = np.cumsum(onehot, axis=0)
    total = cum[-1]

    # candidate boundaries: adjacent value groups that are not both pure with
    # the same class (Fayyad boundary points; optimal gain is preserved)
    starts = np.concatenate([[0], change + 1])
    ends = np.concatenate([change, [n - 1]])
    gcounts = cum[ends] - np.vstack([np.zeros(N_CLASSES, np.int64), cum[ends[:-1]]])
    gsizes = gcounts.sum(axis=1)
    gpure = gcounts.max(axis=1) == gsizes
    gclass = np.where(gpure, gcounts.argmax(axis=1), -1)
    keep = ~(gpure[:-1] & gpure[1:] & (gclass[:-1] == gclass[1:]))

    left_n = change + 1
    right_n = n - left_n
    admissible = (left_n >= min_leaf) & (right_n >= min_leaf) & keep
    if not admissible.any():
        return None
    cand = change[admissible]
    L = cum[cand]
    R = total - L
    nl = (cand + 1).astype(float)
    nr = n - nl
    gains = parent_entropy - (nl / n) * _rows_entropy(L) - (nr / n) * _rows_entropy(R)
    gains[gains <= GAIN_EPS] = 0.0
    if use_gain_ratio:
        pl = nl / n
        split_info = -(pl * np.log2(pl) + (1 - pl) * np.log2(1 - pl))
        gains = np.divide(gains, split_info, out=np.zeros_like(gains), where=split_info > 0)
    best = int(np.argmax(gains))  # first index on ties -> smallest threshold
    if gains[best] <= 0.0:
        return None
    p = cand[best]
    threshold = (sv[p] + sv[p + 1]) / 2.0
    return gains[best], threshold


def _best_nominal_split(codes, ys, n_values, min_leaf, parent_entropy, use_gain_ratio):
    vc = codes.astype(np.int64)
    counts = np.zeros((n_values, N_CLASSES), dtype=np.int64)
    np.add.at(counts, (vc, ys), 1)
    sizes = counts.sum(axis=1)
    if (sizes < min_leaf).any():  # every declared value must support a leaf
        return None
    n = len(ys)
    gain = parent_entropy - float(((sizes / n) * _rows_entropy(counts)).sum())
    gain = 0.0 if gain <= GAIN_EPS else gain
    if use_gain_ratio and gain > 0:
        p = sizes / n
        split_info = float(-(p[p > 0] * np.log2(p[p > 0])).sum())
        gain = gain / split_info if split_info > 0 else 0.0
    if gain <= 0.0:
        return None
    return gain


def _grow(X, y, kinds, n_values, min_leaf, use_gain_ratio) -> TreeNode:
    root = _make_node(y, np.arange(len(y)))
    stack = [(root, np.arange(len(y)))]
    while stack:
        node, idx = stack.pop()
        if node.counts.max() == node.n:  # pure
            continue
        parent_entropy = class_entropy(node.counts)
        best_gain = 0.0
        best = None  # (attr j, threshold or None)
        for j, kind in enumerate(kinds):
            if kind == "numeric":
                res = _best_numeric_split(X[idx, j], y[idx], min_leaf, parent_entropy, use_gain_ratio)
                if res is not None and res[0] > best_gain:
                    best_gain, best = res[0], (j, res[1])
            else:
                res = _best_nominal_split(
                    X[idx, j], y[idx], n_values[j], min_leaf, parent_entropy, use_gain_ratio
                )
                if res is not None and res > best_gain:
                    best_gain, best = res, (j, None)
        if best is None:
            continue
        j, threshold = best
        node.attr_index = j
        if threshold is not None:
            node.threshold = float(threshold)
            mask = X[idx, j] <= threshold
            left_idx, right_idx = idx[mask], idx[~mask]
            node.left = _make_node(y, left_idx)
            node.right = _make_node(y, right_idx)
            stack.append((node.left, left_idx))
            stack.append((node.right, right_idx))
        else:
            codes = X[idx, j].astype(np.int64)
            node.branches = {}
            for c in range(n_values[j]):
                cidx = idx[codes == c]
                child = _make_node(y, cidx)
                node.branches[c] = child
                stack.append((child, cidx))
    return root


def train_tree(
    ds: Dataset,
    min_leaf: int = 50,
    pruning: RepPruning | EbpPruning | None = None,
    use_gain_ratio: bool = False,
) -> DecisionTree:
    """Grow (and optionally prune) a tree on the dataset."""
    if len(ds) == 0:
        raise InfeasibleError("cannot train on an empty dataset")
    if min_leaf < 1:
        raise InfeasibleError(f"min_leaf must be >= 1, got {min_leaf}")
    kinds = tuple(a.kind for a in ds.attributes)
    n_values = tuple(len(a.values) for a in ds.attributes)
    names = tuple(a.name for a in ds.attributes)
    criterion = "gain_ratio" if use_gain_ratio else "information_gain"

    if isinstance(pruning, RepPruning):
        from ..evaluation import stratified_folds

        plan = stratified_folds(ds.y, k=pruning.folds, seed=pruning.seed)
        val_mask = plan.assignment == 0  # one fold validates, the rest grow
        grow_idx = np.flatnonzero(~val_mask)
        val_idx = np.flatnonzero(val_mask)
        root = _grow(ds.X[grow_idx], ds.y[grow_idx], kinds, n_values, min_leaf, use_gain_ratio)
        tree = DecisionTree(root, names, kinds, min_leaf, "rep", criterion)
        if len(val_idx):
            tree = rep_prune(tree, ds.X[val_idx], ds.y[val_idx])
        return tree

    root = _grow(ds.X, ds.y, kinds, n_values, min_leaf, use_gain_ratio)
    tree = DecisionTree(root, names, kinds, min_leaf, "none", criterion)
    if isinstance(pruning, EbpPruning):
        tree = ebp_prune(tree, pruning.confidence)
    elif pruning is not None:
        raise SchemaError(f"unknown pruning configuration {pruning!r}")
    return tree


def _route(node: TreeNode, X: np.ndarray, idx: np.ndarray) -> list[tuple[TreeNode, np.ndarray]]:
    if node.branches is not None:
        codes = X[idx, node.attr_index].astype(np.int64)
        return [(node.branches[c], idx[codes == c]) for c in sorted(node.branches)]
    mask = X[idx, node.attr_index] <= node.threshold
    return [(node.left, idx[mask]), (node.right, idx[~mask])]


def rep_prune(tree: DecisionTree, X_val: np.ndarray, y_val: np.ndarray) -> DecisionTree:
    """Bottom-up subtree replacement whenever validation error does not increase."""
    X_val = np.asarray(X_val, dtype=float)
    y_val = np.asarray(y_val, dtype=np.int64)

    def prune(node: TreeNode, idx: np.ndarray) -> tuple[TreeNode, int]:
        leaf_err = int((y_val[idx] != node.class_code).sum())
        if node.is_leaf:
            return node.as_leaf(), leaf_err
        new = TreeNode(
            counts=node.counts.copy(),
            n=node.n,
            class_code=node.class_code,
            attr_index=node.attr_index,
            attr_name=node.attr_name,
            threshold=node.threshold,
        )
        subtree_err = 0
        routed = _route(node, X_val, idx)
        if node.branches is not None:
            new.branches = {}
            for (code, _), (child, cidx) in zip(sorted(node.branches.items()), routed):
                pruned, err = prune(child, cidx)
                new.branches[code] = pruned
                subtree_err += err
        else:
            new.left, err_l = prune(node.left, routed[0][1])
            new.right, err_r = prune(node.right, routed[1][1])
            subtree_err = err_l + err_r
        if leaf_err <= subtree_err:
            return node.as_leaf(), leaf_err
        return new, subtree_err

    root, _ = prune(tree.root, np.arange(len(y_val)))
    return DecisionTree(
        root, tree.attribute_names, tree.attribute_kinds, tree.min_leaf, "rep", tree.criterion
    )


def pessimistic_error_rate(f: float, n: float, z: float) -> float:
    """Upper confidence limit of a binomial error rate, normal approximation."""
    if n <= 0:
        return 0.0
    inner = f / n - f * f / n + z * z / (4 * n * n)
    return (f + z * z / (2 * n) + z * math.sqrt(max(inner, 0.0))) / (1 + z * z / n)


def ebp_prune(tree: DecisionTree, confidence: float = 0.25) -> DecisionTree:
    """Bottom-up replacement when the leaf's pessimistic error is no worse."""
    if not 0 < confidence < 1:
        raise InfeasibleError(f"confidence must be in (0,1), got {confidence}")
    z = NormalDist().inv_cdf(1.0 - confidence)

    def pess_as_leaf(node: TreeNode) -> float:
        errors = node.n - int(node.counts[node.class_code])
        return node.n * pessimistic_error_rate(errors / node.n, node.n, z)

    def prune(node: TreeNode) -> tuple[TreeNode, float]:
        if node.is_leaf:
            return node.as_leaf(), pess_as_leaf(node)
        new = TreeNode(
            counts=node.counts.copy(),
            n=node.n,
            class_code=node.class_code,
            attr_index=node.attr_index,
            attr_name=node.attr_name,
            threshold=node.threshold,
        )
        subtree = 0.0
        if node.branches is not None:
            new.branches = {}
            for code in sorted(node.branches):
                child, p = prune(node.branches[code])
                new.branches[code] = child
                subtree += p
        else:
            new.left, pl = prune(node.left)
            new.right, pr = prune(node.right)
            subtree = pl + pr
        leaf_pess = pess_as_leaf(node)
        if leaf_pess <= subtree:
            return node.as_leaf(), leaf_pess
        return new, subtree

    root, _ = prune(tree.root)
    return DecisionTree(
        root, tree.attribute_names, tree.attribute_kinds, tree.min_leaf, "ebp", tree.criterion
    )


def tree_predict(tree: DecisionTree, instance: np.ndarray) -> int:
    """Root-to-leaf descent; returns the leaf's class code."""
    x = np.asarray(instance, dtype=float)
    node = tree.root
    while not node.is_leaf:
        v = x[node.attr_index]
        if math.isnan(v):
            raise NumericError(
                f"missing value for attribute {tree.attribute_names[node.attr_index]!r}"
            )
        if node.branches is not None:
            attr = tree.attribute_names[node.attr_index]
            node = node.branches.get(int(v))
            if node is None:
                raise SchemaError(f"value {int(v)} of {attr!r} has no branch")
        else:
            node = node.left if v <= node.threshold else node.right
    return node.class_code
