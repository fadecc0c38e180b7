"""Depth-limited CART decision tree over the (energy, num_users) feature pair.

Splits minimize count-weighted Gini impurity of the children. Candidate
thresholds sit at midpoints between consecutive distinct sorted feature
values. Ties resolve deterministically: among equal-impurity thresholds the
smallest wins, and between equally good features the energy feature wins.
The left branch always takes feature <= threshold.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Union

import numpy as np

from .dataset import Dataset, stratified_kfold

FEATURE_ENERGY = "energy"
FEATURE_USERS = "num_users"
FEATURES = (FEATURE_ENERGY, FEATURE_USERS)

MODEL_FORMAT_VERSION = 1


def gini(counts) -> float:
    """Gini impurity 1 - p0^2 - p1^2 of a two-class count pair."""
    c0, c1 = counts
    if c0 < 0 or c1 < 0:
        raise ValueError("counts must be >= 0")
    total = c0 + c1
    if total == 0:
        raise ValueError("at least one count must be positive")
    p0 = c0 / total
    p1 = c1 / total
    return 1.0 - p0 * p0 - p1 * p1


class SplitCandidate(NamedTuple):
    threshold: float
    impurity: float


def best_split(values, labels) -> SplitCandidate | None:
    """Best threshold for one feature column, or None if it is constant.

    Evaluates every midpoint between consecutive distinct sorted values and
    returns the one minimizing the count-weighted child Gini (the weighted
    impurity is normalized by the row count). The scan runs in ascending
    order, so equal impurities resolve to the smallest threshold.
    """
    values = np.asarray(values, dtype=float)
    labels = np.asarray(labels)
    if values.size == 0:
        raise ValueError("cannot split an empty set of rows")
    if values.shape != labels.shape:
        raise ValueError("values and labels must align")
    if values.size < 2:
        return None

    order = np.argsort(values, kind="stable")
    sorted_values = values[order]
    sorted_labels = labels[order]
    boundaries = np.flatnonzero(sorted_values[:-1] != sorted_values[1:])
    if boundaries.size == 0:
        return None

    n = values.size
    ones_cum = np.cumsum(sorted_labels)
    total_ones = int(ones_cum[-1])
    n_left = (boundaries + 1).astype(float)
    left_ones = ones_cum[boundaries].astype(float)
    left_zeros = n_left - left_ones
    n_right = n - n_left
    right_ones = total_ones - left_ones
    right_zeros = n_right - right_ones

    # Binary Gini as 2 p0 p1 (same value as 1 - p0^2 - p1^2): commutative
    # products keep mirrored partitions bit-identical, so exact ties really
    # tie and resolve to the smallest threshold.
    weighted = 2.0 * (left_zeros * left_ones / n_left
                      + right_zeros * right_ones / n_right) / n

    best = int(np.argmin(weighted))
    pos = boundaries[best]
    threshold = (sorted_values[pos] + sorted_values[pos + 1]) / 2.0
    return SplitCandidate(float(threshold), float(weighted[best]))


@dataclass(frozen=True)
class Leaf:
    label: int
    counts: tuple[int, int]


@dataclass(frozen=True)
class Split:
    feature: str
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Union[Leaf, Split]


@dataclass(frozen=True)
class TreeModel:
    """Fitted tree; prediction is a pure function of (num_users, energy)."""

    root: TreeNode
    max_depth: int
    provenance_digest: str | None = None
    degenerate: bool = False

    def depth(self) -> int:
        def walk(node):
            if isinstance(node, Leaf):
                return 0
            return 1 + max(walk(node.left), walk(node.right))
        return walk(self.root)

    @property
    def root_energy_threshold(self) -> float | None:
        """Root threshold when the root splits on energy, else None."""
        if isinstance(self.root, Split) and self.root.feature == FEATURE_ENERGY:
            return self.root.threshold
        return None

    def predict(self, num_users, energy):
        """Class labels (0 no attack / 1 attack) for scalars or aligned arrays."""
        users = np.asarray(num_users, dtype=float)
        feats = np.asarray(energy, dtype=float)
        users, feats = np.broadcast_arrays(users, feats)
        scalar = users.ndim == 0
        users = np.atleast_1d(users)
        feats = np.atleast_1d(feats)
        out = np.empty(users.shape, dtype=np.int64)

        def apply(node, mask):
            if not mask.any():
                return
            if isinstance(node, Leaf):
                out[mask] = node.label
                return
            col = feats if node.feature == FEATURE_ENERGY else users
            goes_left = mask & (col <= node.threshold)
            apply(node.left, goes_left)
            apply(node.right, mask & ~goes_left)

        apply(self.root, np.ones(users.shape, dtype=bool))
        return int(out[0]) if scalar else out


def predict(model: TreeModel, num_users, energy):
    """Functional form of TreeModel.predict."""
    return model.predict(num_users, energy)


def _node_counts(labels) -> tuple[int, int]:
    ones = int(np.sum(labels))
    return len(labels) - ones, ones


def _majority(counts: tuple[int, int]) -> int:
    # Exact ties resolve to the no-attack class.
    return 1 if counts[1] > counts[0] else 0


def _grow(columns: dict, labels: np.ndarray, depth: int, max_depth: int) -> TreeNode:
    counts = _node_counts(labels)
    if depth >= max_depth or counts[0] == 0 or counts[1] == 0:
        return Leaf(_majority(counts), counts)

    best = None
    best_feature = None
    for feature in FEATURES:  # energy first, so it wins feature ties
        candidate = best_split(columns[feature], labels)
        if candidate is not None and (best is None or candidate.impurity < best.impurity):
            best = candidate
            best_feature = feature
    if best is None or best.impurity >= gini(counts):
        return Leaf(_majority(counts), counts)

    goes_left = columns[best_feature] <= best.threshold
    left = _grow({f: c[goes_left] for f, c in columns.items()}, labels[goes_left],
                 depth + 1, max_depth)
    right = _grow({f: c[~goes_left] for f, c in columns.items()}, labels[~goes_left],
                  depth + 1, max_depth)
    return Split(best_feature, best.threshold, left, right)


def fit(dataset: Dataset, max_depth: int) -> TreeModel:
    """Grow a tree on the dataset's (energy, num_users) features.

    A single-class dataset yields a degenerate one-leaf model flagged via
    ``degenerate`` (with a warning) rather than an error.
    """
    if not 1 <= max_depth <= 32:
        raise ValueError("max_depth must be in [1, 32]")
    if len(dataset) == 0:
        raise ValueError("cannot fit on an empty dataset")
    labels = dataset.pca
    digest = dataset.provenance.digest() if dataset.provenance else None
    counts = _node_counts(labels)
    if counts[0] == 0 or counts[1] == 0:
        warnings.warn("training data contains a single class; model is degenerate")
        return TreeModel(Leaf(_majority(counts), counts), max_depth, digest, degenerate=True)
    columns = {
        FEATURE_ENERGY: np.asarray(dataset.energy, dtype=float),
        FEATURE_USERS: np.asarray(dataset.k, dtype=float),
    }
    root = _grow(columns, labels, 0, max_depth)
    return TreeModel(root, max_depth, digest)


@dataclass(frozen=True)
class Metrics:
    """Confusion counts and derived scores; attack is the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    degenerate: bool = False

    @classmethod
    def from_counts(cls, tp: int, fp: int, tn: int, fn: int) -> "Metrics":
        total = tp + fp + tn + fn
        if total == 0:
            raise ValueError("no rows to score")
        degenerate = False

        def ratio(num, den):
            nonlocal degenerate
            if den == 0:
                degenerate = True  # 0/0 reported as 0 instead of NaN
                return 0.0
            return num / den

        precision = ratio(tp, tp + fp)
        recall = ratio(tp, tp + fn)
        f1 = ratio(2.0 * precision * recall, precision + recall)
        return cls(tp, fp, tn, fn, (tp + tn) / total, precision, recall, f1, degenerate)


def evaluate(model: TreeModel, dataset: Dataset) -> Metrics:
    """Confusion-matrix metrics of the model on a labeled dataset."""
    if len(dataset) == 0:
        raise ValueError("cannot evaluate on an empty dataset")
    predicted = model.predict(dataset.k, dataset.energy)
    actual = dataset.pca
    tp = int(np.sum((predicted == 1) & (actual == 1)))
    fp = int(np.sum((predicted == 1) & (actual == 0)))
    tn = int(np.sum((predicted == 0) & (actual == 0)))
    fn = int(np.sum((predicted == 0) & (actual == 1)))
    return Metrics.from_counts(tp, fp, tn, fn)


@dataclass(frozen=True)
class DepthSearchResult:
    """Cross-validated scores (mean and sample std over folds) for one depth."""

    depth: int
    accuracy_mean: float
    accuracy_std: float
    precision_mean: float
    precision_std: float
    recall_mean: float
    recall_std: float
    f1_mean: float
    f1_std: float


def grid_search_cv(dataset: Dataset, depths, n_folds: int, seed: int) -> list[DepthSearchResult]:
    """Stratified k-fold cross-validation over a list of tree depths.

    The same fold partition is reused for every depth; per-fold metrics are
    averaged (not pooled into one confusion matrix).
    """
    depths = list(depths)
    if not depths:
        raise ValueError("depths must be non-empty")
    folds = stratified_kfold(dataset, n_folds, seed)
    results = []
    for depth in depths:
        per_fold = []
        for train_idx, val_idx in folds:
            model = fit(dataset.select(train_idx), depth)
            per_fold.append(evaluate(model, dataset.select(val_idx)))
        def agg(attr):
            vals = np.array([getattr(m, attr) for m in per_fold])
            return float(vals.mean()), float(vals.std(ddof=1))
        acc, prec, rec, f1 = agg("accuracy"), agg("precision"), agg("recall"), agg("f1")
        results.append(DepthSearchResult(depth, *acc, *prec, *rec, *f1))
    return results


def _node_to_dict(node: TreeNode) -> dict:
    if isinstance(node, Leaf):
        return {"label": node.label, "counts": list(node.counts)}
    return {
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _node_to_dict(node.left),
        "right": _node_to_dict(node.right),
    }


def _node_from_dict(payload: dict) -> TreeNode:
    if "label" in payload:
        counts = payload.get("counts", [0, 0])
        return Leaf(int(payload["label"]), (int(counts[0]), int(counts[1])))
    if payload["feature"] not in FEATURES:
        raise ValueError(f"unknown feature {payload['feature']!r}")
    return Split(payload["feature"], float(payload["threshold"]),
                 _node_from_dict(payload["left"]), _node_from_dict(payload["right"]))


def model_to_dict(model: TreeModel) -> dict:
    return {
        "format_version": MODEL_FORMAT_VERSION,
        "model": "decision-tree",
        "features": list(FEATURES),
        "max_depth": model.max_depth,
        "degenerate": model.degenerate,
        "provenance_digest": model.provenance_digest,
        "root": _node_to_dict(model.root),
    }


def model_from_dict(payload: dict) -> TreeModel:
    if payload.get("format_version") != MODEL_FORMAT_VERSION:
        raise ValueError("unsupported model format version")
    if payload.get("model") != "decision-tree":
        raise ValueError("not a decision-tree model file")
    return TreeModel(
        root=_node_from_dict(payload["root"]),
        max_depth=int(payload["max_depth"]),
        provenance_digest=payload.get("provenance_digest"),
        degenerate=bool(payload.get("degenerate", False)),
    )


def save_model(model: TreeModel, path, extra: dict | None = None) -> None:
    payload = model_to_dict(model)
    if extra:
        payload.update(extra)
    with open(Path(path), "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_model(path) -> TreeModel:
    with open(Path(path)) as fh:
        return model_from_dict(json.load(fh))
