"""Least-squares gradient boosting with exact greedy depth-limited trees.

Stage-wise fit: F_0 is the target mean; each round fits a regression tree
to the current residuals by variance-reduction splits (candidate thresholds
are midpoints of consecutive distinct feature values, ties broken by lowest
feature index then lowest threshold) and is added with shrinkage nu.
Prediction clamps to [0, 1], the risk scale used downstream; training
itself is unclamped least squares.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import DataError, FormatError, ShapeError

MAGIC = "GBTR"
VERSION = 1
_MIN_GAIN = 1e-12


@dataclass
class GbtConfig:
    n_trees: int = 100
    max_depth: int = 3
    shrinkage: float = 0.1
    min_samples_leaf: int = 2
    seed: int = 0  # reserved; exact greedy fitting is already deterministic


@dataclass
class TreeNode:
    feature: int | None = None
    threshold: float | None = None
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None
    value: float | None = None

    @property
    def is_leaf(self) -> bool:
        return self.feature is None

    def predict_one(self, x: np.ndarray) -> float:
        node = self
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        return node.value

    def depth(self) -> int:
        if self.is_leaf:
            return 0
        return 1 + max(self.left.depth(), self.right.depth())

    def to_obj(self):
        if self.is_leaf:
            return {"value": self.value}
        return {"feature": self.feature, "threshold": self.threshold,
                "left": self.left.to_obj(), "right": self.right.to_obj()}

    @staticmethod
    def from_obj(obj) -> "TreeNode":
        if "value" in obj:
            return TreeNode(value=float(obj["value"]))
        return TreeNode(feature=int(obj["feature"]), threshold=float(obj["threshold"]),
                        left=TreeNode.from_obj(obj["left"]),
                        right=TreeNode.from_obj(obj["right"]))


@dataclass
class GbtRegressor:
    base_score: float
    shrinkage: float
    trees: list = field(default_factory=list)
    dim: int = 0


def _as_matrix(X) -> np.ndarray:
    rows = []
    for x in X:
        rows.append(np.asarray(getattr(x, "values", x), dtype=np.float64))
    return np.vstack(rows) if rows else np.zeros((0, 0))


def _best_split(X: np.ndarray, residuals: np.ndarray, min_leaf: int):
    """Exact greedy variance-reduction split, or None when no valid gain."""
    n = X.shape[0]
    if n < 2 * min_leaf:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    sorted_vals = np.take_along_axis(X, order, axis=0)
    sorted_y = residuals[order]
    prefix = np.cumsum(sorted_y, axis=0)
    total = prefix[-1, :]

    left_n = np.arange(1, n, dtype=np.float64)[:, None]
    right_n = n - left_n
    left_sum = prefix[:-1, :]
    right_sum = total[None, :] - left_sum
    gains = (left_sum ** 2 / left_n + right_sum ** 2 / right_n
             - (total[None, :] ** 2) / n)
    valid = sorted_vals[1:, :] > sorted_vals[:-1, :]
    valid &= left_n >= min_leaf
    valid &= right_n >= min_leaf
    gains = np.where(valid, gains, -np.inf)
    best = gains.max()
    if not np.isfinite(best) or best <= _MIN_GAIN:
        return None
    positions, features = np.nonzero(gains == best)
    # ties: lowest feature index, then lowest threshold (positions ascend in value)
    pick = np.lexsort((positions, features))[0]
    i, j = int(positions[pick]), int(features[pick])
    threshold = 0.5 * (sorted_vals[i, j] + sorted_vals[i + 1, j])
    return j, float(threshold)


def _build_tree(X: np.ndarray, residuals: np.ndarray, depth: int,
                config: GbtConfig) -> TreeNode:
    if depth >= config.max_depth:
        return TreeNode(value=float(residuals.mean()))
    split = _best_split(X, residuals, config.min_samples_leaf)
    if split is None:
        return TreeNode(value=float(residuals.mean()))
    feature, threshold = split
    mask = X[:, feature] <= threshold
    return TreeNode(
        feature=feature, threshold=threshold,
        left=_build_tree(X[mask], residuals[mask], depth + 1, config),
        right=_build_tree(X[~mask], residuals[~mask], depth + 1, config),
    )


def _tree_predict(tree: TreeNode, X: np.ndarray) -> np.ndarray:
    return np.array([tree.predict_one(x) for x in X])


def fit_gbt(X, y, config: GbtConfig | None = None) -> GbtRegressor:
    config = config or GbtConfig()
    matrix = _as_matrix(X)
    targets = np.asarray(y, dtype=np.float64)
    if matrix.shape[0] != targets.shape[0]:
        raise DataError(f"{matrix.shape[0]} embeddings but {targets.shape[0]} targets")
    if matrix.shape[0] < 2:
        raise DataError("need at least 2 training samples")
    if np.any(targets < 0) or np.any(targets > 1):
        raise DataError("targets must lie in [0, 1]")

    base = float(targets.mean())
    predictions = np.full_like(targets, base)
    trees = []
    for _ in range(config.n_trees):
        residuals = targets - predictions
        tree = _build_tree(matrix, residuals, 0, config)
        trees.append(tree)
        predictions = predictions + config.shrinkage * _tree_predict(tree, matrix)
    return GbtRegressor(base_score=base, shrinkage=config.shrinkage,
                        trees=trees, dim=matrix.shape[1])


def predict_risk(model: GbtRegressor, z) -> float:
    """Clamped risk prediction for one embedding."""
    x = np.asarray(getattr(z, "values", z), dtype=np.float64)
    if model.dim and x.shape[0] != model.dim:
        raise ShapeError(f"embedding dim {x.shape[0]} != model dim {model.dim}")
    raw = model.base_score + model.shrinkage * sum(
        tree.predict_one(x) for tree in model.trees)
    return float(min(1.0, max(0.0, raw)))


def staged_predictions(model: GbtRegressor, X) -> np.ndarray:
    """Unclamped prediction matrix after 0..T trees; rows are stages."""
    matrix = _as_matrix(X)
    stages = np.empty((len(model.trees) + 1, matrix.shape[0]))
    stages[0] = model.base_score
    for m, tree in enumerate(model.trees, start=1):
        stages[m] = stages[m - 1] + model.shrinkage * _tree_predict(tree, matrix)
    return stages


def save_gbt(model: GbtRegressor, path) -> None:
    obj = {
        "magic": MAGIC,
        "version": VERSION,
        "base_score": model.base_score,
        "shrinkage": model.shrinkage,
        "dim": model.dim,
        "trees": [tree.to_obj() for tree in model.trees],
    }
    Path(path).write_text(json.dumps(obj, separators=(",", ":")) + "\n", encoding="utf-8")


def load_gbt(path) -> GbtRegressor:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc.msg})") from exc
    if not isinstance(obj, dict) or obj.get("magic") != MAGIC:
        raise FormatError(f"{path}: bad magic, expected {MAGIC!r}")
    if obj.get("version") != VERSION:
        raise FormatError(
            f"{path}: unsupported version {obj.get('version')}; supported: {VERSION}")
    return GbtRegressor(
        base_score=float(obj["base_score"]),
        shrinkage=float(obj["shrinkage"]),
        trees=[TreeNode.from_obj(t) for t in obj["trees"]],
        dim=int(obj.get("dim", 0)),
    )
