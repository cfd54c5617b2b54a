"""C4.5-style decision-tree learner over mixed continuous/nominal features.

This is a faithful stand-in for a standard top-down induction program, not
a byte-compatible C4.5 clone.  The pinned algorithm:

* splits maximize information gain ratio (plain gain when
  ``use_gain_ratio`` is off); a candidate needs gain > 1e-12;
* continuous features are tested at midpoints between consecutive distinct
  sorted values, branching ``value <= t`` / ``value > t``, and both sides
  must hold at least ``min_leaf`` examples;
* nominal features split one branch per allowed value; a candidate needs
  at least two non-empty branches and at least two branches with
  ``min_leaf`` or more examples (gain and split info are computed over the
  non-empty branches); empty branches become leaves predicting the parent
  majority;
* ties in split score (within 1e-12) go to the lowest feature index, then
  the lowest threshold; equal-count class majorities go to the lowest
  class index, so training is fully deterministic;
* pruning is bottom-up error-based pruning with the binomial
  upper-confidence-bound estimate U(E, N) at confidence
  ``pruning_confidence`` (the inverse incomplete beta,
  ``beta.ppf(1 - CF, E + 1, N - E)``); a subtree collapses to a leaf when
  the leaf's estimated errors do not exceed the subtree's.
  ``pruning_confidence=1.0`` disables pruning (the bound degenerates
  there).

``LearnerParams.seed`` is recorded with every trained tree for provenance;
the algorithm above never draws from it because all tie-breaking is
deterministic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.special import xlogy
from scipy.stats import beta as beta_dist

from .dataset import Dataset
from .errors import LearnerError
from .interpreter import ORIGINAL, ConstructedSchema

_EPS = 1e-12
_LOG2 = np.log(2.0)


@dataclass(frozen=True)
class FeatureSpec:
    """Learner-side feature descriptor; ``values=None`` means continuous."""

    name: str
    values: tuple[str, ...] | None = None

    @property
    def is_continuous(self) -> bool:
        return self.values is None


@dataclass(frozen=True)
class LearnerParams:
    min_leaf: int = 2
    pruning_confidence: float = 0.25
    use_gain_ratio: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.min_leaf < 1:
            raise LearnerError("min_leaf must be >= 1")
        if not (0.0 < self.pruning_confidence <= 1.0):
            raise LearnerError("pruning_confidence must be in (0, 1]")

    def as_dict(self) -> dict:
        return {
            "min_leaf": self.min_leaf,
            "pruning_confidence": self.pruning_confidence,
            "use_gain_ratio": self.use_gain_ratio,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class SplitTest:
    """``threshold`` set: value <= t goes left.  None: one branch per value."""

    feature: int
    threshold: float | None = None

    @property
    def is_threshold(self) -> bool:
        return self.threshold is not None


@dataclass
class TreeNode:
    counts: tuple[int, ...]
    prediction: int
    split: SplitTest | None = None
    children: tuple["TreeNode", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return self.split is None

    @property
    def n(self) -> int:
        return int(sum(self.counts))

    def iter_nodes(self):
        yield self
        for child in self.children:
            yield from child.iter_nodes()


@dataclass
class DecisionTree:
    root: TreeNode
    features: tuple[FeatureSpec, ...]
    class_labels: tuple[str, ...]
    params: LearnerParams = field(default_factory=LearnerParams)

    @property
    def n_nodes(self) -> int:
        return sum(1 for _ in self.root.iter_nodes())


# --------------------------------------------------------------------------
# Tables: the learner's input format
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Table:
    """Column-coded training data.

    Nominal columns hold int codes into the feature's value tuple;
    continuous columns hold float64.
    """

    features: tuple[FeatureSpec, ...]
    class_labels: tuple[str, ...]
    columns: tuple[np.ndarray, ...]
    y: np.ndarray
    ids: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, indices) -> "Table":
        idx = np.asarray(indices, dtype=np.int64)
        return Table(
            self.features,
            self.class_labels,
            tuple(col[idx] for col in self.columns),
            self.y[idx],
            tuple(self.ids[int(i)] for i in idx),
        )

    def raw_row(self, i: int) -> list:
        row = []
        for spec, col in zip(self.features, self.columns):
            row.append(float(col[i]) if spec.is_continuous else spec.values[int(col[i])])
        return row


def table_from_dataset(dataset: Dataset) -> Table:
    """Code an all-nominal dataset for the learner."""
    specs = tuple(FeatureSpec(name, values) for name, values in dataset.schema.features)
    class_labels = dataset.schema.classes
    cindex = {c: i for i, c in enumerate(class_labels)}
    vindex = [{v: i for i, v in enumerate(values)} for _, values in dataset.schema.features]
    n = len(dataset)
    cols = [np.empty(n, dtype=np.int64) for _ in specs]
    y = np.empty(n, dtype=np.int64)
    for i, ex in enumerate(dataset.examples):
        y[i] = cindex[ex.label]
        for j, v in enumerate(ex.values):
            cols[j][i] = vindex[j][v]
    return Table(specs, class_labels, tuple(cols), y, tuple(ex.id for ex in dataset.examples))


def table_from_redescription(schema: ConstructedSchema, examples) -> Table:
    """Code a redescription (constructed floats plus any original columns)."""
    specs = tuple(
        FeatureSpec(f.name, f.values if f.kind == ORIGINAL else None)
        for f in schema.features
    )
    class_labels = schema.classes
    cindex = {c: i for i, c in enumerate(class_labels)}
    n = len(examples)
    cols: list[np.ndarray] = []
    for j, spec in enumerate(specs):
        if spec.is_continuous:
            cols.append(np.fromiter((float(ex.values[j]) for ex in examples),
                                    dtype=np.float64, count=n))
        else:
            vindex = {v: i for i, v in enumerate(spec.values)}
            cols.append(np.fromiter((vindex[ex.values[j]] for ex in examples),
                                    dtype=np.int64, count=n))
    y = np.fromiter((cindex[ex.label] for ex in examples), dtype=np.int64, count=n)
    return Table(specs, class_labels, tuple(cols), y, tuple(ex.id for ex in examples))


# --------------------------------------------------------------------------
# Entropy helpers
# --------------------------------------------------------------------------


def _entropy_rows(counts: np.ndarray) -> np.ndarray:
    """Entropy (bits) of each row of a (..., k) count array; empty rows -> 0."""
    totals = counts.sum(axis=-1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(totals > 0, counts / np.maximum(totals, 1), 0.0)
    return -xlogy(p, p).sum(axis=-1) / _LOG2


def _entropy(counts: np.ndarray) -> float:
    return float(_entropy_rows(counts.astype(np.float64)[None, :])[0])


# --------------------------------------------------------------------------
# Training
# --------------------------------------------------------------------------


class _Grower:
    def __init__(self, table: Table, params: LearnerParams):
        self.params = params
        self.k = len(table.class_labels)
        self.y = table.y
        self.specs = table.features
        self.cont_feats = [i for i, s in enumerate(self.specs) if s.is_continuous]
        self.nom_feats = [i for i, s in enumerate(self.specs) if not s.is_continuous]
        self.cont_cols = [np.asarray(table.columns[i], dtype=np.float64)
                          for i in self.cont_feats]
        if self.nom_feats:
            self.nom_codes = np.stack(
                [np.asarray(table.columns[i], dtype=np.int64) for i in self.nom_feats],
                axis=1)
            self.nom_sizes = np.array(
                [len(self.specs[i].values) for i in self.nom_feats], dtype=np.int64)
            self.vmax = int(self.nom_sizes.max())
            # Flat bin layout: feature f, value v, class c -> f*vmax*k + v*k + c,
            # so one bincount yields every nominal contingency table at once.
            self.nom_offsets = np.arange(len(self.nom_feats), dtype=np.int64) * self.vmax * self.k
        else:
            self.nom_codes = None

    def grow(self, idx: np.ndarray) -> TreeNode:
        y_sub = self.y[idx]
        counts = np.bincount(y_sub, minlength=self.k)
        prediction = int(np.argmax(counts))
        node = TreeNode(counts=tuple(int(c) for c in counts), prediction=prediction)
        n = len(idx)
        if counts[prediction] == n or n < 2 * self.params.min_leaf:
            return node
        best = self._best_split(idx, y_sub, counts)
        if best is None:
            return node
        feature, threshold = best
        node.split = SplitTest(feature, threshold)
        spec = self.specs[feature]
        if threshold is not None:
            col = self.cont_cols[self.cont_feats.index(feature)][idx]
            left = idx[col <= threshold]
            right = idx[col > threshold]
            if len(left) == 0 or len(right) == 0:   # degenerate float split
                node.split = None
                return node
            node.children = (self.grow(left), self.grow(right))
        else:
            codes = self.nom_codes[idx, self.nom_feats.index(feature)]
            children = []
            for v in range(len(spec.values)):
                branch = idx[codes == v]
                if len(branch) == 0:
                    children.append(TreeNode(counts=(0,) * self.k, prediction=prediction))
                else:
                    children.append(self.grow(branch))
            node.children = tuple(children)
        return node

    def _best_split(self, idx, y_sub, counts):
        n = len(idx)
        h_parent = _entropy(counts)
        per_feature: dict[int, tuple[float, float | None]] = {}
        if self.nom_feats:
            scores = self._nominal_scores(idx, y_sub, n, h_parent)
            for j, fi in enumerate(self.nom_feats):
                if np.isfinite(scores[j]):
                    per_feature[fi] = (float(scores[j]), None)
        for j, fi in enumerate(self.cont_feats):
            found = self._best_threshold(self.cont_cols[j][idx], y_sub, n, h_parent)
            if found is not None:
                per_feature[fi] = found
        best = None
        best_score = -np.inf
        for fi in sorted(per_feature):
            score, threshold = per_feature[fi]
            if score > best_score + _EPS:
                best_score = score
                best = (fi, threshold)
        return best

    def _nominal_scores(self, idx, y_sub, n, h_parent) -> np.ndarray:
        params = self.params
        nf = len(self.nom_feats)
        flat = (self.nom_codes[idx] * self.k + y_sub[:, None] + self.nom_offsets).ravel()
        cont = np.bincount(flat, minlength=nf * self.vmax * self.k)
        cont = cont.reshape(nf, self.vmax, self.k).astype(np.float64)
        branch_sizes = cont.sum(axis=2)                      # (nf, vmax)
        nonempty = branch_sizes > 0
        valid = (nonempty.sum(axis=1) >= 2) & \
                ((branch_sizes >= params.min_leaf).sum(axis=1) >= 2)
        weights = branch_sizes / n
        h_branches = _entropy_rows(cont)                     # (nf, vmax)
        gain = h_parent - (weights * h_branches).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            split_info = -xlogy(weights, weights).sum(axis=1) / _LOG2
        valid &= gain > _EPS
        if params.use_gain_ratio:
            valid &= split_info > _EPS
            with np.errstate(divide="ignore", invalid="ignore"):
                score = np.where(valid, gain / np.maximum(split_info, _EPS), -np.inf)
        else:
            score = np.where(valid, gain, -np.inf)
        return score

    def _best_threshold(self, x, y_sub, n, h_parent):
        params = self.params
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y_sub[order]
        cut = np.nonzero(xs[:-1] < xs[1:])[0]               # left part = xs[:i+1]
        if len(cut) == 0:
            return None
        left_n = cut + 1
        right_n = n - left_n
        ok = (left_n >= params.min_leaf) & (right_n >= params.min_leaf)
        cut = cut[ok]
        if len(cut) == 0:
            return None
        onehot = (ys[:, None] == np.arange(self.k)).astype(np.float64)
        cum = np.cumsum(onehot, axis=0)
        left_counts = cum[cut]
        right_counts = cum[-1] - left_counts
        left_n = left_n[ok].astype(np.float64)
        right_n = right_n[ok].astype(np.float64)
        gain = h_parent - (left_n * _entropy_rows(left_counts)
                           + right_n * _entropy_rows(right_counts)) / n
        pl, pr = left_n / n, right_n / n
        split_info = -(xlogy(pl, pl) + xlogy(pr, pr)) / _LOG2
        valid = gain > _EPS
        if params.use_gain_ratio:
            valid &= split_info > _EPS
            score = np.where(valid, gain / np.maximum(split_info, _EPS), -np.inf)
        else:
            score = np.where(valid, gain, -np.inf)
        if not np.any(valid):
            return None
        mx = score.max()
        pick = int(np.nonzero(score >= mx - _EPS)[0][0])    # lowest threshold among ties
        lo, hi = float(xs[cut[pick]]), float(xs[cut[pick] + 1])
        threshold = (lo + hi) / 2.0
        # Adjacent doubles have no representable midpoint; fall back to the
        # lower value so "value <= t" still routes the intended block left.
        if threshold >= hi:
            threshold = lo
        return float(score[pick]), threshold


def _upper_error_bound(errors: float, n: float, cf: float) -> float:
    """Binomial upper confidence bound on the true error rate."""
    if n <= 0:
        return 0.0
    if errors >= n:
        return 1.0
    return float(beta_dist.ppf(1.0 - cf, errors + 1.0, n - errors))


def _prune(node: TreeNode, cf: float) -> float:
    """Error-based pruning; returns the node's estimated error count."""
    n = node.n
    errors = n - node.counts[node.prediction] if n > 0 else 0
    leaf_estimate = n * _upper_error_bound(errors, n, cf)
    if node.is_leaf:
        return leaf_estimate
    subtree_estimate = sum(_prune(child, cf) for child in node.children)
    if leaf_estimate <= subtree_estimate + 1e-9:
        node.split = None
        node.children = ()
        return leaf_estimate
    return subtree_estimate


def train(table: Table, params: LearnerParams | None = None) -> DecisionTree:
    """Grow and prune a decision tree from a coded table.

    Deterministic given the table (including row order) and params.
    """
    params = params or LearnerParams()
    if len(table) == 0:
        raise LearnerError("cannot train on an empty dataset")
    if len(table.features) == 0:
        raise LearnerError("cannot train with zero features")
    grower = _Grower(table, params)
    root = grower.grow(np.arange(len(table)))
    if params.pruning_confidence < 1.0:
        _prune(root, params.pruning_confidence)
    return DecisionTree(root, table.features, table.class_labels, params)


# --------------------------------------------------------------------------
# Prediction
# --------------------------------------------------------------------------


def _majority_child(children: tuple[TreeNode, ...]) -> TreeNode:
    best = children[0]
    for child in children[1:]:
        if child.n > best.n:
            best = child
    return best


def predict(tree: DecisionTree, example) -> str:
    """Classify one example given as raw values aligned to the tree's features.

    Nominal values never seen by the schema route to the largest child.
    """
    values = example.values if hasattr(example, "values") else example
    if len(values) != len(tree.features):
        raise LearnerError(
            f"example has {len(values)} values, tree expects {len(tree.features)}")
    node = tree.root
    while not node.is_leaf:
        spec = tree.features[node.split.feature]
        v = values[node.split.feature]
        if spec.is_continuous:
            node = node.children[0] if float(v) <= node.split.threshold else node.children[1]
        else:
            try:
                branch = spec.values.index(v)
            except ValueError:
                branch = -1
            if 0 <= branch < len(node.children):
                node = node.children[branch]
            else:
                node = _majority_child(node.children)
    return tree.class_labels[node.prediction]


def predict_coded(tree: DecisionTree, columns, i: int) -> int:
    """Fast path: classify row ``i`` of coded table columns; returns class index."""
    node = tree.root
    while not node.is_leaf:
        fi = node.split.feature
        if node.split.threshold is not None:
            node = node.children[0] if columns[fi][i] <= node.split.threshold else node.children[1]
        else:
            node = node.children[int(columns[fi][i])]
    return node.prediction


# --------------------------------------------------------------------------
# Rendering / export
# --------------------------------------------------------------------------


def _feature_names(schema, tree: DecisionTree) -> tuple[str, ...]:
    if schema is None:
        return tuple(s.name for s in tree.features)
    if isinstance(schema, ConstructedSchema):
        names = schema.names
    else:
        names = tuple(getattr(s, "name", s) for s in schema)
    if len(names) != len(tree.features):
        raise LearnerError(
            f"schema has {len(names)} features, tree expects {len(tree.features)}")
    return names


def render_tree(tree: DecisionTree, schema=None) -> str:
    """Indented, C4.5-flavored text rendering of a tree."""
    names = _feature_names(schema, tree)
    lines: list[str] = []

    def emit(node: TreeNode, depth: int, prefix: str):
        indent = "|   " * depth
        if node.is_leaf:
            lines.append(f"{indent}{prefix}: {tree.class_labels[node.prediction]} ({node.n})")
            return
        lines.append(f"{indent}{prefix}:" if prefix else f"{indent}{prefix}")
        name = names[node.split.feature]
        child_depth = depth + 1 if prefix else depth
        if node.split.is_threshold:
            t = node.split.threshold
            emit(node.children[0], child_depth, f"{name} <= {t:g}")
            emit(node.children[1], child_depth, f"{name} > {t:g}")
        else:
            spec = tree.features[node.split.feature]
            for v, child in zip(spec.values, node.children):
                emit(child, child_depth, f"{name} = {v}")

    if tree.root.is_leaf:
        emit(tree.root, 0, "<root>")
    else:
        emit(tree.root, 0, "")
        lines = [line for line in lines if line.strip()]
    return "\n".join(lines) + "\n"


def tree_to_dict(tree: DecisionTree, schema=None) -> dict:
    """JSON-ready structure: nodes, tests, and class counts."""
    names = _feature_names(schema, tree)

    def node_dict(node: TreeNode) -> dict:
        d: dict = {
            "counts": list(node.counts),
            "prediction": tree.class_labels[node.prediction],
        }
        if not node.is_leaf:
            d["test"] = {
                "feature": names[node.split.feature],
                "feature_index": node.split.feature,
            }
            if node.split.is_threshold:
                d["test"]["threshold"] = node.split.threshold
            else:
                d["test"]["values"] = list(tree.features[node.split.feature].values)
            d["children"] = [node_dict(c) for c in node.children]
        return d

    return {
        "classes": list(tree.class_labels),
        "features": [s.name for s in tree.features],
        "params": tree.params.as_dict(),
        "root": node_dict(tree.root),
    }


def tree_to_json(tree: DecisionTree, schema=None) -> str:
    return json.dumps(tree_to_dict(tree, schema), indent=2)
