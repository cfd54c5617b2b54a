"""Decision-tree learner tests, including the brute-force split oracle."""

import json
import math

import numpy as np
import pytest

from tgci.dataset import load_tabular
from tgci.errors import LearnerError
from tgci.interpreter import (
    ConstructedFeature,
    ConstructedSchema,
    InterpreterOptions,
    RedescribedExample,
    redescribe,
)
from tgci.learner import (
    DecisionTree,
    FeatureSpec,
    LearnerParams,
    Table,
    predict,
    predict_coded,
    render_tree,
    table_from_dataset,
    table_from_redescription,
    train,
    tree_to_dict,
)

_EPS = 1e-12


def make_table(specs, rows, labels, class_labels):
    """Build a Table from raw python rows (strings for nominal, floats else)."""
    columns = []
    for j, spec in enumerate(specs):
        if spec.values is None:
            columns.append(np.array([float(r[j]) for r in rows], dtype=np.float64))
        else:
            columns.append(np.array([spec.values.index(r[j]) for r in rows],
                                    dtype=np.int64))
    y = np.array([class_labels.index(lab) for lab in labels], dtype=np.int64)
    ids = tuple(f"r{i}" for i in range(len(rows)))
    return Table(tuple(specs), tuple(class_labels), tuple(columns), y, ids)


# --------------------------------------------------------------------------
# Brute-force oracle: direct entropy computation, no shared code with the
# learner's vectorized search.
# --------------------------------------------------------------------------


def entropy_of(labels):
    n = len(labels)
    h = 0.0
    for c in set(labels):
        p = sum(1 for x in labels if x == c) / n
        h -= p * math.log2(p)
    return h


def oracle_best_split(specs, rows, labels, params):
    """Enumerate every feature/threshold, compute gain (ratio) directly."""
    n = len(rows)
    h_parent = entropy_of(labels)
    best = None
    best_score = -math.inf
    for fi, spec in enumerate(specs):
        candidates = []
        if spec.values is None:
            xs = sorted({float(r[fi]) for r in rows})
            for lo, hi in zip(xs, xs[1:]):
                t = (lo + hi) / 2
                if t >= hi:
                    t = lo
                left = [lab for r, lab in zip(rows, labels) if float(r[fi]) <= t]
                right = [lab for r, lab in zip(rows, labels) if float(r[fi]) > t]
                if len(left) < params.min_leaf or len(right) < params.min_leaf:
                    continue
                candidates.append((t, [left, right]))
        else:
            branches = [[lab for r, lab in zip(rows, labels) if r[fi] == v]
                        for v in spec.values]
            nonempty = [b for b in branches if b]
            if len(nonempty) >= 2 and sum(len(b) >= params.min_leaf for b in branches) >= 2:
                candidates.append((None, nonempty))
        feature_best = None
        feature_best_score = -math.inf
        for t, branches in candidates:
            gain = h_parent - sum(len(b) / n * entropy_of(b) for b in branches)
            if gain <= _EPS:
                continue
            split_info = -sum(len(b) / n * math.log2(len(b) / n) for b in branches)
            if params.use_gain_ratio:
                if split_info <= _EPS:
                    continue
                score = gain / split_info
            else:
                score = gain
            if score > feature_best_score + _EPS:
                feature_best_score = score
                feature_best = t
        if feature_best_score > best_score + _EPS:
            best_score = feature_best_score
            best = (fi, feature_best)
    return best


def assert_tree_matches_oracle(tree, specs, rows, labels, params):
    """Walk the tree; at every internal node recompute the best split."""

    def walk(node, node_rows, node_labels):
        if node.is_leaf:
            return
        expected = oracle_best_split(specs, node_rows, node_labels, params)
        assert expected is not None, "learner split where oracle finds none"
        efi, et = expected
        assert node.split.feature == efi
        if et is None:
            assert node.split.threshold is None
            spec = specs[efi]
            for v, child in zip(spec.values, node.children):
                sub = [(r, lab) for r, lab in zip(node_rows, node_labels) if r[efi] == v]
                walk(child, [r for r, _ in sub], [lab for _, lab in sub])
        else:
            assert node.split.threshold == pytest.approx(et, abs=1e-12)
            left = [(r, lab) for r, lab in zip(node_rows, node_labels)
                    if float(r[efi]) <= node.split.threshold]
            right = [(r, lab) for r, lab in zip(node_rows, node_labels)
                     if float(r[efi]) > node.split.threshold]
            walk(node.children[0], [r for r, _ in left], [lab for _, lab in left])
            walk(node.children[1], [r for r, _ in right], [lab for _, lab in right])

    walk(tree.root, rows, labels)


def random_small_problem(rng):
    n = int(rng.integers(4, 17))
    n_nom = int(rng.integers(0, 3))
    n_cont = int(rng.integers(0 if n_nom else 1, 3))
    specs = [FeatureSpec(f"n{j}", ("a", "b", "c")[: int(rng.integers(2, 4))])
             for j in range(n_nom)]
    specs += [FeatureSpec(f"c{j}") for j in range(n_cont)]
    rows = []
    for _ in range(n):
        row = [spec.values[int(rng.integers(len(spec.values)))] if spec.values
               else round(float(rng.integers(0, 6)) / 3.0, 6) for spec in specs]
        rows.append(row)
    labels = [("x", "y")[int(rng.integers(0, 2))] for _ in range(n)]
    return specs, rows, labels


class TestOracleAgreement:
    @pytest.mark.parametrize("use_gain_ratio", [True, False])
    def test_splits_match_oracle_on_small_datasets(self, use_gain_ratio):
        rng = np.random.default_rng(2024)
        params = LearnerParams(pruning_confidence=1.0, use_gain_ratio=use_gain_ratio)
        checked = 0
        for _ in range(40):
            specs, rows, labels = random_small_problem(rng)
            table = make_table(specs, rows, labels, ["x", "y"])
            tree = train(table, params)
            assert_tree_matches_oracle(tree, specs, rows, labels, params)
            checked += 1
        assert checked == 40

    def test_eight_example_root_split_matches_oracle(self):
        specs = [FeatureSpec(f"f{i}", ("0", "1")) for i in range(3)]
        rows = [list(f"{i:03b}") for i in range(8)]
        labels = ["y" if (r[0] == "1") != (r[2] == "1") else "x" for r in rows]
        params = LearnerParams(pruning_confidence=1.0)
        table = make_table(specs, rows, labels, ["x", "y"])
        tree = train(table, params)
        assert_tree_matches_oracle(tree, specs, rows, labels, params)


class TestTraining:
    def test_perfect_single_feature_gives_single_split(self):
        ds = load_tabular("f1,f2,class\n" + "\n".join(
            f"{'a' if i < 5 else 'b'},{'x' if i % 2 else 'y'},{'p' if i < 5 else 'q'}"
            for i in range(10)))
        tree = train(table_from_dataset(ds))
        assert not tree.root.is_leaf
        assert tree.root.split.feature == 0
        assert all(child.is_leaf for child in tree.root.children)
        assert all(predict(tree, ex) == ex.label for ex in ds.examples)

    def test_empty_dataset_rejected(self):
        table = make_table([FeatureSpec("c0")], [], [], ["x", "y"])
        with pytest.raises(LearnerError, match="empty"):
            train(table)

    def test_zero_features_rejected(self):
        table = Table((), ("x", "y"), (), np.array([0, 1]), ("a", "b"))
        with pytest.raises(LearnerError, match="zero features"):
            train(table)

    def test_unpruned_tree_memorizes_consistent_data(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            specs, rows, labels = random_small_problem(rng)
            # deduplicate conflicting rows to make data consistent
            seen = {}
            for r, lab in zip(rows, labels):
                seen[tuple(r)] = lab
            rows = [list(k) for k in seen]
            labels = [seen[tuple(r)] for r in rows]
            if len(set(labels)) < 2:
                continue
            table = make_table(specs, rows, labels, ["x", "y"])
            tree = train(table, LearnerParams(min_leaf=1, pruning_confidence=1.0))
            preds = [predict(tree, r) for r in rows]
            assert preds == labels

    def test_determinism(self):
        rng = np.random.default_rng(11)
        specs, rows, labels = random_small_problem(rng)
        table = make_table(specs, rows, labels, ["x", "y"])
        t1 = train(table, LearnerParams(seed=1))
        t2 = train(table, LearnerParams(seed=2))
        assert tree_to_dict(t1)["root"] == tree_to_dict(t2)["root"]

    def test_tie_break_prefers_lowest_feature_index(self):
        # two identical features: the split must use feature 0
        specs = [FeatureSpec("a", ("0", "1")), FeatureSpec("b", ("0", "1"))]
        rows = [["0", "0"], ["0", "0"], ["1", "1"], ["1", "1"]]
        labels = ["x", "x", "y", "y"]
        tree = train(make_table(specs, rows, labels, ["x", "y"]),
                     LearnerParams(pruning_confidence=1.0))
        assert tree.root.split.feature == 0

    def test_threshold_tie_break_prefers_lowest_threshold(self):
        # symmetric column: cuts at 0.5 and 2.5 have equal scores
        specs = [FeatureSpec("c")]
        rows = [[0.0], [1.0], [2.0], [3.0]]
        labels = ["x", "y", "x", "y"]
        tree = train(make_table(specs, rows, labels, ["x", "y"]),
                     LearnerParams(min_leaf=1, pruning_confidence=1.0))
        assert tree.root.split.threshold == pytest.approx(0.5)

    def test_counts_sum_over_children(self, promoter_theory, promoter_dataset):
        cschema, rex = redescribe(promoter_dataset, promoter_theory)
        tree = train(table_from_redescription(cschema, rex))

        def walk(node):
            if node.is_leaf:
                return
            for k in range(len(node.counts)):
                assert node.counts[k] == sum(c.counts[k] for c in node.children)
            for c in node.children:
                walk(c)

        walk(tree.root)


class TestPruning:
    def _noisy_table(self, seed=3, n=60):
        rng = np.random.default_rng(seed)
        specs = [FeatureSpec("signal"), FeatureSpec("noise")]
        rows, labels = [], []
        for _ in range(n):
            x = float(rng.random())
            labels.append("y" if (x > 0.5) != (rng.random() < 0.15) else "x")
            rows.append([x, float(rng.random())])
        return make_table(specs, rows, labels, ["x", "y"]), rows, labels

    def test_pruning_never_increases_tree_size(self):
        table, _, _ = self._noisy_table()
        unpruned = train(table, LearnerParams(pruning_confidence=1.0))
        pruned = train(table, LearnerParams(pruning_confidence=0.25))
        assert pruned.n_nodes <= unpruned.n_nodes

    def test_pruned_training_accuracy_not_above_unpruned(self):
        table, rows, labels = self._noisy_table(seed=9)
        unpruned = train(table, LearnerParams(pruning_confidence=1.0))
        pruned = train(table, LearnerParams(pruning_confidence=0.05))
        acc_u = np.mean([predict(unpruned, r) == lab for r, lab in zip(rows, labels)])
        acc_p = np.mean([predict(pruned, r) == lab for r, lab in zip(rows, labels)])
        assert acc_p <= acc_u + 1e-12

    def test_stronger_pruning_gives_smaller_or_equal_trees(self):
        table, _, _ = self._noisy_table(seed=21)
        sizes = [train(table, LearnerParams(pruning_confidence=cf)).n_nodes
                 for cf in (0.9, 0.25, 0.05)]
        assert sizes[0] >= sizes[1] >= sizes[2]


class TestPredict:
    def test_leaf_only_tree_predicts_constant(self):
        specs = [FeatureSpec("a", ("0", "1"))]
        rows = [["0"], ["1"], ["0"]]
        labels = ["x", "x", "x"]

        # all same class: root is a leaf even unpruned
        tree = train(make_table(specs, rows, labels, ["x", "y"]))
        assert tree.root.is_leaf
        assert predict(tree, ["1"]) == "x"

    def test_unseen_nominal_value_routes_to_majority_child(self):
        specs = [FeatureSpec("a", ("0", "1"))]
        rows = [["0"]] * 5 + [["1"]] * 2
        labels = ["x"] * 5 + ["y"] * 2
        tree = train(make_table(specs, rows, labels, ["x", "y"]),
                     LearnerParams(pruning_confidence=1.0))
        assert not tree.root.is_leaf
        mutant = DecisionTree(tree.root, (FeatureSpec("a", ("0", "1", "2")),),
                              tree.class_labels, tree.params)
        assert predict(mutant, ["2"]) == "x"   # majority branch has 5 examples

    def test_arity_mismatch_rejected(self):
        specs = [FeatureSpec("a", ("0", "1"))]
        tree = train(make_table(specs, [["0"], ["1"], ["0"], ["1"]],
                                ["x", "y", "x", "y"], ["x", "y"]))
        with pytest.raises(LearnerError, match="values"):
            predict(tree, ["0", "1"])

    def test_predict_coded_agrees_with_predict(self):
        rng = np.random.default_rng(33)
        specs, rows, labels = random_small_problem(rng)
        table = make_table(specs, rows, labels, ["x", "y"])
        tree = train(table)
        for i, row in enumerate(rows):
            assert predict(tree, row) == table.class_labels[
                predict_coded(tree, table.columns, i)]

    def test_predictions_match_independent_reevaluation(self):
        # enumerable domain: re-evaluate the tree's split logic by hand
        specs = [FeatureSpec(f"f{i}", ("0", "1")) for i in range(6)]
        rows = [list(f"{i:06b}") for i in range(64)]
        labels = ["y" if r.count("1") >= 3 else "x" for r in rows]
        tree = train(make_table(specs, rows, labels, ["x", "y"]),
                     LearnerParams(pruning_confidence=1.0, min_leaf=1))

        def reevaluate(node, row):
            if node.is_leaf:
                return tree.class_labels[node.prediction]
            value = row[node.split.feature]
            branch = specs[node.split.feature].values.index(value)
            return reevaluate(node.children[branch], row)

        for row in rows:
            assert predict(tree, row) == reevaluate(tree.root, row)


class TestRendering:
    def test_single_split_tree_renders_two_branches(self):
        specs = [FeatureSpec("c")]
        rows = [[0.0], [0.1], [0.9], [1.0]]
        labels = ["x", "x", "y", "y"]
        tree = train(make_table(specs, rows, labels, ["x", "y"]))
        text = render_tree(tree)
        assert "c <= 0.5" in text and "c > 0.5" in text
        assert len(text.strip().split("\n")) == 2

    def test_promoter_tree_mentions_constructed_names(self, promoter_theory,
                                                      promoter_dataset):
        cschema, rex = redescribe(promoter_dataset, promoter_theory)
        tree = train(table_from_redescription(cschema, rex))
        text = render_tree(tree, cschema)
        assert "minus_" in text or "contact" in text or "promoter" in text

    def test_schema_mismatch_rejected(self, promoter_theory, promoter_dataset):
        cschema, rex = redescribe(promoter_dataset, promoter_theory)
        tree = train(table_from_redescription(cschema, rex))
        with pytest.raises(LearnerError, match="features"):
            render_tree(tree, [FeatureSpec("only_one")])

    def test_json_export_round_trips_through_json(self):
        specs = [FeatureSpec("a", ("0", "1")), FeatureSpec("c")]
        rows = [["0", 0.2], ["1", 0.3], ["0", 0.9], ["1", 0.7]]
        labels = ["x", "x", "y", "y"]
        tree = train(make_table(specs, rows, labels, ["x", "y"]))
        doc = json.loads(json.dumps(tree_to_dict(tree)))
        assert doc["classes"] == ["x", "y"]
        assert doc["root"]["counts"] == [2, 2]
        if "test" in doc["root"]:
            assert "feature" in doc["root"]["test"]


class TestParams:
    def test_bad_min_leaf_rejected(self):
        with pytest.raises(LearnerError):
            LearnerParams(min_leaf=0)

    def test_bad_confidence_rejected(self):
        with pytest.raises(LearnerError):
            LearnerParams(pruning_confidence=0.0)
        with pytest.raises(LearnerError):
            LearnerParams(pruning_confidence=1.5)

    def test_params_recorded_on_tree(self):
        specs = [FeatureSpec("c")]
        table = make_table(specs, [[0.0], [1.0], [0.0], [1.0]],
                           ["x", "y", "x", "y"], ["x", "y"])
        params = LearnerParams(min_leaf=1, pruning_confidence=0.5, seed=9)
        tree = train(table, params)
        assert tree.params == params
