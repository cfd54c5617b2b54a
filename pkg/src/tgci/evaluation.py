"""Experimental methodology: baselines, learning curves, LOO, significance.

Learning curves follow the nested-partition protocol: per seed, one
permutation fixes a test set (the last ``test_size`` entries) and every
training size is a prefix of the same shuffled order, so larger training
sets contain the smaller ones and all sizes share one test set.

The significance test is a one-sided paired t-test for mean(A - B) > 0;
zero-variance difference vectors are flagged instead of producing NaN.
95% confidence half-widths use the t quantile with n-1 degrees of freedom.
"""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.stats import t as t_dist

from .dataset import Dataset, shuffled_indices
from .errors import EvaluationError
from .interpreter import (
    BOOLEAN,
    PARTIAL_MATCH,
    InterpreterOptions,
    boolean_top,
    redescribe,
)
from .learner import (
    LearnerParams,
    Table,
    predict_coded,
    table_from_dataset,
    table_from_redescription,
    train,
)
from .theory import Theory

METHODS = ("plain", "tgci", "boolean-interp")


@dataclass(frozen=True)
class CurvePoint:
    train_size: int
    mean_accuracy: float
    ci_half_width: float
    n_partitions: int


@dataclass
class RunReport:
    """Per-partition accuracies keyed by (seed, train_size)."""

    method: str
    entries: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    elapsed_seconds: float = 0.0

    def accuracies(self, train_size: int) -> list[float]:
        return [acc for (_, size), acc in sorted(self.entries.items()) if size == train_size]


@dataclass(frozen=True)
class Verdict:
    id: str
    actual: str
    predicted: str
    exact_match: bool


@dataclass(frozen=True)
class TheoryOnlyResult:
    accuracy: float
    verdicts: tuple[Verdict, ...]

    @property
    def exact_match_count(self) -> int:
        return sum(1 for v in self.verdicts if v.exact_match)


@dataclass(frozen=True)
class PairedTestResult:
    p_value: float
    mean_diff: float
    t_statistic: float
    dof: int
    zero_variance: bool


# --------------------------------------------------------------------------
# Theory-only baseline
# --------------------------------------------------------------------------


def select_binary_concept(theory: Theory, schema):
    """The concept root used for binary classification.

    A single-concept theory uses its one concept; otherwise the concept
    named like the schema's positive class is used.
    """
    if schema.positive_class is None:
        raise EvaluationError("dataset schema has no positive_class set")
    if len(schema.classes) != 2:
        raise EvaluationError("binary task required: schema must have exactly 2 classes")
    if len(theory.concepts) == 1:
        return theory.concepts[0][1]
    for name, root in theory.concepts:
        if name == schema.positive_class:
            return root
    raise EvaluationError(
        "theory has multiple concepts and none is named after the positive class")


def theory_only_classify(theory: Theory, dataset: Dataset) -> TheoryOnlyResult:
    """Predict positive exactly when the boolean root value is 1."""
    schema = dataset.schema
    root = select_binary_concept(theory, schema)
    positive = schema.positive_class
    negative = next(c for c in schema.classes if c != positive)
    verdicts = []
    correct = 0
    for ex in dataset.examples:
        match = boolean_top(root, ex, schema) == 1
        predicted = positive if match else negative
        if predicted == ex.label:
            correct += 1
        verdicts.append(Verdict(ex.id, ex.label, predicted, match))
    return TheoryOnlyResult(correct / len(dataset), tuple(verdicts))


# --------------------------------------------------------------------------
# Method dispatch
# --------------------------------------------------------------------------


def method_table(dataset: Dataset, theories, method: str,
                 interpreter_options: InterpreterOptions | None = None) -> Table:
    """Coded training table for one method label.

    ``plain`` uses the raw nominal features; ``tgci`` and ``boolean-interp``
    redescribe with the matching interpreter kind (overriding the kind in
    any passed options).
    """
    if method not in METHODS:
        raise EvaluationError(f"unknown method {method!r}; expected one of {METHODS}")
    if method == "plain":
        return table_from_dataset(dataset)
    if theories is None:
        raise EvaluationError(f"method {method!r} needs a theory")
    options = interpreter_options or InterpreterOptions()
    options = replace(options, kind=PARTIAL_MATCH if method == "tgci" else BOOLEAN)
    cschema, redescribed = redescribe(dataset, theories, options)
    return table_from_redescription(cschema, redescribed)


# --------------------------------------------------------------------------
# Learning curves
# --------------------------------------------------------------------------


def _seed_accuracies(table: Table, seed: int, sizes, test_size: int,
                     params: LearnerParams) -> dict[int, float]:
    n = len(table)
    perm = shuffled_indices(n, seed)
    test_idx = perm[n - test_size:]
    out = {}
    for size in sizes:
        tree = train(table.subset(perm[:size]), params)
        correct = sum(
            predict_coded(tree, table.columns, int(i)) == int(table.y[int(i)])
            for i in test_idx)
        out[size] = correct / test_size
    return out


def _curve_worker(args):
    table, seed, sizes, test_size, params = args
    return seed, _seed_accuracies(table, seed, sizes, test_size, params)


def ci_half_width(values, confidence: float = 0.95) -> float:
    """t-based confidence half-width; 0 when fewer than 2 values."""
    n = len(values)
    if n < 2:
        return 0.0
    sd = float(np.std(values, ddof=1))
    q = float(t_dist.ppf(0.5 + confidence / 2.0, n - 1))
    return q * sd / math.sqrt(n)


def resolve_seeds(seeds, n_partitions: int) -> list[int]:
    """Explicit seed list, or ``base, base+1, ...`` from a base seed."""
    if seeds is None:
        seeds = 0
    if isinstance(seeds, (int, np.integer)):
        return [int(seeds) + i for i in range(n_partitions)]
    seeds = [int(s) for s in seeds]
    if len(seeds) != n_partitions:
        raise EvaluationError(
            f"{len(seeds)} seeds given but n_partitions={n_partitions}")
    if len(set(seeds)) != len(seeds):
        raise EvaluationError("partition seeds must be distinct")
    return seeds


def learning_curve(dataset: Dataset, theories, method: str, sizes, test_size: int,
                   n_partitions: int, seeds=None,
                   learner_params: LearnerParams | None = None,
                   interpreter_options: InterpreterOptions | None = None,
                   jobs: int = 1):
    """Accuracy curve over nested training subsets and a fixed test set.

    Returns ``(points, report)``: one :class:`CurvePoint` per size (mean and
    95% CI over partitions) plus the full per-partition :class:`RunReport`.
    """
    sizes = [int(s) for s in sizes]
    if not sizes or any(s < 1 for s in sizes):
        raise EvaluationError(f"invalid sizes {sizes}: every size must be >= 1")
    if test_size < 1:
        raise EvaluationError("test_size must be >= 1")
    if max(sizes) + test_size > len(dataset):
        raise EvaluationError(
            f"max(sizes) + test_size = {max(sizes) + test_size} exceeds "
            f"dataset size {len(dataset)}")
    if n_partitions < 1:
        raise EvaluationError("n_partitions must be >= 1")
    params = learner_params or LearnerParams()
    seed_list = resolve_seeds(seeds, n_partitions)

    started = time.perf_counter()
    table = method_table(dataset, theories, method, interpreter_options)
    tasks = [(table, seed, sizes, test_size, params) for seed in seed_list]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_curve_worker, tasks))
    else:
        results = dict(_curve_worker(t) for t in tasks)

    entries = {}
    for seed in sorted(results):
        for size, acc in results[seed].items():
            entries[(seed, size)] = acc
    report = RunReport(
        method=method,
        entries=entries,
        params={
            "sizes": sizes,
            "test_size": test_size,
            "n_partitions": n_partitions,
            "seeds": seed_list,
            "learner": params.as_dict(),
        },
        elapsed_seconds=time.perf_counter() - started,
    )
    points = []
    for size in sizes:
        accs = [entries[(seed, size)] for seed in seed_list]
        points.append(CurvePoint(size, float(np.mean(accs)), ci_half_width(accs),
                                 n_partitions))
    return points, report


# --------------------------------------------------------------------------
# Leave-one-out
# --------------------------------------------------------------------------


def leave_one_out(dataset: Dataset, theories, method: str,
                  learner_params: LearnerParams | None = None,
                  interpreter_options: InterpreterOptions | None = None) -> float:
    """n-fold hold-one-out accuracy of one method."""
    n = len(dataset)
    if n < 2:
        raise EvaluationError("leave-one-out needs at least 2 examples")
    params = learner_params or LearnerParams()
    table = method_table(dataset, theories, method, interpreter_options)
    all_idx = np.arange(n)
    correct = 0
    for i in range(n):
        tree = train(table.subset(np.delete(all_idx, i)), params)
        if predict_coded(tree, table.columns, i) == int(table.y[i]):
            correct += 1
    return correct / n


# --------------------------------------------------------------------------
# Significance
# --------------------------------------------------------------------------


def paired_significance(acc_a, acc_b) -> PairedTestResult:
    """One-sided paired t-test for mean(A - B) > 0.

    Entries must be paired by shared partition seed.  When every pairwise
    difference is identical the t statistic is undefined; the result is
    flagged ``zero_variance`` with p = 0, 0.5, or 1 by the sign of the mean
    difference.
    """
    a = np.asarray(acc_a, dtype=np.float64)
    b = np.asarray(acc_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise EvaluationError("paired accuracy lists must be equal-length vectors")
    n = len(a)
    if n < 2:
        raise EvaluationError("paired test needs at least 2 pairs")
    d = a - b
    mean = float(np.mean(d))
    sd = float(np.std(d, ddof=1))
    if sd == 0.0:
        if mean > 0:
            return PairedTestResult(0.0, mean, math.inf, n - 1, True)
        if mean < 0:
            return PairedTestResult(1.0, mean, -math.inf, n - 1, True)
        return PairedTestResult(0.5, mean, 0.0, n - 1, True)
    t_stat = mean / (sd / math.sqrt(n))
    p = float(t_dist.sf(t_stat, n - 1))
    return PairedTestResult(p, mean, t_stat, n - 1, False)


# --------------------------------------------------------------------------
# Report serialization
# --------------------------------------------------------------------------


def curve_to_csv(points) -> str:
    """Plottable curve: size, mean, ci_lo, ci_hi."""
    lines = ["size,mean,ci_lo,ci_hi"]
    for p in points:
        lines.append(f"{p.train_size},{p.mean_accuracy!r},"
                     f"{p.mean_accuracy - p.ci_half_width!r},"
                     f"{p.mean_accuracy + p.ci_half_width!r}")
    return "\n".join(lines) + "\n"


def report_to_csv(report: RunReport) -> str:
    """One row per seed x size, sorted by seed then size."""
    lines = ["seed,size,accuracy"]
    for (seed, size), acc in sorted(report.entries.items()):
        lines.append(f"{seed},{size},{acc!r}")
    return "\n".join(lines) + "\n"


def report_to_json(report: RunReport) -> str:
    doc = {
        "method": report.method,
        "params": report.params,
        "entries": [
            {"seed": seed, "size": size, "accuracy": acc}
            for (seed, size), acc in sorted(report.entries.items())
        ],
        "elapsed_seconds": report.elapsed_seconds,
    }
    return json.dumps(doc, indent=2)
