"""Theory-proximity perturbations and the proximity sweep.

A perturbed domain moves the positive examples toward or away from the
theory.  For each positive example the intended disjunct of every OR node
is fixed first (top-down, best partial match, lowest index on ties); the
leaf conditions of the selected disjuncts define the example's expected
value for each theory feature.  Then:

* ``fewer_matches`` at rate r: every feature currently matching its
  expected value is, with probability r, redrawn uniformly from the
  feature's full value set (it may land back on the matching value);
* ``fewer_mismatches`` at rate r: every feature currently mismatching its
  expected value is, with probability r, set to the expected value.

Negative examples and features untouched by the selected disjuncts never
change.  Two selected disjuncts demanding different values for one feature
is an error (reported, never guessed away), and theories containing NOT
are rejected because they have no expected-value reading here.

Each replicate draws from a generator derived from
``(seed, replicate_index)``, so replicates are schedule-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, replace as dc_replace

import numpy as np

from . import theory as th
from .dataset import Dataset, Example
from .errors import PerturbationError
from .evaluation import ci_half_width, leave_one_out, select_binary_concept
from .interpreter import partial_top

FEWER_MATCHES = "fewer_matches"
FEWER_MISMATCHES = "fewer_mismatches"
DIRECTIONS = (FEWER_MATCHES, FEWER_MISMATCHES)


@dataclass(frozen=True)
class ProximitySpec:
    """One perturbation level: direction, rate, and RNG coordinates."""

    direction: str
    rate: float
    seed: int = 0
    replicate_index: int = 0

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise PerturbationError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}")
        if not (0.0 <= self.rate <= 1.0):
            raise PerturbationError(f"rate must be in [0, 1], got {self.rate}")

    @property
    def proximity_x(self) -> float:
        """Position on the proximity axis: -100*rate or +100*rate."""
        scale = 100.0 if self.direction == FEWER_MISMATCHES else -100.0
        return scale * self.rate


@dataclass(frozen=True)
class SweepPoint:
    proximity_x: float
    method: str
    mean_accuracy: float
    ci_half_width: float
    n_replicates: int


def intended_disjunct(example, or_node: th.TheoryNode, schema) -> int:
    """Index of the OR child the example most closely matches.

    Ties in partial-match value break toward the lowest child index.
    """
    if or_node.kind != th.OR:
        raise PerturbationError(f"node {or_node.path!r} is not an OR node")
    tops = [partial_top(child, example, schema) for child in or_node.children]
    return int(np.argmax(tops))


def _expected_values(node: th.TheoryNode, example, schema, out: dict):
    kind = node.kind
    if kind == th.TRUE:
        return
    if kind == th.NOT:
        raise PerturbationError(
            f"theory contains NOT at {node.path!r}; perturbation has no "
            "expected-value reading for negated conditions")
    if kind == th.LEAF:
        cond = node.condition
        prior = out.get(cond.feature)
        if prior is not None and prior != cond.value:
            raise PerturbationError(
                f"conflicting expected values for feature {cond.feature!r} "
                f"({prior!r} vs {cond.value!r}) in example {example.id!r}: "
                "two selected disjuncts demand different values")
        out[cond.feature] = cond.value
        return
    if kind == th.AND:
        for child in node.children:
            _expected_values(child, example, schema, out)
        return
    # OR: follow only the intended disjunct.
    pick = intended_disjunct(example, node, schema)
    _expected_values(node.children[pick], example, schema, out)


def expected_values(root: th.TheoryNode, example, schema) -> dict[str, str]:
    """Per-feature values the example's intended disjuncts expect."""
    out: dict[str, str] = {}
    _expected_values(root, example, schema, out)
    return out


def perturb(dataset: Dataset, theory: th.Theory, spec: ProximitySpec) -> Dataset:
    """Perturbed copy of the dataset; only positive examples change."""
    schema = dataset.schema
    root = select_binary_concept(theory, schema)
    rng = np.random.default_rng(np.random.SeedSequence([spec.seed, spec.replicate_index]))
    positive = schema.positive_class
    fewer_matches = spec.direction == FEWER_MATCHES
    new_examples = []
    for ex in dataset.examples:
        if ex.label != positive:
            new_examples.append(ex)
            continue
        expected = expected_values(root, ex, schema)
        values = list(ex.values)
        for fi, (fname, allowed) in enumerate(schema.features):
            exp = expected.get(fname)
            if exp is None:
                continue
            if fewer_matches:
                if values[fi] == exp and rng.random() < spec.rate:
                    values[fi] = allowed[int(rng.integers(len(allowed)))]
            else:
                if values[fi] != exp and rng.random() < spec.rate:
                    values[fi] = exp
        new_examples.append(Example(ex.id, ex.label, tuple(values)))
    return Dataset(schema, tuple(new_examples))


# --------------------------------------------------------------------------
# Proximity sweep
# --------------------------------------------------------------------------


def _sweep_worker(args):
    dataset, theory, spec, methods, params, options = args
    perturbed = perturb(dataset, theory, spec)
    accs = {m: leave_one_out(perturbed, theory, m, params, options) for m in methods}
    return (spec.direction, spec.rate, spec.replicate_index), accs


def proximity_sweep(dataset: Dataset, theory: th.Theory, specs, replicates: int,
                    methods, learner_params=None, interpreter_options=None,
                    jobs: int = 1) -> list[SweepPoint]:
    """Leave-one-out accuracy per method across perturbation levels.

    For each spec, ``replicates`` perturbed datasets are generated (one per
    replicate index) and each method's LOO accuracies are averaged.  The
    original dataset is always included at x = 0.  Caution when reading the
    axis: the -100..0 (fewer matches) and 0..100 (fewer mismatches) halves
    may not be directly comparable.
    """
    if replicates < 1:
        raise PerturbationError("replicates must be >= 1")
    methods = list(methods)
    specs = list(specs)

    points = []
    for method in methods:
        acc = leave_one_out(dataset, theory, method, learner_params, interpreter_options)
        points.append(SweepPoint(0.0, method, acc, 0.0, 1))

    tasks = []
    for spec in specs:
        for r in range(replicates):
            tasks.append((dataset, theory, dc_replace(spec, replicate_index=r),
                          methods, learner_params, interpreter_options))
    if jobs > 1 and tasks:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = dict(pool.map(_sweep_worker, tasks))
    else:
        results = dict(_sweep_worker(t) for t in tasks)

    for spec in specs:
        for method in methods:
            accs = [results[(spec.direction, spec.rate, r)][method]
                    for r in range(replicates)]
            points.append(SweepPoint(spec.proximity_x, method, float(np.mean(accs)),
                                     ci_half_width(accs), replicates))
    points.sort(key=lambda p: (p.proximity_x, p.method))
    return points


def sweep_to_csv(points) -> str:
    """Plottable sweep table with the axis-comparability caveat up top."""
    lines = [
        "# note: the fewer-matches (x<0) and fewer-mismatches (x>0) scales "
        "may not be directly comparable",
        "proximity_x,method,mean,ci",
    ]
    for p in points:
        lines.append(f"{p.proximity_x!r},{p.method},{p.mean_accuracy!r},{p.ci_half_width!r}")
    return "\n".join(lines) + "\n"
