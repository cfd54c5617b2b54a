"""Classified nominal attribute-value datasets.

Two loaders are provided:

* :func:`load_sequence_format` for DNA-style records ``class,name,sequence``
  (UCI promoter/splice compatible), one nucleotide per position feature;
* :func:`load_tabular` for header CSV files whose last column is the class.

Values outside the schema are rejected, never coerced; missing values are
not supported.

Randomness is pinned to NumPy's PCG64 generator: ``partition`` shuffles with
``numpy.random.default_rng(seed).permutation`` so equal seeds reproduce the
same split on every platform.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DatasetError

NUCLEOTIDES = ("a", "c", "g", "t")


def position_labels(start: int = -50, stop: int = 7) -> tuple[str, ...]:
    """Position feature names ``p<start>..p+<stop>`` with no zero position."""
    labels = []
    for i in range(start, stop + 1):
        if i == 0:
            continue
        labels.append(f"p{i}" if i < 0 else f"p+{i}")
    return tuple(labels)


@dataclass(frozen=True)
class Schema:
    """Feature names with their allowed nominal values, plus class labels."""

    features: tuple[tuple[str, tuple[str, ...]], ...]
    classes: tuple[str, ...]
    positive_class: str | None = None

    def __post_init__(self):
        names = [n for n, _ in self.features]
        if len(set(names)) != len(names):
            raise DatasetError("duplicate feature names in schema")
        for name, values in self.features:
            if len(values) < 2:
                raise DatasetError(f"feature {name!r} has fewer than 2 allowed values")
            if len(set(values)) != len(values):
                raise DatasetError(f"feature {name!r} has duplicate allowed values")
        if len(self.classes) < 2:
            raise DatasetError("schema needs at least 2 classes")
        if len(set(self.classes)) != len(self.classes):
            raise DatasetError("duplicate class labels")
        if self.positive_class is not None and self.positive_class not in self.classes:
            raise DatasetError(f"positive_class {self.positive_class!r} not among classes")

    @cached_property
    def _index(self) -> dict[str, int]:
        return {name: i for i, (name, _) in enumerate(self.features)}

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.features)

    def has_feature(self, name: str) -> bool:
        return name in self._index

    def feature_index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise DatasetError(f"no feature named {name!r} in schema") from None

    def values_of(self, name: str) -> tuple[str, ...]:
        return self.features[self.feature_index(name)][1]


@dataclass(frozen=True)
class Example:
    """One classified example: id, class label, one value per schema feature."""

    id: str
    label: str
    values: tuple[str, ...]


@dataclass(frozen=True)
class Dataset:
    schema: Schema
    examples: tuple[Example, ...]

    def __post_init__(self):
        nfeat = len(self.schema.features)
        for ex in self.examples:
            if len(ex.values) != nfeat:
                raise DatasetError(
                    f"example {ex.id!r} has {len(ex.values)} values, schema has {nfeat}")
            if ex.label not in self.schema.classes:
                raise DatasetError(f"example {ex.id!r} has unknown class {ex.label!r}")
            for (name, allowed), v in zip(self.schema.features, ex.values):
                if v not in allowed:
                    raise DatasetError(
                        f"example {ex.id!r}: value {v!r} not allowed for feature {name!r}")

    def __len__(self) -> int:
        return len(self.examples)

    def class_counts(self) -> dict[str, int]:
        counts = {c: 0 for c in self.schema.classes}
        for ex in self.examples:
            counts[ex.label] += 1
        return counts

    def subset(self, indices) -> "Dataset":
        picked = tuple(self.examples[int(i)] for i in indices)
        return Dataset(self.schema, picked)


# --------------------------------------------------------------------------
# Loaders
# --------------------------------------------------------------------------


def load_sequence_format(text: str, positions: tuple[str, ...] | None = None) -> Dataset:
    """Load ``class,name,sequence`` records into a position-feature dataset.

    Each sequence must have exactly one lowercase nucleotide (a/c/g/t) per
    position label.  Default positions are p-50..p+7 with no zero position
    (57 features).  When the class labels include ``+`` it becomes the
    schema's positive class.
    """
    if positions is None:
        positions = position_labels()
    examples = []
    classes_seen: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise DatasetError(f"expected 'class,name,sequence', got {len(parts)} fields", lineno)
        label, name, seq = parts
        if len(seq) != len(positions):
            raise DatasetError(
                f"sequence for {name!r} has length {len(seq)}, expected {len(positions)}", lineno)
        for ch in seq:
            if ch not in NUCLEOTIDES:
                raise DatasetError(f"illegal nucleotide character {ch!r} in {name!r}", lineno)
        if label not in classes_seen:
            classes_seen.append(label)
        examples.append((name, label, tuple(seq)))
    if not examples:
        raise DatasetError("empty input: no records found", 1)
    classes = tuple(sorted(classes_seen))
    schema = Schema(
        features=tuple((p, NUCLEOTIDES) for p in positions),
        classes=classes,
        positive_class="+" if "+" in classes else None,
    )
    return Dataset(schema, tuple(Example(n, c, v) for n, c, v in examples))


def load_tabular(text: str) -> Dataset:
    """Load a header CSV whose last column is the class label.

    The schema is inferred: allowed values are the observed values of each
    column (sorted), classes are the observed labels (sorted).
    """
    rows = list(csv.reader(io.StringIO(text)))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise DatasetError("empty input: no rows found", 1)
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise DatasetError("header needs at least one feature column plus the class column", 1)
    feature_names = header[:-1]
    width = len(header)
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        cells = [c.strip() for c in row]
        if len(cells) != width:
            raise DatasetError(f"ragged row: {len(cells)} fields, header has {width}", lineno)
        data.append(cells)
    if not data:
        raise DatasetError("no data rows after header", 2)
    observed = [sorted({row[j] for row in data}) for j in range(width - 1)]
    classes = tuple(sorted({row[-1] for row in data}))
    schema = Schema(
        features=tuple((n, tuple(vals)) for n, vals in zip(feature_names, observed)),
        classes=classes,
    )
    examples = tuple(
        Example(f"r{i + 1}", row[-1], tuple(row[:-1])) for i, row in enumerate(data)
    )
    return Dataset(schema, examples)


# --------------------------------------------------------------------------
# Serializers
# --------------------------------------------------------------------------


def to_sequence_text(dataset: Dataset) -> str:
    """Render a dataset back to ``class,name,sequence`` records."""
    for name, values in dataset.schema.features:
        for v in values:
            if len(v) != 1:
                raise DatasetError(
                    f"feature {name!r} has multi-character value {v!r}; "
                    "sequence format needs single characters")
    lines = [f"{ex.label},{ex.id},{''.join(ex.values)}" for ex in dataset.examples]
    return "\n".join(lines) + "\n"


def to_tabular_text(dataset: Dataset) -> str:
    """Render a dataset as header CSV with the class in the last column."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(list(dataset.schema.feature_names) + ["class"])
    for ex in dataset.examples:
        writer.writerow(list(ex.values) + [ex.label])
    return out.getvalue()


# --------------------------------------------------------------------------
# Partitioning
# --------------------------------------------------------------------------


def shuffled_indices(n: int, seed: int) -> np.ndarray:
    """The pinned seeded shuffle every partition is sliced from (PCG64)."""
    return np.random.default_rng(seed).permutation(n)


def partition(dataset: Dataset, train_size: int, test_size: int, seed: int):
    """Seeded disjoint train/test split with nested-prefix training sets.

    One permutation is drawn per seed; the training set is its first
    ``train_size`` entries and the test set its last ``test_size``.  For the
    same seed, smaller training sets are therefore prefixes of larger ones
    and the test set stays fixed, which is what learning curves need.
    """
    n = len(dataset)
    if train_size < 0 or test_size < 0:
        raise DatasetError("train_size and test_size must be non-negative")
    if train_size + test_size > n:
        raise DatasetError(
            f"train_size + test_size = {train_size + test_size} exceeds dataset size {n}")
    perm = shuffled_indices(n, seed)
    train_idx = perm[:train_size]
    test_idx = perm[n - test_size:] if test_size > 0 else perm[:0]
    return dataset.subset(train_idx), dataset.subset(test_idx)
