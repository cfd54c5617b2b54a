"""Shared fixtures: the promoter theory, schemas, and worked examples."""

import os
from pathlib import Path

import pytest

from tgci.dataset import (
    NUCLEOTIDES,
    Dataset,
    Example,
    Schema,
    load_sequence_format,
    position_labels,
)
from tgci.theory import parse_theory

REPO_ROOT = Path(__file__).resolve().parent.parent
DATA_DIR = REPO_ROOT / "data"


@pytest.fixture(scope="session")
def promoter_theory_text():
    return (DATA_DIR / "promoters.theory").read_text()


@pytest.fixture(scope="session")
def promoter_theory(promoter_theory_text):
    return parse_theory(promoter_theory_text)


@pytest.fixture(scope="session")
def promoter_schema():
    return Schema(
        features=tuple((p, NUCLEOTIDES) for p in position_labels()),
        classes=("+", "-"),
        positive_class="+",
    )


@pytest.fixture(scope="session")
def promoter_dataset():
    """The 106-example benchmark: a user-supplied UCI promoter file when one
    is available (``$TGCI_PROMOTER_DATA`` or ``data/promoters.data``), else
    the bundled synthetic stand-in with the same headline properties."""
    for candidate in (os.environ.get("TGCI_PROMOTER_DATA"), DATA_DIR / "promoters.data"):
        if candidate and Path(candidate).is_file():
            return load_sequence_format(Path(candidate).read_text())
    return load_sequence_format((DATA_DIR / "synthetic_promoters.data").read_text())


# Mini schema covering the DNA fragment shown in the worked minus_35
# examples (positions p-38 .. p-30).
@pytest.fixture(scope="session")
def fragment_schema():
    labels = tuple(f"p{i}" for i in range(-38, -29))
    return Schema(
        features=tuple((name, NUCLEOTIDES) for name in labels),
        classes=("+", "-"),
        positive_class="+",
    )


@pytest.fixture(scope="session")
def partial_match_fragment_example():
    # p-38=g p-37=c p-36=t p-35=t p-34=g p-33=c p-32=a p-31=a p-30=t:
    # partially matches every minus_35 rule, exactly matches none.
    return Example("seg-partial", "+", tuple("gcttgcaat"))


@pytest.fixture(scope="session")
def exact_match_fragment_example():
    # p-38=g p-37=c p-36=t p-35=t p-34=g p-33=a p-32=c p-31=t p-30=t:
    # exactly matches minus_35 rules 1 and 4, not 2 and 3.
    return Example("seg-exact", "+", tuple("gcttgactt"))


@pytest.fixture(scope="session")
def toy_theory():
    """Small OR(AND, NOT(AND)) theory with known partial-match values."""
    return parse_theory(
        """
        node2 :- node6.
        node2 :- node5.
        node6 :- a=y, b=y, c=y, d=y, e=y.
        node5 :- not(node7).
        node7 :- f=y, g=y, h=y.
        """
    )


@pytest.fixture(scope="session")
def toy_schema():
    return Schema(
        features=tuple((name, ("y", "n")) for name in "abcdefgh"),
        classes=("+", "-"),
        positive_class="+",
    )


@pytest.fixture(scope="session")
def toy_example():
    # a, b, d true; c, e false; g true; f, h false.
    return Example("toy", "+", ("y", "y", "n", "y", "n", "n", "y", "n"))


def make_binary_dataset(n_features: int, rows):
    """Dataset over n binary features from (id, label, bits) rows."""
    schema = Schema(
        features=tuple((f"f{i + 1}", ("0", "1")) for i in range(n_features)),
        classes=("neg", "pos"),
        positive_class="pos",
    )
    examples = tuple(Example(i, lab, tuple(bits)) for i, lab, bits in rows)
    return Dataset(schema, examples)
