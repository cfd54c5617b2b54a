"""Loader, serializer, and partition tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tgci.dataset import (
    Dataset,
    Example,
    Schema,
    load_sequence_format,
    load_tabular,
    partition,
    position_labels,
    to_sequence_text,
    to_tabular_text,
)
from tgci.errors import DatasetError


class TestPositionLabels:
    def test_default_positions(self):
        labels = position_labels()
        assert len(labels) == 57
        assert labels[0] == "p-50"
        assert labels[49] == "p-1"
        assert labels[50] == "p+1"
        assert labels[-1] == "p+7"
        assert "p0" not in labels and "p-0" not in labels


class TestSchema:
    def test_duplicate_feature_names_rejected(self):
        with pytest.raises(DatasetError, match="duplicate feature"):
            Schema(features=(("a", ("0", "1")), ("a", ("0", "1"))), classes=("x", "y"))

    def test_single_value_feature_rejected(self):
        with pytest.raises(DatasetError, match="fewer than 2"):
            Schema(features=(("a", ("0",)),), classes=("x", "y"))

    def test_single_class_rejected(self):
        with pytest.raises(DatasetError, match="at least 2 classes"):
            Schema(features=(("a", ("0", "1")),), classes=("x",))

    def test_positive_class_must_be_a_class(self):
        with pytest.raises(DatasetError, match="positive_class"):
            Schema(features=(("a", ("0", "1")),), classes=("x", "y"), positive_class="z")


class TestSequenceLoader:
    def test_three_record_file_maps_positions(self):
        seq1 = "a" * 57
        seq2 = "c" * 56 + "g"
        seq3 = "t" + "g" * 56
        text = f"+,one,{seq1}\n-,two,{seq2}\n+,three,{seq3}\n"
        ds = load_sequence_format(text)
        assert len(ds) == 3
        assert ds.schema.feature_names[0] == "p-50"
        one, two, three = ds.examples
        assert one.values == tuple(seq1)
        assert two.values[-1] == "g" and two.values[0] == "c"
        assert three.values[0] == "t"
        assert ds.schema.positive_class == "+"
        assert ds.schema.classes == ("+", "-")

    def test_whitespace_around_fields_tolerated(self):
        ds = load_sequence_format(f"+ , name ,  {'a' * 57}\n- ,other, {'c' * 57}\n")
        assert ds.examples[0].id == "name"

    def test_wrong_length_rejected_with_line(self):
        with pytest.raises(DatasetError, match="length") as err:
            load_sequence_format(f"+,one,{'a' * 57}\n-,two,{'a' * 56}\n")
        assert err.value.line == 2

    def test_illegal_nucleotide_rejected(self):
        with pytest.raises(DatasetError, match="illegal nucleotide"):
            load_sequence_format(f"+,one,{'a' * 56}x\n")

    def test_uppercase_rejected(self):
        with pytest.raises(DatasetError, match="illegal nucleotide"):
            load_sequence_format(f"+,one,{'A' * 57}\n")

    def test_empty_input_rejected(self):
        with pytest.raises(DatasetError, match="empty"):
            load_sequence_format("\n   \n")

    def test_custom_positions(self):
        ds = load_sequence_format("+,x,acgt\n-,y,ttgc\n", positions=("q1", "q2", "q3", "q4"))
        assert ds.schema.feature_names == ("q1", "q2", "q3", "q4")

    def test_benchmark_file_shape(self, promoter_dataset):
        assert len(promoter_dataset) == 106
        assert promoter_dataset.class_counts() == {"+": 53, "-": 53}
        assert len(promoter_dataset.schema.features) == 57


class TestTabularLoader:
    def test_two_feature_four_row_file(self):
        ds = load_tabular("f1,f2,class\na,x,p\nb,y,q\na,y,p\nb,x,q\n")
        assert len(ds) == 4
        assert ds.schema.feature_names == ("f1", "f2")
        assert ds.schema.classes == ("p", "q")
        assert ds.examples[0].values == ("a", "x")

    def test_ragged_row_rejected(self):
        with pytest.raises(DatasetError, match="ragged") as err:
            load_tabular("f1,f2,class\na,x,p\nb,q\n")
        assert err.value.line == 3

    def test_empty_file_rejected(self):
        with pytest.raises(DatasetError, match="empty"):
            load_tabular("")

    def test_three_class_schema(self):
        rows = ["f1,f2,class", "a,x,c1", "b,y,c2", "a,y,c3", "b,x,c1", "a,x,c2", "b,y,c3"]
        ds = load_tabular("\n".join(rows))
        assert ds.schema.classes == ("c1", "c2", "c3")

    def test_values_are_observed_and_sorted(self):
        ds = load_tabular("f1,class\nz,p\na,q\nm,p\n")
        assert ds.schema.values_of("f1") == ("a", "m", "z")


class TestDatasetValidation:
    def test_value_outside_schema_rejected(self):
        schema = Schema(features=(("a", ("0", "1")),), classes=("x", "y"))
        with pytest.raises(DatasetError, match="not allowed"):
            Dataset(schema, (Example("e", "x", ("2",)),))

    def test_unknown_class_rejected(self):
        schema = Schema(features=(("a", ("0", "1")),), classes=("x", "y"))
        with pytest.raises(DatasetError, match="unknown class"):
            Dataset(schema, (Example("e", "z", ("0",)),))

    def test_wrong_arity_rejected(self):
        schema = Schema(features=(("a", ("0", "1")), ("b", ("0", "1"))), classes=("x", "y"))
        with pytest.raises(DatasetError, match="values"):
            Dataset(schema, (Example("e", "x", ("0",)),))


class TestSerializers:
    def test_sequence_round_trip(self, promoter_dataset):
        text = to_sequence_text(promoter_dataset)
        again = load_sequence_format(text)
        assert again == promoter_dataset

    def test_tabular_round_trip(self):
        ds = load_tabular("f1,f2,class\na,x,p\nb,y,q\na,y,p\nb,x,q\n")
        assert load_tabular(to_tabular_text(ds)) == ds


class TestPartition:
    def test_promoter_80_26_split(self, promoter_dataset):
        train, test = partition(promoter_dataset, 80, 26, seed=7)
        assert len(train) == 80 and len(test) == 26
        train_ids = {e.id for e in train.examples}
        test_ids = {e.id for e in test.examples}
        assert not train_ids & test_ids
        assert len(train_ids | test_ids) == 106

    def test_zero_train_size_is_valid(self, promoter_dataset):
        train, test = partition(promoter_dataset, 0, 26, seed=1)
        assert len(train) == 0 and len(test) == 26

    def test_same_seed_same_partition(self, promoter_dataset):
        a = partition(promoter_dataset, 80, 26, seed=13)
        b = partition(promoter_dataset, 80, 26, seed=13)
        assert a == b

    def test_oversized_request_rejected(self, promoter_dataset):
        with pytest.raises(DatasetError, match="exceeds"):
            partition(promoter_dataset, 90, 26, seed=0)

    def test_nested_prefix_property(self, promoter_dataset):
        small, test_s = partition(promoter_dataset, 8, 26, seed=3)
        large, test_l = partition(promoter_dataset, 48, 26, seed=3)
        assert large.examples[:8] == small.examples
        assert test_s == test_l

    @given(st.integers(0, 2**32 - 1), st.integers(0, 20), st.integers(1, 20))
    @settings(max_examples=40, deadline=None)
    def test_partition_properties_hold_for_any_seed(self, seed, train_size, test_size):
        schema = Schema(features=(("a", ("0", "1")),), classes=("x", "y"))
        examples = tuple(
            Example(f"e{i}", "x" if i % 2 else "y", (str(i % 2),)) for i in range(40)
        )
        ds = Dataset(schema, examples)
        train, test = partition(ds, train_size, test_size, seed)
        assert len(train) == train_size and len(test) == test_size
        assert not {e.id for e in train.examples} & {e.id for e in test.examples}
        smaller, test2 = partition(ds, train_size // 2, test_size, seed)
        assert train.examples[: train_size // 2] == smaller.examples
        assert test2 == test
