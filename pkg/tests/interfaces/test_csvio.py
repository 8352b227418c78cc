import numpy as np
import pandas as pd
import pytest
from pytest import raises

from snnuq.abstracts.enums import SplitTag
from snnuq.datastructures import Dataset
from snnuq.datastructures.core import PredictionBatch
from snnuq.errors import DataFormatError
from snnuq.interfaces import load_csv, read_table, write_dataset, \
    write_predictions


@pytest.fixture
def write_csv(tmp_path):
    def write(text, name="table.csv"):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def test_missing_cells(write_csv):
    path = write_csv("a,b,y\n1,,3\nNaN,2.5,4\n nan ,1e3,5\n")
    frame = read_table(path)
    assert list(frame.columns) == ["a", "b", "y"]
    assert np.isnan(frame["b"][0])
    assert np.isnan(frame["a"][1])
    assert np.isnan(frame["a"][2])
    assert frame["b"].tolist()[1:] == [2.5, 1000.0]


def test_load_with_target(write_csv):
    path = write_csv("a,b,y\n1,2,3\n4,5,6\n")
    dataset = load_csv(path, target_column="y", split_tag="dev_in")
    assert dataset.columns == ["a", "b"]
    assert dataset.target_name == "y"
    assert dataset.split_tag is SplitTag.DEV_IN
    assert dataset.features.tolist() == [[1.0, 2.0], [4.0, 5.0]]
    assert dataset.target.tolist() == [3.0, 6.0]


def test_load_without_target(write_csv):
    dataset = load_csv(write_csv("a,b\n1,2\n"))
    assert not dataset.has_target
    assert dataset.columns == ["a", "b"]


def test_exclude_and_select_columns(write_csv):
    path = write_csv("id,a,b,y\n7,1,2,3\n8,4,5,6\n")
    excluded = load_csv(path, "y", exclude_columns=["id", "ghost"])
    assert excluded.columns == ["a", "b"]

    selected = load_csv(path, "y", exclude_columns=["a"],
                        feature_columns=["b", "id"])
    assert selected.columns == ["b", "id"]
    assert selected.features.tolist() == [[2.0, 7.0], [5.0, 8.0]]

    with raises(DataFormatError):
        load_csv(path, "y", feature_columns=["a", "c"])


def test_missing_target_column(write_csv):
    with raises(DataFormatError):
        load_csv(write_csv("a,b\n1,2\n"), target_column="y")


def test_unparseable_cell(write_csv):
    path = write_csv("a,b\n1,2\n3,abc\n")
    with raises(DataFormatError) as info:
        read_table(path)
    assert info.value.row == 3
    assert info.value.column == "b"
    assert "(row 3, column 'b')" in str(info.value)


@pytest.mark.parametrize("cell", ["inf", "-inf"])
def test_infinite_cell(write_csv, cell):
    with raises(DataFormatError) as info:
        read_table(write_csv("a\n1\n{}\n".format(cell)))
    assert info.value.row == 3


def test_missing_target_value(write_csv):
    path = write_csv("a,y\n1,2\n3,\n")
    with raises(DataFormatError) as info:
        load_csv(path, "y")
    assert info.value.row == 3
    assert info.value.column == "y"


def test_empty_file(write_csv):
    with raises(DataFormatError):
        read_table(write_csv(""))


def test_dataset_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    features = rng.normal(size=(6, 3))
    features[2, 1] = np.nan
    target = rng.normal(size=6)
    dataset = Dataset(features, target, columns=["p", "q", "r"],
                      target_name="label")

    path = str(tmp_path / "out" / "data.csv")
    write_dataset(dataset, path)
    restored = load_csv(path, "label")

    assert restored.columns == ["p", "q", "r"]
    assert np.array_equal(restored.features, features, equal_nan=True)
    assert restored.target.tobytes() == target.tobytes()


def test_write_predictions(tmp_path):
    batch = PredictionBatch(mu=np.array([1.0, 2.0]),
                            sigma=np.array([0.5, 1.5]),
                            uncertainty=np.array([0.25, 2.25]),
                            aleatoric=np.array([0.2, 2.0]),
                            epistemic=np.array([0.05, 0.25]))
    plain = str(tmp_path / "plain.csv")
    full = str(tmp_path / "full.csv")
    write_predictions(batch, plain)
    write_predictions(batch, full, decompose=True)

    assert list(pd.read_csv(plain).columns) == ["mu", "sigma", "uncertainty"]
    frame = pd.read_csv(full)
    assert list(frame.columns) == ["mu", "sigma", "uncertainty", "aleatoric",
                                   "epistemic"]
    assert frame["epistemic"].tolist() == pytest.approx([0.05, 0.25])
