import numpy as np
import pytest

from robord.data import ColumnSpec, DataError, apply_csv, load_csv, spec_from_obj


def write(tmp_path, text, name="d.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


SPEC = [ColumnSpec("y", "response"), ColumnSpec("a", "continuous")]


def test_standardize_three_rows(tmp_path):
    data, prep = load_csv(write(tmp_path, "y,a\n10,1\n20,2\n30,3\n"), SPEC)
    np.testing.assert_array_equal(data.X[:, 0], [-1.0, 0.0, 1.0])
    np.testing.assert_array_equal(data.y, [1, 2, 3])
    assert data.n_categories == 3 and prep.response_levels == ("10", "20", "30")


def test_categorical_dummies(tmp_path):
    specs = [ColumnSpec("y", "response"), ColumnSpec("c", "categorical"), ColumnSpec("z", "drop")]
    data, prep = load_csv(write(tmp_path, "y,c,z\n1,r,x\n2,g,x\n1,b,x\n2,g,x\n"), specs)
    assert data.p == 2
    assert prep.feature_names == ("c[g]", "c[r]")  # "b" is the reference
    assert np.all(data.X.sum(axis=1) <= 1)
    np.testing.assert_array_equal(data.X, [[0, 1], [1, 0], [0, 0], [1, 0]])


def test_categorical_reference_and_binary(tmp_path):
    specs = [ColumnSpec("y", "response"), ColumnSpec("c", "categorical", reference="r"),
             ColumnSpec("s", "binary", levels=("no", "yes"))]
    data, prep = load_csv(write(tmp_path, "y,c,s\n1,r,yes\n2,g,no\n1,b,yes\n"), specs)
    assert prep.feature_names == ("c[b]", "c[g]", "s")
    np.testing.assert_array_equal(data.X[:, 2], [1, 0, 1])


def test_numeric_levels_sort_numerically(tmp_path):
    data, prep = load_csv(write(tmp_path, "y,a\n10,1\n9,2\n100,4\n"), SPEC)
    assert prep.response_levels == ("9", "10", "100")
    np.testing.assert_array_equal(data.y, [2, 1, 3])


def test_round_trip_bit_exact(tmp_path):
    rng = np.random.default_rng(0)
    rows = "\n".join(f"{rng.integers(1, 4)},{float(v)!r}" for v in rng.normal(5, 3, size=50))
    path = write(tmp_path, "y,a\n" + rows + "\n")
    data, prep = load_csv(path, SPEC)
    again = apply_csv(path, prep)
    assert again.X.tobytes() == data.X.tobytes()
    np.testing.assert_array_equal(again.y, data.y)


@pytest.mark.parametrize("text,match", [
    ("y,a\n1,1\n2,x\n", r"row 3, column 'a'"),
    ("y,a\n1,1\n2,nan\n", "non-finite"),
    ("y,a\n1,2\n2,2\n", "constant"),
    ("y,a\n1,1\n2\n", "row 3 has 1 fields"),
    ("y,b\n1,1\n2,2\n", "column 'a' not found"),
    ("", "empty"),
    ("y,a\n", "no data rows"),
])
def test_data_errors(tmp_path, text, match):
    with pytest.raises(DataError, match=match):
        load_csv(write(tmp_path, text), SPEC)


def test_response_gap_detected(tmp_path):
    specs = [ColumnSpec("y", "response", levels=(1, 2, 3)), ColumnSpec("a", "continuous")]
    with pytest.raises(DataError, match="'2' has no observations"):
        load_csv(write(tmp_path, "y,a\n1,1\n3,2\n"), specs)


def test_unknown_level_on_apply(tmp_path):
    specs = [ColumnSpec("y", "response"), ColumnSpec("c", "categorical")]
    _, prep = load_csv(write(tmp_path, "y,c\n1,a\n2,b\n"), specs)
    with pytest.raises(DataError, match="unknown level 'z'"):
        apply_csv(write(tmp_path, "y,c\n1,z\n", "e.csv"), prep)


def test_spec_validation():
    with pytest.raises(DataError, match="exactly one response"):
        spec_from_obj([{"name": "a", "role": "continuous"}])
    with pytest.raises(DataError, match="unknown role"):
        spec_from_obj({"columns": [{"name": "y", "role": "outcome"}]})
