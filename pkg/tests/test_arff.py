import numpy as np
import pytest

from emailauthor.arff import quote, to_arff


def test_layout():
    text = to_arff(np.array([[1.0, 0.5], [0.25, 2.0]]), ["a", "b c"], ["x", "y z"])
    assert text.splitlines() == [
        "@RELATION emails",
        "",
        "@ATTRIBUTE a NUMERIC",
        "@ATTRIBUTE 'b c' NUMERIC",
        "@ATTRIBUTE author {x,'y z'}",
        "",
        "@DATA",
        "1.0,0.5,x",
        "0.25,2.0,'y z'",
    ]


def test_values_round_trip_exactly():
    rng = np.random.default_rng(0)
    X = rng.random((3, 4))
    lines = to_arff(X, list("abcd"), ["p"] * 3).splitlines()
    data = lines[lines.index("@DATA") + 1:]
    back = np.array([[float(v) for v in line.split(",")[:-1]] for line in data])
    assert np.array_equal(back, X)


def test_quoting_and_missing():
    assert quote("it's") == "'it\\'s'"
    assert quote("plain_name-1.0") == "plain_name-1.0"
    assert to_arff(np.array([[np.nan]]), ["a"], ["x"]).splitlines()[-1] == "?,x"


def test_shape_checks():
    with pytest.raises(ValueError):
        to_arff(np.zeros((2, 2)), ["a"], ["x", "y"])
    with pytest.raises(ValueError):
        to_arff(np.zeros((2, 1)), ["a"], ["x"])
