import numpy as np
import pytest

from btd1 import DimensionError, compose, random_btd
from btd1.fileio import (
    read_decomposition,
    read_tensor,
    write_decomposition,
    write_matrix_csv,
    write_tensor,
)


def test_tensor_round_trip(tmp_path):
    t = compose(random_btd((3, 4, 5), (2, 2), seed=0))
    path = tmp_path / "t.btd1"
    write_tensor(path, t)
    back = read_tensor(path)
    assert back.field == "real"
    assert np.array_equal(back.values, t.values)


def test_tensor_round_trip_complex(tmp_path):
    t = compose(random_btd((2, 3, 4), (1, 2), field="complex", seed=1))
    path = tmp_path / "t.btd1"
    write_tensor(path, t)
    back = read_tensor(path)
    assert back.field == "complex"
    assert np.array_equal(back.values, t.values)


def test_tensor_header_is_ascii_line(tmp_path):
    t = compose(random_btd((2, 3, 4), (1,), seed=2))
    path = tmp_path / "t.btd1"
    write_tensor(path, t)
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii")
    assert header == "BTD1 R 2 3 4\n"


def test_tensor_reject_garbage(tmp_path):
    path = tmp_path / "bad.btd1"
    path.write_bytes(b"NOPE 1 2 3\n")
    with pytest.raises(DimensionError):
        read_tensor(path)
    path.write_bytes(b"BTD1 R 2 2 2\n" + b"\0" * 8)  # truncated payload
    with pytest.raises(DimensionError):
        read_tensor(path)


@pytest.mark.parametrize("field", ["real", "complex"])
def test_decomposition_round_trip(tmp_path, field):
    d = random_btd((3, 5, 6), (2, 1, 3), field=field, seed=3)
    path = tmp_path / "d.json"
    write_decomposition(path, d)
    back = read_decomposition(path)
    assert back.sizes == d.sizes
    assert np.allclose(back.A, d.A)
    for (b1, c1), (b2, c2) in zip(back.terms, d.terms):
        assert np.allclose(b1, b2)
        assert np.allclose(c1, c2)


def test_matrix_csv(tmp_path):
    from helpers import GOLDEN_Q2_3x3x5

    path = tmp_path / "q2.csv"
    write_matrix_csv(path, GOLDEN_Q2_3x3x5)
    rows = [line.split(",") for line in path.read_text().strip().splitlines()]
    back = np.array([[float(x) for x in row] for row in rows])
    assert np.array_equal(back, GOLDEN_Q2_3x3x5)
