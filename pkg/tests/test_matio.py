import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from normreg.errors import CapacityError, ParameterError
from normreg.matio import decode_mxf, encode_mxf, load_matrix, save_matrix


@given(arrays(np.float64, st.tuples(st.integers(1, 6), st.integers(1, 6)),
              elements=st.floats(allow_nan=False, allow_infinity=False)))
def test_mxf_roundtrip_is_bit_exact(A):
    B = decode_mxf(encode_mxf(A))
    assert B.tobytes() == np.ascontiguousarray(A).tobytes()


def test_mxf_layout():
    data = encode_mxf(np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]]))
    magic, header, body = data.split(b"\n", 2)
    assert magic == b"MXF1"
    assert b'"rows": 3' in header and b'"cols": 2' in header
    assert b'"f64le"' in header and b'"row-major"' in header
    assert np.frombuffer(body, "<f8").tolist() == [1, 2, 3, 4, 5, 6]


def test_mxf_rejects_garbage():
    with pytest.raises(ParameterError):
        decode_mxf(b"XXXX\n{}\n")
    good = encode_mxf(np.eye(2))
    with pytest.raises(ParameterError):
        decode_mxf(good[:-3])
    with pytest.raises(ParameterError):
        decode_mxf(good.replace(b"f64le", b"f32le"))


def test_file_roundtrips(tmp_path, rng):
    A = rng.standard_normal((5, 4))
    save_matrix(A, tmp_path / "a.mxf")
    save_matrix(A, tmp_path / "a.csv")
    assert np.array_equal(load_matrix(tmp_path / "a.mxf"), A)
    assert np.array_equal(load_matrix(tmp_path / "a.csv"), A)
    save_matrix(np.array([[2.5]]), tmp_path / "one.csv")
    assert load_matrix(tmp_path / "one.csv").shape == (1, 1)


def test_csv_size_limit(tmp_path):
    with pytest.raises(CapacityError):
        save_matrix(np.zeros((201, 2)), tmp_path / "big.csv")
