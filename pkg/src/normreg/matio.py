"""Matrix file formats.

MXF: line 1 is the magic ``MXF1``, line 2 a one-line JSON header with keys
``rows``, ``cols``, ``dtype`` ("f64le") and ``layout`` ("row-major"),
followed by ``rows * cols`` little-endian float64 values.

CSV: plain comma-separated text, allowed up to 200 x 200.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import CapacityError, ParameterError
from .matcore import as_matrix

MAGIC = b"MXF1"
CSV_MAX_DIM = 200


def encode_mxf(A) -> bytes:
    A = as_matrix(A)
    header = json.dumps({"rows": A.shape[0], "cols": A.shape[1],
                         "dtype": "f64le", "layout": "row-major"})
    body = np.ascontiguousarray(A, dtype="<f8").tobytes()
    return MAGIC + b"\n" + header.encode("ascii") + b"\n" + body


def decode_mxf(data: bytes) -> np.ndarray:
    magic, sep, rest = data.partition(b"\n")
    if magic != MAGIC or not sep:
        raise ParameterError("not an MXF1 file")
    header_line, sep, body = rest.partition(b"\n")
    if not sep:
        raise ParameterError("truncated MXF header")
    header = json.loads(header_line.decode("ascii"))
    if header.get("dtype") != "f64le" or header.get("layout") != "row-major":
        raise ParameterError(f"unsupported MXF encoding: {header}")
    rows, cols = int(header["rows"]), int(header["cols"])
    if len(body) != rows * cols * 8:
        raise ParameterError(
            f"MXF body has {len(body)} bytes, expected {rows * cols * 8}")
    A = np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)
    return as_matrix(A)


def write_csv(A, path) -> None:
    A = as_matrix(A)
    if max(A.shape) > CSV_MAX_DIM:
        raise CapacityError(f"CSV output limited to {CSV_MAX_DIM}x{CSV_MAX_DIM}")
    np.savetxt(path, A, delimiter=",", fmt="%.17g")


def read_csv(path) -> np.ndarray:
    return as_matrix(np.loadtxt(path, delimiter=",", ndmin=2))


def save_matrix(A, path) -> None:
    """Write ``A``; ``.csv`` suffix selects text, anything else MXF."""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        write_csv(A, path)
    else:
        path.write_bytes(encode_mxf(A))


def load_matrix(path) -> np.ndarray:
    """Read a matrix, sniffing the MXF magic before falling back to CSV."""
    path = Path(path)
    with path.open("rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return decode_mxf(path.read_bytes())
    return read_csv(path)
