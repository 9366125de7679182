"""Binary container for dense float64 matrices plus a JSON sidecar.

Layout (little-endian)::

    8 bytes   magic b"SNMFMAT\\0"
    uint32    format version
    uint64    rows
    uint64    cols
    4 bytes   dtype tag b"f8\\0\\0"
    rows*cols float64 values, row-major
"""
import json
import os
import struct

import numpy as np

MAGIC = b"SNMFMAT\0"
VERSION = 1
_DTYPE = b"f8\0\0"
_HEADER = struct.Struct("<8sIQQ4s")


class MatrixFormatError(ValueError):
    pass


def write_matrix(path, matrix, meta=None) -> None:
    a = np.ascontiguousarray(matrix, dtype="<f8")
    if a.ndim != 2:
        raise ValueError("only 2-D matrices are supported")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1], _DTYPE))
        fh.write(a.tobytes(order="C"))
    if meta is not None:
        with open(sidecar_path(path), "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)


def read_matrix(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        if len(head) != _HEADER.size:
            raise MatrixFormatError(f"{path}: truncated header")
        magic, version, rows, cols, dtype = _HEADER.unpack(head)
        if magic != MAGIC:
            raise MatrixFormatError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise MatrixFormatError(f"{path}: unsupported version {version}")
        if dtype != _DTYPE:
            raise MatrixFormatError(f"{path}: unsupported dtype {dtype!r}")
        body = fh.read()
    if len(body) != rows * cols * 8:
        raise MatrixFormatError(f"{path}: expected {rows * cols} values, got {len(body) // 8}")
    return np.frombuffer(body, dtype="<f8").reshape(rows, cols).astype(np.float64)


def read_meta(path) -> dict:
    with open(sidecar_path(path)) as fh:
        return json.load(fh)


def sidecar_path(path) -> str:
    return os.fspath(path) + ".json"
