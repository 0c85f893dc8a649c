"""TVEC vector-file writer.

Layout (little-endian): magic "TVEC", version byte 0x01, u32 dim,
u64 count, then per record [u32 id byte length, id UTF-8 bytes,
dim float32 values].
"""

from __future__ import annotations

import os
import struct
import tempfile
from pathlib import Path
from typing import Sequence

import numpy as np

MAGIC = b"TVEC"
VERSION = 1


def write_tvec(path: str | Path, ids: Sequence[str], matrix: np.ndarray) -> None:
    """Write the file atomically (temp file in the same directory + rename)."""
    matrix = np.asarray(matrix, dtype=np.float32)
    if matrix.ndim != 2 or matrix.shape[0] != len(ids):
        raise ValueError("matrix shape does not match ids")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(dir=path.parent, suffix=".tvec.tmp")
    try:
        with os.fdopen(fd, "wb") as out:
            out.write(MAGIC)
            out.write(bytes([VERSION]))
            out.write(struct.pack("<I", matrix.shape[1]))
            out.write(struct.pack("<Q", len(ids)))
            for doc_id, row in zip(ids, matrix):
                raw = doc_id.encode("utf-8")
                out.write(struct.pack("<I", len(raw)))
                out.write(raw)
                out.write(row.astype("<f4").tobytes())
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
