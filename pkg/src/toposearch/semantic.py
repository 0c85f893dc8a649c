"""Dense-vector side of the engine: encoders, exact top-k index, TVEC files.

Two embedding providers exist. The default hashing provider maps character
n-grams into a signed bag-of-buckets vector; it is deterministic, needs no
model download, and keeps CI fully offline. Real transformer embeddings are
loaded from a TVEC file produced by an external exporter. Either way, every
vector is unit L2-norm and similarity is a plain dot product on a flat
(exact, non-approximate) index.
"""

from __future__ import annotations

import logging
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .errors import DataFormatError

logger = logging.getLogger(__name__)

TVEC_MAGIC = b"TVEC"
TVEC_VERSION = 1

_NORM_TOLERANCE = 1e-3

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a64(data: bytes) -> int:
    """64-bit FNV-1a hash; fixed and process-independent."""
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def hash_encode(text: str, dim: int = 256) -> np.ndarray:
    """Encode text as a unit-norm signed n-gram hashing vector.

    Character 2-, 3- and 4-grams of the lowercased text are hashed with
    FNV-1a; each n-gram adds ±1 (sign from hash bit 63) to bucket
    ``hash % dim``. Texts too short to produce any n-gram hash as a single
    whole-text gram so the output is never the zero vector.
    """
    if not text:
        raise ValueError("cannot encode empty text")
    if dim < 1:
        raise ValueError(f"dim must be positive, got {dim}")
    lowered = text.lower()
    vec = np.zeros(dim, dtype=np.float64)
    grams = 0
    for n in (2, 3, 4):
        for start in range(len(lowered) - n + 1):
            h = fnv1a64(lowered[start : start + n].encode("utf-8"))
            vec[h % dim] += 1.0 if (h >> 63) == 0 else -1.0
            grams += 1
    if grams == 0:
        h = fnv1a64(lowered.encode("utf-8"))
        vec[h % dim] += 1.0 if (h >> 63) == 0 else -1.0
    norm = float(np.linalg.norm(vec))
    if norm == 0.0:
        # Signed collisions cancelled everything; fall back to one bucket.
        h = fnv1a64(lowered.encode("utf-8"))
        vec[h % dim] = 1.0
        norm = 1.0
    return (vec / norm).astype(np.float32)


class EmbeddingProvider(Protocol):
    """Deterministic text-to-vector mapping.

    Identical text must produce an identical vector. Queries and documents
    share one mapping unless the provider declares an asymmetric prefix
    scheme via ``query_prefix``/``passage_prefix``.
    """

    name: str
    dim: int
    query_prefix: str
    passage_prefix: str

    def encode(self, text: str) -> np.ndarray: ...


@dataclass(frozen=True)
class HashingProvider:
    """Offline n-gram hashing provider (the CI/test default)."""

    dim: int = 256
    name: str = "hashing-ngram-v1"
    query_prefix: str = ""
    passage_prefix: str = ""

    def encode(self, text: str) -> np.ndarray:
        return hash_encode(text, self.dim)


def encode_query(provider: EmbeddingProvider, text: str) -> np.ndarray:
    return provider.encode(provider.query_prefix + text)


def encode_passage(provider: EmbeddingProvider, text: str) -> np.ndarray:
    return provider.encode(provider.passage_prefix + text)


class VectorIndex:
    """Flat inner-product index over unit-norm embeddings.

    The matrix stores 32-bit floats; scoring accumulates in 64-bit. Top-k is
    exact: a full scan with ties broken by doc_id. Immutable after build.
    """

    def __init__(self, ids: Sequence[str], matrix: np.ndarray) -> None:
        matrix = np.asarray(matrix, dtype=np.float32)
        if matrix.ndim != 2:
            raise ValueError("matrix must be 2-d (documents x dim)")
        if len(ids) != matrix.shape[0]:
            raise ValueError(f"{len(ids)} ids for {matrix.shape[0]} matrix rows")
        if len(set(ids)) != len(ids):
            raise ValueError("doc ids must be unique")
        self._ids = list(ids)
        self._matrix = matrix
        self._rows = {doc_id: i for i, doc_id in enumerate(self._ids)}

    @classmethod
    def from_texts(cls, provider: EmbeddingProvider, ids: Sequence[str], texts: Sequence[str]) -> "VectorIndex":
        if len(ids) != len(texts):
            raise ValueError("ids and texts differ in length")
        matrix = np.stack([encode_passage(provider, t) for t in texts]) if texts else np.zeros((0, provider.dim), np.float32)
        return cls(ids, matrix)

    def __len__(self) -> int:
        return len(self._ids)

    @property
    def dim(self) -> int:
        return self._matrix.shape[1]

    @property
    def ids(self) -> list[str]:
        return list(self._ids)

    def _query64(self, query: np.ndarray) -> np.ndarray:
        query = np.asarray(query)
        if query.shape != (self.dim,):
            raise ValueError(f"query dim {query.shape} does not match index dim {self.dim}")
        return query.astype(np.float64)

    def top_k(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Exact top-k documents by dot product, descending, ties by doc_id."""
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        if not self._ids:
            return []
        scores = self._matrix.astype(np.float64) @ self._query64(query)
        order = sorted(range(len(self._ids)), key=lambda i: (-scores[i], self._ids[i]))
        return [(self._ids[i], float(scores[i])) for i in order[:k]]

    def score_subset(self, query: np.ndarray, ids: Sequence[str]) -> list[tuple[str, float]]:
        """Dot products for exactly the requested ids, input order preserved."""
        q = self._query64(query)
        rows = []
        for doc_id in ids:
            row = self._rows.get(doc_id)
            if row is None:
                raise ValueError(f"unknown doc_id: {doc_id}")
            rows.append(row)
        if not rows:
            return []
        scores = self._matrix[rows].astype(np.float64) @ q
        return [(doc_id, float(s)) for doc_id, s in zip(ids, scores)]


def write_vectors(path: str | Path, ids: Sequence[str], matrix: np.ndarray) -> None:
    """Write a TVEC vector file (bit-exact layout).

    Layout: magic "TVEC", version byte 0x01, little-endian u32 dim, u64
    count, then per record [u32 id byte length, id UTF-8 bytes, dim f32].
    """
    matrix = np.asarray(matrix, dtype=np.float32)
    if matrix.ndim != 2 or len(ids) != matrix.shape[0]:
        raise ValueError("matrix shape does not match ids")
    dim = matrix.shape[1]
    with open(path, "wb") as out:
        out.write(TVEC_MAGIC)
        out.write(bytes([TVEC_VERSION]))
        out.write(struct.pack("<I", dim))
        out.write(struct.pack("<Q", len(ids)))
        for doc_id, row in zip(ids, matrix):
            raw = doc_id.encode("utf-8")
            out.write(struct.pack("<I", len(raw)))
            out.write(raw)
            out.write(row.astype("<f4").tobytes())


def load_vectors(path: str | Path) -> tuple[list[str], VectorIndex]:
    """Load a TVEC file into a VectorIndex.

    Bad magic/version or dim=0 raise DataFormatError, as do duplicate ids
    and truncated files. Rows whose norm deviates from 1 by more than 1e-3
    are re-normalized with a warning.
    """
    with open(path, "rb") as handle:
        data = handle.read()

    def take(offset: int, count: int) -> bytes:
        if offset + count > len(data):
            raise DataFormatError(f"truncated TVEC file: {path}")
        return data[offset : offset + count]

    if take(0, 4) != TVEC_MAGIC:
        raise DataFormatError(f"bad TVEC magic in {path}")
    if take(4, 1)[0] != TVEC_VERSION:
        raise DataFormatError(f"unsupported TVEC version {data[4]} in {path}")
    dim = struct.unpack("<I", take(5, 4))[0]
    if dim == 0:
        raise DataFormatError(f"TVEC dim is zero in {path}")
    count = struct.unpack("<Q", take(9, 8))[0]
    offset = 17

    ids: list[str] = []
    seen: set[str] = set()
    rows = np.empty((count, dim), dtype=np.float32)
    for i in range(count):
        (id_len,) = struct.unpack("<I", take(offset, 4))
        offset += 4
        doc_id = take(offset, id_len).decode("utf-8")
        offset += id_len
        if doc_id in seen:
            raise DataFormatError(f"duplicate doc_id in TVEC file: {doc_id}")
        seen.add(doc_id)
        ids.append(doc_id)
        rows[i] = np.frombuffer(take(offset, dim * 4), dtype="<f4")
        offset += dim * 4

    norms = np.linalg.norm(rows.astype(np.float64), axis=1)
    off_unit = np.abs(norms - 1.0) > _NORM_TOLERANCE
    if off_unit.any():
        bad = int(off_unit.sum())
        if (norms[off_unit] == 0.0).any():
            raise DataFormatError(f"TVEC file contains zero-norm rows: {path}")
        logger.warning("%d of %d vectors in %s were not unit-norm; normalized on load", bad, count, path)
        rows[off_unit] = (rows[off_unit].astype(np.float64) / norms[off_unit, None]).astype(np.float32)
    return ids, VectorIndex(ids, rows)
