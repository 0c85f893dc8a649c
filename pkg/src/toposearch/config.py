"""Engine configuration and construction.

Settings resolve in precedence order: explicit flags, then the optional
JSON config file, then the corpus directory's index metadata (written by
the `index` command), then built-in defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .corpus import build_documents, load_corpus
from .errors import DataFormatError
from .hybrid import DEFAULT_ALPHA, DEFAULT_K, DEFAULT_RADIUS_M, SearchEngine
from .semantic import HashingProvider, encode_passage, load_vectors, write_vectors

INDEX_FILENAME = "index.json"
VECTORS_FILENAME = "vectors.tvec"

DEFAULT_DIM = 256
DEFAULT_PORT = 8080
DEFAULT_SEED = 42


@dataclass
class EngineConfig:
    corpus: str
    embedder: str = "hashing"  # "hashing" or "file"
    vectors: str | None = None
    dim: int = DEFAULT_DIM
    radius_m: float = DEFAULT_RADIUS_M
    alpha: float = DEFAULT_ALPHA
    k: int = DEFAULT_K
    port: int = DEFAULT_PORT
    seed: int = DEFAULT_SEED

    def __post_init__(self) -> None:
        if self.embedder not in ("hashing", "file"):
            raise ValueError(f"embedder must be 'hashing' or 'file', got {self.embedder!r}")
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.embedder == "file" and not self.vectors:
            raise ValueError("embedder 'file' requires a vectors path")


def _read_json(path: Path) -> dict:
    try:
        with open(path, encoding="utf-8") as handle:
            return json.load(handle)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"invalid JSON in {path}: {exc.msg}")


def resolve_config(corpus: str | Path, config_file: str | Path | None = None, **overrides) -> EngineConfig:
    """Merge defaults, index metadata, config file, and flags (in that order)."""
    corpus = Path(corpus)
    settings: dict = {}
    index_meta = corpus / INDEX_FILENAME
    if index_meta.exists():
        meta = _read_json(index_meta)
        settings.update({k: v for k, v in meta.items() if k in ("embedder", "vectors", "dim")})
    if config_file is not None:
        config_path = Path(config_file)
        if not config_path.exists():
            raise DataFormatError(f"config file not found: {config_path}")
        loaded = _read_json(config_path)
        known = {f.name for f in fields(EngineConfig)}
        unknown = set(loaded) - known
        if unknown:
            raise DataFormatError(f"unknown config keys: {sorted(unknown)}")
        settings.update(loaded)
    settings.update({k: v for k, v in overrides.items() if v is not None})
    settings["corpus"] = str(corpus)
    if settings.get("vectors"):
        vectors = Path(settings["vectors"])
        if not vectors.is_absolute():
            vectors = corpus / vectors
        settings["vectors"] = str(vectors)
    return EngineConfig(**settings)


def build_engine(config: EngineConfig) -> tuple[SearchEngine, dict]:
    """Load the corpus and construct the engine per the resolved config."""
    records, manifest = load_corpus(config.corpus)
    if config.embedder == "file":
        vectors_path = Path(config.vectors)
        if not vectors_path.exists():
            raise DataFormatError(f"vectors file not found: {vectors_path}")
        ids, vector_index = load_vectors(vectors_path)
        record_ids = {rec.id for rec in records}
        if set(ids) != record_ids:
            raise DataFormatError(
                f"vector file covers {len(ids)} ids but the corpus has {len(record_ids)} records (sets differ)"
            )
        provider_name = "external"
        manifest_path = Path(str(vectors_path) + ".manifest.json")
        if manifest_path.exists():
            provider_name = _read_json(manifest_path).get("model", provider_name)
        provider = HashingProvider(dim=vector_index.dim, name=provider_name)
        engine = SearchEngine(records, provider=provider, vector_index=vector_index)
        engine.query_encoding_unavailable = (
            "document vectors were loaded from an external file; no in-process query encoder is "
            "available, so semantic and hybrid methods cannot encode query text. Re-index with "
            "--embedder hashing, or query via spatial/bm25."
        )
        return engine, manifest

    provider = HashingProvider(dim=config.dim)
    vector_index = None
    vectors_path = Path(config.vectors) if config.vectors else Path(config.corpus) / VECTORS_FILENAME
    if vectors_path.exists():
        ids, loaded = load_vectors(vectors_path)
        if set(ids) == {rec.id for rec in records} and loaded.dim == config.dim:
            vector_index = loaded
    engine = SearchEngine(records, provider=provider, vector_index=vector_index)
    return engine, manifest


def write_index_metadata(config: EngineConfig, provider_name: str, doc_count: int) -> Path:
    """Record how a corpus directory was indexed."""
    corpus = Path(config.corpus)
    meta = {
        "embedder": config.embedder,
        "dim": config.dim,
        "vectors": config.vectors if config.embedder == "file" else VECTORS_FILENAME,
        "provider": provider_name,
        "documents": doc_count,
    }
    path = corpus / INDEX_FILENAME
    with open(path, "w", encoding="utf-8") as out:
        json.dump(meta, out, ensure_ascii=False, indent=2)
        out.write("\n")
    return path


def precompute_vectors(config: EngineConfig) -> tuple[int, Path]:
    """Encode every retrieval context with the hashing provider into TVEC."""
    records, _ = load_corpus(config.corpus)
    documents = build_documents(records)
    provider = HashingProvider(dim=config.dim)
    ids = [doc.doc_id for doc in documents]
    matrix = (
        np.stack([encode_passage(provider, doc.context) for doc in documents])
        if documents
        else np.zeros((0, config.dim), np.float32)
    )
    path = Path(config.corpus) / VECTORS_FILENAME
    write_vectors(path, ids, matrix)
    return len(ids), path
