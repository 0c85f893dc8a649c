"""Export job: encode every document context and write TVEC + manifest."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import numpy as np

from .contexts import read_documents
from .tvec import write_tvec

DEFAULT_MODEL = "intfloat/multilingual-e5-large"
DEFAULT_BATCH_SIZE = 32

# The e5 family expects these asymmetric prefixes; recorded in the manifest
# so the consuming engine knows the scheme used for document vectors.
DEFAULT_PASSAGE_PREFIX = "passage: "
DEFAULT_QUERY_PREFIX = "query: "


class Encoder(Protocol):
    """Batch text encoder; returns one row per input text."""

    dim: int

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray: ...


@dataclass
class ExportJob:
    corpus: str
    out: str
    model: str = DEFAULT_MODEL
    batch_size: int = DEFAULT_BATCH_SIZE
    pooling: str = "mean"  # "mean" or "cls"
    query_prefix: str = DEFAULT_QUERY_PREFIX
    passage_prefix: str = DEFAULT_PASSAGE_PREFIX
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.pooling not in ("mean", "cls"):
            raise ValueError(f"pooling must be 'mean' or 'cls', got {self.pooling!r}")


class ModelUnavailableError(RuntimeError):
    """The transformer model cannot be loaded in this environment."""


class TransformerEncoder:
    """Mean- or CLS-pooled encoder over a Hugging Face checkpoint."""

    def __init__(self, model_name: str, pooling: str = "mean", device: str = "cpu") -> None:
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise ModelUnavailableError(
                f"transformers/torch are not installed ({exc}); install the 'model' extra "
                "or point the search engine at its built-in hashing provider instead"
            ) from exc
        try:
            self._tokenizer = AutoTokenizer.from_pretrained(model_name)
            self._model = AutoModel.from_pretrained(model_name).to(device).eval()
        except Exception as exc:
            raise ModelUnavailableError(
                f"cannot load model {model_name!r} ({exc}); if the checkpoint is unavailable "
                "offline, use the search engine's hashing provider instead"
            ) from exc
        self._torch = torch
        self._pooling = pooling
        self._device = device
        self.dim = int(self._model.config.hidden_size)

    def encode_batch(self, texts: Sequence[str]) -> np.ndarray:
        torch = self._torch
        batch = self._tokenizer(
            list(texts), padding=True, truncation=True, max_length=512, return_tensors="pt"
        ).to(self._device)
        with torch.no_grad():
            states = self._model(**batch).last_hidden_state
        if self._pooling == "cls":
            pooled = states[:, 0]
        else:
            mask = batch["attention_mask"].unsqueeze(-1).to(states.dtype)
            pooled = (states * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)
        return pooled.cpu().numpy().astype(np.float32)


def load_encoder(job: ExportJob) -> Encoder:
    return TransformerEncoder(job.model, pooling=job.pooling, device=job.device)


def export_vectors(job: ExportJob, encoder: Encoder | None = None) -> dict:
    """Encode the corpus and write the TVEC file plus its manifest.

    One unit-norm vector per document, in corpus order. Returns the
    manifest (also written to ``<out>.manifest.json``).
    """
    documents = read_documents(job.corpus)
    if not documents:
        raise ValueError(f"no documents in {job.corpus}")
    if encoder is None:
        encoder = load_encoder(job)

    ids = [doc_id for doc_id, _ in documents]
    rows = []
    for start in range(0, len(documents), job.batch_size):
        batch = documents[start : start + job.batch_size]
        encoded = np.asarray(
            encoder.encode_batch([job.passage_prefix + context for _, context in batch]),
            dtype=np.float32,
        )
        if encoded.shape != (len(batch), encoder.dim):
            raise ValueError(f"encoder returned shape {encoded.shape} for a batch of {len(batch)}")
        rows.append(encoded)
    matrix = np.concatenate(rows, axis=0)

    norms = np.linalg.norm(matrix.astype(np.float64), axis=1, keepdims=True)
    if (norms == 0).any():
        raise ValueError("encoder produced a zero vector; cannot normalize")
    matrix = (matrix.astype(np.float64) / norms).astype(np.float32)

    write_tvec(job.out, ids, matrix)
    manifest = {
        "model": job.model,
        "dim": int(matrix.shape[1]),
        "count": len(ids),
        "pooling": job.pooling,
        "query_prefix": job.query_prefix,
        "passage_prefix": job.passage_prefix,
        "normalized": True,
    }
    manifest_path = Path(f"{job.out}.manifest.json")
    fd, tmp_name = tempfile.mkstemp(dir=manifest_path.parent, suffix=".json.tmp")
    with os.fdopen(fd, "w", encoding="utf-8") as out:
        json.dump(manifest, out, ensure_ascii=False, indent=2)
        out.write("\n")
    os.replace(tmp_name, manifest_path)
    return manifest
