"""Independent brute-force oracles for the ranking pipelines.

These deliberately avoid the library's index structures: distances come from
a full linear scan, semantic scores from per-row dot products, and every
normalization/fusion step is re-evaluated inline.
"""

from __future__ import annotations

import math

import numpy as np

from toposearch import haversine_m
from toposearch.corpus import assemble_retrieval_context
from toposearch.semantic import encode_passage, encode_query


def document_vectors(records, provider):
    """Precompute unit vectors of each record's retrieval context."""
    return {
        rec.id: encode_passage(provider, assemble_retrieval_context(rec)).astype(np.float64)
        for rec in records
    }


def brute_force_hybrid(records, provider, query_text, point, radius_m, alpha, k, doc_vectors=None):
    """Single-pass reimplementation of the hybrid ranking steps 1-6."""
    candidates = []
    for rec in records:
        if rec.point is None:
            continue
        d = haversine_m(point, rec.point)
        if d <= radius_m:
            candidates.append((rec, d))
    candidates.sort(key=lambda pair: (pair[1], pair[0].id))
    if not candidates:
        return []

    if doc_vectors is None:
        doc_vectors = document_vectors((rec for rec, _ in candidates), provider)
    qvec = encode_query(provider, query_text).astype(np.float64)
    sem = [float(np.dot(doc_vectors[rec.id], qvec)) for rec, _ in candidates]
    lo, hi = min(sem), max(sem)
    sem_norm = [1.0] * len(sem) if hi - lo < 1e-9 else [(s - lo) / (hi - lo) for s in sem]
    geo = [math.exp(-d / radius_m) for _, d in candidates]
    geo_max = max(geo)
    geo_norm = [g / geo_max for g in geo]
    combined = [alpha * s + (1.0 - alpha) * g for s, g in zip(sem_norm, geo_norm)]
    order = sorted(range(len(candidates)), key=lambda i: (-combined[i], candidates[i][0].id))
    return [(candidates[i][0].id, combined[i]) for i in order[:k]]
