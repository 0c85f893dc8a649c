"""Hybrid ranking: geofiltered spatial scores fused with semantic scores.

The hybrid pipeline, per query:

  1. radius_query collects candidates with exact distances;
  2. semantic dot products are computed for exactly those candidates;
  3. semantic scores are min-max normalized over the candidate set
     (degenerate spread => all 1.0);
  4. each candidate's exp(-distance/radius) decay score is divided by the
     candidate maximum;
  5. combined = alpha * sem_norm + (1 - alpha) * geo_norm;
  6. sort descending by combined (ties by doc_id), truncate to k.

Semantic-only, spatial-only and BM25 strategies share the same result type
so every consumer sees one contract. All indexes are immutable after build;
any number of concurrent searches is safe.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Iterable, Sequence

from .corpus import IndexedDocument, ToponymRecord, build_documents
from .geo import GeoPoint, SpatialIndex, build_spatial_index, covering_box
from .lexical import BM25Index, build_bm25
from .semantic import EmbeddingProvider, HashingProvider, VectorIndex, encode_query

DEFAULT_RADIUS_M = 50_000.0
DEFAULT_ALPHA = 0.1
DEFAULT_K = 5

ALPHA_GRID = (0.1, 0.3, 0.5, 0.7, 0.9)

_DEGENERATE_SPREAD = 1e-9


class Method(str, Enum):
    HYBRID = "hybrid"
    SEMANTIC = "semantic"
    SPATIAL = "spatial"
    BM25 = "bm25"


@dataclass(frozen=True)
class SearchQuery:
    """One search request; defaults mirror the engine's operating point."""

    text: str
    point: GeoPoint | None = None
    radius_m: float = DEFAULT_RADIUS_M
    alpha: float = DEFAULT_ALPHA
    k: int = DEFAULT_K
    method: Method = Method.HYBRID

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.radius_m <= 0:
            raise ValueError(f"radius_m must be positive, got {self.radius_m}")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass(frozen=True)
class ScoredHit:
    """Ranked result carrying every intermediate score that produced it."""

    doc_id: str
    rank: int
    combined: float
    sem_score: float | None = None
    distance_m: float | None = None
    geo_score: float | None = None
    sem_norm: float | None = None
    geo_norm: float | None = None


@dataclass
class SearchResult:
    hits: list[ScoredHit]
    diagnostics: list[str] = field(default_factory=list)

    @property
    def doc_ids(self) -> list[str]:
        return [hit.doc_id for hit in self.hits]


def geo_score(distance_m: float, radius_m: float) -> float:
    """Exponential distance decay exp(-d/R)."""
    if radius_m <= 0:
        raise ValueError(f"radius_m must be positive, got {radius_m}")
    if not 0.0 <= distance_m <= radius_m:
        raise ValueError(f"distance {distance_m} outside [0, {radius_m}]")
    return math.exp(-distance_m / radius_m)


def min_max_normalize(scores: Sequence[float]) -> list[float]:
    """(s - min) / (max - min); a degenerate spread maps everything to 1.0."""
    if not scores:
        raise ValueError("cannot normalize an empty score list")
    lo, hi = min(scores), max(scores)
    if hi - lo < _DEGENERATE_SPREAD:
        return [1.0] * len(scores)
    return [(s - lo) / (hi - lo) for s in scores]


def max_normalize(scores: Sequence[float]) -> list[float]:
    """Divide by the maximum; inputs must be positive."""
    if not scores:
        raise ValueError("cannot normalize an empty score list")
    if min(scores) <= 0:
        raise ValueError("max_normalize requires positive scores")
    hi = max(scores)
    return [s / hi for s in scores]


def combine(sem_norm: float, geo_norm: float, alpha: float) -> float:
    """Weighted sum alpha * sem_norm + (1 - alpha) * geo_norm."""
    for name, value in (("sem_norm", sem_norm), ("geo_norm", geo_norm), ("alpha", alpha)):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"{name} must be in [0, 1], got {value}")
    return alpha * sem_norm + (1.0 - alpha) * geo_norm


def _ranked(hits: Iterable[ScoredHit], k: int) -> list[ScoredHit]:
    ordered = sorted(hits, key=lambda h: (-h.combined, h.doc_id))[:k]
    return [replace(hit, rank=i) for i, hit in enumerate(ordered, start=1)]


class SearchEngine:
    """Read-only snapshot of a corpus plus its three indexes."""

    def __init__(
        self,
        records: Sequence[ToponymRecord],
        provider: EmbeddingProvider | None = None,
        vector_index: VectorIndex | None = None,
    ) -> None:
        self.records = list(records)
        self.records_by_id: dict[str, ToponymRecord] = {rec.id: rec for rec in self.records}
        if len(self.records_by_id) != len(self.records):
            raise ValueError("record ids must be unique")
        self.documents: list[IndexedDocument] = build_documents(self.records)
        self._context_by_id = {doc.doc_id: doc.context for doc in self.documents}
        self.provider = provider if provider is not None else HashingProvider()
        if vector_index is None:
            vector_index = VectorIndex.from_texts(
                self.provider, [d.doc_id for d in self.documents], [d.context for d in self.documents]
            )
        self.vector_index = vector_index
        self.spatial_index: SpatialIndex = build_spatial_index(self.documents)
        self.bm25: BM25Index = build_bm25(self.documents)
        # Set when the query side has no encoder (externally produced
        # document vectors without the matching model in-process).
        self.query_encoding_unavailable: str | None = None

    def _query_vector(self, text: str):
        if self.query_encoding_unavailable:
            raise ValueError(self.query_encoding_unavailable)
        if not text:
            raise ValueError("query text is empty")
        return encode_query(self.provider, text)

    def search(self, query: SearchQuery) -> SearchResult:
        """Run one query with the requested strategy.

        Hybrid degrades to semantic-only (with a diagnostic) when no point
        is supplied, and returns an empty result with a "no-candidates"
        diagnostic when the geofilter leaves nothing.
        """
        method = Method(query.method)
        if method is Method.HYBRID:
            return self._search_hybrid(query)
        if method is Method.SEMANTIC:
            return self._search_semantic(query)
        if method is Method.SPATIAL:
            return self._search_spatial(query)
        return self._search_bm25(query)

    def _search_semantic(self, query: SearchQuery, diagnostics: list[str] | None = None) -> SearchResult:
        qvec = self._query_vector(query.text)
        hits = [
            ScoredHit(doc_id=doc_id, rank=i, combined=score, sem_score=score)
            for i, (doc_id, score) in enumerate(self.vector_index.top_k(qvec, query.k), start=1)
        ]
        return SearchResult(hits, diagnostics or [])

    def _search_spatial(self, query: SearchQuery) -> SearchResult:
        if query.point is None:
            raise ValueError("spatial-only search requires a query point")
        diagnostics = self._box_diagnostics(query)
        candidates = self.spatial_index.query_radius(query.point, query.radius_m)
        hits = [
            ScoredHit(
                doc_id=doc_id,
                rank=i,
                combined=geo_score(d, query.radius_m),
                distance_m=d,
                geo_score=geo_score(d, query.radius_m),
            )
            for i, (doc_id, d) in enumerate(candidates[: query.k], start=1)
        ]
        return SearchResult(hits, diagnostics)

    def _search_bm25(self, query: SearchQuery) -> SearchResult:
        hits = [
            ScoredHit(doc_id=doc_id, rank=i, combined=score)
            for i, (doc_id, score) in enumerate(self.bm25.top_k(query.text, query.k), start=1)
        ]
        return SearchResult(hits)

    def _box_diagnostics(self, query: SearchQuery) -> list[str]:
        box = covering_box(query.point, query.radius_m)
        if box.lon_clamped:
            return ["bounding box clamped at the ±180° meridian; wrap-around neighbors are not searched"]
        return []

    def _search_hybrid(self, query: SearchQuery) -> SearchResult:
        if query.point is None:
            return self._search_semantic(
                query, diagnostics=["no query point: hybrid degraded to semantic-only ranking"]
            )
        diagnostics = self._box_diagnostics(query)
        candidates = self.spatial_index.query_radius(query.point, query.radius_m)
        if not candidates:
            diagnostics.append(f"no-candidates: nothing within {query.radius_m:.0f} m of the query point")
            return SearchResult([], diagnostics)

        ids = [doc_id for doc_id, _ in candidates]
        distances = [d for _, d in candidates]
        sem_scores = [s for _, s in self.vector_index.score_subset(self._query_vector(query.text), ids)]
        sem_norms = min_max_normalize(sem_scores)
        geo_scores = [geo_score(d, query.radius_m) for d in distances]
        geo_norms = max_normalize(geo_scores)

        hits = [
            ScoredHit(
                doc_id=doc_id,
                rank=0,
                combined=combine(sn, gn, query.alpha),
                sem_score=ss,
                distance_m=d,
                geo_score=gs,
                sem_norm=sn,
                geo_norm=gn,
            )
            for doc_id, d, ss, sn, gs, gn in zip(ids, distances, sem_scores, sem_norms, geo_scores, geo_norms)
        ]
        return SearchResult(_ranked(hits, query.k), diagnostics)

    def hit_payload(self, hit: ScoredHit) -> dict:
        """Serialize a hit with record details; shared by the CLI and service."""
        rec = self.records_by_id.get(hit.doc_id)
        snippet = self._context_by_id.get(hit.doc_id, "")[:160]
        payload = {
            "doc_id": hit.doc_id,
            "rank": hit.rank,
            "display_name": rec.display_name if rec else "",
            "name_rus": rec.name_rus if rec else "",
            "name_tat": rec.name_tat if rec else "",
            "latitude": rec.latitude if rec else None,
            "longitude": rec.longitude if rec else None,
            "distance_m": hit.distance_m,
            "sem_score": hit.sem_score,
            "sem_norm": hit.sem_norm,
            "geo_score": hit.geo_score,
            "geo_norm": hit.geo_norm,
            "combined": hit.combined,
            "snippet": snippet,
        }
        return payload


def search_payload(engine: SearchEngine, query: SearchQuery) -> dict:
    """Structured search response; the CLI and the HTTP API share this."""
    result = engine.search(query)
    return {
        "query": {
            "text": query.text,
            "lat": query.point.lat_deg if query.point else None,
            "lon": query.point.lon_deg if query.point else None,
            "radius_m": query.radius_m,
            "alpha": query.alpha,
            "k": query.k,
            "method": Method(query.method).value,
        },
        "hits": [engine.hit_payload(hit) for hit in result.hits],
        "diagnostics": result.diagnostics,
    }


def grid_search_alpha(
    engine: SearchEngine,
    validation_queries: Sequence[tuple[SearchQuery, str]],
    grid: Sequence[float] = ALPHA_GRID,
    radius_m: float = DEFAULT_RADIUS_M,
) -> tuple[float, dict[float, float]]:
    """Pick the weight maximizing mean Recall@5 of hybrid search.

    Every query runs at each grid value with the fixed radius; ties break
    toward the smallest alpha.
    """
    if not grid:
        raise ValueError("alpha grid is empty")
    if not validation_queries:
        raise ValueError("validation query set is empty")
    table: dict[float, float] = {}
    for alpha in grid:
        hits = 0
        for query, gold_id in validation_queries:
            tuned = replace(query, alpha=alpha, radius_m=radius_m, k=5, method=Method.HYBRID)
            result = engine.search(tuned)
            if gold_id in result.doc_ids:
                hits += 1
        table[alpha] = hits / len(validation_queries)
    best = min(grid)
    for alpha in sorted(grid):
        if table[alpha] > table[best]:
            best = alpha
    return best, table
