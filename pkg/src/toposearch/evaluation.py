"""Retrieval evaluation: query generation, Recall@k, MRR, bootstrap CIs.

Test queries are synthesized from coordinate-bearing records so each query
has exactly one relevant document (the record it came from). Methods are
compared on Recall@{1,3,5} and MRR, each with a 95% percentile-bootstrap
confidence interval over per-query values.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import ToponymRecord
from .geo import GeoPoint, METERS_PER_DEGREE
from .hybrid import (
    DEFAULT_ALPHA,
    DEFAULT_RADIUS_M,
    Method,
    SearchEngine,
    SearchQuery,
)

DEFAULT_RESAMPLES = 1000
DEFAULT_K_LIST = (1, 3, 5)

# Five query templates: the three canonical ones plus two local additions
# so the harness matches the five-template protocol.
EVAL_TEMPLATES: tuple[str, ...] = (
    "Что такое {name}?",
    "Где находится {name}?",
    "Расскажи о {name}",
    "Что известно о {name}?",
    "Где расположен {name}?",
)

RUS_PROBABILITY = 0.7


@dataclass(frozen=True)
class EvalQuery:
    """One test query with its single relevant document."""

    query_text: str
    gold_doc_id: str
    point: GeoPoint | None
    language_used: str  # "rus" or "tat"
    toponym_type: str


@dataclass(frozen=True)
class BootstrapCI:
    point_estimate: float
    lower_95: float
    upper_95: float
    resamples: int
    seed: int


@dataclass
class RetrievalReport:
    """Per-method metric table with CIs plus the per-type breakdown."""

    methods: dict[str, dict[str, BootstrapCI]]
    per_type_recall1: dict[str, dict[str, float]]
    type_counts: dict[str, int]
    params: dict
    diagnostics: list[str] = field(default_factory=list)
    traces: list[dict] = field(default_factory=list)


def generate_eval_queries(
    records: Sequence[ToponymRecord],
    n: int,
    seed: int = 42,
    *,
    skip: int = 0,
    rus_probability: float = RUS_PROBABILITY,
    jitter_m: float = 0.0,
) -> list[EvalQuery]:
    """Sample n records (seeded, without replacement) and write queries.

    One of the five templates is drawn uniformly per query; the name slots
    in Russian with probability 0.7, else Tatar, always falling back to
    whichever name exists. The query point is the gold record's own
    coordinates (optionally jittered by up to ``jitter_m`` meters). ``skip``
    offsets into the seeded shuffle so disjoint query sets (validation vs
    test) can come from one protocol run.
    """
    eligible = [rec for rec in records if rec.has_coordinates]
    if skip + n > len(eligible):
        raise ValueError(f"requested {n} queries at offset {skip} but only {len(eligible)} records have coordinates")
    rng = random.Random(seed)
    shuffled = eligible[:]
    rng.shuffle(shuffled)
    chosen = shuffled[skip : skip + n]

    queries: list[EvalQuery] = []
    for rec in chosen:
        template = EVAL_TEMPLATES[rng.randrange(len(EVAL_TEMPLATES))]
        want_rus = rng.random() < rus_probability
        if want_rus:
            name, language = (rec.name_rus, "rus") if rec.name_rus else (rec.name_tat, "tat")
        else:
            name, language = (rec.name_tat, "tat") if rec.name_tat else (rec.name_rus, "rus")
        point = rec.point
        if jitter_m > 0:
            d = rng.uniform(0.0, jitter_m)
            bearing = rng.uniform(0.0, 2.0 * math.pi)
            dlat = d * math.cos(bearing) / METERS_PER_DEGREE
            cos_lat = max(math.cos(math.radians(point.lat_deg)), 1e-6)
            dlon = d * math.sin(bearing) / (METERS_PER_DEGREE * cos_lat)
            point = GeoPoint(
                min(max(point.lat_deg + dlat, -90.0), 90.0),
                min(max(point.lon_deg + dlon, -180.0), 180.0),
            )
        queries.append(
            EvalQuery(
                query_text=template.format(name=name),
                gold_doc_id=rec.id,
                point=point,
                language_used=language,
                toponym_type=rec.toponym_type.value if rec.toponym_type else "Unknown",
            )
        )
    return queries


def recall_at_k(ranked_ids: Sequence[str], gold_doc_id: str, k: int) -> int:
    """1 if the relevant document appears among the first k results."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return int(gold_doc_id in ranked_ids[:k])


def reciprocal_rank(ranked_ids: Sequence[str], gold_doc_id: str) -> float:
    """1/rank of the relevant document, or 0 when it is absent."""
    for rank, doc_id in enumerate(ranked_ids, start=1):
        if doc_id == gold_doc_id:
            return 1.0 / rank
    return 0.0


def bootstrap_ci(
    values: Sequence[float], resamples: int = DEFAULT_RESAMPLES, seed: int = 42
) -> BootstrapCI:
    """95% percentile-bootstrap CI of the mean (resampling with replacement)."""
    if len(values) == 0:
        raise ValueError("cannot bootstrap an empty value list")
    array = np.asarray(values, dtype=np.float64)
    rng = np.random.default_rng(seed)
    indices = rng.integers(0, len(array), size=(resamples, len(array)))
    means = array[indices].mean(axis=1)
    return BootstrapCI(
        point_estimate=float(array.mean()),
        lower_95=float(np.percentile(means, 2.5)),
        upper_95=float(np.percentile(means, 97.5)),
        resamples=resamples,
        seed=seed,
    )


def _needs_point(method: Method) -> bool:
    return method in (Method.HYBRID, Method.SPATIAL)


def compare_methods(
    engine: SearchEngine,
    queries: Sequence[EvalQuery],
    methods: Sequence[Method] = tuple(Method),
    k_list: Sequence[int] = DEFAULT_K_LIST,
    alpha: float = DEFAULT_ALPHA,
    radius_m: float = DEFAULT_RADIUS_M,
    resamples: int = DEFAULT_RESAMPLES,
    seed: int = 42,
    keep_traces: bool = False,
) -> RetrievalReport:
    """Run every method over the query set and aggregate metrics with CIs.

    A query lacking a point is counted as a miss for point-requiring
    methods (with a diagnostic). Per-toponym-type Recall@1 is reported for
    each method alongside the overall table.
    """
    if not queries:
        raise ValueError("cannot evaluate an empty query set")
    k_max = max(k_list)
    report_methods: dict[str, dict[str, BootstrapCI]] = {}
    per_type: dict[str, dict[str, float]] = {}
    diagnostics: list[str] = []
    traces: list[dict] = []

    type_counts: dict[str, int] = {}
    for query in queries:
        type_counts[query.toponym_type] = type_counts.get(query.toponym_type, 0) + 1

    for method in methods:
        method = Method(method)
        per_query: dict[str, list[float]] = {f"recall@{k}": [] for k in k_list}
        per_query["mrr"] = []
        type_hits: dict[str, float] = {t: 0.0 for t in type_counts}
        for query in queries:
            if _needs_point(method) and query.point is None:
                diagnostics.append(f"{method.value}: query for {query.gold_doc_id} has no point; counted as miss")
                ranked: list[str] = []
            else:
                result = engine.search(
                    SearchQuery(
                        text=query.query_text,
                        point=query.point,
                        radius_m=radius_m,
                        alpha=alpha,
                        k=k_max,
                        method=method,
                    )
                )
                ranked = result.doc_ids
            for k in k_list:
                per_query[f"recall@{k}"].append(recall_at_k(ranked, query.gold_doc_id, k))
            rr = reciprocal_rank(ranked, query.gold_doc_id)
            per_query["mrr"].append(rr)
            type_hits[query.toponym_type] += recall_at_k(ranked, query.gold_doc_id, 1)
            if keep_traces:
                traces.append(
                    {
                        "method": method.value,
                        "query": query.query_text,
                        "gold_doc_id": query.gold_doc_id,
                        "ranked": ranked,
                        "reciprocal_rank": rr,
                    }
                )
        report_methods[method.value] = {
            metric: bootstrap_ci(values, resamples=resamples, seed=seed)
            for metric, values in per_query.items()
        }
        per_type[method.value] = {t: type_hits[t] / type_counts[t] for t in type_counts}

    return RetrievalReport(
        methods=report_methods,
        per_type_recall1=per_type,
        type_counts=type_counts,
        params={
            "alpha": alpha,
            "radius_m": radius_m,
            "k_list": list(k_list),
            "resamples": resamples,
            "seed": seed,
            "n_queries": len(queries),
            "methods": [Method(m).value for m in methods],
        },
        diagnostics=diagnostics,
        traces=traces,
    )
