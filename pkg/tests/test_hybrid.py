import math
import random
from dataclasses import replace

import pytest

from toposearch import (
    GeoPoint,
    Method,
    SearchEngine,
    SearchQuery,
    ToponymRecord,
    ToponymType,
    combine,
    geo_score,
    grid_search_alpha,
    max_normalize,
    min_max_normalize,
)

from oracles import brute_force_hybrid
from synth import synthetic_records

E_INV = math.exp(-1.0)


class TestScoringOps:
    def test_geo_score_values(self):
        assert geo_score(0.0, 50_000.0) == 1.0
        assert geo_score(50_000.0, 50_000.0) == pytest.approx(E_INV, abs=1e-7)
        assert geo_score(25_000.0, 50_000.0) == pytest.approx(math.exp(-0.5), abs=1e-7)

    def test_geo_score_preconditions(self):
        with pytest.raises(ValueError):
            geo_score(-1.0, 100.0)
        with pytest.raises(ValueError):
            geo_score(101.0, 100.0)
        with pytest.raises(ValueError):
            geo_score(0.0, 0.0)

    def test_min_max_degenerate_all_ones(self):
        assert min_max_normalize([2, 2, 2]) == [1.0, 1.0, 1.0]

    def test_min_max_two_values(self):
        assert min_max_normalize([0.1, 0.3]) == [0.0, 1.0]

    def test_min_max_single_value(self):
        assert min_max_normalize([0.1]) == [1.0]

    def test_min_max_empty_rejected(self):
        with pytest.raises(ValueError):
            min_max_normalize([])

    def test_max_normalize(self):
        assert max_normalize([1.0]) == [1.0]
        assert max_normalize([E_INV, 1.0]) == pytest.approx([0.3678794, 1.0], abs=1e-7)

    def test_max_normalize_nearest_gets_one(self):
        scores = [geo_score(d, 50_000.0) for d in (40_000.0, 1_000.0, 20_000.0)]
        assert max_normalize(scores)[1] == 1.0

    def test_max_normalize_preconditions(self):
        with pytest.raises(ValueError):
            max_normalize([])
        with pytest.raises(ValueError):
            max_normalize([0.0, 1.0])

    def test_combine(self):
        assert combine(1.0, 1.0, 0.37) == 1.0
        assert combine(0.5, 1.0, 0.1) == pytest.approx(0.95, abs=1e-12)
        assert combine(1.0, 0.0, 0.1) == pytest.approx(0.1, abs=1e-12)

    def test_combine_range_checks(self):
        with pytest.raises(ValueError):
            combine(1.5, 0.0, 0.1)
        with pytest.raises(ValueError):
            combine(0.5, -0.1, 0.1)
        with pytest.raises(ValueError):
            combine(0.5, 0.5, 1.1)


def _record(i, lat, lon, name=None):
    return ToponymRecord(
        id=f"r{i:03d}",
        toponym_type=ToponymType.TOPONYM,
        geographical_object="село",
        name_rus=name or f"Пункт{i:03d}",
        latitude=lat,
        longitude=lon,
        lat_text=f"{lat:.6f}",
        lon_text=f"{lon:.6f}",
    )


class TestSearchQuery:
    def test_validation(self):
        with pytest.raises(ValueError):
            SearchQuery(text="x", alpha=1.5)
        with pytest.raises(ValueError):
            SearchQuery(text="x", radius_m=0.0)
        with pytest.raises(ValueError):
            SearchQuery(text="x", k=0)


class TestHybridSearch:
    def test_single_candidate_combined_is_one(self):
        engine = SearchEngine([_record(0, 55.0, 49.0)])
        result = engine.search(SearchQuery(text="Пункт000", point=GeoPoint(55.01, 49.0)))
        assert [h.doc_id for h in result.hits] == ["r000"]
        hit = result.hits[0]
        assert hit.combined == 1.0
        assert hit.sem_norm == 1.0
        assert hit.geo_norm == 1.0
        assert hit.rank == 1

    def test_two_doc_geo_dominance(self):
        # A at the query point with the lower semantic score, B at the rim
        # with the highest: alpha=0.1 ranks A first.
        radius = 50_000.0
        a = _record(0, 55.0, 49.0, name="Аркатау")
        b_lat = 55.0 + 49_900.0 / 111_320.0
        b = _record(1, b_lat, 49.0, name="Бикүл")
        engine = SearchEngine([a, b])
        result = engine.search(
            SearchQuery(text="Бикүл", point=GeoPoint(55.0, 49.0), radius_m=radius, alpha=0.1, k=2)
        )
        assert [h.doc_id for h in result.hits] == ["r000", "r001"]
        by_id = {h.doc_id: h for h in result.hits}
        # Combined scores follow the closed forms: A = 0.9*1 + 0.1*0,
        # B = 0.1 + 0.9 * (exp(-d/R) / 1).
        assert by_id["r000"].combined == pytest.approx(0.9, abs=1e-9)
        d_b = by_id["r001"].distance_m
        assert by_id["r001"].combined == pytest.approx(0.1 + 0.9 * math.exp(-d_b / radius), abs=1e-9)

    def test_all_intermediate_scores_populated(self):
        engine = SearchEngine([_record(i, 55.0 + i * 0.01, 49.0) for i in range(5)])
        result = engine.search(SearchQuery(text="Пункт002", point=GeoPoint(55.0, 49.0), k=5))
        for hit in result.hits:
            assert hit.sem_score is not None
            assert hit.distance_m is not None
            assert hit.geo_score is not None
            assert hit.sem_norm is not None
            assert hit.geo_norm is not None
        assert [h.rank for h in result.hits] == [1, 2, 3, 4, 5]

    def test_geofilter_containment(self):
        engine = SearchEngine(synthetic_records(200, seed=13))
        result = engine.search(
            SearchQuery(text="речка", point=GeoPoint(55.5, 50.5), radius_m=30_000.0, k=50)
        )
        for hit in result.hits:
            assert hit.distance_m <= 30_000.0

    def test_no_point_degrades_to_semantic(self):
        records = synthetic_records(30, seed=14)
        engine = SearchEngine(records)
        degraded = engine.search(SearchQuery(text=records[7].name_rus))
        semantic = engine.search(SearchQuery(text=records[7].name_rus, method=Method.SEMANTIC))
        assert degraded.hits == semantic.hits
        assert any("degraded" in d for d in degraded.diagnostics)

    def test_no_candidates_diagnostic(self):
        engine = SearchEngine([_record(0, 55.0, 49.0)])
        result = engine.search(SearchQuery(text="x", point=GeoPoint(56.9, 53.9), radius_m=1_000.0))
        assert result.hits == []
        assert any(d.startswith("no-candidates") for d in result.diagnostics)

    def test_empty_corpus_degenerates_cleanly(self):
        engine = SearchEngine([])
        semantic = engine.search(SearchQuery(text="село", method=Method.SEMANTIC))
        assert semantic.hits == []
        hybrid = engine.search(SearchQuery(text="село", point=GeoPoint(55.0, 49.0)))
        assert hybrid.hits == []
        assert any(d.startswith("no-candidates") for d in hybrid.diagnostics)

    def test_spatial_requires_point(self):
        engine = SearchEngine([_record(0, 55.0, 49.0)])
        with pytest.raises(ValueError):
            engine.search(SearchQuery(text="x", method=Method.SPATIAL))

    def test_spatial_sorted_by_distance(self):
        records = [_record(i, 55.0 + 0.02 * i, 49.0) for i in range(6)]
        engine = SearchEngine(records)
        result = engine.search(
            SearchQuery(text="", point=GeoPoint(55.0, 49.0), method=Method.SPATIAL, k=4)
        )
        distances = [h.distance_m for h in result.hits]
        assert distances == sorted(distances)
        assert [h.doc_id for h in result.hits] == ["r000", "r001", "r002", "r003"]

    def test_bm25_method(self):
        records = [_record(0, 55.0, 49.0, name="Уникум"), _record(1, 55.1, 49.0, name="Другой")]
        engine = SearchEngine(records)
        result = engine.search(SearchQuery(text="Уникум", method=Method.BM25))
        assert result.hits[0].doc_id == "r000"

    def test_matches_brute_force_oracle(self):
        records = synthetic_records(300, seed=15)
        engine = SearchEngine(records)
        rng = random.Random(16)
        for _ in range(30):
            anchor = rng.choice([r for r in records if r.has_coordinates])
            query_text = rng.choice([anchor.name_rus, anchor.name_tat, "село у реки"])
            point = anchor.point
            radius = rng.choice([20_000.0, 50_000.0, 100_000.0])
            alpha = rng.choice([0.1, 0.5, 0.9])
            k = rng.randrange(1, 12)
            result = engine.search(
                SearchQuery(text=query_text, point=point, radius_m=radius, alpha=alpha, k=k)
            )
            expected = brute_force_hybrid(records, engine.provider, query_text, point, radius, alpha, k)
            assert [h.doc_id for h in result.hits] == [doc_id for doc_id, _ in expected]
            for hit, (_, want) in zip(result.hits, expected):
                assert hit.combined == pytest.approx(want, abs=1e-9)

    def test_alpha_one_matches_semantic_order_of_candidates(self):
        records = synthetic_records(120, seed=17)
        engine = SearchEngine(records)
        anchor = records[11]
        query = SearchQuery(
            text=anchor.name_rus, point=anchor.point, radius_m=80_000.0, alpha=1.0, k=1000
        )
        hybrid_ids = [h.doc_id for h in engine.search(query).hits]
        candidates = engine.spatial_index.query_radius(anchor.point, 80_000.0)
        sem = engine.vector_index.score_subset(
            engine.provider.encode(anchor.name_rus), [doc_id for doc_id, _ in candidates]
        )
        semantic_ids = [doc_id for doc_id, _ in sorted(sem, key=lambda t: (-t[1], t[0]))]
        assert hybrid_ids == semantic_ids

    def test_alpha_zero_matches_distance_order_of_candidates(self):
        records = synthetic_records(120, seed=18)
        engine = SearchEngine(records)
        anchor = records[3]
        query = SearchQuery(
            text=anchor.name_rus, point=anchor.point, radius_m=80_000.0, alpha=0.0, k=1000
        )
        hybrid_ids = [h.doc_id for h in engine.search(query).hits]
        by_distance = [doc_id for doc_id, _ in engine.spatial_index.query_radius(anchor.point, 80_000.0)]
        assert hybrid_ids == by_distance

    def test_determinism(self):
        records = synthetic_records(80, seed=19)
        engine = SearchEngine(records)
        query = SearchQuery(text="озеро", point=records[0].point, radius_m=120_000.0, k=10)
        assert engine.search(query).hits == engine.search(query).hits

    def test_closer_candidate_never_loses_geo_rank(self):
        center = GeoPoint(55.0, 49.0)
        others = [_record(i, 55.0 + 0.05 * i, 49.0) for i in range(1, 5)]
        far = _record(9, 55.3, 49.3)
        near = replace(far, latitude=55.05, longitude=49.05)

        def geo_rank(records, target_id):
            engine = SearchEngine(records)
            result = engine.search(SearchQuery(text="село", point=center, radius_m=100_000.0, k=10))
            ordered = sorted(result.hits, key=lambda h: (-h.geo_norm, h.doc_id))
            return [h.doc_id for h in ordered].index(target_id)

        assert geo_rank(others + [near], "r009") <= geo_rank(others + [far], "r009")


class TestGridSearch:
    def _queries(self, records, n, rng, noise=False):
        queries = []
        with_coords = [r for r in records if r.has_coordinates]
        for rec in rng.sample(with_coords, n):
            text = (
                "".join(rng.choice("qwzxkjv") for _ in range(10)) if noise else f"Что такое {rec.name_rus}?"
            )
            queries.append((SearchQuery(text=text, point=rec.point), rec.id))
        return queries

    def test_single_point_grid(self):
        records = synthetic_records(40, seed=20)
        engine = SearchEngine(records)
        queries = self._queries(records, 5, random.Random(21))
        best, table = grid_search_alpha(engine, queries, grid=[0.5])
        assert best == 0.5
        assert set(table) == {0.5}

    def test_geo_dominant_corpus_selects_smallest_alpha(self):
        # Dense corpus, noise queries: semantic scores are random, geography
        # is always right, so recall@5 decays as alpha grows.
        records = synthetic_records(400, seed=22, lat_range=(55.0, 55.35), lon_range=(49.0, 49.6))
        engine = SearchEngine(records)
        queries = self._queries(records, 40, random.Random(23), noise=True)
        best, table = grid_search_alpha(engine, queries, grid=[0.1, 0.3, 0.5, 0.7, 0.9])
        assert best == 0.1
        assert table[0.1] >= table[0.9]

    def test_tie_breaks_to_smallest_alpha(self):
        records = synthetic_records(30, seed=24)
        engine = SearchEngine(records)
        queries = self._queries(records, 8, random.Random(25))
        best, table = grid_search_alpha(engine, queries, grid=[0.9, 0.5, 0.1])
        assert table[0.1] == table[0.5] == table[0.9] == 1.0
        assert best == 0.1

    def test_empty_queries_rejected(self):
        engine = SearchEngine(synthetic_records(5, seed=26))
        with pytest.raises(ValueError):
            grid_search_alpha(engine, [], grid=[0.1])
