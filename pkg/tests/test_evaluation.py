import random

import pytest

from toposearch import (
    Method,
    SearchEngine,
    bootstrap_ci,
    compare_methods,
    generate_eval_queries,
    recall_at_k,
    reciprocal_rank,
)
from toposearch.evaluation import EVAL_TEMPLATES, EvalQuery

from synth import synthetic_records


class TestGenerateEvalQueries:
    def test_deterministic_and_gold_exists(self):
        records = synthetic_records(600, seed=39)
        ids = {r.id for r in records}
        queries = generate_eval_queries(records, n=500, seed=42)
        again = generate_eval_queries(records, n=500, seed=42)
        assert queries == again
        assert len(queries) == 500
        assert all(q.gold_doc_id in ids for q in queries)

    def test_no_replacement(self):
        records = synthetic_records(300, seed=40)
        queries = generate_eval_queries(records, n=300, seed=1)
        assert len({q.gold_doc_id for q in queries}) == 300

    def test_language_mix_roughly_70_30(self):
        records = synthetic_records(800, seed=41)
        queries = generate_eval_queries(records, n=600, seed=2)
        rus = sum(1 for q in queries if q.language_used == "rus")
        assert 0.6 < rus / len(queries) < 0.8

    def test_tatar_only_record_uses_tatar_name(self):
        import dataclasses

        records = [
            dataclasses.replace(rec, name_rus="")
            for rec in synthetic_records(50, seed=42)
        ]
        queries = generate_eval_queries(records, n=50, seed=3)
        assert all(q.language_used == "tat" for q in queries)
        for query, record in [(q, next(r for r in records if r.id == q.gold_doc_id)) for q in queries]:
            assert record.name_tat in query.query_text

    def test_point_is_gold_coordinates(self):
        records = synthetic_records(40, seed=43)
        by_id = {r.id: r for r in records}
        for q in generate_eval_queries(records, n=40, seed=4):
            assert q.point == by_id[q.gold_doc_id].point

    def test_templates_come_from_the_five(self):
        records = synthetic_records(100, seed=44)
        for q in generate_eval_queries(records, n=100, seed=5):
            record = next(r for r in records if r.id == q.gold_doc_id)
            name = record.name_rus if q.language_used == "rus" else record.name_tat
            assert any(q.query_text == t.format(name=name) for t in EVAL_TEMPLATES)

    def test_n_above_available_rejected(self):
        records = synthetic_records(10, seed=45)
        with pytest.raises(ValueError):
            generate_eval_queries(records, n=11, seed=6)

    def test_skip_produces_disjoint_sets(self):
        records = synthetic_records(100, seed=46)
        test_set = generate_eval_queries(records, n=40, seed=7)
        val_set = generate_eval_queries(records, n=40, seed=7, skip=40)
        assert {q.gold_doc_id for q in test_set}.isdisjoint(q.gold_doc_id for q in val_set)


class TestPointMetrics:
    def test_recall_and_rr_at_rank_three(self):
        ranked = ["a", "b", "gold", "c"]
        assert recall_at_k(ranked, "gold", 1) == 0
        assert recall_at_k(ranked, "gold", 3) == 1
        assert reciprocal_rank(ranked, "gold") == pytest.approx(1 / 3)

    def test_gold_absent(self):
        assert recall_at_k(["a"], "gold", 5) == 0
        assert reciprocal_rank(["a"], "gold") == 0.0

    def test_mrr_of_three_queries(self):
        values = [reciprocal_rank(r, "g") for r in (["g"], ["x", "g"], ["x", "y", "z", "g"])]
        assert sum(values) / 3 == pytest.approx(0.5833333333, abs=1e-9)

    def test_recall_monotone_in_k_fuzzed(self):
        rng = random.Random(47)
        for _ in range(200):
            ranked = [f"d{i}" for i in range(rng.randrange(0, 12))]
            rng.shuffle(ranked)
            gold = f"d{rng.randrange(0, 14)}"
            values = [recall_at_k(ranked, gold, k) for k in range(1, 15)]
            assert values == sorted(values)


class TestBootstrap:
    def test_zero_variance_collapses(self):
        ci = bootstrap_ci([1.0] * 50, seed=1)
        assert (ci.lower_95, ci.point_estimate, ci.upper_95) == (1.0, 1.0, 1.0)

    def test_interval_brackets_mean(self):
        rng = random.Random(48)
        values = [rng.random() for _ in range(400)]
        ci = bootstrap_ci(values, seed=2)
        assert ci.lower_95 <= ci.point_estimate <= ci.upper_95

    def test_deterministic_under_seed(self):
        rng = random.Random(5)
        values = [rng.random() for _ in range(40)]
        a = bootstrap_ci(values, seed=3)
        b = bootstrap_ci(values, seed=3)
        assert (a.lower_95, a.upper_95) == (b.lower_95, b.upper_95)
        c = bootstrap_ci(values, seed=4)
        assert (a.lower_95, a.upper_95) != (c.lower_95, c.upper_95)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            bootstrap_ci([])


class TestCompareMethods:
    def test_report_shape_and_forced_recall(self):
        records = synthetic_records(150, seed=49)
        engine = SearchEngine(records)
        queries = generate_eval_queries(records, n=40, seed=8)
        report = compare_methods(engine, queries, resamples=200, seed=9)
        assert set(report.methods) == {"hybrid", "semantic", "spatial", "bm25"}
        for cis in report.methods.values():
            assert set(cis) == {"recall@1", "recall@3", "recall@5", "mrr"}
            for ci in cis.values():
                assert ci.lower_95 <= ci.point_estimate <= ci.upper_95
        # The anchor is the gold record's own point, so spatial-only is exact
        # and hybrid inherits the geofilter.
        assert report.methods["spatial"]["recall@1"].point_estimate == 1.0
        assert report.methods["hybrid"]["recall@5"].point_estimate == 1.0

    def test_mrr_between_recall1_and_recall_kmax(self):
        records = synthetic_records(120, seed=50)
        engine = SearchEngine(records)
        queries = generate_eval_queries(records, n=30, seed=10)
        report = compare_methods(engine, queries, resamples=100, seed=11)
        for cis in report.methods.values():
            assert cis["mrr"].point_estimate >= cis["recall@1"].point_estimate - 1e-12
            assert cis["mrr"].point_estimate <= cis["recall@5"].point_estimate + 1e-12

    def test_per_type_rows(self):
        records = synthetic_records(120, seed=51)
        engine = SearchEngine(records)
        queries = generate_eval_queries(records, n=40, seed=12)
        report = compare_methods(engine, queries, methods=[Method.HYBRID], resamples=100, seed=13)
        types_present = {q.toponym_type for q in queries}
        assert set(report.per_type_recall1["hybrid"]) == types_present
        assert set(report.type_counts) == types_present
        assert sum(report.type_counts.values()) == len(queries)

    def test_pointless_query_counts_as_miss_for_spatial(self):
        records = synthetic_records(30, seed=52)
        engine = SearchEngine(records)
        queries = [
            EvalQuery(
                query_text="Что такое Имя?",
                gold_doc_id=records[0].id,
                point=None,
                language_used="rus",
                toponym_type="Toponym",
            )
        ]
        report = compare_methods(engine, queries, methods=[Method.SPATIAL, Method.BM25], resamples=50, seed=14)
        assert report.methods["spatial"]["recall@5"].point_estimate == 0.0
        assert any("no point" in d for d in report.diagnostics)

    def test_empty_queries_rejected(self):
        engine = SearchEngine(synthetic_records(5, seed=53))
        with pytest.raises(ValueError):
            compare_methods(engine, [])

    def test_traces_kept_when_requested(self):
        records = synthetic_records(40, seed=54)
        engine = SearchEngine(records)
        queries = generate_eval_queries(records, n=5, seed=15)
        report = compare_methods(engine, queries, methods=[Method.HYBRID], resamples=50, seed=16, keep_traces=True)
        assert len(report.traces) == 5
        assert all({"method", "query", "gold_doc_id", "ranked"} <= set(t) for t in report.traces)
