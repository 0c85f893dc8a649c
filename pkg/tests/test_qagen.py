import json
from collections import Counter

import pytest

from toposearch import (
    FieldCategory,
    ToponymRecord,
    ToponymType,
    builtin_templates,
    emit_flat,
    emit_squad,
    generate_corpus,
    generate_pairs,
    load_pairs,
    split_corpus,
)
from toposearch.qagen import TEMPLATES, verify_pairs

from synth import synthetic_records


class TestTemplates:
    def test_category_counts(self):
        counts = Counter(t.category for t in builtin_templates())
        assert counts == {
            FieldCategory.OBJECT_TYPE: 3,
            FieldCategory.LOCATION: 3,
            FieldCategory.ETYMOLOGY: 3,
            FieldCategory.COORDINATES: 2,
            FieldCategory.REGION: 2,
            FieldCategory.SOURCES: 2,
            FieldCategory.PHYSIO: 2,
        }

    def test_known_templates_present(self):
        assert "Какие координаты у {name}?" in TEMPLATES[FieldCategory.COORDINATES]
        assert "Почему {name} так называется?" in TEMPLATES[FieldCategory.ETYMOLOGY]

    def test_every_pattern_has_name_placeholder_once(self):
        for template in builtin_templates():
            assert template.pattern.count("{name}") == 1


class TestGeneratePairs:
    def test_worked_example(self, rantamak):
        pairs = generate_pairs(rantamak, seed=42)
        coords = next(p for p in pairs if p.category == FieldCategory.COORDINATES)
        assert coords.answer_text == "55.205461, 52.881862"
        assert coords.answer_start == 312
        assert coords.id == "1530_coordinates_0"
        assert coords.context[312 : 312 + len(coords.answer_text)] == coords.answer_text
        assert "Рантамак" in coords.question

    def test_record_without_coordinates_has_no_coordinate_pair(self, rantamak):
        import dataclasses

        bare = dataclasses.replace(rantamak, latitude=None, longitude=None, lat_text="", lon_text="")
        pairs = generate_pairs(bare, seed=42)
        assert all(p.category != FieldCategory.COORDINATES for p in pairs)

    def test_extraction_invariant_over_synthetic_corpus(self):
        records = synthetic_records(120, seed=27, coordinate_share=0.8)
        pairs = generate_corpus(records, seed=1)
        assert pairs
        assert verify_pairs(pairs) == []

    def test_cap_truncates_in_category_order(self, rantamak):
        pairs = generate_pairs(rantamak, seed=42, max_per_record=2)
        assert len(pairs) == 2
        assert [p.category for p in pairs] == [FieldCategory.OBJECT_TYPE, FieldCategory.LOCATION]

    def test_cap_respected_corpus_wide(self):
        records = synthetic_records(60, seed=28)
        for cap in (1, 3, 10):
            pairs = generate_corpus(records, seed=2, max_per_record=cap)
            # Synthetic record ids carry no underscore, so the first "_"
            # separates record id from category slug.
            per_record = Counter(p.id.split("_", 1)[0] for p in pairs)
            assert max(per_record.values()) <= cap

    def test_tatar_name_fallback(self):
        rec = ToponymRecord(
            id="t1", toponym_type=ToponymType.TOPONYM, name_tat="Акчишмә", geographical_object="родник"
        )
        pairs = generate_pairs(rec, seed=5)
        assert pairs
        assert all("Акчишмә" in p.question for p in pairs)

    def test_record_with_no_fillable_category_yields_empty(self):
        rec = ToponymRecord(id="n1", toponym_type=ToponymType.TOPONYM, name_rus="Имя")
        assert generate_pairs(rec, seed=5) == []

    def test_contexts_capped(self):
        rec = ToponymRecord(
            id="big",
            toponym_type=ToponymType.TOPONYM,
            name_rus="Большой",
            etymology="э" * 3000,
            geographical_location="л" * 3000,
        )
        pairs = generate_pairs(rec, seed=6)
        assert pairs
        for pair in pairs:
            assert len(pair.context) <= 2048

    def test_deterministic_under_seed(self):
        records = synthetic_records(50, seed=29)
        assert generate_corpus(records, seed=7) == generate_corpus(records, seed=7)

    def test_seed_changes_template_draws(self):
        records = synthetic_records(50, seed=29)
        a = generate_corpus(records, seed=7)
        b = generate_corpus(records, seed=8)
        assert [p.question for p in a] != [p.question for p in b]


class TestSplit:
    def _pairs_of_category(self, n, category=FieldCategory.OBJECT_TYPE):
        from toposearch.qagen import QaPair

        return [
            QaPair(
                id=f"r{i}_{category.value}_0",
                context=f"Объект: село{i}",
                question=f"Что такое Имя{i}?",
                answer_text=f"село{i}",
                answer_start=8,
                category=category,
            )
            for i in range(n)
        ]

    def test_ten_pairs_split_nine_one(self):
        train, val = split_corpus(self._pairs_of_category(10), seed=1)
        assert len(train) == 9
        assert len(val) == 1

    def test_single_pair_goes_to_train(self):
        train, val = split_corpus(self._pairs_of_category(1), seed=1)
        assert len(train) == 1
        assert val == []

    def test_union_preserved_and_disjoint(self):
        records = synthetic_records(80, seed=30)
        pairs = generate_corpus(records, seed=3)
        train, val = split_corpus(pairs, seed=3)
        assert len(train) + len(val) == len(pairs)
        assert set(p.id for p in train).isdisjoint(p.id for p in val)
        assert sorted(p.id for p in train + val) == sorted(p.id for p in pairs)

    def test_stratification_within_one_pair(self):
        records = synthetic_records(200, seed=31)
        pairs = generate_corpus(records, seed=4)
        train, _ = split_corpus(pairs, seed=4)
        train_counts = Counter(p.category for p in train)
        total_counts = Counter(p.category for p in pairs)
        for category, total in total_counts.items():
            assert abs(train_counts[category] - 0.9 * total) <= 1

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            split_corpus([])


class TestEmitLoad:
    def test_flat_roundtrip(self, tmp_path, rantamak):
        pairs = generate_pairs(rantamak, seed=42)
        path = tmp_path / "qa.jsonl"
        emit_flat(pairs, path)
        assert load_pairs(path) == pairs

    def test_squad_roundtrip(self, tmp_path):
        records = synthetic_records(30, seed=32)
        pairs = generate_corpus(records, seed=5)
        path = tmp_path / "qa.json"
        emit_squad(pairs, path)
        assert load_pairs(path) == pairs

    def test_squad_shape(self, tmp_path, rantamak):
        pairs = generate_pairs(rantamak, seed=42)
        path = tmp_path / "qa.json"
        emit_squad(pairs, path)
        doc = json.loads(path.read_text(encoding="utf-8"))
        assert "data" in doc
        para = doc["data"][0]["paragraphs"][0]
        assert set(para) == {"context", "qas"}
        qa = para["qas"][0]
        assert {"id", "question", "answers"} <= set(qa)
        answer = qa["answers"][0]
        assert set(answer) == {"text", "answer_start"}

    def test_emitted_offsets_revalidate(self, tmp_path):
        records = synthetic_records(40, seed=33)
        pairs = generate_corpus(records, seed=6)
        path = tmp_path / "qa.jsonl"
        emit_flat(pairs, path)
        assert verify_pairs(load_pairs(path)) == []

    def test_worked_example_serialization(self, tmp_path, rantamak):
        pairs = generate_pairs(rantamak, seed=42)
        path = tmp_path / "qa.jsonl"
        emit_flat(pairs, path)
        rows = [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines()]
        coords = next(r for r in rows if r["id"] == "1530_coordinates_0")
        assert coords["answers"][0]["answer_start"] == 312
        assert coords["answers"][0]["text"] == "55.205461, 52.881862"

    def test_emission_bytes_deterministic(self, tmp_path):
        records = synthetic_records(40, seed=34)
        one, two = tmp_path / "a.json", tmp_path / "b.json"
        emit_squad(generate_corpus(records, seed=9), one)
        emit_squad(generate_corpus(records, seed=9), two)
        assert one.read_bytes() == two.read_bytes()
