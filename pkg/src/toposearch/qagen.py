"""SQuAD-style QA corpus generation from toponym records.

Seven question categories, each with a small family of Russian templates.
For every non-empty source field of a record one template is drawn (seeded)
and the answer span is the field's value inside the QA context, located by
character offset, so extraction invariants are checkable by substring.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .corpus import FieldCategory, ToponymRecord, assemble_qa_context
from .errors import DataFormatError

MAX_CONTEXT_CHARS = 2048
MAX_PAIRS_PER_RECORD = 10
TRAIN_FRACTION = 0.9


@dataclass(frozen=True)
class QuestionTemplate:
    category: FieldCategory
    pattern: str  # contains "{name}" exactly once


@dataclass(frozen=True)
class QaPair:
    """One question-context-answer triple with an exact character offset."""

    id: str
    context: str
    question: str
    answer_text: str
    answer_start: int
    category: FieldCategory


# Question templates by category. Population: 3 object-type, 3 location,
# 3 etymology, 2 coordinates, 2 region, 2 sources, 2 physiography.
TEMPLATES: dict[FieldCategory, tuple[str, ...]] = {
    FieldCategory.OBJECT_TYPE: (
        "Что такое {name}?",
        "Какой тип у {name}?",
        "К какому типу относится {name}?",
    ),
    FieldCategory.LOCATION: (
        "Где находится {name}?",
        "В каком месте расположен {name}?",
        "Где именно расположен {name}?",
    ),
    FieldCategory.ETYMOLOGY: (
        "Что означает название {name}?",
        "Почему {name} так называется?",
        "Каково происхождение названия {name}?",
    ),
    FieldCategory.COORDINATES: (
        "Какие координаты у {name}?",
        "Где на карте находится {name}?",
    ),
    FieldCategory.REGION: (
        "В каком регионе находится {name}?",
        "Какой федеральный субъект у {name}?",
    ),
    FieldCategory.SOURCES: (
        "Какие источники упоминают {name}?",
        "Где можно прочитать о {name}?",
    ),
    FieldCategory.PHYSIO: (
        "Какие физико-географические сведения о {name}?",
        "Что известно о географических особенностях {name}?",
    ),
}

# Generation (and cap-truncation) order of question categories.
QUESTION_CATEGORIES: tuple[FieldCategory, ...] = (
    FieldCategory.OBJECT_TYPE,
    FieldCategory.LOCATION,
    FieldCategory.ETYMOLOGY,
    FieldCategory.COORDINATES,
    FieldCategory.REGION,
    FieldCategory.SOURCES,
    FieldCategory.PHYSIO,
)


def builtin_templates() -> list[QuestionTemplate]:
    """All templates, flattened in category order."""
    return [
        QuestionTemplate(category, pattern)
        for category in QUESTION_CATEGORIES
        for pattern in TEMPLATES[category]
    ]


def generate_pairs(
    rec: ToponymRecord,
    seed: int = 42,
    max_per_record: int = MAX_PAIRS_PER_RECORD,
    max_context: int = MAX_CONTEXT_CHARS,
) -> list[QaPair]:
    """Generate up to ``max_per_record`` QA pairs for one record.

    The RNG stream derives from (seed, record id), so output is independent
    of processing order. Categories whose source field is empty (or whose
    value vanished under truncation) are skipped; when the cap binds, the
    category list is cut in its fixed order.
    """
    context, segments = assemble_qa_context(rec, max_context)
    if not context:
        return []
    seg_by_cat = {seg.category: seg for seg in segments}
    name = rec.display_name
    rng = random.Random(f"{seed}:{rec.id}")
    pairs: list[QaPair] = []
    for category in QUESTION_CATEGORIES:
        if len(pairs) >= max_per_record:
            break
        seg = seg_by_cat.get(category)
        if seg is None or not seg.value:
            continue
        pattern = TEMPLATES[category][rng.randrange(len(TEMPLATES[category]))]
        pairs.append(
            QaPair(
                id=f"{rec.id}_{category.value}_0",
                context=context,
                question=pattern.format(name=name),
                answer_text=seg.value,
                answer_start=seg.start_of_value,
                category=category,
            )
        )
    return pairs


def generate_corpus(
    records: Iterable[ToponymRecord],
    seed: int = 42,
    max_per_record: int = MAX_PAIRS_PER_RECORD,
    max_context: int = MAX_CONTEXT_CHARS,
) -> list[QaPair]:
    """Generate pairs for a whole corpus, output ordered by record id."""
    pairs: list[QaPair] = []
    for rec in sorted(records, key=lambda r: r.id):
        pairs.extend(generate_pairs(rec, seed, max_per_record, max_context))
    return pairs


def split_corpus(
    pairs: Sequence[QaPair], train_fraction: float = TRAIN_FRACTION, seed: int = 42
) -> tuple[list[QaPair], list[QaPair]]:
    """Stratified train/validation split by question category.

    Within each category the pairs are shuffled (seeded) and the first
    ceil(fraction * n) go to train; the union preserves all pairs and both
    halves keep the original corpus order.
    """
    if not pairs:
        raise ValueError("cannot split an empty pair list")
    by_category: dict[FieldCategory, list[int]] = {}
    for i, pair in enumerate(pairs):
        by_category.setdefault(pair.category, []).append(i)
    rng = random.Random(seed)
    train_idx: set[int] = set()
    for category in QUESTION_CATEGORIES:
        indices = by_category.get(category)
        if not indices:
            continue
        shuffled = indices[:]
        rng.shuffle(shuffled)
        n_train = math.ceil(train_fraction * len(shuffled))
        train_idx.update(shuffled[:n_train])
    train = [pairs[i] for i in range(len(pairs)) if i in train_idx]
    val = [pairs[i] for i in range(len(pairs)) if i not in train_idx]
    return train, val


def _pair_json(pair: QaPair) -> dict:
    return {
        "id": pair.id,
        "context": pair.context,
        "question": pair.question,
        "answers": [{"text": pair.answer_text, "answer_start": pair.answer_start}],
        "category": pair.category.value,
    }


def emit_flat(pairs: Iterable[QaPair], path: str | Path) -> None:
    """Write one JSON object per line (id, context, question, answers)."""
    with open(path, "w", encoding="utf-8") as out:
        for pair in pairs:
            out.write(json.dumps(_pair_json(pair), ensure_ascii=False) + "\n")


def emit_squad(pairs: Sequence[QaPair], path: str | Path) -> None:
    """Write the nested SQuAD v1.1 document (data -> paragraphs -> qas)."""
    paragraphs: list[dict] = []
    by_context: dict[str, dict] = {}
    for pair in pairs:
        para = by_context.get(pair.context)
        if para is None:
            para = {"context": pair.context, "qas": []}
            by_context[pair.context] = para
            paragraphs.append(para)
        para["qas"].append(
            {
                "id": pair.id,
                "question": pair.question,
                "answers": [{"text": pair.answer_text, "answer_start": pair.answer_start}],
                "category": pair.category.value,
            }
        )
    document = {
        "version": "1.1",
        "data": [{"title": para["qas"][0]["id"], "paragraphs": [para]} for para in paragraphs],
    }
    with open(path, "w", encoding="utf-8") as out:
        json.dump(document, out, ensure_ascii=False)
        out.write("\n")


def _category_of(raw: str | None, question: str) -> FieldCategory:
    if raw:
        try:
            return FieldCategory(raw)
        except ValueError:
            pass
    # Foreign files may omit the category; fall back to keyword routing.
    from .reader import classify_question

    guessed = classify_question(question)
    if guessed is None:
        raise DataFormatError(f"cannot determine question category for {question!r}")
    return guessed


def _pair_from_json(obj: dict) -> QaPair:
    try:
        answer = obj["answers"][0]
        return QaPair(
            id=str(obj["id"]),
            context=obj["context"],
            question=obj["question"],
            answer_text=answer["text"],
            answer_start=int(answer["answer_start"]),
            category=_category_of(obj.get("category"), obj["question"]),
        )
    except (KeyError, IndexError, TypeError) as exc:
        raise DataFormatError(f"malformed QA pair entry: {exc}") from exc


def load_pairs(path: str | Path) -> list[QaPair]:
    """Load QA pairs from either the flat or the nested SQuAD layout."""
    text = Path(path).read_text(encoding="utf-8")
    stripped = text.lstrip()
    if not stripped:
        return []
    if stripped.startswith("{") and '"data"' in stripped[:2000]:
        document = json.loads(text)
        pairs = []
        for article in document.get("data", []):
            for para in article.get("paragraphs", []):
                for qa in para.get("qas", []):
                    pairs.append(_pair_from_json({**qa, "context": para.get("context", "")}))
        return pairs
    pairs = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"malformed QA line {line_no}: {exc.msg}") from exc
        pairs.append(_pair_from_json(obj))
    return pairs


def verify_pairs(pairs: Iterable[QaPair]) -> list[str]:
    """Offset-soundness check: every answer must sit at its offset."""
    problems = []
    for pair in pairs:
        end = pair.answer_start + len(pair.answer_text)
        if pair.answer_start < 0 or pair.context[pair.answer_start : end] != pair.answer_text:
            problems.append(pair.id)
    return problems
