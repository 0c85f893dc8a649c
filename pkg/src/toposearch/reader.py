"""Rule-based extractive reader, answer normalization, and EM/F1 scoring.

The reader routes a question to a field category by keyword, finds that
category's prefix in the QA context, and returns the text up to the next
field separator. Normalization undoes the usual tokenizer damage (spaces
inside decimal numbers, spaced-out hyphens, padding inside brackets) and
is idempotent. The metric functions score any reader, including external
prediction files.
"""

from __future__ import annotations

import re
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

from .corpus import QA_PREFIXES, SEPARATOR, FieldCategory, assemble_qa_context
from .geo import GeoPoint
from .hybrid import DEFAULT_ALPHA, DEFAULT_RADIUS_M, SearchEngine, SearchQuery
from .qagen import QaPair

# Keyword routing rules in priority order; first match wins, so the
# coordinate cues beat the generic location ones ("Где на карте находится"
# is a coordinates question).
_KEYWORD_RULES: tuple[tuple[FieldCategory, tuple[str, ...]], ...] = (
    (FieldCategory.COORDINATES, ("координат", "на карте")),
    (FieldCategory.REGION, ("регион", "федеральный субъект")),
    (FieldCategory.ETYMOLOGY, ("означает", "называется", "происхожден")),
    (FieldCategory.SOURCES, ("источник", "прочитать")),
    (FieldCategory.PHYSIO, ("физико-географ", "географических особенностях")),
    (FieldCategory.LOCATION, ("находится", "располож")),
    (FieldCategory.OBJECT_TYPE, ("что такое", "тип")),
)

# Rule 1a: drop whitespace between digits and a following dot ("55 .17").
_SPACE_BEFORE_DOT = re.compile(r"(?<=\d)\s+(?=\.)")
# Rule 1b: drop whitespace between "digits." and following digits ("55. 17").
_SPACE_AFTER_DOT = re.compile(r"(?<=\d\.)\s+(?=\d)")
# Rule 2: collapse spacing around hyphens between letters.
_SPACED_HYPHEN = re.compile(r"(?<=[^\W\d_])\s*-\s*(?=[^\W\d_])")
# Rule 3: spaces just inside brackets/quotes and before commas.
_AFTER_OPENING = re.compile(r"([(\[{«])\s+")
_BEFORE_CLOSING = re.compile(r"\s+([)\]}»])")
_BEFORE_COMMA = re.compile(r"\s+,")


@dataclass(frozen=True)
class ReaderAnswer:
    """An extracted span; a no-answer result has empty text and start -1."""

    text: str
    start: int
    category_guess: FieldCategory | None
    source_prefix: str

    @property
    def found(self) -> bool:
        return self.start >= 0


NO_ANSWER = ReaderAnswer(text="", start=-1, category_guess=None, source_prefix="")


def classify_question(question: str) -> FieldCategory | None:
    """Route a question to its category by case-insensitive keywords."""
    lowered = question.lower()
    for category, keywords in _KEYWORD_RULES:
        if any(keyword in lowered for keyword in keywords):
            return category
    return None


def extract(question: str, context: str) -> ReaderAnswer:
    """Extract the answer span for the question's category.

    The answer is the text between the category's prefix and the next
    field separator (or end of context). An unknown category or a missing
    prefix yields the no-answer result.
    """
    category = classify_question(question)
    if category is None:
        return NO_ANSWER
    prefix = QA_PREFIXES[category]
    position = context.find(prefix)
    if position < 0:
        return ReaderAnswer(text="", start=-1, category_guess=category, source_prefix="")
    start = position + len(prefix)
    end = context.find(SEPARATOR, start)
    if end < 0:
        end = len(context)
    return ReaderAnswer(text=context[start:end], start=start, category_guess=category, source_prefix=prefix)


def normalize_answer(text: str) -> str:
    """Normalize tokenizer artifacts; idempotent.

    In order: mend decimal numbers split by whitespace, rejoin spaced
    hyphens between letters, strip spaces just inside brackets and before
    commas, then trim and collapse whitespace runs.
    """
    text = _SPACE_BEFORE_DOT.sub("", text)
    text = _SPACE_AFTER_DOT.sub("", text)
    text = _SPACED_HYPHEN.sub("-", text)
    text = _AFTER_OPENING.sub(r"\1", text)
    text = _BEFORE_CLOSING.sub(r"\1", text)
    text = _BEFORE_COMMA.sub(",", text)
    return " ".join(text.split())


def exact_match(pred: str, gold: str, normalized: bool = False) -> int:
    """1 if the strings are equal after trimming (or after normalization)."""
    if normalized:
        return int(normalize_answer(pred) == normalize_answer(gold))
    return int(pred.strip() == gold.strip())


def token_f1(pred: str, gold: str, normalized: bool = False) -> float:
    """Token-multiset F1 on lowercased whitespace tokens."""
    if normalized:
        pred, gold = normalize_answer(pred), normalize_answer(gold)
    pred_tokens = pred.lower().split()
    gold_tokens = gold.lower().split()
    if not pred_tokens and not gold_tokens:
        return 1.0
    if not pred_tokens or not gold_tokens:
        return 0.0
    overlap = sum((Counter(pred_tokens) & Counter(gold_tokens)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred_tokens)
    recall = overlap / len(gold_tokens)
    return 2.0 * precision * recall / (precision + recall)


@dataclass
class CategoryMetrics:
    count: int = 0
    exact_match: float = 0.0
    f1: float = 0.0


@dataclass
class QaMetrics:
    """Aggregate reader quality: overall, per category, and latency."""

    exact_match: float
    f1: float
    count: int
    normalized: bool
    mean_latency_ms: float
    per_category: dict[str, CategoryMetrics] = field(default_factory=dict)


ReaderFn = Callable[[str, str], ReaderAnswer]


def _aggregate(
    rows: Sequence[tuple[FieldCategory, int, float]], normalized: bool, mean_latency_ms: float
) -> QaMetrics:
    per_category: dict[str, CategoryMetrics] = {}
    em_sum = 0.0
    f1_sum = 0.0
    for category, em, f1 in rows:
        em_sum += em
        f1_sum += f1
        bucket = per_category.setdefault(category.value, CategoryMetrics())
        bucket.count += 1
        bucket.exact_match += em
        bucket.f1 += f1
    for bucket in per_category.values():
        bucket.exact_match /= bucket.count
        bucket.f1 /= bucket.count
    n = len(rows)
    return QaMetrics(
        exact_match=em_sum / n,
        f1=f1_sum / n,
        count=n,
        normalized=normalized,
        mean_latency_ms=mean_latency_ms,
        per_category=per_category,
    )


def evaluate_reader(
    pairs: Sequence[QaPair], reader: ReaderFn = extract, normalized: bool = False
) -> QaMetrics:
    """Run a reader over gold pairs and score EM/F1 overall and per category."""
    if not pairs:
        raise ValueError("cannot evaluate an empty pair set")
    rows = []
    elapsed = 0.0
    for pair in pairs:
        t0 = time.perf_counter()
        answer = reader(pair.question, pair.context)
        elapsed += time.perf_counter() - t0
        rows.append(
            (
                pair.category,
                exact_match(answer.text, pair.answer_text, normalized),
                token_f1(answer.text, pair.answer_text, normalized),
            )
        )
    return _aggregate(rows, normalized, mean_latency_ms=1000.0 * elapsed / len(pairs))


@dataclass
class AskResult:
    """Answer to a question: extracted span plus retrieval provenance."""

    answer: str
    answer_start: int
    category: str | None
    doc_id: str | None
    context: str
    hit: dict | None
    diagnostics: list[str] = field(default_factory=list)


def answer_question(
    engine: SearchEngine,
    question: str,
    point: GeoPoint | None = None,
    radius_m: float | None = None,
    alpha: float | None = None,
) -> AskResult:
    """Retrieve the top hybrid hit for the question and read the answer.

    Without a point, retrieval degrades to semantic-only exactly as search
    does. Retrieval misses and reader no-answers come back as an explicit
    empty-answer result, never an exception.
    """
    query = SearchQuery(
        text=question,
        point=point,
        radius_m=radius_m if radius_m is not None else DEFAULT_RADIUS_M,
        alpha=alpha if alpha is not None else DEFAULT_ALPHA,
        k=1,
    )
    result = engine.search(query)
    if not result.hits:
        return AskResult(
            answer="",
            answer_start=-1,
            category=None,
            doc_id=None,
            context="",
            hit=None,
            diagnostics=result.diagnostics + ["no documents retrieved for the question"],
        )
    hit = result.hits[0]
    record = engine.records_by_id[hit.doc_id]
    context, _ = assemble_qa_context(record)
    answer = extract(question, context)
    diagnostics = list(result.diagnostics)
    if not answer.found:
        diagnostics.append("reader found no answer span in the retrieved context")
    return AskResult(
        answer=answer.text,
        answer_start=answer.start,
        category=answer.category_guess.value if answer.category_guess else None,
        doc_id=hit.doc_id,
        context=context,
        hit=engine.hit_payload(hit),
        diagnostics=diagnostics,
    )


def ask_payload(result: AskResult) -> dict:
    """Structured ask response; the CLI and the HTTP API share this."""
    return {
        "answer": result.answer,
        "answer_start": result.answer_start,
        "category": result.category,
        "doc_id": result.doc_id,
        "context": result.context,
        "hit": result.hit,
        "diagnostics": result.diagnostics,
    }


def evaluate_predictions(
    pairs: Sequence[QaPair], predictions: Mapping[str, str], normalized: bool = False
) -> QaMetrics:
    """Score an external reader's prediction file (id -> answer text).

    Missing predictions count as empty answers; latency is not measurable
    and reports as 0.
    """
    if not pairs:
        raise ValueError("cannot evaluate an empty pair set")
    rows = [
        (
            pair.category,
            exact_match(predictions.get(pair.id, ""), pair.answer_text, normalized),
            token_f1(predictions.get(pair.id, ""), pair.answer_text, normalized),
        )
        for pair in pairs
    ]
    return _aggregate(rows, normalized, mean_latency_ms=0.0)
