"""BM25 baseline over retrieval contexts.

Deliberately plain: lowercase tokens split on any non-letter/non-digit
character, no stemming or stopwords. The lexical gap between synonymous
geographical terms is exactly what this baseline is meant to exhibit.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Iterable, Sequence

_TOKEN = re.compile(r"[^\W_]+")

K1 = 1.5
B = 0.75


def tokenize(text: str) -> list[str]:
    """Lowercase tokens; any non-letter, non-digit character splits."""
    return _TOKEN.findall(text.lower())


class BM25Index:
    """Inverted index with BM25 scoring (k1=1.5, b=0.75).

    idf = ln((N - df + 0.5) / (df + 0.5) + 1). Immutable after build;
    concurrent queries are safe.
    """

    def __init__(self, docs: Iterable[tuple[str, str]], k1: float = K1, b: float = B) -> None:
        self.k1 = k1
        self.b = b
        self._ids: list[str] = []
        self._doc_len: list[int] = []
        postings: dict[str, list[tuple[str, int]]] = {}
        for doc_id, text in docs:
            tokens = tokenize(text)
            row = len(self._ids)
            self._ids.append(doc_id)
            self._doc_len.append(len(tokens))
            for term, tf in Counter(tokens).items():
                postings.setdefault(term, []).append((doc_id, tf))
        for plist in postings.values():
            plist.sort()
        self._postings = postings
        self._rows = {doc_id: i for i, doc_id in enumerate(self._ids)}
        n = len(self._ids)
        self.avg_len = (sum(self._doc_len) / n) if n else 0.0

    def __len__(self) -> int:
        return len(self._ids)

    def idf(self, term: str) -> float:
        df = len(self._postings.get(term, ()))
        n = len(self._ids)
        return math.log((n - df + 0.5) / (df + 0.5) + 1.0)

    def top_k(self, query: str, k: int) -> list[tuple[str, float]]:
        """Top-k docs by BM25 score, descending, ties by doc_id.

        Only documents sharing at least one term with the query can score;
        a query with no known terms returns an empty list.
        """
        scores: dict[str, float] = {}
        for term in tokenize(query):
            plist = self._postings.get(term)
            if not plist:
                continue
            idf = self.idf(term)
            for doc_id, tf in plist:
                dl = self._doc_len[self._rows[doc_id]]
                norm = self.k1 * (1.0 - self.b + self.b * dl / self.avg_len) if self.avg_len else self.k1
                scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (self.k1 + 1.0) / (tf + norm)
        ranked = sorted(scores.items(), key=lambda item: (-item[1], item[0]))
        return ranked[:k]


def build_bm25(documents: Sequence) -> BM25Index:
    """Index the retrieval contexts of a corpus."""
    return BM25Index((doc.doc_id, doc.context) for doc in documents)
