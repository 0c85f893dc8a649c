"""Record reading and retrieval-context assembly.

The exporter talks to the search engine only through documented file
formats: it reads the line-delimited record file (one JSON object per
line) and renders the same English-prefix retrieval context the engine
indexes: non-empty fields as "<Prefix>: <value>" joined by " | ",
coordinates excluded.
"""

from __future__ import annotations

import json
from pathlib import Path

SEPARATOR = " | "

RECORDS_FILENAME = "records.jsonl"

# (prefix, record field) in render order; coordinates never appear.
RETRIEVAL_FIELDS: tuple[tuple[str, str], ...] = (
    ("Name (rus)", "name_rus"),
    ("Name (tat)", "name_tat"),
    ("Type", "toponym_type"),
    ("Subtype", "toponym_subtype"),
    ("Object", "geographical_object"),
    ("Etymology", "etymology"),
    ("Details", "physio_details"),
    ("Location", "geographical_location"),
    ("Sources", "sources"),
)


def retrieval_context(record: dict) -> str:
    parts = []
    for prefix, field in RETRIEVAL_FIELDS:
        value = record.get(field)
        if value is None:
            continue
        value = str(value).strip()
        if value:
            parts.append(f"{prefix}: {value}")
    return SEPARATOR.join(parts)


def read_documents(path: str | Path) -> list[tuple[str, str]]:
    """(doc_id, context) pairs in file order.

    ``path`` may be a record file or a corpus directory containing
    ``records.jsonl``. Records without an id or with an empty context are
    rejected; run the engine's ingest step first.
    """
    path = Path(path)
    if path.is_dir():
        path = path / RECORDS_FILENAME
    documents: list[tuple[str, str]] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            doc_id = str(record.get("id") or "").strip()
            if not doc_id:
                raise ValueError(f"record on line {line_no} has no id")
            if doc_id in seen:
                raise ValueError(f"duplicate record id on line {line_no}: {doc_id}")
            seen.add(doc_id)
            context = retrieval_context(record)
            if not context:
                raise ValueError(f"record {doc_id} renders an empty context")
            documents.append((doc_id, context))
    return documents
