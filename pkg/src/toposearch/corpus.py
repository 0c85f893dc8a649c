"""Toponym records: ingestion, validation, and canonical context assembly.

A record describes one named geographical object with bilingual names
(Russian/Tatar), a type taxonomy, free-text etymology/location/physiography,
bibliographic sources, and optional WGS84 coordinates. Two context strings
are derived from each record:

  * the retrieval context (English prefixes, coordinates excluded), which
    feeds the semantic and lexical indexes, and
  * the QA context (Russian prefixes, coordinates included, capped at a
    maximum length), which question-answer pairs and the reader operate on.

All offsets are counted in Unicode scalar values (SQuAD-style character
offsets), never bytes.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable

from .errors import DataFormatError
from .geo import GeoPoint

SCHEMA_VERSION = 1

SEPARATOR = " | "

RECORDS_FILENAME = "records.jsonl"
MANIFEST_FILENAME = "manifest.json"


class ToponymType(str, Enum):
    TOPONYM = "Toponym"
    MICROTOPONYM = "Microtoponym"


class ToponymSubtype(str, Enum):
    OIKONYM = "Oikonym"
    HYDRONYM = "Hydronym"
    ORONYM = "Oronym"
    NONE = ""


class FieldCategory(str, Enum):
    """Category of a context field; question categories are a subset."""

    NAME_RUS = "name_rus"
    NAME_TAT = "name_tat"
    OBJECT_TYPE = "object_type"
    ETYMOLOGY = "etymology"
    LOCATION = "location"
    COORDINATES = "coordinates"
    REGION = "region"
    SOURCES = "sources"
    PHYSIO = "physio"


@dataclass(frozen=True)
class ToponymRecord:
    """One gazetteer entry. Immutable; safe to share across threads."""

    id: str
    toponym_type: ToponymType | None = None
    toponym_subtype: ToponymSubtype = ToponymSubtype.NONE
    url: str = ""
    geographical_object: str = ""
    name_rus: str = ""
    name_tat: str = ""
    federal_subject: str = ""
    physio_details: str = ""
    geographical_location: str = ""
    etymology: str = ""
    sources: str = ""
    latitude: float | None = None
    longitude: float | None = None
    # Original decimal text of the coordinates, preserved verbatim so that
    # context strings (and hence QA answers) are exact substrings of input.
    lat_text: str = ""
    lon_text: str = ""
    has_map: bool = False

    @property
    def has_coordinates(self) -> bool:
        return self.latitude is not None and self.longitude is not None

    @property
    def display_name(self) -> str:
        return self.name_rus if self.name_rus else self.name_tat

    @property
    def point(self) -> GeoPoint | None:
        if not self.has_coordinates:
            return None
        return GeoPoint(self.latitude, self.longitude)

    @property
    def coordinates_text(self) -> str:
        """Coordinate answer string: '<latitude>, <longitude>' as ingested."""
        if not self.has_coordinates:
            return ""
        return f"{self.lat_text}, {self.lon_text}"


@dataclass(frozen=True)
class FieldSegment:
    """One rendered field of an assembled context.

    ``start_of_value`` is the character offset of ``value`` inside the
    context; the substring at that offset equals ``value`` exactly.
    """

    category: FieldCategory
    prefix: str
    value: str
    start_of_value: int


@dataclass(frozen=True)
class IndexedDocument:
    """Retrieval unit: identifier, retrieval context, optional geo point."""

    doc_id: str
    context: str
    point: GeoPoint | None
    display_name: str


@dataclass
class Diagnostic:
    """One validation or parse problem found during ingestion."""

    reason: str
    record_id: str | None = None
    field: str | None = None
    line_no: int | None = None

    def __str__(self) -> str:
        where = f"line {self.line_no}" if self.line_no is not None else "record"
        rid = f" id={self.record_id}" if self.record_id else ""
        fld = f" field={self.field}" if self.field else ""
        return f"{where}{rid}{fld}: {self.reason}"


# Retrieval context: English prefixes, fixed order, coordinates excluded.
_RETRIEVAL_FIELDS: tuple[tuple[str, str], ...] = (
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

# QA context: Russian prefixes (colon and trailing space included), fixed
# order with coordinates rendered last so that bibliographic sources precede
# the coordinate span, matching the reference corpus layout.
QA_PREFIXES: dict[FieldCategory, str] = {
    FieldCategory.NAME_RUS: "Название (рус): ",
    FieldCategory.NAME_TAT: "Название (тат): ",
    FieldCategory.OBJECT_TYPE: "Объект: ",
    FieldCategory.ETYMOLOGY: "Этимология: ",
    FieldCategory.LOCATION: "Расположение: ",
    FieldCategory.REGION: "Регион: ",
    FieldCategory.PHYSIO: "Физико-географические сведения: ",
    FieldCategory.SOURCES: "Источники: ",
    FieldCategory.COORDINATES: "Координаты: ",
}

QA_FIELD_ORDER: tuple[FieldCategory, ...] = tuple(QA_PREFIXES)

_QA_SOURCE_ATTR: dict[FieldCategory, str] = {
    FieldCategory.NAME_RUS: "name_rus",
    FieldCategory.NAME_TAT: "name_tat",
    FieldCategory.OBJECT_TYPE: "geographical_object",
    FieldCategory.ETYMOLOGY: "etymology",
    FieldCategory.LOCATION: "geographical_location",
    FieldCategory.REGION: "federal_subject",
    FieldCategory.PHYSIO: "physio_details",
    FieldCategory.SOURCES: "sources",
}

_TOPONYM_TYPE_ALIASES = {
    "toponym": ToponymType.TOPONYM,
    "топоним": ToponymType.TOPONYM,
    "microtoponym": ToponymType.MICROTOPONYM,
    "микротопоним": ToponymType.MICROTOPONYM,
}

_SUBTYPE_ALIASES = {
    "oikonym": ToponymSubtype.OIKONYM,
    "ойконим": ToponymSubtype.OIKONYM,
    "hydronym": ToponymSubtype.HYDRONYM,
    "гидроним": ToponymSubtype.HYDRONYM,
    "oronym": ToponymSubtype.ORONYM,
    "ороним": ToponymSubtype.ORONYM,
    "": ToponymSubtype.NONE,
    "none": ToponymSubtype.NONE,
    "no type": ToponymSubtype.NONE,
}


def _text(value: object) -> str:
    """Coerce an optional JSON value to text; null and "" both mean empty."""
    if value is None:
        return ""
    return str(value).strip()


def _coordinate(value: object, fieldname: str) -> tuple[float | None, str]:
    """Parse a latitude/longitude value, keeping its decimal text verbatim."""
    if value is None:
        return None, ""
    text = str(value).strip()
    if text == "":
        return None, ""
    try:
        number = float(text)
    except ValueError:
        raise ValueError(f"{fieldname} is not a decimal number: {text!r}")
    if math.isnan(number) or math.isinf(number):
        raise ValueError(f"{fieldname} is not finite: {text!r}")
    return number, text


def parse_record(obj: dict, line_no: int | None = None) -> tuple[ToponymRecord | None, list[Diagnostic]]:
    """Build a validated ToponymRecord from one parsed input object.

    Returns ``(record, [])`` on success or ``(None, diagnostics)`` when the
    object violates the schema or a record invariant. Records are excluded,
    never repaired.
    """
    diags: list[Diagnostic] = []
    record_id = _text(obj.get("id")) or None

    def bad(fieldname: str, reason: str) -> None:
        diags.append(Diagnostic(reason, record_id=record_id, field=fieldname, line_no=line_no))

    if record_id is None:
        bad("id", "missing record id")

    # Missing/empty fields are allowed; a present but unparsable enum value
    # is a violation (excluded, not repaired).
    type_raw = _text(obj.get("toponym_type"))
    toponym_type = None
    if type_raw:
        toponym_type = _TOPONYM_TYPE_ALIASES.get(type_raw.lower())
        if toponym_type is None:
            bad("toponym_type", f"unknown toponym type: {type_raw!r}")

    subtype_raw = _text(obj.get("toponym_subtype"))
    toponym_subtype = _SUBTYPE_ALIASES.get(subtype_raw.lower())
    if toponym_subtype is None:
        bad("toponym_subtype", f"unknown toponym subtype: {subtype_raw!r}")

    name_rus = _text(obj.get("name_rus"))
    name_tat = _text(obj.get("name_tat"))
    if not name_rus and not name_tat:
        bad("name_rus", "at least one of name_rus, name_tat must be non-empty")

    lat = lon = None
    lat_text = lon_text = ""
    try:
        lat, lat_text = _coordinate(obj.get("latitude"), "latitude")
    except ValueError as exc:
        bad("latitude", str(exc))
    try:
        lon, lon_text = _coordinate(obj.get("longitude"), "longitude")
    except ValueError as exc:
        bad("longitude", str(exc))

    if (lat is None) != (lon is None):
        bad("latitude", "latitude and longitude must be both present or both absent")
    if lat is not None and not -90.0 <= lat <= 90.0:
        bad("latitude", f"latitude out of range [-90, 90]: {lat}")
    if lon is not None and not -180.0 <= lon <= 180.0:
        bad("longitude", f"longitude out of range [-180, 180]: {lon}")

    if diags:
        return None, diags

    record = ToponymRecord(
        id=record_id,
        url=_text(obj.get("url")),
        toponym_type=toponym_type,
        toponym_subtype=toponym_subtype,
        geographical_object=_text(obj.get("geographical_object")),
        name_rus=name_rus,
        name_tat=name_tat,
        federal_subject=_text(obj.get("federal_subject")),
        physio_details=_text(obj.get("physio_details")),
        geographical_location=_text(obj.get("geographical_location")),
        etymology=_text(obj.get("etymology")),
        sources=_text(obj.get("sources")),
        latitude=lat,
        longitude=lon,
        lat_text=lat_text,
        lon_text=lon_text,
        has_map=bool(obj.get("has_map", False)),
    )
    return record, []


def ingest_records(lines: Iterable[str]) -> tuple[list[ToponymRecord], list[Diagnostic]]:
    """Ingest a line-delimited record stream.

    Valid records are returned in input order. Every invariant violation
    yields a diagnostic and excludes the record; malformed lines yield a
    per-line diagnostic and processing continues.
    """
    records: list[ToponymRecord] = []
    diagnostics: list[Diagnostic] = []
    for line_no, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            # parse_float=str keeps the coordinate decimal text verbatim.
            obj = json.loads(stripped, parse_float=str)
        except json.JSONDecodeError as exc:
            diagnostics.append(Diagnostic(f"malformed record line: {exc.msg}", line_no=line_no))
            continue
        if not isinstance(obj, dict):
            diagnostics.append(Diagnostic("record line is not an object", line_no=line_no))
            continue
        record, diags = parse_record(obj, line_no=line_no)
        diagnostics.extend(diags)
        if record is not None:
            records.append(record)
    return records, diagnostics


def ingest_file(path: str | Path) -> tuple[list[ToponymRecord], list[Diagnostic]]:
    """Ingest a UTF-8 record file; unreadable input raises OSError."""
    with open(path, encoding="utf-8") as handle:
        return ingest_records(handle)


def assemble_retrieval_context(rec: ToponymRecord) -> str:
    """Render the English-prefix retrieval context.

    Non-empty fields appear as "<Prefix>: <value>" in a fixed order, joined
    by " | "; empty fields are omitted and coordinates never appear.
    """
    parts = []
    for prefix, attr in _RETRIEVAL_FIELDS:
        value = getattr(rec, attr)
        if isinstance(value, Enum):
            value = value.value
        if value:
            parts.append(f"{prefix}: {value}")
    return SEPARATOR.join(parts)


def qa_field_values(rec: ToponymRecord) -> list[tuple[FieldCategory, str, str]]:
    """Non-empty QA fields as (category, prefix, value), in render order."""
    fields: list[tuple[FieldCategory, str, str]] = []
    for category in QA_FIELD_ORDER:
        prefix = QA_PREFIXES[category]
        if category is FieldCategory.COORDINATES:
            value = rec.coordinates_text
        else:
            value = getattr(rec, _QA_SOURCE_ATTR[category])
        if value:
            fields.append((category, prefix, value))
    return fields


def assemble_qa_context(rec: ToponymRecord, max_len: int = 2048) -> tuple[str, list[FieldSegment]]:
    """Render the Russian-prefix QA context with exact value offsets.

    When the raw assembly exceeds ``max_len``, every field value is cut to
    floor(value_len * max_len / raw_len) characters while all prefixes stay
    intact; the pass repeats until the context fits (at most a couple of
    iterations, since prefixes and separators are retained).
    """
    fields = qa_field_values(rec)
    if not fields:
        return "", []
    fixed = sum(len(prefix) for _, prefix, _ in fields) + len(SEPARATOR) * (len(fields) - 1)
    if max_len < fixed:
        raise ValueError(f"max_len {max_len} is below the fixed prefix/separator length {fixed}")

    values = [value for _, _, value in fields]
    total = fixed + sum(len(v) for v in values)
    while total > max_len:
        values = [v[: len(v) * max_len // total] for v in values]
        total = fixed + sum(len(v) for v in values)

    segments: list[FieldSegment] = []
    parts: list[str] = []
    offset = 0
    for (category, prefix, _), value in zip(fields, values):
        if parts:
            offset += len(SEPARATOR)
        segments.append(FieldSegment(category, prefix, value, offset + len(prefix)))
        parts.append(prefix + value)
        offset += len(prefix) + len(value)
    return SEPARATOR.join(parts), segments


def build_documents(records: Iterable[ToponymRecord]) -> list[IndexedDocument]:
    """Turn records into retrieval units; context is always non-empty."""
    return [
        IndexedDocument(
            doc_id=rec.id,
            context=assemble_retrieval_context(rec),
            point=rec.point,
            display_name=rec.display_name,
        )
        for rec in records
    ]


def record_to_dict(rec: ToponymRecord) -> dict:
    """Serialize a record for the canonical corpus file or the API.

    Coordinates are written as strings carrying the ingested decimal text so
    the canonical file round-trips verbatim.
    """
    return {
        "id": rec.id,
        "url": rec.url,
        "toponym_type": rec.toponym_type.value if rec.toponym_type else "",
        "toponym_subtype": rec.toponym_subtype.value,
        "geographical_object": rec.geographical_object,
        "name_rus": rec.name_rus,
        "name_tat": rec.name_tat,
        "federal_subject": rec.federal_subject,
        "physio_details": rec.physio_details,
        "geographical_location": rec.geographical_location,
        "etymology": rec.etymology,
        "sources": rec.sources,
        "latitude": rec.lat_text if rec.has_coordinates else None,
        "longitude": rec.lon_text if rec.has_coordinates else None,
        "has_map": rec.has_map,
    }


def write_corpus(records: Iterable[ToponymRecord], directory: str | Path) -> dict:
    """Write the canonical record file and manifest; returns the manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records = list(records)
    with open(directory / RECORDS_FILENAME, "w", encoding="utf-8") as handle:
        for rec in records:
            handle.write(json.dumps(record_to_dict(rec), ensure_ascii=False) + "\n")
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "record_count": len(records),
        "with_coordinates": sum(1 for rec in records if rec.has_coordinates),
    }
    with open(directory / MANIFEST_FILENAME, "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, indent=2)
        handle.write("\n")
    return manifest


def load_corpus(directory: str | Path) -> tuple[list[ToponymRecord], dict]:
    """Load a corpus directory written by :func:`write_corpus`."""
    directory = Path(directory)
    records_path = directory / RECORDS_FILENAME
    manifest_path = directory / MANIFEST_FILENAME
    if not records_path.exists():
        raise DataFormatError(f"not a corpus directory (missing {RECORDS_FILENAME}): {directory}")
    records, diagnostics = ingest_file(records_path)
    errors = [d for d in diagnostics if d.reason]
    if errors:
        raise DataFormatError(
            f"canonical record file is invalid: {errors[0]} (+{len(errors) - 1} more)"
            if len(errors) > 1
            else f"canonical record file is invalid: {errors[0]}"
        )
    manifest = {}
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as handle:
            manifest = json.load(handle)
    return records, manifest
