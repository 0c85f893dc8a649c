"""Command-line interface.

Subcommands: ingest, index, search, answer, gen-qa, eval-retrieval,
grid-search, eval-reader, serve. Exit codes: 0 success, 1 usage error,
2 data/format error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import build_engine, precompute_vectors, resolve_config, write_index_metadata
from .corpus import ingest_file, write_corpus
from .errors import DataFormatError
from .evaluation import Method, compare_methods, generate_eval_queries
from .geo import GeoPoint
from .hybrid import (
    ALPHA_GRID,
    DEFAULT_RADIUS_M,
    SearchQuery,
    grid_search_alpha,
    search_payload,
)
from .qagen import MAX_CONTEXT_CHARS, MAX_PAIRS_PER_RECORD, emit_flat, emit_squad, generate_corpus, load_pairs, split_corpus
from .reader import answer_question, ask_payload, evaluate_predictions, evaluate_reader, extract
from .reporting import format_reader_table, format_retrieval_table, write_reader_report, write_retrieval_report


def _point_args(args) -> GeoPoint | None:
    lat = getattr(args, "lat", None)
    lon = getattr(args, "lon", None)
    if lat is None and lon is None:
        return None
    if lat is None or lon is None:
        raise ValueError("--lat and --lon must be supplied together")
    return GeoPoint(lat, lon)


def _engine_from(args) -> tuple:
    config = resolve_config(
        args.corpus,
        getattr(args, "config", None),
        embedder=getattr(args, "embedder", None),
        vectors=getattr(args, "vectors", None),
        dim=getattr(args, "dim", None),
    )
    engine, _ = build_engine(config)
    return engine, config


def cmd_ingest(args) -> int:
    records, diagnostics = ingest_file(args.input)
    for diag in diagnostics:
        print(f"warning: {diag}", file=sys.stderr)
    manifest = write_corpus(records, args.out)
    print(
        f"ingested {manifest['record_count']} records "
        f"({manifest['with_coordinates']} with coordinates, {len(diagnostics)} diagnostics) -> {args.out}"
    )
    return 0


def cmd_index(args) -> int:
    config = resolve_config(
        args.corpus, getattr(args, "config", None), embedder=args.embedder, vectors=args.vectors, dim=args.dim
    )
    if config.embedder == "hashing":
        count, path = precompute_vectors(config)
        write_index_metadata(config, provider_name="hashing-ngram-v1", doc_count=count)
        print(f"indexed {count} documents (hashing, dim={config.dim}) -> {path}")
    else:
        engine, _ = build_engine(config)
        write_index_metadata(config, provider_name=engine.provider.name, doc_count=len(engine.vector_index))
        print(f"registered external vectors ({engine.provider.name}, dim={engine.vector_index.dim}) for {args.corpus}")
    return 0


def cmd_search(args) -> int:
    engine, config = _engine_from(args)
    query = SearchQuery(
        text=args.query,
        point=_point_args(args),
        radius_m=args.radius_m if args.radius_m is not None else config.radius_m,
        alpha=args.alpha if args.alpha is not None else config.alpha,
        k=args.k if args.k is not None else config.k,
        method=Method(args.method),
    )
    payload = search_payload(engine, query)
    if args.format == "structured":
        print(json.dumps(payload, ensure_ascii=False, indent=2))
        return 0
    for diag in payload["diagnostics"]:
        print(f"note: {diag}", file=sys.stderr)
    if not payload["hits"]:
        print("no results")
        return 0
    for hit in payload["hits"]:
        parts = [f"{hit['rank']:>2}.", f"{hit['combined']:.4f}", hit["display_name"] or hit["doc_id"]]
        if hit["distance_m"] is not None:
            parts.append(f"{hit['distance_m'] / 1000.0:.1f} km")
        if hit["sem_norm"] is not None:
            parts.append(f"sem={hit['sem_norm']:.3f}")
        if hit["geo_norm"] is not None:
            parts.append(f"geo={hit['geo_norm']:.3f}")
        parts.append(f"[{hit['doc_id']}]")
        print("  ".join(parts))
    return 0


def cmd_answer(args) -> int:
    engine, config = _engine_from(args)
    result = answer_question(
        engine,
        args.question,
        point=_point_args(args),
        radius_m=args.radius_m if args.radius_m is not None else config.radius_m,
        alpha=args.alpha if args.alpha is not None else config.alpha,
    )
    payload = ask_payload(result)
    if args.format == "structured":
        print(json.dumps(payload, ensure_ascii=False, indent=2))
        return 0
    for diag in payload["diagnostics"]:
        print(f"note: {diag}", file=sys.stderr)
    if not result.answer:
        print("no answer found")
        return 0
    print(result.answer)
    hit = result.hit or {}
    print(
        f"  from {hit.get('display_name') or result.doc_id} [{result.doc_id}] "
        f"category={result.category} answer_start={result.answer_start}"
    )
    return 0


def cmd_gen_qa(args) -> int:
    records, diagnostics = ingest_file(args.input)
    for diag in diagnostics:
        print(f"warning: {diag}", file=sys.stderr)
    pairs = generate_corpus(records, seed=args.seed, max_per_record=args.max_per_record, max_context=args.max_context)
    if not pairs:
        raise DataFormatError("no QA pairs could be generated from the input records")
    train, val = split_corpus(pairs, seed=args.seed)
    emit = emit_squad if args.format == "squad" else emit_flat
    emit(train, args.out_train)
    emit(val, args.out_val)
    print(f"generated {len(pairs)} pairs from {len(records)} records -> {len(train)} train / {len(val)} validation")
    return 0


def _parse_methods(raw: str) -> list[Method]:
    if raw == "all":
        return list(Method)
    try:
        return [Method(name.strip()) for name in raw.split(",") if name.strip()]
    except ValueError as exc:
        raise ValueError(f"unknown method in --methods: {exc}")


def cmd_eval_retrieval(args) -> int:
    engine, config = _engine_from(args)
    queries = generate_eval_queries(engine.records, n=args.n, seed=args.seed, skip=args.skip, jitter_m=args.jitter_m)
    report = compare_methods(
        engine,
        queries,
        methods=_parse_methods(args.methods),
        alpha=args.alpha if args.alpha is not None else config.alpha,
        radius_m=args.radius_m if args.radius_m is not None else config.radius_m,
        resamples=args.bootstrap,
        seed=args.seed,
        keep_traces=args.trace,
    )
    written = write_retrieval_report(report, args.report)
    print(format_retrieval_table(report))
    print("wrote: " + ", ".join(str(p) for p in written))
    return 0


def cmd_grid_search(args) -> int:
    engine, _ = _engine_from(args)
    try:
        grid = [float(a) for a in args.alphas.split(",") if a.strip()]
    except ValueError:
        raise ValueError(f"--alphas must be a comma-separated list of numbers: {args.alphas!r}")
    queries = generate_eval_queries(engine.records, n=args.n_val, seed=args.seed, skip=args.skip)
    pairs = [
        (SearchQuery(text=q.query_text, point=q.point, radius_m=args.radius_m), q.gold_doc_id)
        for q in queries
    ]
    best, table = grid_search_alpha(engine, pairs, grid=grid, radius_m=args.radius_m)
    print("alpha  mean Recall@5")
    for alpha in sorted(table):
        marker = "  <- selected" if alpha == best else ""
        print(f"{alpha:<6.2f} {table[alpha]:.4f}{marker}")
    return 0


def cmd_eval_reader(args) -> int:
    pairs = load_pairs(args.qa)
    if not pairs:
        raise DataFormatError(f"no QA pairs in {args.qa}")
    notes = []
    if args.predictions:
        with open(args.predictions, encoding="utf-8") as handle:
            predictions = json.load(handle)
        if not isinstance(predictions, dict):
            raise DataFormatError("predictions file must be a JSON object mapping id -> answer text")
        metrics = evaluate_predictions(pairs, predictions, normalized=args.normalize)
        pred_lengths = [len(predictions.get(p.id, "")) for p in pairs]
    else:
        metrics = evaluate_reader(pairs, extract, normalized=args.normalize)
        pred_lengths = [len(extract(p.question, p.context).text) for p in pairs]
        notes.append(
            "rule-based reader evaluated on generated gold pairs: answers are field values located "
            "by the same prefix logic, so scores reflect a construction ceiling rather than "
            "open-domain reading quality"
        )
    gold_lengths = [len(p.answer_text) for p in pairs]
    written = write_reader_report(metrics, args.report, gold_lengths=gold_lengths, pred_lengths=pred_lengths, notes=notes)
    print(format_reader_table(metrics))
    print("wrote: " + ", ".join(str(p) for p in written))
    return 0


def cmd_serve(args) -> int:
    engine, config = _engine_from(args)
    from .service import serve

    try:
        serve(
            engine,
            port=args.port if args.port is not None else config.port,
            host=args.host,
            static_dir=args.static,
        )
    except OSError as exc:
        raise DataFormatError(f"service startup failed: {exc}")
    return 0


def _add_engine_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--corpus", required=True, help="corpus directory written by `ingest`")
    sub.add_argument("--config", help="JSON config file (flags take precedence)")
    sub.add_argument("--embedder", choices=["hashing", "file"], help="embedding provider")
    sub.add_argument("--vectors", help="TVEC vector file (for --embedder file)")
    sub.add_argument("--dim", type=int, help="hashing embedder dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toposearch", description="Hybrid geospatial-semantic toponym search and QA")
    parser.add_argument("--version", action="version", version=f"toposearch {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)

    sub = commands.add_parser("ingest", help="validate a record file into a corpus directory")
    sub.add_argument("--input", required=True)
    sub.add_argument("--out", required=True)
    sub.set_defaults(func=cmd_ingest)

    sub = commands.add_parser("index", help="precompute document vectors for a corpus")
    _add_engine_flags(sub)
    sub.set_defaults(func=cmd_index)

    sub = commands.add_parser("search", help="rank documents for a query")
    _add_engine_flags(sub)
    sub.add_argument("--query", required=True)
    sub.add_argument("--lat", type=float)
    sub.add_argument("--lon", type=float)
    sub.add_argument("--radius-m", type=float, dest="radius_m")
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--k", type=int)
    sub.add_argument("--method", choices=[m.value for m in Method], default=Method.HYBRID.value)
    sub.add_argument("--format", choices=["text", "structured"], default="text")
    sub.set_defaults(func=cmd_search)

    sub = commands.add_parser("answer", help="retrieve the best document and extract an answer")
    _add_engine_flags(sub)
    sub.add_argument("--question", required=True)
    sub.add_argument("--lat", type=float)
    sub.add_argument("--lon", type=float)
    sub.add_argument("--radius-m", type=float, dest="radius_m")
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--format", choices=["text", "structured"], default="text")
    sub.set_defaults(func=cmd_answer)

    sub = commands.add_parser("gen-qa", help="generate a QA corpus with exact answer offsets")
    sub.add_argument("--input", required=True, help="record file (line-delimited)")
    sub.add_argument("--out-train", required=True, dest="out_train")
    sub.add_argument("--out-val", required=True, dest="out_val")
    sub.add_argument("--seed", type=int, default=42)
    sub.add_argument("--max-per-record", type=int, default=MAX_PAIRS_PER_RECORD, dest="max_per_record")
    sub.add_argument("--max-context", type=int, default=MAX_CONTEXT_CHARS, dest="max_context")
    sub.add_argument("--format", choices=["squad", "flat"], default="squad")
    sub.set_defaults(func=cmd_gen_qa)

    sub = commands.add_parser("eval-retrieval", help="compare ranking methods on generated queries")
    _add_engine_flags(sub)
    sub.add_argument("--n", type=int, default=500)
    sub.add_argument("--seed", type=int, default=42)
    sub.add_argument("--skip", type=int, default=0, help="offset into the seeded record shuffle")
    sub.add_argument("--methods", default="all")
    sub.add_argument("--bootstrap", type=int, default=1000)
    sub.add_argument("--alpha", type=float)
    sub.add_argument("--radius-m", type=float, dest="radius_m")
    sub.add_argument("--jitter-m", type=float, default=0.0, dest="jitter_m")
    sub.add_argument("--trace", action="store_true", help="write a per-query trace file")
    sub.add_argument("--report", required=True)
    sub.set_defaults(func=cmd_eval_retrieval)

    sub = commands.add_parser("grid-search", help="tune the fusion weight by mean Recall@5")
    _add_engine_flags(sub)
    sub.add_argument("--alphas", default=",".join(str(a) for a in ALPHA_GRID))
    sub.add_argument("--n-val", type=int, default=200, dest="n_val")
    sub.add_argument("--radius-m", type=float, default=DEFAULT_RADIUS_M, dest="radius_m")
    sub.add_argument("--seed", type=int, default=42)
    sub.add_argument("--skip", type=int, default=0, help="offset into the seeded record shuffle")
    sub.set_defaults(func=cmd_grid_search)

    sub = commands.add_parser("eval-reader", help="score a reader (built-in or predictions file)")
    sub.add_argument("--qa", required=True, help="QA pair file (flat or SQuAD layout)")
    sub.add_argument("--normalize", action="store_true")
    sub.add_argument("--predictions", help="JSON object mapping pair id -> predicted answer")
    sub.add_argument("--report", required=True)
    sub.set_defaults(func=cmd_eval_reader)

    sub = commands.add_parser("serve", help="run the HTTP API")
    _add_engine_flags(sub)
    sub.add_argument("--port", type=int)
    sub.add_argument("--host", default="127.0.0.1")
    sub.add_argument("--static", help="directory of static files to serve at / (e.g. the explorer)")
    sub.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args) or 0
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
