"""Command-line entry point for the vector exporter."""

from __future__ import annotations

import argparse
import sys

from .export import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_MODEL,
    DEFAULT_PASSAGE_PREFIX,
    DEFAULT_QUERY_PREFIX,
    ExportJob,
    ModelUnavailableError,
    export_vectors,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tvec-export",
        description="Encode toponym retrieval contexts with a transformer and write a TVEC file",
    )
    parser.add_argument("--corpus", required=True, help="record file or corpus directory")
    parser.add_argument("--out", required=True, help="output TVEC path")
    parser.add_argument("--model", default=DEFAULT_MODEL)
    parser.add_argument("--batch-size", type=int, default=DEFAULT_BATCH_SIZE, dest="batch_size")
    parser.add_argument("--pooling", choices=["mean", "cls"], default="mean")
    parser.add_argument("--query-prefix", default=DEFAULT_QUERY_PREFIX, dest="query_prefix")
    parser.add_argument("--passage-prefix", default=DEFAULT_PASSAGE_PREFIX, dest="passage_prefix")
    parser.add_argument("--device", default="cpu")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    job = ExportJob(
        corpus=args.corpus,
        out=args.out,
        model=args.model,
        batch_size=args.batch_size,
        pooling=args.pooling,
        query_prefix=args.query_prefix,
        passage_prefix=args.passage_prefix,
        device=args.device,
    )
    try:
        manifest = export_vectors(job)
    except ModelUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"wrote {manifest['count']} vectors (dim={manifest['dim']}, model={manifest['model']}, "
        f"pooling={manifest['pooling']}) -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
