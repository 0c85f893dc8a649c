"""Report rendering: plain-text tables, TSV, and matplotlib figures.

Every report path writes the structured JSON document plus a delimited
(TSV) table and PNG figures next to it, so results can be read by humans,
spreadsheets, and plotting pipelines alike.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .evaluation import RetrievalReport
from .reader import QaMetrics

_METRIC_ORDER = ("recall@1", "recall@3", "recall@5", "mrr")


def _fmt_ci(ci) -> str:
    return f"{ci.point_estimate:.3f} [{ci.lower_95:.3f}, {ci.upper_95:.3f}]"


def format_retrieval_table(report: RetrievalReport) -> str:
    """Method-comparison table (one row per method, CIs bracketed)."""
    metrics = [m for m in _METRIC_ORDER if any(m in v for v in report.methods.values())]
    header = ["Method"] + [m.replace("recall@", "Recall@").replace("mrr", "MRR") for m in metrics]
    rows = [[name] + [_fmt_ci(cis[m]) for m in metrics] for name, cis in report.methods.items()]
    widths = [max(len(row[i]) for row in [header] + rows) for i in range(len(header))]
    lines = [
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(header)),
        "  ".join("-" * w for w in widths),
    ]
    lines += ["  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in rows]
    if "hybrid" in report.per_type_recall1:
        lines.append("")
        lines.append("Hybrid Recall@1 by toponym type")
        for type_name, value in sorted(report.per_type_recall1["hybrid"].items()):
            count = report.type_counts.get(type_name, 0)
            lines.append(f"  {type_name.ljust(14)} n={count:<5d} Recall@1 = {value:.3f}")
    return "\n".join(lines) + "\n"


def retrieval_report_to_dict(report: RetrievalReport) -> dict:
    return {
        "params": report.params,
        "methods": {
            name: {metric: dataclasses.asdict(ci) for metric, ci in cis.items()}
            for name, cis in report.methods.items()
        },
        "per_type_recall1": report.per_type_recall1,
        "type_counts": report.type_counts,
        "diagnostics": report.diagnostics,
    }


def _write_retrieval_tsv(report: RetrievalReport, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as out:
        out.write("method\tmetric\tpoint_estimate\tlower_95\tupper_95\n")
        for name, cis in report.methods.items():
            for metric in _METRIC_ORDER:
                if metric in cis:
                    ci = cis[metric]
                    out.write(f"{name}\t{metric}\t{ci.point_estimate:.6f}\t{ci.lower_95:.6f}\t{ci.upper_95:.6f}\n")
        for method, by_type in report.per_type_recall1.items():
            for type_name, value in sorted(by_type.items()):
                out.write(f"{method}\trecall@1[{type_name}]\t{value:.6f}\t\t\n")


def _plot_recall_comparison(report: RetrievalReport, path: Path) -> None:
    methods = list(report.methods)
    metrics = [m for m in ("recall@1", "recall@5") if all(m in report.methods[name] for name in methods)]
    if not metrics:
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    width = 0.8 / len(metrics)
    for j, metric in enumerate(metrics):
        xs = [i + j * width for i in range(len(methods))]
        values = [report.methods[name][metric].point_estimate for name in methods]
        errs = [
            (
                report.methods[name][metric].point_estimate - report.methods[name][metric].lower_95,
                report.methods[name][metric].upper_95 - report.methods[name][metric].point_estimate,
            )
            for name in methods
        ]
        yerr = [[e[0] for e in errs], [e[1] for e in errs]]
        ax.bar(xs, values, width=width, yerr=yerr, capsize=3, label=metric.replace("recall@", "Recall@"))
    ax.set_xticks([i + width * (len(metrics) - 1) / 2 for i in range(len(methods))])
    ax.set_xticklabels(methods)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("score")
    ax.set_title("Method comparison (95% bootstrap CI)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_recall_by_type(report: RetrievalReport, path: Path) -> None:
    by_type = report.per_type_recall1.get("hybrid")
    if not by_type:
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    names = sorted(by_type)
    ax.bar(range(len(names)), [by_type[n] for n in names], width=0.6, color="#3b7dd8")
    ax.set_xticks(range(len(names)))
    ax.set_xticklabels([f"{n}\n(n={report.type_counts.get(n, 0)})" for n in names])
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("Recall@1")
    ax.set_title("Hybrid Recall@1 by toponym type")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_retrieval_report(report: RetrievalReport, path: str | Path) -> list[Path]:
    """Write JSON + TSV + text table + figures; returns the written paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stem = path.with_suffix("")
    written = [path]
    with open(path, "w", encoding="utf-8") as out:
        json.dump(retrieval_report_to_dict(report), out, ensure_ascii=False, indent=2)
        out.write("\n")
    tsv = stem.with_suffix(".tsv")
    _write_retrieval_tsv(report, tsv)
    written.append(tsv)
    txt = stem.with_suffix(".txt")
    txt.write_text(format_retrieval_table(report), encoding="utf-8")
    written.append(txt)
    fig1 = Path(f"{stem}_recall.png")
    _plot_recall_comparison(report, fig1)
    written.append(fig1)
    fig2 = Path(f"{stem}_by_type.png")
    _plot_recall_by_type(report, fig2)
    if fig2.exists():
        written.append(fig2)
    if report.traces:
        trace_path = Path(f"{stem}_trace.jsonl")
        with open(trace_path, "w", encoding="utf-8") as out:
            for row in report.traces:
                out.write(json.dumps(row, ensure_ascii=False) + "\n")
        written.append(trace_path)
    return written


def format_reader_table(metrics: QaMetrics) -> str:
    mode = "normalized" if metrics.normalized else "raw"
    lines = [
        f"Reader evaluation ({mode}, n={metrics.count})",
        f"  Exact Match = {metrics.exact_match:.3f}",
        f"  F1          = {metrics.f1:.3f}",
        f"  mean latency = {metrics.mean_latency_ms:.2f} ms",
        "",
        "Per category:",
    ]
    for name in sorted(metrics.per_category):
        bucket = metrics.per_category[name]
        lines.append(f"  {name.ljust(14)} n={bucket.count:<6d} EM={bucket.exact_match:.3f}  F1={bucket.f1:.3f}")
    return "\n".join(lines) + "\n"


def reader_metrics_to_dict(metrics: QaMetrics) -> dict:
    return {
        "exact_match": metrics.exact_match,
        "f1": metrics.f1,
        "count": metrics.count,
        "normalized": metrics.normalized,
        "mean_latency_ms": metrics.mean_latency_ms,
        "per_category": {
            name: dataclasses.asdict(bucket) for name, bucket in metrics.per_category.items()
        },
    }


def _plot_reader_categories(metrics: QaMetrics, path: Path) -> None:
    names = sorted(metrics.per_category)
    if not names:
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    xs = range(len(names))
    width = 0.4
    ax.bar([x - width / 2 for x in xs], [metrics.per_category[n].exact_match for n in names], width, label="EM")
    ax.bar([x + width / 2 for x in xs], [metrics.per_category[n].f1 for n in names], width, label="F1")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(names, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_title("Reader quality by question category")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _plot_answer_lengths(gold_lengths: Sequence[int], pred_lengths: Sequence[int], path: Path) -> None:
    if not gold_lengths:
        return
    fig, ax = plt.subplots(figsize=(7, 4))
    upper = max(max(gold_lengths), max(pred_lengths or [0]), 10)
    bins = range(0, upper + 10, max(upper // 40, 1))
    ax.hist(gold_lengths, bins=bins, alpha=0.6, label="gold")
    if pred_lengths:
        ax.hist(pred_lengths, bins=bins, alpha=0.6, label="predicted")
    ax.set_xlabel("answer length (characters)")
    ax.set_ylabel("answers")
    ax.set_title("Answer length distribution")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_reader_report(
    metrics: QaMetrics,
    path: str | Path,
    gold_lengths: Sequence[int] = (),
    pred_lengths: Sequence[int] = (),
    notes: Sequence[str] = (),
) -> list[Path]:
    """Write JSON + TSV + text table + figures; returns the written paths."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    stem = path.with_suffix("")
    document = reader_metrics_to_dict(metrics)
    if notes:
        document["notes"] = list(notes)
    written = [path]
    with open(path, "w", encoding="utf-8") as out:
        json.dump(document, out, ensure_ascii=False, indent=2)
        out.write("\n")
    tsv = stem.with_suffix(".tsv")
    with open(tsv, "w", encoding="utf-8") as out:
        out.write("category\tcount\texact_match\tf1\n")
        out.write(f"overall\t{metrics.count}\t{metrics.exact_match:.6f}\t{metrics.f1:.6f}\n")
        for name in sorted(metrics.per_category):
            bucket = metrics.per_category[name]
            out.write(f"{name}\t{bucket.count}\t{bucket.exact_match:.6f}\t{bucket.f1:.6f}\n")
    written.append(tsv)
    txt = stem.with_suffix(".txt")
    txt.write_text(format_reader_table(metrics), encoding="utf-8")
    written.append(txt)
    fig1 = Path(f"{stem}_categories.png")
    _plot_reader_categories(metrics, fig1)
    if fig1.exists():
        written.append(fig1)
    if gold_lengths:
        fig2 = Path(f"{stem}_answer_lengths.png")
        _plot_answer_lengths(gold_lengths, pred_lengths, fig2)
        written.append(fig2)
    return written
