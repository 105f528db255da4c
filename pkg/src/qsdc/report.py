"""Canonical JSON / CSV rendering of aggregate reports."""

from __future__ import annotations

import csv
import io
import json
from typing import Sequence

from . import __version__
from .harness import METRICS, AggregateReport

CSV_COLUMNS = ("metric", "mean", "ci_lo", "ci_hi", "n")


def sig6(x: float | None) -> float | None:
    if x is None:
        return None
    return float(f"{x:.6g}")


def metric_table(agg: AggregateReport) -> dict[str, dict]:
    out = {}
    for name in METRICS:
        summary = agg.metrics[name]
        lo, hi = summary.interval()
        out[name] = {
            "mean": sig6(summary.mean),
            "ci_lo": sig6(lo),
            "ci_hi": sig6(hi),
            "n": summary.n,
        }
    return out


def report_dict(agg: AggregateReport) -> dict:
    return {
        "scenario": {k: agg.scenario[k] for k in sorted(agg.scenario)},
        "seed": agg.seed,
        "trials": agg.trials,
        "metrics": metric_table(agg),
        "abort_stages": agg.abort_stages,
        "version": __version__,
    }


def dumps(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


def emit_report(agg: AggregateReport | Sequence[AggregateReport], fmt: str = "json") -> bytes:
    """Serialise one aggregate (or a sweep of them) as JSON or CSV bytes."""
    many = not isinstance(agg, AggregateReport)
    aggs = list(agg) if many else [agg]
    if fmt == "json":
        docs = [report_dict(a) for a in aggs]
        return dumps(docs if many else docs[0])
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    buf = io.StringIO()
    extra = ("n_bits", "k") if many else ()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(extra + CSV_COLUMNS)
    for a in aggs:
        prefix = (a.scenario["n"], a.scenario["k"]) if many else ()
        for name, row in metric_table(a).items():
            writer.writerow(prefix + (name,) + tuple("" if row[c] is None else row[c] for c in CSV_COLUMNS[1:]))
    return buf.getvalue().encode()


def summary_lines(agg: AggregateReport) -> list[str]:
    s = agg.scenario
    head = f"{s['protocol']} / {s['attack']}  N={s['n']} k={s['k']}  trials={agg.trials} seed={agg.seed}"
    lines = [head, f"{'metric':<24}{'mean':>10}{'95% CI':>22}{'n':>8}"]
    for name, row in metric_table(agg).items():
        if row["n"] == 0:
            continue
        ci = f"[{row['ci_lo']:.4f}, {row['ci_hi']:.4f}]"
        lines.append(f"{name:<24}{row['mean']:>10.4f}{ci:>22}{row['n']:>8}")
    stages = ", ".join(f"{k}: {v}" for k, v in agg.abort_stages.items())
    lines.append(f"abort stages: {stages}")
    return lines
