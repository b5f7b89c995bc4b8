"""Reporting: tab-delimited rate tables plus matplotlib figures on disk."""

from __future__ import annotations

import os
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .harness import EvalRecord
from .metrics import depth_slope, hallucination_rate


def rate_table_tsv(records: list[EvalRecord], group_by: Sequence[str]) -> str:
    """Tab-delimited table with one row per group, sorted by key."""
    table = hallucination_rate(records, group_by=group_by)
    header = list(group_by) + [
        "rate",
        "hallucinated",
        "correct",
        "unparseable",
        "transport_failure",
    ]
    lines = ["\t".join(header)]
    for key in sorted(table, key=lambda k: tuple(str(x) for x in k)):
        g = table[key]
        lines.append(
            "\t".join(
                [str(x) for x in key]
                + [
                    f"{g.rate:.4f}",
                    str(g.hallucinated),
                    str(g.correct),
                    str(g.unparseable),
                    str(g.transport_failure),
                ]
            )
        )
    return "\n".join(lines) + "\n"


def write_report(
    records: list[EvalRecord],
    out_dir: str,
    group_by: Sequence[str] = ("category", "serializer"),
) -> dict[str, str]:
    """Write rates.tsv plus figures; returns a name -> path map."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {}

    tsv_path = os.path.join(out_dir, "rates.tsv")
    with open(tsv_path, "w", encoding="utf-8") as fh:
        fh.write(rate_table_tsv(records, group_by))
    paths["rates"] = tsv_path

    paths["rates_figure"] = _rate_bar_figure(records, group_by, out_dir)
    depth_path = _depth_figure(records, out_dir)
    if depth_path:
        paths["depth_figure"] = depth_path
    return paths


def _rate_bar_figure(records, group_by, out_dir: str) -> str:
    table = hallucination_rate(records, group_by=group_by)
    keys = sorted(table, key=lambda k: tuple(str(x) for x in k))
    labels = ["/".join(str(x) for x in key) for key in keys]
    values = [table[key].rate * 100.0 for key in keys]
    fig, ax = plt.subplots(figsize=(max(6, 0.6 * len(labels)), 4))
    ax.bar(range(len(labels)), values, color="#4878d0")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=8)
    ax.set_ylabel("hallucination rate (%)")
    ax.set_title("Hallucination rate by " + ", ".join(group_by))
    fig.tight_layout()
    path = os.path.join(out_dir, "rates.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _depth_figure(records, out_dir: str) -> str:
    table = hallucination_rate(records, group_by=("quintile",))
    if len(table) < 2:
        return ""
    xs = sorted(key[0] for key in table)
    ys = [table[(x,)].rate * 100.0 for x in xs]
    slope = depth_slope(records)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.plot(xs, ys, marker="o", color="#d65f5f")
    ax.set_xlabel("trajectory depth quintile")
    ax.set_ylabel("hallucination rate (%)")
    ax.set_title(f"Depth effect (slope {slope:+.2f} pp/quintile)")
    ax.set_xticks(xs)
    fig.tight_layout()
    path = os.path.join(out_dir, "depth.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
