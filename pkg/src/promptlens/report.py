"""Report rendering: delimited tables plus matplotlib figures on disk."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .t2i_eval import ExperimentReport

_CONDITION_COLORS = {
    "ambiguous": "#c44e52",
    "disambiguated": "#55a868",
    "paraphrased": "#4c72b0",
}


def write_items_csv(report: ExperimentReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            [
                "session_id", "prompt_id", "ambiguity_type", "condition",
                "prompt_text", "question", "yes_count", "n_images", "rate",
            ]
        )
        for r in report.rows:
            writer.writerow(
                [
                    r.session_id, r.prompt_id, r.ambiguity_type, r.condition,
                    r.prompt_text, r.question, r.yes_count, len(r.answers),
                    f"{r.rate:.6f}",
                ]
            )


def write_summary_csv(report: ExperimentReport, path: Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["condition", "ambiguity_type", "n_items", "mean_per_image", "mean_per_prompt"]
        )
        for condition, agg in report.per_condition.items():
            writer.writerow(
                [condition, "ALL", agg["n_items"],
                 f"{agg['mean_per_image']:.6f}", f"{agg['mean_per_prompt']:.6f}"]
            )
        for key, agg in report.per_condition_type.items():
            condition, ambiguity_type = key.split("/", 1)
            writer.writerow(
                [condition, ambiguity_type, agg["n_items"],
                 f"{agg['mean_per_image']:.6f}", f"{agg['mean_per_prompt']:.6f}"]
            )


def _figure_by_type(report: ExperimentReport, path: Path) -> None:
    conditions = list(report.per_condition)
    types = sorted({k.split("/", 1)[1] for k in report.per_condition_type})
    fig, ax = plt.subplots(figsize=(max(6, 1.4 * len(types)), 4))
    width = 0.8 / max(len(conditions), 1)
    for ci, condition in enumerate(conditions):
        xs, ys = [], []
        for ti, ambiguity_type in enumerate(types):
            agg = report.per_condition_type.get(f"{condition}/{ambiguity_type}")
            if agg is None:
                continue
            xs.append(ti + ci * width)
            ys.append(agg["mean_per_prompt"])
        ax.bar(xs, ys, width=width, label=condition,
               color=_CONDITION_COLORS.get(condition))
    ax.set_xticks([i + 0.4 - width / 2 for i in range(len(types))])
    ax.set_xticklabels(types, rotation=20, ha="right")
    ax.set_ylabel("faithful generations (mean rate)")
    ax.set_ylim(0, 1.05)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def _figure_overall(report: ExperimentReport, path: Path) -> None:
    conditions = list(report.per_condition)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.bar(
        range(len(conditions)),
        [report.per_condition[c]["mean_per_prompt"] for c in conditions],
        color=[_CONDITION_COLORS.get(c) for c in conditions],
        tick_label=conditions,
    )
    ax.set_ylabel("faithful generations (mean rate)")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_report(report: ExperimentReport, out_dir: str | Path) -> list[Path]:
    """Write items/summary CSVs, a JSON dump, and bar-chart figures."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    items = out / "items.csv"
    write_items_csv(report, items)
    outputs.append(items)
    summary = out / "summary.csv"
    write_summary_csv(report, summary)
    outputs.append(summary)
    dump = out / "report.json"
    dump.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n", "utf-8")
    outputs.append(dump)
    by_type = out / "faithfulness_by_type.png"
    _figure_by_type(report, by_type)
    outputs.append(by_type)
    overall = out / "faithfulness_overall.png"
    _figure_overall(report, overall)
    outputs.append(overall)
    return outputs
