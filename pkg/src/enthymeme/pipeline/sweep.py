"""Threshold sweeps over (tau_m, tau_c, step type) grids."""

from __future__ import annotations

import csv
import io
import logging
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..providers.base import Providers
from .dataset import BinaryInstance, DatasetItem, MissingSteps, binarize
from .decode import Decision, RunConfig, decide, prepare_all
from .metrics import EvalReport, confusion

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "step_type", "tau_m", "tau_c", "n", "errored", "skipped", "tp", "fp", "fn", "tn", "accuracy",
    "precision_0", "recall_0", "f1_0", "precision_1", "recall_1", "f1_1",
]


@dataclass(frozen=True)
class SweepRow:
    step_type: str
    tau_m: float
    tau_c: float
    report: EvalReport
    skipped: int = 0

    def as_csv(self) -> list[str]:
        r = self.report.as_dict()
        head = [self.step_type, f"{self.tau_m:g}", f"{self.tau_c:g}", str(r["n"]), str(r["errored"]),
                str(self.skipped), str(r["tp"]), str(r["fp"]), str(r["fn"]), str(r["tn"])]
        return head + [f"{r[c]:.6f}" for c in CSV_COLUMNS[10:]]


def grid(start: float, stop: float, step: float) -> list[float]:
    """Inclusive arithmetic grid, rounded so that 0.1 + 0.05 prints as 0.15."""
    if step <= 0:
        raise ValueError("grid step must be positive")
    n = int(round((stop - start) / step))
    return [round(start + i * step, 10) for i in range(n + 1) if start + i * step <= stop + 1e-9]


def binarize_all(items: Iterable[DatasetItem], step_type: str) -> tuple[list[BinaryInstance], list[str]]:
    """Instances for one step type, plus ids of items lacking that step type."""
    instances, skipped = [], []
    for item in items:
        try:
            instances.extend(binarize(item, step_type))
        except MissingSteps as exc:
            log.warning("%s", exc)
            skipped.append(item.id)
    return instances, skipped


def sweep(
    items: Sequence[DatasetItem],
    tau_m_grid: Sequence[float],
    tau_c_grid: Sequence[float],
    step_types: Sequence[str],
    config: RunConfig,
    providers: Providers,
    exclude_errored: bool = False,
) -> list[SweepRow]:
    """One row per (step type, tau_c, tau_m).

    Provider scores are fetched once per instance and re-thresholded at
    every grid point; scores do not depend on thresholds, so this matches
    independent runs exactly.
    """
    rows = []
    for step_type in step_types:
        instances, skipped = binarize_all(items, step_type)
        prepared = prepare_all(instances, config, providers)
        for tau_c in tau_c_grid:
            for tau_m in tau_m_grid:
                decisions = [decide(p, tau_m, tau_c, config.seed, config.drop_conflicts) for p in prepared]
                report = confusion(((d.instance.gold, d.predicted) for d in decisions), exclude_errored)
                rows.append(SweepRow(step_type, tau_m, tau_c, report, len(skipped)))
    return rows


def sweep_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow(row.as_csv())
    return buf.getvalue()


def write_labels(decisions: Iterable[Decision]) -> str:
    """Tab-separated label file: id, step type, gold, predicted, verdict."""
    lines = ["id\tstep_type\tgold\tpredicted\tverdict"]
    for d in decisions:
        lines.append("\t".join([
            d.instance.id,
            d.instance.step_type,
            d.instance.gold.value,
            d.predicted.value if d.predicted else "ERROR",
            d.verdict.label.value if d.verdict else "-",
        ]))
    return "\n".join(lines) + "\n"


def plot_svg(rows: Sequence[SweepRow], path: str | os.PathLike, metric: str = "accuracy",
             title: str = "Accuracy by neuro-matching threshold") -> None:
    """Line chart of ``metric`` against tau_m, one series per (step type, tau_c)."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "enthymeme"
    series: dict[tuple[str, float], list[tuple[float, float]]] = {}
    for row in rows:
        series.setdefault((row.step_type, row.tau_c), []).append((row.tau_m, getattr(row.report, metric)))
    markers = ["o", "s", "^", "D", "v"]
    tau_cs = sorted({k[1] for k in series})
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for (step_type, tau_c), points in series.items():
        points.sort()
        label = f"{step_type} (τc={tau_c:g})"
        ax.plot([p[0] for p in points], [p[1] for p in points],
                marker=markers[tau_cs.index(tau_c) % len(markers)], label=label)
    ax.set_xlabel("Neuro-matching threshold (τm)")
    ax.set_ylabel(metric.replace("_", " ").capitalize())
    ax.set_title(title)
    ax.grid(True, linewidth=0.3)
    ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.15), ncol=3, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
