"""Cross-algorithm comparison tables over matching evaluation sets."""

from __future__ import annotations

import json
import os
import statistics
from dataclasses import dataclass

from .running import RunArtifacts

# (row label, metrics.json key, whether larger is better)
TABLE_ROWS = (
    ("mTTA", "mtta_seconds", True),
    ("AUC", "auc", True),
    ("AP", "ap", True),
    ("recall", "recall_at_a0", True),
    ("fixationMSE", "fixation_mse", False),
    ("safe2s_fraction", "safe_detect_fraction_2s", True),
)


@dataclass(frozen=True)
class RunSummary:
    """The slice of a run that comparison needs."""

    algo: str
    eval_fingerprint: str
    metrics_by_seed: dict[str, dict]


@dataclass(frozen=True)
class ComparisonCell:
    median: float
    min: float
    max: float


@dataclass(frozen=True)
class ComparisonTable:
    """Rows = metrics, columns = algorithms (sorted by name)."""

    algos: tuple[str, ...]
    rows: tuple[str, ...]
    cells: dict[tuple[str, str], ComparisonCell]  # (row, algo) -> cell
    best: dict[str, tuple[str, ...]]  # row -> algos tied for best


def summarize(artifacts: RunArtifacts) -> RunSummary:
    from ..metrics import report_as_dict

    return RunSummary(
        artifacts.algo,
        artifacts.eval_fingerprint,
        {str(r.seed): report_as_dict(r.report) for r in artifacts.results},
    )


def load_run_summary(path) -> RunSummary:
    """Read a run.json written by run_training (path may be its directory)."""
    if os.path.isdir(path):
        path = os.path.join(path, "run.json")
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    return RunSummary(
        data["algo"],
        data["eval_fingerprint"],
        {seed: entry["metrics"] for seed, entry in data["per_seed"].items()},
    )


def compare_table(runs) -> ComparisonTable:
    """Median-over-seeds comparison; best per row flagged (min for fixationMSE)."""
    summaries = [
        run if isinstance(run, RunSummary) else summarize(run) for run in runs
    ]
    if len(summaries) < 2:
        raise ValueError("comparison requires at least two algorithms")
    names = [s.algo for s in summaries]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate algorithm names in comparison: {sorted(names)}")
    fingerprints = {s.eval_fingerprint for s in summaries}
    if len(fingerprints) != 1:
        raise ValueError(
            "runs evaluate different episode sets; fingerprints: "
            + ", ".join(f"{s.algo}={s.eval_fingerprint}" for s in summaries)
        )
    summaries.sort(key=lambda s: s.algo)

    cells: dict[tuple[str, str], ComparisonCell] = {}
    best: dict[str, tuple[str, ...]] = {}
    for label, key, larger_is_better in TABLE_ROWS:
        medians = {}
        for summary in summaries:
            values = [m[key] for m in summary.metrics_by_seed.values()]
            cell = ComparisonCell(statistics.median(values), min(values), max(values))
            cells[(label, summary.algo)] = cell
            medians[summary.algo] = cell.median
        target = max(medians.values()) if larger_is_better else min(medians.values())
        best[label] = tuple(
            algo for algo in sorted(medians) if medians[algo] == target
        )
    return ComparisonTable(
        tuple(s.algo for s in summaries),
        tuple(label for label, _, _ in TABLE_ROWS),
        cells,
        best,
    )


def write_comparison_csv(table: ComparisonTable, path) -> None:
    header = ["metric"]
    for algo in table.algos:
        header.extend([f"{algo}_median", f"{algo}_min", f"{algo}_max"])
    header.append("best")
    lines = [",".join(header)]
    for row in table.rows:
        parts = [row]
        for algo in table.algos:
            cell = table.cells[(row, algo)]
            parts.extend([repr(cell.median), repr(cell.min), repr(cell.max)])
        parts.append(";".join(table.best[row]))
        lines.append(",".join(parts))
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
