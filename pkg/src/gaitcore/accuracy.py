"""Accuracy comparison of analyzed trials against simulator ground truth.

Accuracy per parameter and trial is 100 * (1 - |measured - reference| /
reference), computed from trial means; batches aggregate per trial first and
then report the mean and population SD across trials. Row names and units
follow the gait parameter table used in the trial reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .types import GaitCoreError

ACCURACY_DEFINITION = "100*(1-|measured-reference|/reference)"
AGGREGATION = "per-trial accuracy, then mean/sd across trials"

# (row name, unit, parameter type, truth key, report key)
ACCURACY_ROWS = (
    ("Stance Duration", "s", "Temporal", "stance_s"),
    ("Swing Duration", "s", "Temporal", "swing_s"),
    ("Cycle Duration", "s", "Temporal", "cycle_s"),
    ("Step Length", "m", "Spatial", "step_length_m"),
    ("Cycle Length", "m", "Spatial", "cycle_length_m"),
)


class TrialMismatchError(GaitCoreError):
    pass


@dataclass(frozen=True)
class AccuracyRow:
    parameter: str
    unit: str
    parameter_type: str
    mean_accuracy_pct: float
    sd_accuracy_pct: float


@dataclass(frozen=True)
class AccuracySummary:
    rows: tuple[AccuracyRow, ...]
    trial_count: int

    def row(self, parameter: str) -> AccuracyRow:
        for row in self.rows:
            if row.parameter == parameter:
                return row
        raise KeyError(parameter)


def accuracy_pct(measured: float, reference: float) -> float:
    """100% at exact agreement; can go negative for gross errors."""
    if reference == 0:
        return 100.0 if measured == 0 else float("-inf")
    return 100.0 * (1.0 - abs(measured - reference) / abs(reference))


def _check_identity(truth: dict, report: dict) -> None:
    t, r = truth.get("trial", {}), report.get("trial", {})
    for key in ("frame_count", "first_timestamp_ms", "last_timestamp_ms"):
        if t.get(key) != r.get(key):
            raise TrialMismatchError(
                f"truth and report disagree on {key}: {t.get(key)} vs {r.get(key)}"
            )


def _trial_mean(cycles: Sequence[dict], key: str) -> float:
    values = [c[key] for c in cycles]
    return sum(values) / len(values)


def trial_accuracies(truth: dict, report: dict) -> dict[str, float]:
    """Per-parameter accuracy for one (truth, report) pair of JSON dicts."""
    _check_identity(truth, report)
    if not truth.get("cycles") or not report.get("cycles"):
        raise TrialMismatchError("both truth and report must contain cycles")
    out = {}
    for name, _unit, _kind, key in ACCURACY_ROWS:
        reference = _trial_mean(truth["cycles"], key)
        measured = _trial_mean(report["cycles"], key)
        out[name] = accuracy_pct(measured, reference)
    return out


def summarize(pairs: Sequence[tuple[dict, dict]]) -> AccuracySummary:
    """Aggregate accuracy over one or more (truth, report) trials."""
    if not pairs:
        raise TrialMismatchError("need at least one (truth, report) pair")
    per_trial = [trial_accuracies(truth, report) for truth, report in pairs]
    rows = []
    for name, unit, kind, _key in ACCURACY_ROWS:
        values = [trial[name] for trial in per_trial]
        mean = sum(values) / len(values)
        sd = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        rows.append(
            AccuracyRow(
                parameter=name,
                unit=unit,
                parameter_type=kind,
                mean_accuracy_pct=mean,
                sd_accuracy_pct=sd,
            )
        )
    return AccuracySummary(rows=tuple(rows), trial_count=len(pairs))


def summary_to_dict(summary: AccuracySummary) -> dict:
    return {
        "accuracy_definition": ACCURACY_DEFINITION,
        "aggregation": AGGREGATION,
        "trial_count": summary.trial_count,
        "rows": [
            {
                "parameter_type": r.parameter_type,
                "parameter": r.parameter,
                "unit": r.unit,
                "mean_accuracy_pct": r.mean_accuracy_pct,
                "sd_accuracy_pct": r.sd_accuracy_pct,
            }
            for r in summary.rows
        ],
    }


def write_summary_json(path: str | Path, summary: AccuracySummary) -> None:
    with open(path, "w") as fh:
        json.dump(summary_to_dict(summary), fh, indent=2)


def format_summary_table(summary: AccuracySummary) -> str:
    lines = [
        f"{'Parameter':<18} {'Type':<9} {'Unit':<5} {'Mean Acc %':>10} {'SD %':>8}",
        "-" * 54,
    ]
    for r in summary.rows:
        lines.append(
            f"{r.parameter:<18} {r.parameter_type:<9} {r.unit:<5} "
            f"{r.mean_accuracy_pct:>10.1f} {r.sd_accuracy_pct:>8.2f}"
        )
    return "\n".join(lines)
