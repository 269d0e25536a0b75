"""Spatiotemporal gait parameters, stability index, and trial reports.

Cycles run from one foot strike to the next. Stance is foot strike to foot
off, swing is foot off to the next foot strike, so stance + swing equals the
cycle duration by construction. The instrument is unilateral: cycle length is
the horizontal displacement between consecutive foot strikes of the same
foot, step length is half of it, and steps/min doubles the single-foot
cycles/min.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .conditioning import ForceFrame
from .events import EVENT_CYCLE, GaitEvent, GaitEventKind
from .fusion import TrajectorySample
from .types import GaitCoreError, Region

# Interlink 400-class sensors: 5.6 mm active diameter -> 0.2463 cm^2 each.
SENSOR_ACTIVE_AREA_CM2 = math.pi * (0.56 / 2) ** 2
DEFAULT_CONTACT_AREA_CM2 = 15 * SENSOR_ACTIVE_AREA_CM2

STEP_PER_CYCLE_FACTOR = 0.5  # unilateral instrument: step length = cycle length / 2


class NoCompleteCycleError(GaitCoreError):
    pass


class TrajectoryGapError(GaitCoreError):
    pass


class NoLoadedFramesError(GaitCoreError):
    pass


class ZeroAreaError(GaitCoreError):
    pass


@dataclass(frozen=True)
class CycleEvents:
    """The five timestamps bounding one complete gait cycle."""

    foot_strike_ms: int
    foot_flat_ms: int
    heel_off_ms: int
    foot_off_ms: int
    next_foot_strike_ms: int


@dataclass(frozen=True)
class GaitCycleRecord:
    cycle_index: int
    foot_strike_ms: int
    foot_flat_ms: int
    heel_off_ms: int
    foot_off_ms: int
    next_foot_strike_ms: int
    stance_s: float
    swing_s: float
    cycle_s: float
    step_length_m: float
    cycle_length_m: float
    speed_mps: float


@dataclass(frozen=True)
class StabilityConfig:
    """Weights of the two stability components (must sum to 1)."""

    weight_variability: float = 0.5
    weight_ap_ratio: float = 0.5

    def __post_init__(self) -> None:
        if self.weight_variability < 0 or self.weight_ap_ratio < 0:
            raise ValueError("stability weights must be >= 0")
        if abs(self.weight_variability + self.weight_ap_ratio - 1.0) > 1e-12:
            raise ValueError("stability weights must sum to 1")


@dataclass(frozen=True)
class StabilityResult:
    """index = w1 * (1 - pressure_variability_norm) + w2 * ap_balance_norm,
    always in [0, 1]; 0 is low stability, 1 is high."""

    index: float
    pressure_variability_norm: float
    ap_balance_norm: float


def segment_cycles(events: Sequence[GaitEvent]) -> list[CycleEvents]:
    """Split an ordered event stream into complete foot-strike-to-foot-strike
    cycles containing all four events; incomplete leading or trailing spans
    are dropped."""
    strikes = [i for i, e in enumerate(events) if e.kind is GaitEventKind.FOOT_STRIKE]
    cycles: list[CycleEvents] = []
    for a, b in zip(strikes, strikes[1:]):
        span = events[a : b + 1]
        kinds = [e.kind for e in span]
        if kinds[:4] == list(EVENT_CYCLE) and len(span) == 5:
            cycles.append(
                CycleEvents(
                    foot_strike_ms=span[0].timestamp_ms,
                    foot_flat_ms=span[1].timestamp_ms,
                    heel_off_ms=span[2].timestamp_ms,
                    foot_off_ms=span[3].timestamp_ms,
                    next_foot_strike_ms=span[4].timestamp_ms,
                )
            )
    if not cycles:
        raise NoCompleteCycleError("no complete gait cycle in the event stream")
    return cycles


def temporal_params(cycle: CycleEvents) -> tuple[float, float, float]:
    """Stance, swing, and cycle durations in seconds (stance + swing = cycle)."""
    stance_s = (cycle.foot_off_ms - cycle.foot_strike_ms) / 1000.0
    swing_s = (cycle.next_foot_strike_ms - cycle.foot_off_ms) / 1000.0
    return stance_s, swing_s, stance_s + swing_s


def spatial_params(
    cycle: CycleEvents, trajectory: Sequence[TrajectorySample]
) -> tuple[float, float, float]:
    """Step length, cycle length, and speed from the fused trajectory.

    Cycle length is the horizontal displacement between the positions at the
    bounding foot strikes; speed is cycle length over cycle duration.
    """
    start = _position_at(trajectory, cycle.foot_strike_ms)
    end = _position_at(trajectory, cycle.next_foot_strike_ms)
    cycle_length = math.hypot(end[0] - start[0], end[1] - start[1])
    step_length = cycle_length * STEP_PER_CYCLE_FACTOR
    _, _, cycle_s = temporal_params(cycle)
    speed = cycle_length / cycle_s if cycle_s > 0 else 0.0
    return step_length, cycle_length, speed


def _position_at(trajectory: Sequence[TrajectorySample], timestamp_ms: int):
    lo, hi = 0, len(trajectory) - 1
    if not trajectory or timestamp_ms < trajectory[0].timestamp_ms or timestamp_ms > trajectory[-1].timestamp_ms:
        raise TrajectoryGapError(f"trajectory does not cover t={timestamp_ms} ms")
    while lo < hi:
        mid = (lo + hi) // 2
        if trajectory[mid].timestamp_ms < timestamp_ms:
            lo = mid + 1
        else:
            hi = mid
    return trajectory[lo].position


def cadence(events: Sequence[GaitEvent], window_s: float) -> float:
    """Foot strikes per minute of the instrumented foot (cycles/min).

    Multiply by two for steps/min; one insole only sees every other step.
    """
    if window_s <= 0:
        raise ValueError("window_s must be > 0")
    strikes = sum(1 for e in events if e.kind is GaitEventKind.FOOT_STRIKE)
    return strikes * 60.0 / window_s


def stability_index(
    frames: Sequence[ForceFrame],
    cfg: Optional[StabilityConfig] = None,
) -> StabilityResult:
    """Stability from total-pressure variability and fore/rear balance.

    Variability is the coefficient of variation of the total force over
    loaded frames, clamped to [0, 1]. Balance is the mean of
    1 - |fore - rear| / (fore + rear) with fore = metatarsal + toe regions and
    rear = heel. Both components are scale-free, so the index is invariant
    under uniform force scaling.
    """
    cfg = cfg or StabilityConfig()
    loaded = [f for f in frames if f.total_force > 0.0]
    if not loaded:
        raise NoLoadedFramesError("stability window has no loaded frames")

    totals = [f.total_force for f in loaded]
    mean = sum(totals) / len(totals)
    var = sum((t - mean) ** 2 for t in totals) / len(totals)
    cv = math.sqrt(var) / mean if mean > 0 else 0.0
    variability_norm = min(max(cv, 0.0), 1.0)

    balance_terms = []
    for f in loaded:
        fore = f.region_force[Region.METATARSAL] + f.region_force[Region.TOES]
        rear = f.region_force[Region.HEEL]
        if fore + rear > 0:
            balance_terms.append(1.0 - abs(fore - rear) / (fore + rear))
        else:
            balance_terms.append(0.0)
    ap_balance_norm = sum(balance_terms) / len(balance_terms)

    index = (
        cfg.weight_variability * (1.0 - variability_norm)
        + cfg.weight_ap_ratio * ap_balance_norm
    )
    return StabilityResult(
        index=index,
        pressure_variability_norm=variability_norm,
        ap_balance_norm=ap_balance_norm,
    )


def mean_plantar_pressure(
    frames: Sequence[ForceFrame], active_sensor_area_cm2: float = DEFAULT_CONTACT_AREA_CM2
) -> float:
    """Mean of total force over loaded frames, divided by the effective
    sensing area (N/cm^2). Zero when nothing is loaded."""
    if active_sensor_area_cm2 <= 0:
        raise ZeroAreaError("active sensor area must be > 0")
    loaded = [f.total_force for f in frames if f.total_force > 0.0]
    if not loaded:
        return 0.0
    return (sum(loaded) / len(loaded)) / active_sensor_area_cm2


# Parameter table used for report summaries and accuracy comparison.
PARAMETER_TABLE = (
    ("Stance Duration", "s", "Temporal", "stance_s"),
    ("Swing Duration", "s", "Temporal", "swing_s"),
    ("Cycle Duration", "s", "Temporal", "cycle_s"),
    ("Step Length", "m", "Spatial", "step_length_m"),
    ("Cycle Length", "m", "Spatial", "cycle_length_m"),
)


@dataclass(frozen=True)
class GaitReport:
    cycles: tuple[GaitCycleRecord, ...]
    summary: dict[str, dict[str, float]]     # parameter name -> {mean, sd, unit...}
    cadence_cycles_per_min: float
    cadence_steps_per_min: float
    mean_plantar_pressure_n_cm2: float
    stability: StabilityResult
    frame_count: int
    first_timestamp_ms: int
    last_timestamp_ms: int
    metadata: dict[str, object] = field(default_factory=dict)


def build_report(
    force_frames: Sequence[ForceFrame],
    events: Sequence[GaitEvent],
    trajectory: Sequence[TrajectorySample],
    stability_cfg: Optional[StabilityConfig] = None,
    active_sensor_area_cm2: float = DEFAULT_CONTACT_AREA_CM2,
    metadata: Optional[dict] = None,
) -> GaitReport:
    """Compose per-cycle records and trial-level aggregates.

    Cadence uses the complete-cycle span (cycles / span) rather than the raw
    trial duration, so it is exact for uniform gait. Mean plantar pressure is
    taken over the stance windows of the detected cycles, which keeps it
    comparable across filter settings. SDs are population SDs and are zero
    for a single cycle.
    """
    if not force_frames:
        raise NoCompleteCycleError("empty trial")
    cycles = segment_cycles(events)

    records: list[GaitCycleRecord] = []
    for i, cyc in enumerate(cycles):
        stance_s, swing_s, cycle_s = temporal_params(cyc)
        step_m, cycle_m, speed = spatial_params(cyc, trajectory)
        records.append(
            GaitCycleRecord(
                cycle_index=i,
                foot_strike_ms=cyc.foot_strike_ms,
                foot_flat_ms=cyc.foot_flat_ms,
                heel_off_ms=cyc.heel_off_ms,
                foot_off_ms=cyc.foot_off_ms,
                next_foot_strike_ms=cyc.next_foot_strike_ms,
                stance_s=stance_s,
                swing_s=swing_s,
                cycle_s=cycle_s,
                step_length_m=step_m,
                cycle_length_m=cycle_m,
                speed_mps=speed,
            )
        )

    summary: dict[str, dict[str, float]] = {}
    for name, unit, kind, attr in PARAMETER_TABLE:
        values = [getattr(r, attr) for r in records]
        mean = sum(values) / len(values)
        sd = math.sqrt(sum((v - mean) ** 2 for v in values) / len(values))
        summary[name] = {"mean": mean, "sd": sd, "unit": unit, "type": kind}

    span_s = (records[-1].next_foot_strike_ms - records[0].foot_strike_ms) / 1000.0
    cadence_cpm = len(records) * 60.0 / span_s if span_s > 0 else 0.0

    stance_frames = [
        f
        for f in force_frames
        if any(r.foot_strike_ms <= f.timestamp_ms < r.foot_off_ms for r in records)
    ]
    pressure = mean_plantar_pressure(stance_frames or force_frames, active_sensor_area_cm2)
    stability = stability_index(force_frames, stability_cfg)

    meta = {
        "stability_weights": {
            "variability": (stability_cfg or StabilityConfig()).weight_variability,
            "ap_ratio": (stability_cfg or StabilityConfig()).weight_ap_ratio,
        },
        "stability_variability_definition": "cv_of_total_force_clamped_to_unit",
        "step_length_definition": "cycle_length_over_2_unilateral",
        "pressure_window": "stance_frames",
        "active_sensor_area_cm2": active_sensor_area_cm2,
    }
    if metadata:
        meta.update(metadata)

    return GaitReport(
        cycles=tuple(records),
        summary=summary,
        cadence_cycles_per_min=cadence_cpm,
        cadence_steps_per_min=2.0 * cadence_cpm,
        mean_plantar_pressure_n_cm2=pressure,
        stability=stability,
        frame_count=len(force_frames),
        first_timestamp_ms=force_frames[0].timestamp_ms,
        last_timestamp_ms=force_frames[-1].timestamp_ms,
        metadata=meta,
    )


def report_to_dict(report: GaitReport) -> dict:
    return {
        "cycles": [
            {
                "cycle_index": r.cycle_index,
                "foot_strike_ms": r.foot_strike_ms,
                "foot_flat_ms": r.foot_flat_ms,
                "heel_off_ms": r.heel_off_ms,
                "foot_off_ms": r.foot_off_ms,
                "next_foot_strike_ms": r.next_foot_strike_ms,
                "stance_s": r.stance_s,
                "swing_s": r.swing_s,
                "cycle_s": r.cycle_s,
                "step_length_m": r.step_length_m,
                "cycle_length_m": r.cycle_length_m,
                "speed_mps": r.speed_mps,
            }
            for r in report.cycles
        ],
        "summary": report.summary,
        "cadence_cycles_per_min": report.cadence_cycles_per_min,
        "cadence_steps_per_min": report.cadence_steps_per_min,
        "mean_plantar_pressure_n_cm2": report.mean_plantar_pressure_n_cm2,
        "stability": {
            "index": report.stability.index,
            "pressure_variability_norm": report.stability.pressure_variability_norm,
            "ap_balance_norm": report.stability.ap_balance_norm,
        },
        "trial": {
            "frame_count": report.frame_count,
            "first_timestamp_ms": report.first_timestamp_ms,
            "last_timestamp_ms": report.last_timestamp_ms,
        },
        "metadata": report.metadata,
    }


def write_report_json(path: str | Path, report: GaitReport) -> None:
    with open(path, "w") as fh:
        json.dump(report_to_dict(report), fh, indent=2)


def write_report_csv(path: str | Path, report: GaitReport) -> None:
    """Flat CSV mirroring the parameter table: one row per parameter."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parameter_type", "parameter", "unit", "mean", "sd"])
        for name, unit, kind, _ in PARAMETER_TABLE:
            entry = report.summary[name]
            writer.writerow([kind, name, unit, repr(entry["mean"]), repr(entry["sd"])])
        writer.writerow(
            ["Kinetic", "Mean Plantar Pressure", "N/cm2",
             repr(report.mean_plantar_pressure_n_cm2), ""]
        )
