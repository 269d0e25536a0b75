"""Rule-based gait event detection.

A four-phase finite state machine walks the cycle Swing -> EarlyStance ->
MidStance -> LateStance -> Swing, emitting FootStrike, FootFlat, HeelOff and
FootOff on the transitions. All force thresholds are fractions of body
weight, so detection is invariant under uniform scaling of the signal.
Per-channel baseline tracking during swing counteracts sensor hysteresis
(channels that stay triggered after the load is removed).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .conditioning import ForceFrame, force_frame_from_channels
from .types import FSR_CHANNEL_COUNT, GaitCoreError, Region, RegionMap


class EmptyTrialError(GaitCoreError):
    pass


class GaitEventKind(Enum):
    FOOT_STRIKE = "FootStrike"
    FOOT_FLAT = "FootFlat"
    HEEL_OFF = "HeelOff"
    FOOT_OFF = "FootOff"


# Cyclic order of the four instrumented events within one gait cycle.
EVENT_CYCLE = (
    GaitEventKind.FOOT_STRIKE,
    GaitEventKind.FOOT_FLAT,
    GaitEventKind.HEEL_OFF,
    GaitEventKind.FOOT_OFF,
)


class GaitPhase(Enum):
    SWING = "swing"
    EARLY_STANCE = "early_stance"
    MID_STANCE = "mid_stance"
    LATE_STANCE = "late_stance"


STANCE_PHASES = (GaitPhase.EARLY_STANCE, GaitPhase.MID_STANCE, GaitPhase.LATE_STANCE)


@dataclass(frozen=True)
class GaitEvent:
    kind: GaitEventKind
    timestamp_ms: int


@dataclass(frozen=True)
class ThresholdConfig:
    """Detection thresholds as fractions of body weight (heel-off is relative
    to the within-stance heel peak instead, which tolerates body-weight
    error). min_phase_ms debounces transitions."""

    strike_threshold: float = 0.10
    flat_threshold: float = 0.40
    heel_off_heel_fraction: float = 0.20
    off_threshold: float = 0.05
    min_phase_ms: int = 50

    def __post_init__(self) -> None:
        if not (0.0 < self.off_threshold < self.strike_threshold < self.flat_threshold <= 1.0):
            raise ValueError(
                "thresholds must satisfy 0 < off < strike < flat <= 1"
            )
        if self.min_phase_ms < 0:
            raise ValueError("min_phase_ms must be >= 0")


class GaitEventFsm:
    """Per-stream gait event detector.

    One instance per force stream, driven by one caller at a time. Frames
    must arrive in timestamp order; each frame produces at most one event.
    Baseline offsets adapt toward the residual reading during swing at
    `baseline_rate` per frame and stay frozen during stance; the corrected
    channel forces (max(0, raw - baseline)) feed every threshold test.
    """

    def __init__(
        self,
        cfg: ThresholdConfig,
        body_weight: float,
        region_map: Optional[RegionMap] = None,
        baseline_correction: bool = True,
        baseline_rate: float = 0.05,
    ):
        if body_weight <= 0:
            raise ValueError("body_weight must be > 0")
        self.cfg = cfg
        self.body_weight = body_weight
        self.region_map = region_map or RegionMap()
        self.baseline_correction = baseline_correction
        self.baseline_rate = baseline_rate
        self.phase = GaitPhase.SWING
        self.phase_entry_ms: Optional[int] = None  # None: no debounce yet
        self.baselines = [0.0] * FSR_CHANNEL_COUNT
        self._heel_peak = 0.0
        self._heel_channels = self.region_map.channels_in(Region.HEEL)
        self._forefoot_channels = (
            self.region_map.channels_in(Region.METATARSAL)
            + self.region_map.channels_in(Region.TOES)
        )

    def baseline_correct(self, channel_forces: Sequence[float], in_swing: bool) -> list[float]:
        """Subtract tracked baselines, clamped at zero. Baselines only move
        while the foot is in swing."""
        if not self.baseline_correction:
            return list(channel_forces)
        if in_swing:
            for ch, raw in enumerate(channel_forces):
                self.baselines[ch] += self.baseline_rate * (raw - self.baselines[ch])
        return [max(0.0, raw - b) for raw, b in zip(channel_forces, self.baselines)]

    def step(self, frame: ForceFrame) -> tuple[ForceFrame, Optional[GaitEvent]]:
        """Advance the FSM by one frame; returns the baseline-corrected frame
        and the emitted event, if any."""
        corrected = self.baseline_correct(frame.force, self.phase is GaitPhase.SWING)
        corrected_frame = force_frame_from_channels(
            frame.timestamp_ms, corrected, self.region_map
        )
        event = self._transition(corrected_frame)
        return corrected_frame, event

    def _transition(self, frame: ForceFrame) -> Optional[GaitEvent]:
        ts = frame.timestamp_ms
        if self.phase_entry_ms is not None and ts - self.phase_entry_ms < self.cfg.min_phase_ms:
            self._track_heel_peak(frame)
            return None

        bw = self.body_weight
        total = frame.total_force
        heel = sum(frame.force[ch] for ch in self._heel_channels)
        event: Optional[GaitEvent] = None

        if self.phase is GaitPhase.SWING:
            if total > self.cfg.strike_threshold * bw:
                event = self._enter(GaitPhase.EARLY_STANCE, GaitEventKind.FOOT_STRIKE, ts)
                self._heel_peak = heel
        elif self.phase is GaitPhase.EARLY_STANCE:
            forefoot = sum(frame.force[ch] for ch in self._forefoot_channels)
            loaded = self.cfg.off_threshold * bw
            if total >= self.cfg.flat_threshold * bw and heel > loaded and forefoot > loaded:
                event = self._enter(GaitPhase.MID_STANCE, GaitEventKind.FOOT_FLAT, ts)
        elif self.phase is GaitPhase.MID_STANCE:
            if self._heel_peak > 0 and heel < self.cfg.heel_off_heel_fraction * self._heel_peak:
                event = self._enter(GaitPhase.LATE_STANCE, GaitEventKind.HEEL_OFF, ts)
        elif self.phase is GaitPhase.LATE_STANCE:
            if total < self.cfg.off_threshold * bw:
                event = self._enter(GaitPhase.SWING, GaitEventKind.FOOT_OFF, ts)
                self._heel_peak = 0.0

        self._track_heel_peak(frame)
        return event

    def _track_heel_peak(self, frame: ForceFrame) -> None:
        if self.phase in STANCE_PHASES:
            heel = sum(frame.force[ch] for ch in self._heel_channels)
            if heel > self._heel_peak:
                self._heel_peak = heel

    def _enter(self, phase: GaitPhase, kind: GaitEventKind, ts: int) -> GaitEvent:
        self.phase = phase
        self.phase_entry_ms = ts
        return GaitEvent(kind=kind, timestamp_ms=ts)


def detect_events(
    trial: Sequence[ForceFrame],
    cfg: Optional[ThresholdConfig] = None,
    body_weight: float = 1.0,
    region_map: Optional[RegionMap] = None,
    baseline_correction: bool = True,
) -> list[GaitEvent]:
    """Run the FSM over a whole time-ordered trial and collect the events."""
    if not trial:
        raise EmptyTrialError("trial must contain at least one frame")
    fsm = GaitEventFsm(
        cfg or ThresholdConfig(),
        body_weight,
        region_map,
        baseline_correction=baseline_correction,
    )
    events: list[GaitEvent] = []
    for frame in trial:
        _, event = fsm.step(frame)
        if event is not None:
            events.append(event)
    return events


def write_events_csv(path: str | Path, events: Iterable[GaitEvent]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["timestamp_ms", "event_kind"])
        for event in events:
            writer.writerow([event.timestamp_ms, event.kind.value])
