"""Haptic feedback: overload alerts and vibration command planning.

Stance overload fires when the total plantar force strictly exceeds the
configured multiple of the expected load (default 120%) while the foot is in
a stance phase. Rotation anomalies scale intensity with the yaw deviation
beyond a quiet zone. A cooldown per alert source prevents vibration chatter
across consecutive frames; thresholds are configuration with safe defaults
and are expected to be tuned per patient by a clinician.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional

from .conditioning import ForceFrame
from .events import GaitPhase, STANCE_PHASES


class FeedbackMode(Enum):
    CONTINUOUS = "continuous"
    PULSED_PATTERN = "pulsed_pattern"


class AlertSource(Enum):
    STANCE_OVERLOAD = "StanceOverload"
    ROTATION_ANOMALY = "RotationAnomaly"


class ActuatorTarget(Enum):
    ORTHOSIS_ACTUATOR = "orthosis_actuator"
    CRUTCH_ACTUATOR_1 = "crutch_actuator_1"
    CRUTCH_ACTUATOR_2 = "crutch_actuator_2"


@dataclass(frozen=True)
class FeedbackConfig:
    overload_factor: float = 1.20          # alert when load strictly exceeds this x expected
    expected_load: float = 45.0            # N; default equals the body weight in use
    mode: FeedbackMode = FeedbackMode.PULSED_PATTERN
    pulse_on_ms: int = 200
    pulse_off_ms: int = 200
    base_intensity: float = 0.8            # [0, 1]
    rotation_threshold_deg: float = 10.0   # quiet zone for yaw deviation
    rotation_gain: float = 0.02            # intensity per degree beyond the zone
    alert_cooldown_ms: int = 1000
    alert_duration_ms: int = 1000

    def __post_init__(self) -> None:
        if self.overload_factor <= 1.0:
            raise ValueError("overload_factor must be > 1")
        if self.pulse_on_ms <= 0 or self.pulse_off_ms <= 0:
            raise ValueError("pulse durations must be > 0")
        if self.alert_duration_ms <= 0:
            raise ValueError("alert_duration_ms must be > 0")
        if not 0.0 <= self.base_intensity <= 1.0:
            raise ValueError("base_intensity must be in [0, 1]")
        if self.expected_load <= 0:
            raise ValueError("expected_load must be > 0")


@dataclass(frozen=True)
class OverloadAlert:
    """observed_load is newtons for stance overload and degrees of yaw
    deviation for rotation anomalies; threshold uses the same unit."""

    timestamp_ms: int
    observed_load: float
    threshold: float
    source: AlertSource


@dataclass(frozen=True)
class VibrationCommand:
    target: ActuatorTarget
    mode: FeedbackMode
    intensity: float
    pulse_on_ms: int
    pulse_off_ms: int
    duration_ms: int
    timestamp_ms: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.intensity <= 1.0:
            raise ValueError("intensity must be in [0, 1]")
        if self.duration_ms <= 0 or self.pulse_on_ms <= 0 or self.pulse_off_ms <= 0:
            raise ValueError("durations must be > 0")


def rotation_intensity(yaw_deviation_deg: float, cfg: FeedbackConfig) -> float:
    """Intensity for a given yaw deviation: zero inside the quiet zone
    (boundary inclusive), then base + gain * excess, clamped to [0, 1].
    Monotone non-decreasing in |deviation|."""
    deviation = abs(yaw_deviation_deg)
    if deviation <= cfg.rotation_threshold_deg:
        return 0.0
    raw = cfg.base_intensity + cfg.rotation_gain * (deviation - cfg.rotation_threshold_deg)
    return min(max(raw, 0.0), 1.0)


class FeedbackEvaluator:
    """Per-stream evaluator carrying the per-source cooldown state."""

    def __init__(self, cfg: Optional[FeedbackConfig] = None):
        self.cfg = cfg or FeedbackConfig()
        self._last_alert_ms: dict[AlertSource, int] = {}

    def _cooldown_ok(self, source: AlertSource, ts: int) -> bool:
        last = self._last_alert_ms.get(source)
        return last is None or ts - last >= self.cfg.alert_cooldown_ms

    def evaluate_overload(self, frame: ForceFrame, phase: GaitPhase) -> Optional[OverloadAlert]:
        """Stance-gated overload check with strict inequality at the boundary."""
        if phase not in STANCE_PHASES:
            return None
        threshold = self.cfg.overload_factor * self.cfg.expected_load
        if frame.total_force > threshold and self._cooldown_ok(
            AlertSource.STANCE_OVERLOAD, frame.timestamp_ms
        ):
            self._last_alert_ms[AlertSource.STANCE_OVERLOAD] = frame.timestamp_ms
            return OverloadAlert(
                timestamp_ms=frame.timestamp_ms,
                observed_load=frame.total_force,
                threshold=threshold,
                source=AlertSource.STANCE_OVERLOAD,
            )
        return None

    def evaluate_rotation(self, yaw_deviation_deg: float, timestamp_ms: int) -> Optional[OverloadAlert]:
        """Rotation anomaly when the deviation leaves the quiet zone."""
        if rotation_intensity(yaw_deviation_deg, self.cfg) <= 0.0:
            return None
        if not self._cooldown_ok(AlertSource.ROTATION_ANOMALY, timestamp_ms):
            return None
        self._last_alert_ms[AlertSource.ROTATION_ANOMALY] = timestamp_ms
        return OverloadAlert(
            timestamp_ms=timestamp_ms,
            observed_load=abs(yaw_deviation_deg),
            threshold=self.cfg.rotation_threshold_deg,
            source=AlertSource.ROTATION_ANOMALY,
        )


def plan_pattern(
    alert: OverloadAlert,
    cfg: FeedbackConfig,
    target: ActuatorTarget = ActuatorTarget.CRUTCH_ACTUATOR_1,
) -> VibrationCommand:
    """Turn an alert into one actuator command.

    Continuous mode emits a single uninterrupted burst (pulse fields carry the
    full duration); pulsed mode carries the configured on/off timing. Rotation
    anomalies use the rotation-scaled intensity, overloads the base intensity.
    """
    if alert.source is AlertSource.ROTATION_ANOMALY:
        intensity = rotation_intensity(alert.observed_load, cfg)
    else:
        intensity = cfg.base_intensity
    if cfg.mode is FeedbackMode.CONTINUOUS:
        on_ms = off_ms = cfg.alert_duration_ms
    else:
        on_ms, off_ms = cfg.pulse_on_ms, cfg.pulse_off_ms
    return VibrationCommand(
        target=target,
        mode=cfg.mode,
        intensity=intensity,
        pulse_on_ms=on_ms,
        pulse_off_ms=off_ms,
        duration_ms=cfg.alert_duration_ms,
        timestamp_ms=alert.timestamp_ms,
    )


def render_timeline(cmd: VibrationCommand) -> list[tuple[str, int, int]]:
    """Expand a command into ("on"/"off", start_ms, length_ms) segments.

    Segments alternate starting with "on" and are truncated at the command
    duration, so total on-time never exceeds duration_ms.
    """
    segments: list[tuple[str, int, int]] = []
    if cmd.mode is FeedbackMode.CONTINUOUS:
        return [("on", 0, cmd.duration_ms)]
    t = 0
    while t < cmd.duration_ms:
        on_len = min(cmd.pulse_on_ms, cmd.duration_ms - t)
        segments.append(("on", t, on_len))
        t += on_len
        if t >= cmd.duration_ms:
            break
        off_len = min(cmd.pulse_off_ms, cmd.duration_ms - t)
        segments.append(("off", t, off_len))
        t += off_len
    return segments


def write_commands_csv(path: str | Path, commands: Iterable[VibrationCommand]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["timestamp_ms", "target", "mode", "intensity",
             "pulse_on_ms", "pulse_off_ms", "duration_ms"]
        )
        for cmd in commands:
            writer.writerow(
                [cmd.timestamp_ms, cmd.target.value, cmd.mode.value,
                 repr(cmd.intensity), cmd.pulse_on_ms, cmd.pulse_off_ms, cmd.duration_ms]
            )
