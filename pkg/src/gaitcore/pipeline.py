"""End-to-end analysis pipeline and its configuration file format.

One pass per frame: validate -> condition -> gait FSM (with baseline
correction) -> motion fusion with stance-gated zero-velocity updates ->
optional feedback evaluation. The zero-velocity window runs from each
detected foot strike to the following heel off.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from .conditioning import ConditioningConfig, ForceFrame, SignalConditioner
from .events import (
    GaitEvent,
    GaitEventFsm,
    GaitPhase,
    ThresholdConfig,
)
from .feedback import (
    ActuatorTarget,
    FeedbackConfig,
    FeedbackEvaluator,
    OverloadAlert,
    VibrationCommand,
    plan_pattern,
)
from .fusion import FusionConfig, MotionFusion, TrajectorySample
from .params import (
    DEFAULT_CONTACT_AREA_CM2,
    GaitReport,
    StabilityConfig,
    build_report,
)
from .types import (
    CalibrationProfile,
    FrameRejection,
    GaitCoreError,
    RegionMap,
    SensorFrame,
    validate_frame,
)

# Zero-velocity hold is active between foot strike and heel off.
ZVU_PHASES = (GaitPhase.EARLY_STANCE, GaitPhase.MID_STANCE)


class FrameValidationError(GaitCoreError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    """Everything the analysis pipeline needs, loadable from one JSON file.

    The default body weight matches the default simulator profile so that
    `simulate` output can be analyzed without an explicit config.
    """

    calibration: CalibrationProfile = field(
        default_factory=lambda: CalibrationProfile(body_weight=45.0)
    )
    conditioning: ConditioningConfig = field(default_factory=ConditioningConfig)
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)
    fusion: FusionConfig = field(default_factory=FusionConfig)
    feedback: FeedbackConfig = field(default_factory=FeedbackConfig)
    stability: StabilityConfig = field(default_factory=StabilityConfig)
    baseline_correction: bool = True
    baseline_rate: float = 0.05
    active_sensor_area_cm2: float = DEFAULT_CONTACT_AREA_CM2
    rotation_feedback: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> "EngineConfig":
        kwargs = {}
        calibration = dict(data.get("calibration", {}))
        calibration.setdefault("body_weight", 45.0)
        if "accel_bias" in calibration:
            calibration["accel_bias"] = tuple(calibration["accel_bias"])
        if "gyro_bias" in calibration:
            calibration["gyro_bias"] = tuple(calibration["gyro_bias"])
        kwargs["calibration"] = CalibrationProfile(**calibration)
        kwargs["conditioning"] = ConditioningConfig(**data.get("conditioning", {}))
        kwargs["thresholds"] = ThresholdConfig(**data.get("thresholds", {}))
        kwargs["fusion"] = FusionConfig(**data.get("fusion", {}))
        feedback = dict(data.get("feedback", {}))
        if "mode" in feedback:
            from .feedback import FeedbackMode

            feedback["mode"] = FeedbackMode(feedback["mode"])
        feedback.setdefault("expected_load", calibration["body_weight"])
        kwargs["feedback"] = FeedbackConfig(**feedback)
        kwargs["stability"] = StabilityConfig(**data.get("stability", {}))
        for key in ("baseline_correction", "baseline_rate",
                    "active_sensor_area_cm2", "rotation_feedback"):
            if key in data:
                kwargs[key] = data[key]
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path: str | Path) -> "EngineConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        cal = self.calibration
        return {
            "calibration": {
                "body_weight": cal.body_weight,
                "supply_voltage": cal.supply_voltage,
                "reference_resistor": cal.reference_resistor,
                "adc_full_scale": cal.adc_full_scale,
                "fsr_force_max": cal.fsr_force_max,
                "accel_bias": list(cal.accel_bias),
                "gyro_bias": list(cal.gyro_bias),
                "accel_range_g": cal.accel_range_g,
                "gyro_range_dps": cal.gyro_range_dps,
            },
            "conditioning": self.conditioning.to_dict(),
            "thresholds": {
                "strike_threshold": self.thresholds.strike_threshold,
                "flat_threshold": self.thresholds.flat_threshold,
                "heel_off_heel_fraction": self.thresholds.heel_off_heel_fraction,
                "off_threshold": self.thresholds.off_threshold,
                "min_phase_ms": self.thresholds.min_phase_ms,
            },
            "fusion": {
                "kp": self.fusion.kp,
                "ki": self.fusion.ki,
                "gravity": self.fusion.gravity,
                "accel_gate": self.fusion.accel_gate,
            },
            "feedback": {
                "overload_factor": self.feedback.overload_factor,
                "expected_load": self.feedback.expected_load,
                "mode": self.feedback.mode.value,
                "pulse_on_ms": self.feedback.pulse_on_ms,
                "pulse_off_ms": self.feedback.pulse_off_ms,
                "base_intensity": self.feedback.base_intensity,
                "rotation_threshold_deg": self.feedback.rotation_threshold_deg,
                "rotation_gain": self.feedback.rotation_gain,
                "alert_cooldown_ms": self.feedback.alert_cooldown_ms,
                "alert_duration_ms": self.feedback.alert_duration_ms,
            },
            "stability": {
                "weight_variability": self.stability.weight_variability,
                "weight_ap_ratio": self.stability.weight_ap_ratio,
            },
            "baseline_correction": self.baseline_correction,
            "baseline_rate": self.baseline_rate,
            "active_sensor_area_cm2": self.active_sensor_area_cm2,
            "rotation_feedback": self.rotation_feedback,
        }


@dataclass
class PipelineResult:
    force_frames: list[ForceFrame]
    events: list[GaitEvent]
    trajectory: list[TrajectorySample]
    alerts: list[OverloadAlert]
    commands: list[VibrationCommand]
    rejected_frames: int


class GaitPipeline:
    """Streaming analysis context; one instance per trial stream."""

    def __init__(self, config: Optional[EngineConfig] = None,
                 region_map: Optional[RegionMap] = None):
        self.config = config or EngineConfig()
        self.region_map = region_map or RegionMap()
        cfg = self.config
        self.conditioner = SignalConditioner(cfg.calibration, cfg.conditioning, self.region_map)
        self.fsm = GaitEventFsm(
            cfg.thresholds,
            cfg.calibration.body_weight,
            self.region_map,
            baseline_correction=cfg.baseline_correction,
            baseline_rate=cfg.baseline_rate,
        )
        self.fusion = MotionFusion(cfg.fusion)
        self.feedback = FeedbackEvaluator(cfg.feedback)
        self._reference_yaw: Optional[float] = None
        self._prev_timestamp: Optional[int] = None

    def step(self, frame: SensorFrame):
        """Process one raw frame; returns (corrected ForceFrame,
        TrajectorySample, optional GaitEvent, list of VibrationCommands)."""
        force_frame, imu_frame = self.conditioner.process(frame)
        corrected, event = self.fsm.step(force_frame)
        stance = self.fsm.phase in ZVU_PHASES
        sample = self.fusion.step(imu_frame, stance)

        commands: list[VibrationCommand] = []
        alert = self.feedback.evaluate_overload(corrected, self.fsm.phase)
        if alert is not None:
            commands.extend(self._commands_for(alert))
        if self.config.rotation_feedback:
            if self._reference_yaw is None:
                self._reference_yaw = sample.yaw
            deviation = math.degrees(sample.yaw - self._reference_yaw)
            rot_alert = self.feedback.evaluate_rotation(deviation, frame.timestamp_ms)
            if rot_alert is not None:
                commands.extend(self._commands_for(rot_alert))
        return corrected, sample, event, commands, alert

    def _commands_for(self, alert: OverloadAlert) -> list[VibrationCommand]:
        # Both crutch actuators fire with identical commands.
        return [
            plan_pattern(alert, self.config.feedback, ActuatorTarget.CRUTCH_ACTUATOR_1),
            plan_pattern(alert, self.config.feedback, ActuatorTarget.CRUTCH_ACTUATOR_2),
        ]

    def run(self, frames: Sequence[SensorFrame], strict: bool = True) -> PipelineResult:
        """Process a whole trial. Invalid frames raise when strict, otherwise
        they are dropped and counted."""
        result = PipelineResult([], [], [], [], [], 0)
        for frame in frames:
            rejection = validate_frame(
                frame, self._prev_timestamp, self.config.calibration.adc_full_scale
            )
            if rejection is not None:
                if strict:
                    raise FrameValidationError(
                        f"frame at t={frame.timestamp_ms} ms rejected: {rejection.value}"
                    )
                result.rejected_frames += 1
                continue
            self._prev_timestamp = frame.timestamp_ms
            corrected, sample, event, commands, alert = self.step(frame)
            result.force_frames.append(corrected)
            result.trajectory.append(sample)
            if event is not None:
                result.events.append(event)
            if alert is not None:
                result.alerts.append(alert)
            result.commands.extend(commands)
        return result


def analyze_frames(
    frames: Sequence[SensorFrame],
    config: Optional[EngineConfig] = None,
) -> tuple[PipelineResult, GaitReport]:
    """Full pipeline plus report assembly for a complete trial."""
    config = config or EngineConfig()
    pipeline = GaitPipeline(config)
    result = pipeline.run(frames)
    report = build_report(
        result.force_frames,
        result.events,
        result.trajectory,
        stability_cfg=config.stability,
        active_sensor_area_cm2=config.active_sensor_area_cm2,
        metadata={
            "conditioning": config.conditioning.to_dict(),
            "thresholds": {
                "strike_threshold": config.thresholds.strike_threshold,
                "flat_threshold": config.thresholds.flat_threshold,
                "heel_off_heel_fraction": config.thresholds.heel_off_heel_fraction,
                "off_threshold": config.thresholds.off_threshold,
                "min_phase_ms": config.thresholds.min_phase_ms,
            },
            "baseline_correction": config.baseline_correction,
        },
    )
    return result, report
