"""Signal conditioning: ADC-to-force conversion, smoothing, and bias removal.

Stage order per frame: raw count -> divider voltage -> sensor resistance ->
relative force, then a causal moving average and one scalar Kalman filter per
pressure channel; inertial axes get bias removal, range clamping, and their
own scalar Kalman filters. A conditioner instance is a per-stream context and
must be driven by one caller at a time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .types import (
    FSR_CHANNEL_COUNT,
    GRAVITY_M_S2,
    CalibrationProfile,
    GaitCoreError,
    Region,
    RegionMap,
    SensorFrame,
)

# Resistance sentinel for an unloaded sensor (divider output at 0 V).
OPEN_CIRCUIT = math.inf


class AdcOutOfRangeError(GaitCoreError):
    pass


class ShortCircuitError(GaitCoreError):
    pass


class ZeroWindowError(GaitCoreError):
    pass


class InsufficientSamplesError(GaitCoreError):
    pass


class MotionDetectedError(GaitCoreError):
    pass


@dataclass(frozen=True)
class ForceFrame:
    """Calibrated per-channel forces plus region and whole-sole sums (N)."""

    timestamp_ms: int
    force: tuple[float, ...]
    region_force: dict[Region, float]
    total_force: float


@dataclass(frozen=True)
class ImuFrame:
    """Bias-corrected, range-clamped inertial sample (m/s^2, rad/s)."""

    timestamp_ms: int
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]


@dataclass(frozen=True)
class ConditioningConfig:
    """Filter configuration; every value here must be reported alongside any
    accuracy result, since it shapes the conditioned signal."""

    fsr_process_noise: float = 0.05       # Q, N^2
    fsr_measurement_noise: float = 2.0    # R, N^2
    # IMU axes feed dead-reckoning integrators downstream, so their filter is
    # kept nearly transparent (steady-state gain ~0.92); heavy smoothing here
    # delays the attitude estimate and biases spatial parameters.
    imu_process_noise: float = 1.0
    imu_measurement_noise: float = 0.1
    moving_average_window: int = 5        # samples (50 ms at 100 Hz)
    r_min_ohm: float = 250.0              # on-load resistance at full force
    gravity_axis: str = "z"               # one of x, y, z, -x, -y, -z
    stationary_gyro_sd_max: float = 0.05  # rad/s, motion guard for bias estimation

    def __post_init__(self) -> None:
        if self.moving_average_window < 1:
            raise ZeroWindowError("moving_average_window must be >= 1")
        for name in ("fsr_process_noise", "fsr_measurement_noise",
                     "imu_process_noise", "imu_measurement_noise"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.r_min_ohm <= 0:
            raise ValueError("r_min_ohm must be > 0")
        if self.gravity_axis not in ("x", "y", "z", "-x", "-y", "-z"):
            raise ValueError("gravity_axis must be one of x, y, z, -x, -y, -z")

    def gravity_vector(self, gravity: float = GRAVITY_M_S2) -> tuple[float, float, float]:
        sign = -1.0 if self.gravity_axis.startswith("-") else 1.0
        axis = "xyz".index(self.gravity_axis[-1])
        vec = [0.0, 0.0, 0.0]
        vec[axis] = sign * gravity
        return tuple(vec)

    @classmethod
    def from_dict(cls, data: dict) -> "ConditioningConfig":
        return cls(**data)

    @classmethod
    def from_file(cls, path: str | Path) -> "ConditioningConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "fsr_process_noise": self.fsr_process_noise,
            "fsr_measurement_noise": self.fsr_measurement_noise,
            "imu_process_noise": self.imu_process_noise,
            "imu_measurement_noise": self.imu_measurement_noise,
            "moving_average_window": self.moving_average_window,
            "r_min_ohm": self.r_min_ohm,
            "gravity_axis": self.gravity_axis,
            "stationary_gyro_sd_max": self.stationary_gyro_sd_max,
        }


def adc_to_voltage(raw: int, cal: CalibrationProfile) -> float:
    """Linear 12-bit ADC count to divider output voltage."""
    if not 0 <= raw <= cal.adc_full_scale:
        raise AdcOutOfRangeError(f"count {raw} outside 0..{cal.adc_full_scale}")
    return raw / cal.adc_full_scale * cal.supply_voltage


def resistance_from_voltage(v_out: float, cal: CalibrationProfile) -> float:
    """Invert the voltage divider: R_fsr = R_m * (V+ - V_out) / V_out.

    V_out at or below 0 V means no load (open circuit, infinite resistance);
    V_out at or above the supply rail means a shorted sensor and is an error.
    """
    if v_out <= 0.0:
        return OPEN_CIRCUIT
    if v_out >= cal.supply_voltage:
        raise ShortCircuitError(f"divider output {v_out} V at or above supply rail")
    return cal.reference_resistor * (cal.supply_voltage - v_out) / v_out


def force_from_resistance(
    r_fsr: float, cal: CalibrationProfile, r_min_ohm: float = 250.0
) -> float:
    """Conductance-proportional force model, clamped to the sensor range.

    F = k / R with k chosen so the force ceiling is reached at the configured
    minimum on-load resistance. No per-sensor mechanical calibration is
    applied; outputs are relative force estimates.
    """
    if r_fsr == OPEN_CIRCUIT:
        return 0.0
    if r_fsr <= 0:
        raise ValueError("resistance must be positive or OPEN_CIRCUIT")
    force = cal.fsr_force_max * r_min_ohm / r_fsr
    return min(max(force, 0.0), cal.fsr_force_max)


class MovingAverage:
    """Causal moving average with warm-up by truncation."""

    def __init__(self, window: int):
        if window < 1:
            raise ZeroWindowError("window must be >= 1")
        self.window = window
        self._buffer: list[float] = []
        self._sum = 0.0

    def step(self, x: float) -> float:
        self._buffer.append(x)
        self._sum += x
        if len(self._buffer) > self.window:
            self._sum -= self._buffer.pop(0)
        return self._sum / len(self._buffer)


def moving_average(series: Sequence[float], window: int) -> list[float]:
    """Smooth a series causally; output[i] is the mean of the last
    min(i+1, window) inputs, so output length equals input length."""
    ma = MovingAverage(window)
    return [ma.step(x) for x in series]


class ScalarKalman:
    """Scalar Kalman filter with an identity (constant-value) process model.

    Per step: P- = P + Q; K = P- / (P- + R); x += K (z - x); P = (1 - K) P-.
    When constructed without an initial estimate, the first measurement primes
    the state (estimate = z, P = 1) and no gain is computed for that sample.
    """

    def __init__(self, process_noise: float, measurement_noise: float,
                 initial: Optional[float] = None):
        if process_noise <= 0 or measurement_noise <= 0:
            raise ValueError("process and measurement noise must be > 0")
        self.process_noise = process_noise
        self.measurement_noise = measurement_noise
        self.estimate: Optional[float] = initial
        self.covariance = 1.0 if initial is not None else 0.0
        self.gain: Optional[float] = None

    def step(self, z: float) -> float:
        if self.estimate is None:
            self.estimate = z
            self.covariance = 1.0
            return z
        p_pred = self.covariance + self.process_noise
        gain = p_pred / (p_pred + self.measurement_noise)
        self.estimate = self.estimate + gain * (z - self.estimate)
        self.covariance = (1.0 - gain) * p_pred
        self.gain = gain
        return self.estimate


def estimate_imu_bias(
    frames: Sequence[SensorFrame],
    config: Optional[ConditioningConfig] = None,
    gravity: float = GRAVITY_M_S2,
    min_frames: int = 100,
) -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Static bias estimation from a stationary capture (>= 1 s at 100 Hz).

    Gyro bias is the per-axis mean. Accel bias is the per-axis mean minus the
    expected gravity vector on the configured axis. Raises MotionDetectedError
    when per-axis gyro spread exceeds the stationarity guard.
    """
    config = config or ConditioningConfig()
    if len(frames) < min_frames:
        raise InsufficientSamplesError(
            f"need >= {min_frames} stationary frames, got {len(frames)}"
        )
    n = len(frames)
    gyro_mean = [sum(f.gyro[a] for f in frames) / n for a in range(3)]
    for axis in range(3):
        var = sum((f.gyro[axis] - gyro_mean[axis]) ** 2 for f in frames) / n
        if math.sqrt(var) > config.stationary_gyro_sd_max:
            raise MotionDetectedError(
                f"gyro axis {axis} sd {math.sqrt(var):.4f} rad/s exceeds "
                f"{config.stationary_gyro_sd_max} rad/s; device not stationary"
            )
    accel_mean = [sum(f.accel[a] for f in frames) / n for a in range(3)]
    g_vec = config.gravity_vector(gravity)
    accel_bias = tuple(accel_mean[a] - g_vec[a] for a in range(3))
    return accel_bias, tuple(gyro_mean)


class SignalConditioner:
    """Per-stream conditioning context for one insole data stream.

    Converts each raw frame into a (ForceFrame, ImuFrame) pair. Region sums
    and the total are recomputed from the filtered per-channel forces, so the
    partition invariants hold exactly. Frame count and timestamps are
    preserved (no resampling).
    """

    def __init__(
        self,
        cal: CalibrationProfile,
        config: Optional[ConditioningConfig] = None,
        region_map: Optional[RegionMap] = None,
    ):
        self.cal = cal
        self.config = config or ConditioningConfig()
        self.region_map = region_map or RegionMap()
        self._averages = [
            MovingAverage(self.config.moving_average_window)
            for _ in range(FSR_CHANNEL_COUNT)
        ]
        self._fsr_filters = [
            ScalarKalman(self.config.fsr_process_noise, self.config.fsr_measurement_noise)
            for _ in range(FSR_CHANNEL_COUNT)
        ]
        self._imu_filters = [
            ScalarKalman(self.config.imu_process_noise, self.config.imu_measurement_noise)
            for _ in range(6)
        ]
        self._accel_limit = cal.accel_range_g * GRAVITY_M_S2
        self._gyro_limit = math.radians(cal.gyro_range_dps)

    def process(self, frame: SensorFrame) -> tuple[ForceFrame, ImuFrame]:
        forces = []
        for ch in range(FSR_CHANNEL_COUNT):
            v_out = adc_to_voltage(frame.fsr_raw[ch], self.cal)
            r_fsr = resistance_from_voltage(v_out, self.cal)
            force = force_from_resistance(r_fsr, self.cal, self.config.r_min_ohm)
            force = self._averages[ch].step(force)
            force = self._fsr_filters[ch].step(force)
            forces.append(force)

        region_force = {region: 0.0 for region in Region}
        for ch, force in enumerate(forces):
            region_force[self.region_map.regions[ch]] += force
        total = sum(forces)

        accel = []
        gyro = []
        for axis in range(3):
            a = frame.accel[axis] - self.cal.accel_bias[axis]
            a = min(max(a, -self._accel_limit), self._accel_limit)
            accel.append(self._imu_filters[axis].step(a))
            w = frame.gyro[axis] - self.cal.gyro_bias[axis]
            w = min(max(w, -self._gyro_limit), self._gyro_limit)
            gyro.append(self._imu_filters[3 + axis].step(w))

        force_frame = ForceFrame(
            timestamp_ms=frame.timestamp_ms,
            force=tuple(forces),
            region_force=region_force,
            total_force=total,
        )
        imu_frame = ImuFrame(
            timestamp_ms=frame.timestamp_ms,
            accel=tuple(accel),
            gyro=tuple(gyro),
        )
        return force_frame, imu_frame

    def process_all(
        self, frames: Iterable[SensorFrame]
    ) -> tuple[list[ForceFrame], list[ImuFrame]]:
        force_frames: list[ForceFrame] = []
        imu_frames: list[ImuFrame] = []
        for frame in frames:
            ff, imu = self.process(frame)
            force_frames.append(ff)
            imu_frames.append(imu)
        return force_frames, imu_frames


def force_frame_from_channels(
    timestamp_ms: int,
    forces: Sequence[float],
    region_map: Optional[RegionMap] = None,
) -> ForceFrame:
    """Build a ForceFrame with consistent region sums from channel forces."""
    region_map = region_map or RegionMap()
    if len(forces) != FSR_CHANNEL_COUNT:
        raise ValueError(f"expected {FSR_CHANNEL_COUNT} channel forces")
    region_force = {region: 0.0 for region in Region}
    for ch, force in enumerate(forces):
        region_force[region_map.regions[ch]] += force
    return ForceFrame(
        timestamp_ms=timestamp_ms,
        force=tuple(forces),
        region_force=region_force,
        total_force=sum(forces),
    )
