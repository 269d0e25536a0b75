"""Orientation and position estimation from the insole IMU.

A Mahony complementary filter fuses gyroscope integration (short-term) with
the accelerometer gravity direction (long-term correction). World-frame
velocity and position come from integrating gravity-compensated acceleration,
with zero-velocity updates clamping drift while the foot is load-bearing
(between foot strike and heel off, as flagged by the pressure-side FSM).

Euler angles use the ZYX (yaw-pitch-roll) convention throughout.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional

from .conditioning import ImuFrame
from .types import GRAVITY_M_S2, GaitCoreError

Quaternion = tuple[float, float, float, float]
Vec3 = tuple[float, float, float]


class ZeroDtError(GaitCoreError):
    pass


@dataclass(frozen=True)
class FusionConfig:
    """Mahony gains and integration options."""

    kp: float = 1.0                  # proportional gain on the gravity error
    ki: float = 0.05                 # integral gain (gyro bias tracking)
    gravity: float = GRAVITY_M_S2
    accel_gate: float = 0.30         # skip accel correction when | |a|-g | > gate*g

    def __post_init__(self) -> None:
        if self.kp <= 0:
            raise ValueError("kp must be > 0")
        if self.ki < 0:
            raise ValueError("ki must be >= 0")
        if not 0 < self.accel_gate < 1:
            raise ValueError("accel_gate must be in (0, 1)")


@dataclass
class OrientationState:
    """Sensor-to-world attitude plus integrated world-frame motion."""

    q: Quaternion = (1.0, 0.0, 0.0, 0.0)
    integral_feedback: Vec3 = (0.0, 0.0, 0.0)
    velocity: Vec3 = (0.0, 0.0, 0.0)
    position: Vec3 = (0.0, 0.0, 0.0)
    last_timestamp_ms: Optional[int] = None


def quat_normalize(q: Quaternion) -> Quaternion:
    n = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    return (q[0] / n, q[1] / n, q[2] / n, q[3] / n)


def quat_rotate(q: Quaternion, v: Vec3) -> Vec3:
    """Rotate a sensor-frame vector into the world frame."""
    w, x, y, z = q
    vx, vy, vz = v
    # v' = q * (0, v) * conj(q), expanded.
    tx = 2.0 * (y * vz - z * vy)
    ty = 2.0 * (z * vx - x * vz)
    tz = 2.0 * (x * vy - y * vx)
    return (
        vx + w * tx + (y * tz - z * ty),
        vy + w * ty + (z * tx - x * tz),
        vz + w * tz + (x * ty - y * tx),
    )


def to_euler(q: Quaternion) -> tuple[float, float, float]:
    """Unit quaternion to (roll, pitch, yaw) radians, ZYX convention.

    Roll and yaw are in (-pi, pi], pitch in [-pi/2, pi/2]; the pitch argument
    is clamped to [-1, 1] near gimbal lock.
    """
    w, x, y, z = q
    roll = math.atan2(2.0 * (w * x + y * z), 1.0 - 2.0 * (x * x + y * y))
    pitch = math.asin(min(1.0, max(-1.0, 2.0 * (w * y - z * x))))
    yaw = math.atan2(2.0 * (w * z + x * y), 1.0 - 2.0 * (y * y + z * z))
    return roll, pitch, yaw


def from_euler(roll: float, pitch: float, yaw: float) -> Quaternion:
    """Build the ZYX-convention unit quaternion for the given angles."""
    cr, sr = math.cos(roll / 2), math.sin(roll / 2)
    cp, sp = math.cos(pitch / 2), math.sin(pitch / 2)
    cy, sy = math.cos(yaw / 2), math.sin(yaw / 2)
    return (
        cy * cp * cr + sy * sp * sr,
        cy * cp * sr - sy * sp * cr,
        cy * sp * cr + sy * cp * sr,
        sy * cp * cr - cy * sp * sr,
    )


def mahony_update(
    state: OrientationState,
    gyro: Vec3,
    accel: Vec3,
    cfg: FusionConfig,
    dt: float,
) -> OrientationState:
    """One Mahony attitude step; mutates and returns the state.

    The gravity-direction error (measured x estimated) feeds a PI correction
    on the gyro rate. The accelerometer is trusted only when its magnitude is
    within the configured band around g, so impact shocks and swing
    acceleration fall back to pure gyro integration.
    """
    if dt <= 0:
        raise ZeroDtError("dt must be > 0")
    w, x, y, z = state.q
    gx, gy, gz = gyro
    ix, iy, iz = state.integral_feedback

    a_norm = math.sqrt(accel[0] ** 2 + accel[1] ** 2 + accel[2] ** 2)
    if a_norm > 0 and abs(a_norm - cfg.gravity) <= cfg.accel_gate * cfg.gravity:
        ax, ay, az = accel[0] / a_norm, accel[1] / a_norm, accel[2] / a_norm
        # Estimated gravity direction in the sensor frame.
        vx = 2.0 * (x * z - w * y)
        vy = 2.0 * (w * x + y * z)
        vz = w * w - x * x - y * y + z * z
        ex = ay * vz - az * vy
        ey = az * vx - ax * vz
        ez = ax * vy - ay * vx
        if cfg.ki > 0:
            ix += cfg.ki * ex * dt
            iy += cfg.ki * ey * dt
            iz += cfg.ki * ez * dt
        gx += cfg.kp * ex + ix
        gy += cfg.kp * ey + iy
        gz += cfg.kp * ez + iz

    # Quaternion rate integration: q += 0.5 * q (x) (0, omega) * dt.
    half_dt = 0.5 * dt
    qw = w - (x * gx + y * gy + z * gz) * half_dt
    qx = x + (w * gx + y * gz - z * gy) * half_dt
    qy = y + (w * gy - x * gz + z * gx) * half_dt
    qz = z + (w * gz + x * gy - y * gx) * half_dt

    state.q = quat_normalize((qw, qx, qy, qz))
    state.integral_feedback = (ix, iy, iz)
    return state


def zvu_integrate(
    state: OrientationState,
    accel: Vec3,
    stance: bool,
    cfg: FusionConfig,
    dt: float,
) -> OrientationState:
    """Velocity/position step with zero-velocity clamping during stance.

    World acceleration is the rotated sensor acceleration minus gravity.
    While the stance flag is asserted the velocity is reset to zero and the
    position held, bounding dead-reckoning drift to a single swing.
    """
    if dt <= 0:
        raise ZeroDtError("dt must be > 0")
    if stance:
        state.velocity = (0.0, 0.0, 0.0)
        return state
    aw = quat_rotate(state.q, accel)
    aw = (aw[0], aw[1], aw[2] - cfg.gravity)
    vx, vy, vz = state.velocity
    nvx, nvy, nvz = vx + aw[0] * dt, vy + aw[1] * dt, vz + aw[2] * dt
    px, py, pz = state.position
    # Trapezoidal position update: exact for piecewise-constant acceleration.
    state.position = (
        px + 0.5 * (vx + nvx) * dt,
        py + 0.5 * (vy + nvy) * dt,
        pz + 0.5 * (vz + nvz) * dt,
    )
    state.velocity = (nvx, nvy, nvz)
    return state


@dataclass(frozen=True)
class TrajectorySample:
    timestamp_ms: int
    roll: float
    pitch: float
    yaw: float
    velocity: Vec3
    position: Vec3


class MotionFusion:
    """Per-stream fusion context: orientation update then motion integration.

    dt comes from consecutive frame timestamps; the first frame only seeds
    the clock. Drive from a single caller at a time.
    """

    def __init__(self, cfg: Optional[FusionConfig] = None):
        self.cfg = cfg or FusionConfig()
        self.state = OrientationState()

    def step(self, imu: ImuFrame, stance: bool) -> TrajectorySample:
        state = self.state
        if state.last_timestamp_ms is None:
            state.last_timestamp_ms = imu.timestamp_ms
        else:
            dt = (imu.timestamp_ms - state.last_timestamp_ms) / 1000.0
            if dt <= 0:
                raise ZeroDtError("frame timestamps must strictly increase")
            mahony_update(state, imu.gyro, imu.accel, self.cfg, dt)
            zvu_integrate(state, imu.accel, stance, self.cfg, dt)
            state.last_timestamp_ms = imu.timestamp_ms
        roll, pitch, yaw = to_euler(state.q)
        return TrajectorySample(
            timestamp_ms=imu.timestamp_ms,
            roll=roll,
            pitch=pitch,
            yaw=yaw,
            velocity=state.velocity,
            position=state.position,
        )


def write_trajectory_csv(path: str | Path, samples: Iterable[TrajectorySample]) -> None:
    """Export `timestamp_ms,roll,pitch,yaw,vx,vy,vz,px,py,pz` (rad, m/s, m)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["timestamp_ms", "roll", "pitch", "yaw", "vx", "vy", "vz", "px", "py", "pz"]
        )
        for s in samples:
            writer.writerow(
                [s.timestamp_ms, repr(s.roll), repr(s.pitch), repr(s.yaw)]
                + [repr(v) for v in s.velocity]
                + [repr(p) for p in s.position]
            )
