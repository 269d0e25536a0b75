"""Synthetic gait trial generator with exact ground truth.

Each cycle produces the canonical plantar loading sequence: the heel region
rises at foot strike, load migrates heel -> metatarsals -> toes, and the sole
unloads at foot off. The total-force waveform is built from raised-cosine
ramps between plateaus and is anchored so that it crosses 10% of body weight
(rising) exactly at the nominal foot strike and 5% (falling) exactly at the
nominal foot off; those anchor fractions match the default detection
thresholds, which makes the ground truth the output of an ideal
continuous-time detector. Foot-flat and heel-off times are located on the
same closed forms by bisection to machine precision.

The inertial trace is derived analytically from a prescribed foot trajectory
(quintic swing translation, sinusoidal lift, pitch oscillation), so
integrating the synthesized accelerations reproduces the configured cycle
length exactly. ADC counts use floor quantization, as a real converter does,
so decoded forces never exceed the true signal.

Generation is deterministic: identical (profile, seed) pairs yield
byte-identical streams.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .types import (
    FSR_CHANNEL_COUNT,
    GRAVITY_M_S2,
    CalibrationProfile,
    GaitCoreError,
    SensorFrame,
)

# Waveform anchor fractions of body weight; these mirror the default
# detection thresholds so truth events are ideal-detector outputs.
STRIKE_ANCHOR = 0.10
OFF_ANCHOR = 0.05
FLAT_ANCHOR = 0.40
HEEL_OFF_FRACTION = 0.20
LOADED_ANCHOR = 0.05

RISE_MS = 120.0        # loading ramp length
UNLOAD_MS = 50.0       # plateau -> toe-ledge ramp length
LEDGE_FRACTION = 0.060  # sustained toe force before final unload, x body weight
LEDGE_MS = 190.0       # toe-ledge hold length
TOE_OFF_MS = 40.0      # final unload ramp length

# Intra-region force split (each tuple sums to 1).
HEEL_WEIGHTS = (0.36, 0.34, 0.30)
MIDFOOT_WEIGHTS = (0.55, 0.45)
METATARSAL_WEIGHTS = (0.24, 0.22, 0.20, 0.18, 0.16)
TOE_WEIGHTS = (0.28, 0.22, 0.18, 0.17, 0.15)

# Region share envelopes in stance-normalized time (start, end, amplitude).
HEEL_SHARE_AMPLITUDE = 0.95
HEEL_FALL = (0.40, 0.70)
MIDFOOT_AMPLITUDE = 0.12
MIDFOOT_RISE = (0.05, 0.20)
MIDFOOT_FALL = (0.45, 0.70)
MET_AMPLITUDE = 0.80
MET_RISE = (0.10, 0.35)
MET_FALL = (0.70, 0.95)
TOE_AMPLITUDE = 0.70
TOE_RISE = (0.45, 0.70)

# Swing translation window in cycle-normalized time.
MOVE_START = 0.62
MOVE_END = 0.92
PITCH_START = 0.60
PITCH_END = 0.98


class InvalidProfileError(GaitCoreError):
    pass


class CycleOutOfRangeError(GaitCoreError):
    pass


@dataclass(frozen=True)
class SimProfile:
    """Trial shape: slow-walk defaults (one cycle per second, 0.417 m/s)."""

    cadence_cycles_per_min: float = 60.0
    stance_fraction: float = 0.60
    cycle_length_m: float = 0.4167
    body_weight: float = 45.0          # N of relative plantar force at full load
    trial_duration_s: float = 10.0
    sample_rate_hz: float = 100.0
    force_noise_sd: float = 0.0        # N per channel
    accel_noise_sd: float = 0.0        # m/s^2 per axis
    gyro_noise_sd: float = 0.0         # rad/s per axis
    stuck_channel: Optional[tuple[int, float]] = None   # (index, offset N)
    overload_cycles: dict[int, float] = field(default_factory=dict)
    # The 8 ms fractional lead keeps threshold crossings away from sample
    # boundaries, so event detection latency is identical for every cycle.
    lead_in_s: float = 0.408           # swing before the first foot strike
    tail_s: float = 0.15               # extra capture after the last cycle closes
    plateau_ripple: float = 0.0        # fractional ripple on the load plateau
    pitch_amplitude_rad: float = 0.15
    lift_height_m: float = 0.03

    def __post_init__(self) -> None:
        if not 0.0 < self.stance_fraction < 1.0:
            raise InvalidProfileError("stance_fraction must be in (0, 1)")
        if self.cadence_cycles_per_min <= 0:
            raise InvalidProfileError("cadence must be > 0")
        if self.sample_rate_hz <= 0:
            raise InvalidProfileError("sample_rate_hz must be > 0")
        if self.trial_duration_s < self.cycle_ms / 1000.0:
            raise InvalidProfileError("trial must cover at least one full cycle")
        if self.body_weight <= 0:
            raise InvalidProfileError("body_weight must be > 0")
        if self.cycle_length_m < 0:
            raise InvalidProfileError("cycle_length_m must be >= 0")
        if min(self.force_noise_sd, self.accel_noise_sd, self.gyro_noise_sd) < 0:
            raise InvalidProfileError("noise standard deviations must be >= 0")
        if self.lead_in_s * 1000.0 < _rise_lead_ms():
            raise InvalidProfileError(
                f"lead_in_s must cover the loading ramp (>= {_rise_lead_ms():.0f} ms)"
            )
        if self.stuck_channel is not None:
            ch, offset = self.stuck_channel
            if not 0 <= ch < FSR_CHANNEL_COUNT or offset < 0:
                raise InvalidProfileError("stuck_channel must be (0..14, offset >= 0)")
        for cycle, factor in self.overload_cycles.items():
            if factor <= 1.0:
                raise InvalidProfileError("overload factors must be > 1")

    @property
    def cycle_ms(self) -> float:
        return 60_000.0 / self.cadence_cycles_per_min

    @property
    def stance_ms(self) -> float:
        return self.cycle_ms * self.stance_fraction

    @property
    def cycle_count(self) -> int:
        return int(self.trial_duration_s * 1000.0 / self.cycle_ms + 1e-9)

    @classmethod
    def from_dict(cls, data: dict) -> "SimProfile":
        data = dict(data)
        if "stuck_channel" in data and data["stuck_channel"] is not None:
            data["stuck_channel"] = tuple(data["stuck_channel"])
        if "overload_cycles" in data:
            data["overload_cycles"] = {
                int(k): float(v) for k, v in data["overload_cycles"].items()
            }
        try:
            return cls(**data)
        except TypeError as exc:
            raise InvalidProfileError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str | Path) -> "SimProfile":
        with open(path) as fh:
            try:
                return cls.from_dict(json.load(fh))
            except json.JSONDecodeError as exc:
                raise InvalidProfileError(f"{path}: {exc}") from exc

    def to_dict(self) -> dict:
        return {
            "cadence_cycles_per_min": self.cadence_cycles_per_min,
            "stance_fraction": self.stance_fraction,
            "cycle_length_m": self.cycle_length_m,
            "body_weight": self.body_weight,
            "trial_duration_s": self.trial_duration_s,
            "sample_rate_hz": self.sample_rate_hz,
            "force_noise_sd": self.force_noise_sd,
            "accel_noise_sd": self.accel_noise_sd,
            "gyro_noise_sd": self.gyro_noise_sd,
            "stuck_channel": list(self.stuck_channel) if self.stuck_channel else None,
            "overload_cycles": {str(k): v for k, v in self.overload_cycles.items()},
            "lead_in_s": self.lead_in_s,
            "tail_s": self.tail_s,
            "plateau_ripple": self.plateau_ripple,
            "pitch_amplitude_rad": self.pitch_amplitude_rad,
            "lift_height_m": self.lift_height_m,
        }


@dataclass(frozen=True)
class CycleTruth:
    index: int
    foot_strike_ms: float
    foot_flat_ms: float
    heel_off_ms: float
    foot_off_ms: float
    next_foot_strike_ms: float
    stance_s: float
    swing_s: float
    cycle_s: float
    step_length_m: float
    cycle_length_m: float
    speed_mps: float
    overload_factor: Optional[float] = None


@dataclass(frozen=True)
class GroundTruth:
    cycles: tuple[CycleTruth, ...]
    cadence_cycles_per_min: float
    mean_plantar_pressure_n_cm2: float
    frame_count: int
    first_timestamp_ms: int
    last_timestamp_ms: int
    seed: int
    profile: SimProfile


# --- waveform primitives ----------------------------------------------------

def _rise01(t, a: float, b: float):
    u = np.clip((np.asarray(t, dtype=float) - a) / (b - a), 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * u))


def _fall01(t, a: float, b: float):
    return 1.0 - _rise01(t, a, b)


def _anchor_u(level: float) -> float:
    # Inverse of the raised cosine: u with 0.5*(1-cos(pi u)) == level.
    return math.acos(1.0 - 2.0 * level) / math.pi


def _rise_lead_ms() -> float:
    # How far the loading ramp starts before the foot-strike anchor.
    return _anchor_u(STRIKE_ANCHOR) * RISE_MS


def _toe_off_lead_ms() -> float:
    # How far before the foot-off anchor the final unload ramp starts.
    return _anchor_u(1.0 - OFF_ANCHOR / LEDGE_FRACTION) * TOE_OFF_MS


def _fall_tail_ms() -> float:
    # How far the final unload ramp extends past the foot-off anchor.
    return TOE_OFF_MS - _toe_off_lead_ms()


def _cycle_total_force(tau, profile: SimProfile):
    """Total plantar force of one cycle vs. time since foot strike (ms).

    Loading ramp (crossing the strike anchor exactly at foot strike), weight
    plateau, unload to a low sustained toe ledge, then the final toe-off ramp
    crossing the off anchor exactly at foot off.
    """
    rise_start = -_rise_lead_ms()
    stance = profile.stance_ms
    toe_off_start = stance - _toe_off_lead_ms()
    ledge_start = toe_off_start - LEDGE_MS
    unload_start = ledge_start - UNLOAD_MS
    bw = profile.body_weight

    envelope = _rise01(tau, rise_start, rise_start + RISE_MS) * (
        1.0
        - (1.0 - LEDGE_FRACTION) * _rise01(tau, unload_start, ledge_start)
        - LEDGE_FRACTION * _rise01(tau, toe_off_start, toe_off_start + TOE_OFF_MS)
    )
    total = bw * envelope
    if profile.plateau_ripple:
        tau_arr = np.asarray(tau, dtype=float)
        plateau = (tau_arr >= rise_start + RISE_MS) & (tau_arr <= unload_start)
        ripple = profile.plateau_ripple * np.sin(
            2.0 * np.pi * tau_arr / (stance / 2.0)
        )
        total = total * (1.0 + ripple * plateau)
    return total


def _region_shares(tau, stance_ms: float):
    """Normalized region shares (heel, midfoot, metatarsal, toes)."""
    s = np.asarray(tau, dtype=float) / stance_ms
    heel = HEEL_SHARE_AMPLITUDE * _fall01(s, *HEEL_FALL)
    mid = MIDFOOT_AMPLITUDE * _rise01(s, *MIDFOOT_RISE) * _fall01(s, *MIDFOOT_FALL)
    met = MET_AMPLITUDE * _rise01(s, *MET_RISE) * _fall01(s, *MET_FALL)
    toes = TOE_AMPLITUDE * _rise01(s, *TOE_RISE)
    denom = heel + mid + met + toes
    denom = np.where(denom > 0, denom, 1.0)
    return heel / denom, mid / denom, met / denom, toes / denom


def _cycle_channel_forces(tau, profile: SimProfile) -> np.ndarray:
    """Per-channel force of one cycle; shape (..., 15)."""
    total = _cycle_total_force(tau, profile)
    heel, mid, met, toes = _region_shares(tau, profile.stance_ms)
    weights = HEEL_WEIGHTS + MIDFOOT_WEIGHTS + METATARSAL_WEIGHTS + TOE_WEIGHTS
    shares = [heel] * 3 + [mid] * 2 + [met] * 5 + [toes] * 5
    channels = np.stack(
        [total * share * w for share, w in zip(shares, weights)], axis=-1
    )
    return channels


def _bisect(fn: Callable[[float], float], lo: float, hi: float, iters: int = 80) -> float:
    f_lo = fn(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if (fn(mid) <= 0) == (f_lo <= 0):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _solve_cycle_events(profile: SimProfile) -> tuple[float, float]:
    """Foot-flat and heel-off offsets (ms after foot strike) on the clean
    waveform, located by bisection on the closed forms."""
    bw = profile.body_weight
    stance = profile.stance_ms

    def heel_force(tau: float) -> float:
        shares = _region_shares(tau, stance)
        return float(_cycle_total_force(tau, profile)) * float(shares[0])

    def forefoot_force(tau: float) -> float:
        shares = _region_shares(tau, stance)
        return float(_cycle_total_force(tau, profile)) * float(shares[2] + shares[3])

    def flat_gap(tau: float) -> float:
        total = float(_cycle_total_force(tau, profile))
        return min(
            total - FLAT_ANCHOR * bw,
            heel_force(tau) - LOADED_ANCHOR * bw,
            forefoot_force(tau) - LOADED_ANCHOR * bw,
        )

    # All three foot-flat conditions are non-decreasing over early stance.
    flat_ms = _bisect(flat_gap, 0.0, 0.45 * stance)

    grid = np.arange(0.0, HEEL_FALL[1] * stance, 0.5)
    heel_values = _cycle_total_force(grid, profile) * _region_shares(grid, stance)[0]
    peak_idx = int(np.argmax(heel_values))
    heel_peak = float(heel_values[peak_idx])
    heel_off_ms = _bisect(
        lambda tau: HEEL_OFF_FRACTION * heel_peak - heel_force(tau),
        float(grid[peak_idx]),
        HEEL_FALL[1] * stance,
    )
    return flat_ms, heel_off_ms


# --- foot trajectory --------------------------------------------------------

def _smoothstep(u: np.ndarray) -> np.ndarray:
    return 10.0 * u**3 - 15.0 * u**4 + 6.0 * u**5


def _smoothstep_dd(u: np.ndarray) -> np.ndarray:
    return 60.0 * u - 180.0 * u**2 + 120.0 * u**3


def _cycle_motion(tau_ms, profile: SimProfile):
    """World-frame horizontal/vertical acceleration and pitch angle/rate for
    one cycle (tau in ms since foot strike)."""
    T = profile.cycle_ms
    move_s = (MOVE_END - MOVE_START) * T / 1000.0
    tau = np.asarray(tau_ms, dtype=float)

    u = np.clip((tau / T - MOVE_START) / (MOVE_END - MOVE_START), 0.0, 1.0)
    moving = (u > 0.0) & (u < 1.0)
    ax = np.where(moving, profile.cycle_length_m * _smoothstep_dd(u) / move_s**2, 0.0)

    s, c = np.sin(np.pi * u), np.cos(np.pi * u)
    az = np.where(
        moving,
        4.0 * profile.lift_height_m * (np.pi / move_s) ** 2 * s**2 * (3.0 * c**2 - s**2),
        0.0,
    )

    pitch_s = (PITCH_END - PITCH_START) * T / 1000.0
    up = np.clip((tau / T - PITCH_START) / (PITCH_END - PITCH_START), 0.0, 1.0)
    pitching = (up > 0.0) & (up < 1.0)
    pitch = np.where(pitching, profile.pitch_amplitude_rad * np.sin(np.pi * up) ** 2, 0.0)
    pitch_rate = np.where(
        pitching,
        profile.pitch_amplitude_rad * np.pi / pitch_s * np.sin(2.0 * np.pi * up),
        0.0,
    )
    return ax, az, pitch, pitch_rate


# --- trial synthesis --------------------------------------------------------

def synthesize_trial(profile: SimProfile, seed: int = 0) -> tuple[list[SensorFrame], GroundTruth]:
    """Generate one trial and its ground truth.

    Returns the raw frame stream (counts floor-quantized through the default
    voltage divider model) and per-cycle truth with exact event times and
    parameters. Noise, stuck channels, and overload cycles from the profile
    are applied before quantization where they physically occur.
    """
    rng = np.random.default_rng(seed)
    dt_ms = 1000.0 / profile.sample_rate_hz
    lead = profile.lead_in_s * 1000.0
    n_cycles = profile.cycle_count
    total_span = lead + n_cycles * profile.cycle_ms + profile.tail_s * 1000.0
    n_frames = int(total_span / dt_ms) + 1
    t_ms = np.array([round(i * dt_ms) for i in range(n_frames)], dtype=np.int64)
    t = t_ms.astype(float)

    forces = np.zeros((n_frames, FSR_CHANNEL_COUNT))
    accel_x_w = np.zeros(n_frames)
    accel_z_w = np.zeros(n_frames)
    pitch = np.zeros(n_frames)
    pitch_rate = np.zeros(n_frames)

    support_lo = -_rise_lead_ms() - dt_ms
    support_hi = profile.cycle_ms + dt_ms
    strikes = [lead + k * profile.cycle_ms for k in range(n_cycles + 1)]
    for k in range(n_cycles + 1):
        tau = t - strikes[k]
        window = (tau >= support_lo) & (tau <= support_hi)
        if not window.any():
            continue
        scale = profile.overload_cycles.get(k, 1.0) if k < n_cycles else 1.0
        forces[window] += scale * _cycle_channel_forces(tau[window], profile)
        if k < n_cycles:
            ax, az, ptch, prate = _cycle_motion(tau[window], profile)
            accel_x_w[window] += ax
            accel_z_w[window] += az
            pitch[window] += ptch
            pitch_rate[window] += prate

    if profile.stuck_channel is not None:
        ch, offset = profile.stuck_channel
        forces[:, ch] = np.maximum(forces[:, ch], offset)
    if profile.force_noise_sd > 0:
        forces = forces + rng.normal(0.0, profile.force_noise_sd, forces.shape)

    cal = CalibrationProfile(body_weight=profile.body_weight)
    counts = quantize_forces(forces, cal)

    # Sensor-frame specific force: pitch rotation applied to world accel + g.
    fx_w = accel_x_w
    fz_w = accel_z_w + GRAVITY_M_S2
    cp, sp = np.cos(pitch), np.sin(pitch)
    accel = np.stack(
        [cp * fx_w - sp * fz_w, np.zeros(n_frames), sp * fx_w + cp * fz_w], axis=1
    )
    gyro = np.stack([np.zeros(n_frames), pitch_rate, np.zeros(n_frames)], axis=1)
    if profile.accel_noise_sd > 0:
        accel = accel + rng.normal(0.0, profile.accel_noise_sd, accel.shape)
    if profile.gyro_noise_sd > 0:
        gyro = gyro + rng.normal(0.0, profile.gyro_noise_sd, gyro.shape)

    frames = [
        SensorFrame(
            timestamp_ms=int(t_ms[i]),
            fsr_raw=tuple(int(c) for c in counts[i]),
            accel=tuple(float(a) for a in accel[i]),
            gyro=tuple(float(w) for w in gyro[i]),
        )
        for i in range(n_frames)
    ]

    truth = _build_truth(profile, seed, strikes, n_cycles, t_ms, forces)
    return frames, truth


def quantize_forces(forces: np.ndarray, cal: CalibrationProfile, r_min_ohm: float = 250.0) -> np.ndarray:
    """Force -> divider voltage ratio -> floor-quantized ADC counts."""
    k_f = cal.fsr_force_max * r_min_ohm
    clamped = np.clip(forces, 0.0, cal.fsr_force_max)
    ratio = clamped * cal.reference_resistor / (
        clamped * cal.reference_resistor + k_f
    )
    return np.floor(cal.adc_full_scale * ratio).astype(np.int64)


def _build_truth(
    profile: SimProfile,
    seed: int,
    strikes: Sequence[float],
    n_cycles: int,
    t_ms: np.ndarray,
    forces: np.ndarray,
) -> GroundTruth:
    flat_off, heel_off = _solve_cycle_events(profile)
    stance_s = profile.stance_ms / 1000.0
    cycle_s = profile.cycle_ms / 1000.0
    cycles = []
    for k in range(n_cycles):
        fs = strikes[k]
        cycles.append(
            CycleTruth(
                index=k,
                foot_strike_ms=fs,
                foot_flat_ms=fs + flat_off,
                heel_off_ms=fs + heel_off,
                foot_off_ms=fs + profile.stance_ms,
                next_foot_strike_ms=strikes[k + 1],
                stance_s=stance_s,
                swing_s=cycle_s - stance_s,
                cycle_s=cycle_s,
                step_length_m=profile.cycle_length_m / 2.0,
                cycle_length_m=profile.cycle_length_m,
                speed_mps=profile.cycle_length_m / cycle_s,
                overload_factor=profile.overload_cycles.get(k),
            )
        )

    # Trial mean pressure over the stance windows of the clean signal,
    # mirroring the report definition.
    from .params import DEFAULT_CONTACT_AREA_CM2

    totals = forces.sum(axis=1)
    in_stance = np.zeros(len(t_ms), dtype=bool)
    for c in cycles:
        in_stance |= (t_ms >= c.foot_strike_ms) & (t_ms < c.foot_off_ms)
    loaded = in_stance & (totals > 0)
    pressure = float(totals[loaded].mean() / DEFAULT_CONTACT_AREA_CM2) if loaded.any() else 0.0

    return GroundTruth(
        cycles=tuple(cycles),
        cadence_cycles_per_min=60_000.0 / profile.cycle_ms,
        mean_plantar_pressure_n_cm2=pressure,
        frame_count=len(t_ms),
        first_timestamp_ms=int(t_ms[0]),
        last_timestamp_ms=int(t_ms[-1]),
        seed=seed,
        profile=profile,
    )


# --- post-hoc stream modifiers ---------------------------------------------

def _decode_channel_forces(frame: SensorFrame, cal: CalibrationProfile) -> list[float]:
    from .conditioning import adc_to_voltage, force_from_resistance, resistance_from_voltage

    return [
        force_from_resistance(
            resistance_from_voltage(adc_to_voltage(c, cal), cal), cal
        )
        for c in frame.fsr_raw
    ]


def _requantize(frame: SensorFrame, forces: Sequence[float], cal: CalibrationProfile) -> SensorFrame:
    counts = quantize_forces(np.asarray(forces)[None, :], cal)[0]
    return replace(frame, fsr_raw=tuple(int(c) for c in counts))


def inject_overload(
    frames: Sequence[SensorFrame],
    truth: GroundTruth,
    cycle_index: int,
    factor: float,
) -> tuple[list[SensorFrame], GroundTruth]:
    """Scale the stance-phase loading of one cycle; truth is annotated."""
    if factor <= 1.0:
        raise InvalidProfileError("overload factor must be > 1")
    if not 0 <= cycle_index < len(truth.cycles):
        raise CycleOutOfRangeError(f"cycle {cycle_index} outside 0..{len(truth.cycles) - 1}")
    cal = CalibrationProfile(body_weight=truth.profile.body_weight)
    cycle = truth.cycles[cycle_index]
    lo = cycle.foot_strike_ms - _rise_lead_ms() - 1
    hi = cycle.foot_off_ms + _fall_tail_ms() + 1
    out = []
    for frame in frames:
        if lo <= frame.timestamp_ms <= hi:
            forces = [factor * f for f in _decode_channel_forces(frame, cal)]
            out.append(_requantize(frame, forces, cal))
        else:
            out.append(frame)
    cycles = list(truth.cycles)
    cycles[cycle_index] = replace(cycle, overload_factor=factor)
    return out, replace(truth, cycles=tuple(cycles))


def add_noise(
    frames: Sequence[SensorFrame],
    force_sd: float,
    accel_sd: float,
    gyro_sd: float,
    seed: int = 0,
    body_weight: float = 45.0,
) -> list[SensorFrame]:
    """Add Gaussian noise per the configured standard deviations."""
    if force_sd == 0 and accel_sd == 0 and gyro_sd == 0:
        return list(frames)
    rng = np.random.default_rng(seed)
    cal = CalibrationProfile(body_weight=body_weight)
    out = []
    for frame in frames:
        new = frame
        if force_sd > 0:
            forces = np.array(_decode_channel_forces(frame, cal))
            forces = forces + rng.normal(0.0, force_sd, forces.shape)
            new = _requantize(new, forces, cal)
        if accel_sd > 0:
            new = replace(
                new, accel=tuple(a + rng.normal(0.0, accel_sd) for a in new.accel)
            )
        if gyro_sd > 0:
            new = replace(
                new, gyro=tuple(g + rng.normal(0.0, gyro_sd) for g in new.gyro)
            )
        out.append(new)
    return out


def add_stuck_channel(
    frames: Sequence[SensorFrame],
    channel: int,
    offset_n: float,
    body_weight: float = 45.0,
) -> list[SensorFrame]:
    """Force one channel to read at least `offset_n` newtons at all times,
    reproducing a sensor that stays triggered after offloading."""
    if not 0 <= channel < FSR_CHANNEL_COUNT:
        raise InvalidProfileError(f"channel {channel} outside 0..{FSR_CHANNEL_COUNT - 1}")
    cal = CalibrationProfile(body_weight=body_weight)
    out = []
    for frame in frames:
        forces = _decode_channel_forces(frame, cal)
        forces[channel] = max(forces[channel], offset_n)
        out.append(_requantize(frame, forces, cal))
    return out


# --- truth serialization ----------------------------------------------------

def truth_to_dict(truth: GroundTruth) -> dict:
    return {
        "cycles": [
            {
                "index": c.index,
                "foot_strike_ms": c.foot_strike_ms,
                "foot_flat_ms": c.foot_flat_ms,
                "heel_off_ms": c.heel_off_ms,
                "foot_off_ms": c.foot_off_ms,
                "next_foot_strike_ms": c.next_foot_strike_ms,
                "stance_s": c.stance_s,
                "swing_s": c.swing_s,
                "cycle_s": c.cycle_s,
                "step_length_m": c.step_length_m,
                "cycle_length_m": c.cycle_length_m,
                "speed_mps": c.speed_mps,
                "overload_factor": c.overload_factor,
            }
            for c in truth.cycles
        ],
        "cadence_cycles_per_min": truth.cadence_cycles_per_min,
        "mean_plantar_pressure_n_cm2": truth.mean_plantar_pressure_n_cm2,
        "trial": {
            "frame_count": truth.frame_count,
            "first_timestamp_ms": truth.first_timestamp_ms,
            "last_timestamp_ms": truth.last_timestamp_ms,
            "seed": truth.seed,
        },
        "profile": truth.profile.to_dict(),
    }


def write_truth_json(path: str | Path, truth: GroundTruth) -> None:
    with open(path, "w") as fh:
        json.dump(truth_to_dict(truth), fh, indent=2)


def read_truth_json(path: str | Path) -> dict:
    with open(path) as fh:
        return json.load(fh)
