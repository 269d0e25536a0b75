"""Shared domain vocabulary: sensor frames, calibration, anatomical regions.

All values are plain immutable dataclasses; they are safe to copy and to
share between threads. Raw plantar channels are 12-bit ADC counts, inertial
channels are SI floats (m/s^2, rad/s), timestamps are integer milliseconds
from stream start.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Optional, Sequence

FSR_CHANNEL_COUNT = 15
ADC_FULL_SCALE_DEFAULT = 4095

GRAVITY_M_S2 = 9.80665


class GaitCoreError(Exception):
    """Base class for engine errors."""


class ChannelOutOfRangeError(GaitCoreError):
    pass


class CsvFormatError(GaitCoreError):
    pass


class Region(Enum):
    """Anatomical plantar regions used to group the 15 pressure channels."""

    HEEL = "heel"
    MIDFOOT = "midfoot"
    METATARSAL = "metatarsal"
    TOES = "toes"


class FrameRejection(Enum):
    """Reason a sensor frame failed validation (exactly one per rejection)."""

    CHANNEL_COUNT_MISMATCH = "channel_count_mismatch"
    ADC_OUT_OF_RANGE = "adc_out_of_range"
    NON_MONOTONIC_TIMESTAMP = "non_monotonic_timestamp"


@dataclass(frozen=True)
class SensorFrame:
    """One synchronized 100 Hz sample from the instrumented insole.

    fsr_raw holds 15 raw ADC counts (12-bit, 0..4095). The physical layout
    supports up to 24 channels; the engine requires at least 15 and uses the
    first 15. accel is m/s^2, gyro is rad/s, both in the sensor frame.
    """

    timestamp_ms: int
    fsr_raw: tuple[int, ...]
    accel: tuple[float, float, float]
    gyro: tuple[float, float, float]
    device_id: int = 1


@dataclass(frozen=True)
class CalibrationProfile:
    """Electrical and per-user calibration constants.

    supply_voltage and reference_resistor describe the voltage divider each
    pressure sensor is wired into. body_weight (N) scales all detection
    thresholds. accel/gyro biases are removed from every inertial sample.
    """

    body_weight: float
    supply_voltage: float = 3.3            # V
    reference_resistor: float = 10_000.0   # ohm
    adc_full_scale: int = ADC_FULL_SCALE_DEFAULT
    fsr_force_max: float = 20.0            # N, sensor sensitivity ceiling
    accel_bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gyro_bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    accel_range_g: float = 4.0
    gyro_range_dps: float = 2000.0

    def __post_init__(self) -> None:
        if self.supply_voltage <= 0:
            raise ValueError("supply_voltage must be > 0")
        if self.reference_resistor <= 0:
            raise ValueError("reference_resistor must be > 0")
        if self.body_weight <= 0:
            raise ValueError("body_weight must be > 0")
        if self.fsr_force_max <= 0:
            raise ValueError("fsr_force_max must be > 0")
        if self.adc_full_scale <= 0:
            raise ValueError("adc_full_scale must be > 0")
        if any(abs(b) >= 2.0 for b in self.accel_bias):
            raise ValueError("accel_bias components must stay below 2 m/s^2")


# Channel -> region assignment for the 15-area plantar segmentation:
# channels 0-2 heel, 3-4 midfoot, 5-9 metatarsals, 10-14 toes.
_DEFAULT_REGIONS: tuple[Region, ...] = (
    (Region.HEEL,) * 3 + (Region.MIDFOOT,) * 2 + (Region.METATARSAL,) * 5 + (Region.TOES,) * 5
)

# Normalized insole coordinates (x across the sole, y from heel 0 to toe 1).
# Approximate layout; exact sensor placement is device-specific.
_DEFAULT_COORDINATES: tuple[tuple[float, float], ...] = (
    (0.38, 0.08), (0.62, 0.08), (0.50, 0.18),               # heel
    (0.40, 0.40), (0.62, 0.40),                              # midfoot
    (0.20, 0.62), (0.36, 0.67), (0.51, 0.70), (0.66, 0.69), (0.79, 0.64),  # metatarsals
    (0.18, 0.78), (0.34, 0.84), (0.50, 0.88), (0.65, 0.86), (0.79, 0.80),  # toes
)


@dataclass(frozen=True)
class RegionMap:
    """Channel-to-region assignment plus 2-D insole coordinates.

    Every one of the 15 channels belongs to exactly one region; coordinates
    are normalized to the unit bounding box of the insole outline so heatmap
    export is independent of shoe size.
    """

    regions: tuple[Region, ...] = _DEFAULT_REGIONS
    coordinates: tuple[tuple[float, float], ...] = _DEFAULT_COORDINATES

    def __post_init__(self) -> None:
        if len(self.regions) != FSR_CHANNEL_COUNT:
            raise ValueError(f"regions must assign all {FSR_CHANNEL_COUNT} channels")
        if len(self.coordinates) != FSR_CHANNEL_COUNT:
            raise ValueError(f"coordinates must cover all {FSR_CHANNEL_COUNT} channels")
        for x, y in self.coordinates:
            if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
                raise ValueError("coordinates must be normalized to [0,1]x[0,1]")

    def channels_in(self, region: Region) -> tuple[int, ...]:
        return tuple(i for i, r in enumerate(self.regions) if r is region)


def region_of(channel: int, region_map: Optional[RegionMap] = None) -> Region:
    """Return the anatomical region a channel index (0..14) belongs to."""
    if not 0 <= channel < FSR_CHANNEL_COUNT:
        raise ChannelOutOfRangeError(f"channel {channel} outside 0..{FSR_CHANNEL_COUNT - 1}")
    region_map = region_map or RegionMap()
    return region_map.regions[channel]


def validate_frame(
    frame: SensorFrame,
    prev_timestamp_ms: Optional[int] = None,
    adc_full_scale: int = ADC_FULL_SCALE_DEFAULT,
) -> Optional[FrameRejection]:
    """Check all frame invariants; return None when valid, else one reason.

    Total over all inputs: every frame yields either None or exactly one
    rejection reason (checked in declaration order).
    """
    if len(frame.fsr_raw) != FSR_CHANNEL_COUNT:
        return FrameRejection.CHANNEL_COUNT_MISMATCH
    for count in frame.fsr_raw:
        if not 0 <= count <= adc_full_scale:
            return FrameRejection.ADC_OUT_OF_RANGE
    if prev_timestamp_ms is not None and frame.timestamp_ms <= prev_timestamp_ms:
        return FrameRejection.NON_MONOTONIC_TIMESTAMP
    return None


# CSV frame format: header row mandatory, one row per frame.
CSV_HEADER = (
    ["timestamp_ms"]
    + [f"fsr{i}" for i in range(FSR_CHANNEL_COUNT)]
    + ["ax", "ay", "az", "gx", "gy", "gz"]
)


def write_frames_csv(path: str | Path, frames: Iterable[SensorFrame]) -> None:
    """Write frames in the canonical CSV layout (raw counts + SI floats)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for frame in frames:
            writer.writerow(
                [frame.timestamp_ms]
                + list(frame.fsr_raw)
                + [repr(v) for v in frame.accel]
                + [repr(v) for v in frame.gyro]
            )


def read_frames_csv(path: str | Path) -> list[SensorFrame]:
    """Read frames from CSV. Extra fsr columns (16..24 layouts) are ignored."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise CsvFormatError(f"{path}: empty file, header row is mandatory")
        columns = _resolve_columns(header, path)
        frames = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                frames.append(
                    SensorFrame(
                        timestamp_ms=int(row[columns["timestamp_ms"]]),
                        fsr_raw=tuple(
                            int(row[columns[f"fsr{i}"]]) for i in range(FSR_CHANNEL_COUNT)
                        ),
                        accel=tuple(float(row[columns[a]]) for a in ("ax", "ay", "az")),
                        gyro=tuple(float(row[columns[g]]) for g in ("gx", "gy", "gz")),
                    )
                )
            except (ValueError, IndexError) as exc:
                raise CsvFormatError(f"{path}:{lineno}: malformed row ({exc})") from exc
    return frames


def _resolve_columns(header: Sequence[str], path: str | Path) -> dict[str, int]:
    names = [h.strip() for h in header]
    index = {name: i for i, name in enumerate(names)}
    missing = [name for name in CSV_HEADER if name not in index]
    if missing:
        raise CsvFormatError(f"{path}: header is missing columns {missing}")
    return index
