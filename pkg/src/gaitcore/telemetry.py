"""Binary telemetry framing, topics, and trial record/replay.

Packet layout (all multi-byte fields little-endian):

    offset  size  field
    0       2     magic 0x47 0x43 ("GC")
    2       1     version (0x01)
    3       1     packet type (0x01 sensor frame, 0x02 vibration command,
                  0x03 gait event)
    4       1     device id
    5       2     payload length
    7       n     payload
    7+n     2     CRC16-CCITT (poly 0x1021, init 0xFFFF) over header+payload

The CRC is verified before any other field so that every single-bit
corruption of a packet surfaces as a CRC mismatch. Fixed-point payload
encodings (accel 1/1000 g, gyro 1/16 deg/s, intensity 1/10000) fit the
configured sensor ranges in 16 bits with headroom.

Recordings are `GCREC001` followed by repeated [u32 length][packet bytes];
replay timing is reconstructed from the timestamps embedded in the payloads.
"""

from __future__ import annotations

import math
import struct
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from queue import Empty, Queue
from threading import Lock
from typing import BinaryIO, Callable, Iterable, Iterator, Optional, Union

from .events import GaitEvent, GaitEventKind
from .feedback import ActuatorTarget, FeedbackMode, VibrationCommand
from .types import FSR_CHANNEL_COUNT, GRAVITY_M_S2, GaitCoreError, SensorFrame

MAGIC = b"GC"
VERSION = 0x01

TYPE_SENSOR_FRAME = 0x01
TYPE_VIBRATION_COMMAND = 0x02
TYPE_GAIT_EVENT = 0x03

_HEADER = struct.Struct("<2sBBBH")
_CRC = struct.Struct("<H")
_FRAME_PAYLOAD = struct.Struct("<Q15H3h3h")   # ts, counts, accel mg, gyro 1/16 dps
_EVENT_PAYLOAD = struct.Struct("<QB")
_COMMAND_PAYLOAD = struct.Struct("<QBBHIII")

ACCEL_LSB_G = 0.001       # 1/1000 g per count
GYRO_LSB_DPS = 1.0 / 16.0  # 1/16 deg/s per count
INTENSITY_SCALE = 10_000

RECORDING_MAGIC = b"GCREC001"

_EVENT_CODES = {
    GaitEventKind.FOOT_STRIKE: 0,
    GaitEventKind.FOOT_FLAT: 1,
    GaitEventKind.HEEL_OFF: 2,
    GaitEventKind.FOOT_OFF: 3,
}
_EVENT_FROM_CODE = {v: k for k, v in _EVENT_CODES.items()}

_TARGET_CODES = {t: i for i, t in enumerate(ActuatorTarget)}
_TARGET_FROM_CODE = {i: t for t, i in _TARGET_CODES.items()}
_MODE_CODES = {m: i for i, m in enumerate(FeedbackMode)}
_MODE_FROM_CODE = {i: m for m, i in _MODE_CODES.items()}


class TelemetryError(GaitCoreError):
    pass


class TruncatedInputError(TelemetryError):
    pass


class BadMagicError(TelemetryError):
    pass


class UnsupportedVersionError(TelemetryError):
    pass


class LengthMismatchError(TelemetryError):
    pass


class CrcMismatchError(TelemetryError):
    pass


class ValueOutOfEncodableRangeError(TelemetryError):
    pass


class CorruptRecordingError(TelemetryError):
    pass


class TransportUnavailableError(TelemetryError):
    pass


def crc16_ccitt(data: bytes, crc: int = 0xFFFF) -> int:
    """CRC16-CCITT (poly 0x1021, init 0xFFFF, no reflection, no final xor)."""
    for byte in data:
        crc ^= byte << 8
        for _ in range(8):
            if crc & 0x8000:
                crc = ((crc << 1) ^ 0x1021) & 0xFFFF
            else:
                crc = (crc << 1) & 0xFFFF
    return crc


Payload = Union[SensorFrame, GaitEvent, VibrationCommand]


@dataclass(frozen=True)
class TelemetryPacket:
    packet_type: int
    device_id: int
    payload: Payload


def _wrap(packet_type: int, device_id: int, payload: bytes) -> bytes:
    header = _HEADER.pack(MAGIC, VERSION, packet_type, device_id & 0xFF, len(payload))
    return header + payload + _CRC.pack(crc16_ccitt(header + payload))


def encode_sensor_frame(frame: SensorFrame) -> bytes:
    """50-byte fixed-point payload wrapped in a telemetry packet."""
    accel_counts = []
    for a in frame.accel:
        c = round(a / GRAVITY_M_S2 / ACCEL_LSB_G)
        if abs(c) > 4000:
            raise ValueOutOfEncodableRangeError(f"accel {a} m/s^2 outside +-4 g")
        accel_counts.append(c)
    gyro_counts = []
    for w in frame.gyro:
        c = round(math.degrees(w) / GYRO_LSB_DPS)
        if abs(c) > 32000:
            raise ValueOutOfEncodableRangeError(f"gyro {w} rad/s outside +-2000 deg/s")
        gyro_counts.append(c)
    payload = _FRAME_PAYLOAD.pack(
        frame.timestamp_ms, *frame.fsr_raw, *accel_counts, *gyro_counts
    )
    return _wrap(TYPE_SENSOR_FRAME, frame.device_id, payload)


def encode_gait_event(event: GaitEvent, device_id: int = 1) -> bytes:
    payload = _EVENT_PAYLOAD.pack(event.timestamp_ms, _EVENT_CODES[event.kind])
    return _wrap(TYPE_GAIT_EVENT, device_id, payload)


def encode_vibration_command(cmd: VibrationCommand, device_id: int = 2) -> bytes:
    intensity = round(cmd.intensity * INTENSITY_SCALE)
    payload = _COMMAND_PAYLOAD.pack(
        cmd.timestamp_ms,
        _TARGET_CODES[cmd.target],
        _MODE_CODES[cmd.mode],
        intensity,
        cmd.pulse_on_ms,
        cmd.pulse_off_ms,
        cmd.duration_ms,
    )
    return _wrap(TYPE_VIBRATION_COMMAND, device_id, payload)


def decode_packet(data: bytes) -> TelemetryPacket:
    """Validate and decode one packet from an exact byte buffer.

    The CRC covers header and payload and is checked first, so corruption
    anywhere in the buffer reports CrcMismatchError; framing fields are only
    interpreted once the checksum passes.
    """
    if len(data) < _HEADER.size + _CRC.size:
        raise TruncatedInputError(f"packet needs >= {_HEADER.size + _CRC.size} bytes")
    (stored_crc,) = _CRC.unpack(data[-2:])
    if crc16_ccitt(data[:-2]) != stored_crc:
        raise CrcMismatchError("checksum mismatch")
    magic, version, packet_type, device_id, declared_len = _HEADER.unpack(
        data[: _HEADER.size]
    )
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    payload = data[_HEADER.size : -2]
    if declared_len != len(payload):
        raise LengthMismatchError(
            f"declared payload {declared_len} bytes, got {len(payload)}"
        )
    return TelemetryPacket(
        packet_type=packet_type,
        device_id=device_id,
        payload=_decode_payload(packet_type, device_id, payload),
    )


def _decode_payload(packet_type: int, device_id: int, payload: bytes) -> Payload:
    if packet_type == TYPE_SENSOR_FRAME:
        if len(payload) != _FRAME_PAYLOAD.size:
            raise LengthMismatchError("sensor frame payload must be 50 bytes")
        fields = _FRAME_PAYLOAD.unpack(payload)
        return SensorFrame(
            timestamp_ms=fields[0],
            fsr_raw=tuple(fields[1 : 1 + FSR_CHANNEL_COUNT]),
            accel=tuple(c * ACCEL_LSB_G * GRAVITY_M_S2 for c in fields[16:19]),
            gyro=tuple(math.radians(c * GYRO_LSB_DPS) for c in fields[19:22]),
            device_id=device_id,
        )
    if packet_type == TYPE_GAIT_EVENT:
        if len(payload) != _EVENT_PAYLOAD.size:
            raise LengthMismatchError("gait event payload must be 9 bytes")
        ts, code = _EVENT_PAYLOAD.unpack(payload)
        return GaitEvent(kind=_EVENT_FROM_CODE[code], timestamp_ms=ts)
    if packet_type == TYPE_VIBRATION_COMMAND:
        if len(payload) != _COMMAND_PAYLOAD.size:
            raise LengthMismatchError("vibration command payload must be 24 bytes")
        ts, target, mode, intensity, on_ms, off_ms, dur_ms = _COMMAND_PAYLOAD.unpack(payload)
        return VibrationCommand(
            target=_TARGET_FROM_CODE[target],
            mode=_MODE_FROM_CODE[mode],
            intensity=intensity / INTENSITY_SCALE,
            pulse_on_ms=on_ms,
            pulse_off_ms=off_ms,
            duration_ms=dur_ms,
            timestamp_ms=ts,
        )
    raise TelemetryError(f"unknown packet type {packet_type:#04x}")


class Device(Enum):
    ORTHOSIS = "orthosis"
    CRUTCH = "crutch"
    APP = "app"


class Stream(Enum):
    FRAMES = "frames"
    EVENTS = "events"
    FEEDBACK = "feedback"
    STATUS = "status"


def topic_for(device: Device, stream: Stream) -> str:
    """Deterministic `gait/{device}/{stream}` topic string."""
    return f"gait/{device.value}/{stream.value}"


# --- trial recording -------------------------------------------------------

def record_trial(packets: Iterable[bytes], sink: Union[str, Path, BinaryIO]) -> int:
    """Write length-prefixed packets to a recording file; returns the count."""
    own = isinstance(sink, (str, Path))
    fh: BinaryIO = open(sink, "wb") if own else sink  # type: ignore[arg-type]
    try:
        fh.write(RECORDING_MAGIC)
        count = 0
        for packet in packets:
            fh.write(struct.pack("<I", len(packet)))
            fh.write(packet)
            count += 1
        return count
    finally:
        if own:
            fh.close()


def read_recording(source: Union[str, Path, BinaryIO]) -> Iterator[bytes]:
    """Yield raw packets from a recording; packets before a truncation point
    are all delivered, then CorruptRecordingError is raised."""
    own = isinstance(source, (str, Path))
    fh: BinaryIO = open(source, "rb") if own else source  # type: ignore[arg-type]
    try:
        magic = fh.read(len(RECORDING_MAGIC))
        if magic != RECORDING_MAGIC:
            raise CorruptRecordingError(f"bad recording magic {magic!r}")
        while True:
            head = fh.read(4)
            if not head:
                return
            if len(head) < 4:
                raise CorruptRecordingError("truncated packet length")
            (length,) = struct.unpack("<I", head)
            body = fh.read(length)
            if len(body) < length:
                raise CorruptRecordingError("truncated packet body")
            yield body
    finally:
        if own:
            fh.close()


def _embedded_timestamp_ms(packet: bytes) -> Optional[int]:
    # Every payload starts with a u64 millisecond timestamp.
    if len(packet) >= _HEADER.size + 8:
        return struct.unpack_from("<Q", packet, _HEADER.size)[0]
    return None


def replay_trial(
    source: Union[str, Path, BinaryIO],
    speed: float = 1.0,
    sleep: Callable[[float], None] = time.sleep,
) -> Iterator[bytes]:
    """Re-emit recorded packets with inter-packet timing scaled by `speed`
    (1.0 = original pacing, 0 = as fast as possible). Timing is reconstructed
    from the payload timestamps."""
    if speed < 0:
        raise ValueError("speed multiplier must be >= 0")
    last_ts: Optional[int] = None
    for packet in read_recording(source):
        ts = _embedded_timestamp_ms(packet)
        if speed > 0 and ts is not None and last_ts is not None and ts > last_ts:
            sleep((ts - last_ts) / 1000.0 * speed)
        if ts is not None:
            last_ts = ts
        yield packet


# --- in-process pub/sub ----------------------------------------------------

class Subscription:
    """Ordered per-topic packet queue for one subscriber."""

    def __init__(self) -> None:
        self._queue: Queue = Queue()

    def get(self, timeout: Optional[float] = None) -> bytes:
        try:
            return self._queue.get(timeout=timeout)
        except Empty:
            raise TimeoutError("no message available")

    def drain(self) -> list[bytes]:
        items = []
        while True:
            try:
                items.append(self._queue.get_nowait())
            except Empty:
                return items


class LoopbackBus:
    """In-process pub/sub transport with per-topic publication order.

    Multiple publishers and subscribers may operate concurrently; delivery
    order is guaranteed per topic per publisher (the single lock makes it
    total per topic here).
    """

    def __init__(self) -> None:
        self._subscribers: dict[str, list[Subscription]] = {}
        self._lock = Lock()

    def subscribe(self, topic: str) -> Subscription:
        sub = Subscription()
        with self._lock:
            self._subscribers.setdefault(topic, []).append(sub)
        return sub

    def publish(self, topic: str, packet: bytes) -> None:
        with self._lock:
            subscribers = list(self._subscribers.get(topic, ()))
        for sub in subscribers:
            sub._queue.put(packet)


def open_transport(spec: str) -> LoopbackBus:
    """Open the transport named by a CLI-style spec.

    `loopback` always works. `mqtt://host:port` requires an optional MQTT
    client library and a reachable broker; otherwise TransportUnavailableError
    is raised (streams are topic-addressed and transport-agnostic, so tests
    and offline runs use the loopback bus).
    """
    if spec == "loopback":
        return LoopbackBus()
    if spec.startswith("mqtt://"):
        raise TransportUnavailableError(
            f"no MQTT client available for {spec}; use the loopback transport"
        )
    raise TransportUnavailableError(f"unknown transport {spec!r}")
