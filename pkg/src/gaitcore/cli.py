"""Command-line harness: simulate, analyze, validate, stream, heatmap.

Exit codes: 0 success, 2 input/config error, 3 no complete gait cycle,
4 transport unavailable. The engine config path may also come from the
GAITCORE_CONFIG environment variable.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import telemetry
from .accuracy import (
    TrialMismatchError,
    format_summary_table,
    summarize,
    write_summary_json,
)
from .events import GaitEventKind, write_events_csv
from .fusion import write_trajectory_csv
from .heatmap import (
    EventNotFoundError,
    cumulative_grid,
    grid_at_event,
    write_grid_csv,
    write_grid_ppm,
)
from .params import NoCompleteCycleError, write_report_csv, write_report_json
from .pipeline import EngineConfig, FrameValidationError, GaitPipeline, analyze_frames
from .simulator import (
    InvalidProfileError,
    SimProfile,
    read_truth_json,
    synthesize_trial,
    write_truth_json,
)
from .telemetry import (
    Device,
    Stream,
    TransportUnavailableError,
    decode_packet,
    encode_sensor_frame,
    encode_vibration_command,
    open_transport,
    read_recording,
    record_trial,
    replay_trial,
    topic_for,
)
from .types import CsvFormatError, GaitCoreError, SensorFrame, read_frames_csv, write_frames_csv

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NO_CYCLE = 3
EXIT_TRANSPORT = 4


def _load_config(path: Optional[str]) -> EngineConfig:
    path = path or os.environ.get("GAITCORE_CONFIG")
    if path is None:
        return EngineConfig()
    return EngineConfig.from_file(path)


def _load_frames(path: Path) -> list[SensorFrame]:
    if path.suffix == ".gcrec":
        frames = []
        for packet in read_recording(path):
            decoded = decode_packet(packet)
            if decoded.packet_type == telemetry.TYPE_SENSOR_FRAME:
                frames.append(decoded.payload)
        return frames
    return read_frames_csv(path)


def cmd_simulate(args: argparse.Namespace) -> int:
    profile = SimProfile.from_file(args.profile) if args.profile else SimProfile()
    frames, truth = synthesize_trial(profile, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_frames_csv(out / "trial.csv", frames)
    record_trial((encode_sensor_frame(f) for f in frames), out / "trial.gcrec")
    write_truth_json(out / "truth.json", truth)
    print(f"simulated {len(frames)} frames, {len(truth.cycles)} cycles -> {out}")
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    frames = _load_frames(Path(args.input))
    result, report = analyze_frames(frames, config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_report_json(out / "report.json", report)
    write_events_csv(out / "events.csv", result.events)
    write_trajectory_csv(out / "trajectory.csv", result.trajectory)
    if args.format == "csv":
        write_report_csv(out / "report.csv", report)
    print(
        f"analyzed {report.frame_count} frames: {len(report.cycles)} cycles, "
        f"cadence {report.cadence_cycles_per_min:.1f} cycles/min, "
        f"stability {report.stability.index:.3f} -> {out}"
    )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    if len(args.files) % 2 != 0:
        raise TrialMismatchError("validate expects truth/report path pairs")
    pairs = []
    for i in range(0, len(args.files), 2):
        truth = read_truth_json(args.files[i])
        with open(args.files[i + 1]) as fh:
            report = json.load(fh)
        pairs.append((truth, report))
    summary = summarize(pairs)
    print(format_summary_table(summary))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_summary_json(out / "accuracy.json", summary)
        print(f"written -> {out / 'accuracy.json'}")
    return EXIT_OK


def cmd_stream(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    bus = open_transport(args.transport)
    frame_topic = topic_for(Device.ORTHOSIS, Stream.FRAMES)
    feedback_topic = topic_for(Device.CRUTCH, Stream.FEEDBACK)
    feedback_sub = bus.subscribe(feedback_topic)

    pipeline = GaitPipeline(config)
    published_commands = 0
    for packet in replay_trial(args.input, speed=args.speed):
        bus.publish(frame_topic, packet)
        decoded = decode_packet(packet)
        if decoded.packet_type != telemetry.TYPE_SENSOR_FRAME:
            continue
        _, _, _, commands, alert = pipeline.step(decoded.payload)
        if alert is not None:
            print(
                f"[t={alert.timestamp_ms} ms] {alert.source.value}: "
                f"observed {alert.observed_load:.2f} > threshold {alert.threshold:.2f}"
            )
        for command in commands:
            bus.publish(feedback_topic, encode_vibration_command(command))
            published_commands += 1
    delivered = len(feedback_sub.drain())
    print(f"stream complete: {published_commands} feedback commands published")
    return EXIT_OK


def cmd_heatmap(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    frames = _load_frames(Path(args.input))
    pipeline = GaitPipeline(config)
    result = pipeline.run(frames)
    if args.at == "cumulative":
        grid = cumulative_grid(result.force_frames)
    else:
        kind = GaitEventKind(args.at)
        grid = grid_at_event(result.force_frames, result.events, kind)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_grid_csv(out / "heatmap.csv", grid)
    write_grid_ppm(out / "heatmap.ppm", grid)
    print(f"heatmap ({args.at}) sum {grid.total:.3f} -> {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitcore",
        description="Streaming gait analysis engine with a synthetic-gait oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="generate a synthetic trial + ground truth")
    p_sim.add_argument("--profile", help="simulation profile JSON")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", default="out")
    p_sim.set_defaults(func=cmd_simulate)

    p_an = sub.add_parser("analyze", help="run the full pipeline on a trial")
    p_an.add_argument("input", help="trial CSV or .gcrec recording")
    p_an.add_argument("--config", help="engine config JSON (or GAITCORE_CONFIG)")
    p_an.add_argument("--out", default="out")
    p_an.add_argument("--format", choices=["json", "csv"], default="json",
                      help="csv additionally writes the flat report table")
    p_an.set_defaults(func=cmd_analyze)

    p_val = sub.add_parser("validate", help="compare reports against ground truth")
    p_val.add_argument("files", nargs="+", help="truth.json report.json [pairs...]")
    p_val.add_argument("--out", help="directory for accuracy.json")
    p_val.set_defaults(func=cmd_validate)

    p_str = sub.add_parser("stream", help="replay a recording onto the telemetry bus")
    p_str.add_argument("input", help=".gcrec recording")
    p_str.add_argument("--transport", default="loopback",
                       help="loopback or mqtt://host:port")
    p_str.add_argument("--speed", type=float, default=0.0,
                       help="inter-packet time scale: 1 = recorded pacing, 0 = fastest")
    p_str.add_argument("--config", help="engine config JSON")
    p_str.set_defaults(func=cmd_stream)

    p_hm = sub.add_parser("heatmap", help="export a pressure heatmap grid")
    p_hm.add_argument("input", help="trial CSV or .gcrec recording")
    p_hm.add_argument("--at", default="cumulative",
                      choices=[k.value for k in GaitEventKind] + ["cumulative"])
    p_hm.add_argument("--config", help="engine config JSON")
    p_hm.add_argument("--out", default="out")
    p_hm.set_defaults(func=cmd_heatmap)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except NoCompleteCycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_CYCLE
    except TransportUnavailableError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_TRANSPORT
    except (
        InvalidProfileError,
        CsvFormatError,
        TrialMismatchError,
        EventNotFoundError,
        FrameValidationError,
        FileNotFoundError,
        json.JSONDecodeError,
        GaitCoreError,
        ValueError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
