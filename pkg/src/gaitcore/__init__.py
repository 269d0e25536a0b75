"""gaitcore: streaming gait analysis from plantar pressure + inertial data.

Pipeline stages: raw frame validation, signal conditioning (divider-model
force conversion, smoothing, per-channel Kalman filters), rule-based gait
event detection, Mahony orientation fusion with zero-velocity updates, gait
parameter extraction with a stability index, haptic feedback planning, and a
binary telemetry layer. A synthetic-gait simulator with exact ground truth
serves as the validation oracle.
"""

from .accuracy import AccuracySummary, accuracy_pct, summarize
from .conditioning import (
    ConditioningConfig,
    ForceFrame,
    ImuFrame,
    MovingAverage,
    ScalarKalman,
    SignalConditioner,
    adc_to_voltage,
    estimate_imu_bias,
    force_from_resistance,
    moving_average,
    resistance_from_voltage,
)
from .events import (
    GaitEvent,
    GaitEventFsm,
    GaitEventKind,
    GaitPhase,
    ThresholdConfig,
    detect_events,
)
from .feedback import (
    ActuatorTarget,
    AlertSource,
    FeedbackConfig,
    FeedbackEvaluator,
    FeedbackMode,
    OverloadAlert,
    VibrationCommand,
    plan_pattern,
    render_timeline,
    rotation_intensity,
)
from .fusion import (
    FusionConfig,
    MotionFusion,
    OrientationState,
    from_euler,
    mahony_update,
    to_euler,
    zvu_integrate,
)
from .params import (
    GaitCycleRecord,
    GaitReport,
    StabilityConfig,
    StabilityResult,
    build_report,
    cadence,
    mean_plantar_pressure,
    segment_cycles,
    spatial_params,
    stability_index,
    temporal_params,
)
from .pipeline import EngineConfig, GaitPipeline, analyze_frames
from .simulator import (
    GroundTruth,
    SimProfile,
    add_noise,
    add_stuck_channel,
    inject_overload,
    synthesize_trial,
)
from .telemetry import (
    Device,
    LoopbackBus,
    Stream,
    decode_packet,
    encode_gait_event,
    encode_sensor_frame,
    encode_vibration_command,
    record_trial,
    replay_trial,
    topic_for,
)
from .types import (
    CalibrationProfile,
    FrameRejection,
    Region,
    RegionMap,
    SensorFrame,
    read_frames_csv,
    region_of,
    validate_frame,
    write_frames_csv,
)

__version__ = "0.1.0"
