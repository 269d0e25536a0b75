"""Plantar pressure heatmap rasterization and Turbo-colored PPM export.

Channel forces are splatted onto a W x H grid over the normalized insole
outline with a Gaussian kernel. Each channel's kernel is normalized to unit
mass after truncation at the grid edge, so the grid sum equals the splatted
total force exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .conditioning import ForceFrame
from .events import GaitEvent, GaitEventKind
from .types import FSR_CHANNEL_COUNT, GaitCoreError, RegionMap

GRID_WIDTH_DEFAULT = 40
GRID_HEIGHT_DEFAULT = 96
SPLAT_SIGMA_CELLS = 1.5


class EventNotFoundError(GaitCoreError):
    pass


@dataclass(frozen=True)
class HeatmapGrid:
    """Scalar pressure grid; values[row][col], row 0 at the heel end."""

    width: int
    height: int
    values: np.ndarray

    @property
    def total(self) -> float:
        return float(self.values.sum())


def splat_forces(
    forces: Sequence[float],
    region_map: Optional[RegionMap] = None,
    width: int = GRID_WIDTH_DEFAULT,
    height: int = GRID_HEIGHT_DEFAULT,
    sigma_cells: float = SPLAT_SIGMA_CELLS,
) -> HeatmapGrid:
    """Rasterize 15 channel forces at their insole coordinates."""
    region_map = region_map or RegionMap()
    if len(forces) != FSR_CHANNEL_COUNT:
        raise ValueError(f"expected {FSR_CHANNEL_COUNT} channel forces")
    grid = np.zeros((height, width))
    cols = np.arange(width) + 0.5
    rows = np.arange(height) + 0.5
    for force, (x, y) in zip(forces, region_map.coordinates):
        if force <= 0:
            continue
        cx, cy = x * width, y * height
        gx = np.exp(-0.5 * ((cols - cx) / sigma_cells) ** 2)
        gy = np.exp(-0.5 * ((rows - cy) / sigma_cells) ** 2)
        kernel = np.outer(gy, gx)
        mass = kernel.sum()
        if mass > 0:
            grid += force * kernel / mass
    return HeatmapGrid(width=width, height=height, values=grid)


def grid_at_event(
    force_frames: Sequence[ForceFrame],
    events: Sequence[GaitEvent],
    kind: GaitEventKind,
    region_map: Optional[RegionMap] = None,
    occurrence: int = 0,
    **grid_kwargs,
) -> HeatmapGrid:
    """Pressure distribution at the n-th occurrence of a gait event."""
    matches = [e for e in events if e.kind is kind]
    if occurrence >= len(matches):
        raise EventNotFoundError(
            f"no occurrence {occurrence} of {kind.value} in the trial"
        )
    ts = matches[occurrence].timestamp_ms
    frame = next((f for f in force_frames if f.timestamp_ms == ts), None)
    if frame is None:
        raise EventNotFoundError(f"no force frame at event time {ts} ms")
    return splat_forces(frame.force, region_map, **grid_kwargs)


def cumulative_grid(
    force_frames: Sequence[ForceFrame],
    region_map: Optional[RegionMap] = None,
    **grid_kwargs,
) -> HeatmapGrid:
    """Per-cell time integral of pressure over the trial (N*s per cell)."""
    region_map = region_map or RegionMap()
    if not force_frames:
        raise ValueError("need at least one frame")
    integral = np.zeros(FSR_CHANNEL_COUNT)
    prev_ts = force_frames[0].timestamp_ms
    for frame in force_frames:
        dt_s = (frame.timestamp_ms - prev_ts) / 1000.0
        integral += np.asarray(frame.force) * dt_s
        prev_ts = frame.timestamp_ms
    return splat_forces(integral, region_map, **grid_kwargs)


def write_grid_csv(path: str | Path, grid: HeatmapGrid) -> None:
    np.savetxt(path, grid.values, delimiter=",", fmt="%.6g")


def turbo_lut() -> np.ndarray:
    """256-entry RGB lookup table of the Turbo colormap (uint8)."""
    from matplotlib import colormaps

    cmap = colormaps["turbo"]
    table = cmap(np.linspace(0.0, 1.0, 256))[:, :3]
    return (table * 255.0 + 0.5).astype(np.uint8)


def write_grid_ppm(path: str | Path, grid: HeatmapGrid) -> None:
    """Render the grid through the Turbo lookup table as a binary PPM."""
    lut = turbo_lut()
    peak = grid.values.max()
    normalized = grid.values / peak if peak > 0 else grid.values
    indices = (normalized * 255.0 + 0.5).astype(np.uint8)
    pixels = lut[indices]
    with open(path, "wb") as fh:
        fh.write(f"P6\n{grid.width} {grid.height}\n255\n".encode())
        fh.write(pixels.tobytes())
