"""Spatio-temporal voxel-grid event representation.

A fixed batch of events is rendered into a B x H x W grid: each event's
timestamp is rescaled to the bin axis and its polarity deposited into
the two nearest bins with bilinear weights, so every event contributes
exactly its polarity in total mass.  Grids are exported as flat binary
tensors for downstream (network) consumers; normalization is left to
those consumers.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .events import EventStream

VOXEL_MAGIC = b"CEVTVOX1"
_VOXEL_HEADER = struct.Struct("<IIIQQ")  # bins, height, width, t_start, t_end


@dataclass(frozen=True)
class VoxelGrid:
    """B x H x W signed event-mass grid spanning [t_start, t_end]."""

    values: np.ndarray
    t_start: int
    t_end: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 3:
            raise ValueError("voxel values must be a (bins, H, W) array")
        if not np.isfinite(arr).all():
            raise ValueError("voxel grid contains non-finite values")
        if self.t_end < self.t_start:
            raise ValueError("t_end must not precede t_start")
        object.__setattr__(self, "values", arr)

    @property
    def bins(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]


def voxelize(batch: EventStream, bins: int = 5) -> VoxelGrid:
    """Render one event batch into a spatio-temporal voxel grid.

    Bin coordinates run from 0 at the batch's first event to bins - 1 at
    its last; a zero-duration batch puts all mass in the final bin.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    if len(batch) == 0:
        raise ValueError("cannot voxelize an empty batch")
    t_start = int(batch.t[0])
    t_end = int(batch.t[-1])
    grid = np.zeros((bins, batch.height, batch.width))
    pol = batch.p.astype(np.float64)
    if t_end == t_start:
        np.add.at(grid, (np.full(len(batch), bins - 1), batch.y, batch.x), pol)
        return VoxelGrid(grid, t_start, t_end)
    t_star = (batch.t - t_start) / (t_end - t_start) * (bins - 1)
    b0 = np.floor(t_star).astype(np.int64)
    frac = t_star - b0
    # deposit (lo, hi) per event in stream order so accumulation matches
    # a per-event walk bit for bit
    bs = np.stack([b0, b0 + 1], axis=1).ravel()
    ys = np.repeat(batch.y, 2)
    xs = np.repeat(batch.x, 2)
    ws = np.stack([pol * (1.0 - frac), pol * frac], axis=1).ravel()
    valid = bs < bins
    np.add.at(grid, (bs[valid], ys[valid], xs[valid]), ws[valid])
    return VoxelGrid(grid, t_start, t_end)


def batch_events(stream: EventStream, batch_size: int):
    """Cut a stream into consecutive full batches plus the leftover tail."""
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    n_full = len(stream) // batch_size
    batches = [stream.slice(k * batch_size, (k + 1) * batch_size)
               for k in range(n_full)]
    tail = stream.slice(n_full * batch_size, len(stream))
    return batches, tail


def write_voxel_grid(grid: VoxelGrid, path) -> None:
    """Write a grid as magic + (bins, H, W, t_start, t_end) + f32 LE data."""
    with open(path, "wb") as f:
        f.write(VOXEL_MAGIC)
        f.write(_VOXEL_HEADER.pack(grid.bins, grid.height, grid.width,
                                   grid.t_start, grid.t_end))
        f.write(np.ascontiguousarray(grid.values, dtype="<f4").tobytes())


def read_voxel_grid(path) -> VoxelGrid:
    """Read a grid written by :func:`write_voxel_grid`."""
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:8] != VOXEL_MAGIC:
        raise ValueError(f"{path}: not a voxel tensor file")
    if len(raw) < 8 + _VOXEL_HEADER.size:
        raise ValueError(f"{path}: truncated header")
    bins, h, w, t_start, t_end = _VOXEL_HEADER.unpack_from(raw, 8)
    body = raw[8 + _VOXEL_HEADER.size:]
    expect = bins * h * w * 4
    if len(body) != expect:
        raise ValueError(f"{path}: expected {expect} data bytes, got {len(body)}")
    values = np.frombuffer(body, dtype="<f4").astype(np.float64)
    return VoxelGrid(values.reshape(bins, h, w), t_start, t_end)
