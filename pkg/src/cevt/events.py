"""Core value types: events, frames and the RGBG Bayer geometry.

Everything downstream (simulation, filtering, the color pipeline) is built
on the three value types defined here: :class:`Event` / :class:`EventStream`
for the asynchronous data, :class:`Frame` for images, and
:class:`BayerPattern` for the 2x2 color filter array geometry.

Conventions:
    * timestamps are integer microseconds since the stream origin,
    * event polarity is +1 (ON) or -1 (OFF),
    * streams are kept in canonical order: ascending (t, y, x, polarity),
    * frame pixels are row-major float arrays; camera input frames are
      linear-light values in [0, 1] (8-bit files are divided by 255 on
      ingestion), while reconstruction outputs reuse the same container
      with log-intensity values.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

# Sentinel for "no event emitted yet" timestamps; far enough in the past
# that any refractory comparison passes without int64 overflow.
NO_EVENT_T = -(1 << 62)


class ColorChannel(Enum):
    """The four Bayer sites: G1 is green on the red row, G2 on the blue row."""

    R = 0
    G1 = 1
    G2 = 2
    B = 3


# Canonical 2x2 tile (phase 0, 0): row 0 = [R, G1], row 1 = [G2, B].
_TILE_CODES = np.array([[ColorChannel.R.value, ColorChannel.G1.value],
                        [ColorChannel.G2.value, ColorChannel.B.value]],
                       dtype=np.int8)

# RGB component index sampled through each filter site.
_RGB_COMPONENT = np.array([0, 1, 1, 2], dtype=np.int8)

# In-tile (x, y) site of each channel in the canonical phase.
_CANONICAL_SITE = {
    ColorChannel.R: (0, 0),
    ColorChannel.G1: (1, 0),
    ColorChannel.G2: (0, 1),
    ColorChannel.B: (1, 1),
}


@dataclass(frozen=True)
class BayerPattern:
    """RGBG color filter array with a configurable 2x2 phase.

    The canonical phase puts red at (0, 0), so row 0 of the tile reads
    [R, G1] and row 1 reads [G2, B].  ``phase_x`` / ``phase_y`` shift the
    tile so sensors whose top-left pixel is not red can be described.
    """

    phase_x: int = 0
    phase_y: int = 0

    def __post_init__(self):
        if self.phase_x not in (0, 1) or self.phase_y not in (0, 1):
            raise ValueError("Bayer phase offsets must be 0 or 1")

    def channel_code(self, x, y):
        """Integer channel code at pixel (x, y); accepts scalars or arrays."""
        xi = (np.asarray(x) + self.phase_x) % 2
        yi = (np.asarray(y) + self.phase_y) % 2
        return _TILE_CODES[yi, xi]

    def channel_of(self, x: int, y: int) -> ColorChannel:
        """Color channel sensed at pixel (x, y)."""
        if x < 0 or y < 0:
            raise ValueError("pixel coordinates must be non-negative")
        return ColorChannel(int(self.channel_code(x, y)))

    def site_of(self, channel: ColorChannel) -> tuple[int, int]:
        """In-tile (x, y) offset where ``channel`` sits under this phase."""
        cx, cy = _CANONICAL_SITE[channel]
        return (cx - self.phase_x) % 2, (cy - self.phase_y) % 2

    def tile(self) -> tuple[tuple[ColorChannel, ...], ...]:
        """The 2x2 tile as nested tuples, rows top to bottom."""
        return tuple(
            tuple(ColorChannel(int(self.channel_code(x, y))) for x in (0, 1))
            for y in (0, 1)
        )

    def channel_masks(self, height: int, width: int) -> dict[ColorChannel, np.ndarray]:
        """Boolean site masks of shape (height, width), one per channel."""
        yy, xx = np.indices((height, width))
        codes = self.channel_code(xx, yy)
        return {ch: codes == ch.value for ch in ColorChannel}

    def rgb_component(self, x, y):
        """RGB component index (0, 1 or 2) sampled at (x, y); array-friendly."""
        return _RGB_COMPONENT[self.channel_code(x, y)]


def channel_of(x: int, y: int, pattern: BayerPattern) -> ColorChannel:
    """Color channel sensed at pixel (x, y) under ``pattern``."""
    return pattern.channel_of(x, y)


def to_quarter(x: int, y: int, pattern: BayerPattern) -> tuple[ColorChannel, int, int]:
    """Map a full-resolution pixel to its channel and quarter-grid address."""
    return pattern.channel_of(x, y), x // 2, y // 2


@dataclass(frozen=True)
class Event:
    """One asynchronous brightness-change record."""

    t: int
    x: int
    y: int
    polarity: int

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("event timestamp must be non-negative")
        if self.x < 0 or self.y < 0:
            raise ValueError("event coordinates must be non-negative")
        if self.polarity not in (-1, 1):
            raise ValueError("polarity must be +1 or -1")

    def sort_key(self) -> tuple[int, int, int, int]:
        """Canonical stream ordering key: (t, y, x, polarity)."""
        return self.t, self.y, self.x, self.polarity


@dataclass(frozen=True)
class Frame:
    """A timestamped image: (H, W) single-channel or (H, W, 3) RGB."""

    t: int
    pixels: np.ndarray

    def __post_init__(self):
        if self.t < 0:
            raise ValueError("frame timestamp must be non-negative")
        arr = np.asarray(self.pixels, dtype=np.float64)
        if arr.ndim not in (2, 3) or (arr.ndim == 3 and arr.shape[2] != 3):
            raise ValueError("pixels must have shape (H, W) or (H, W, 3)")
        if not np.isfinite(arr).all():
            raise ValueError("frame contains non-finite values")
        object.__setattr__(self, "pixels", arr)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return 1 if self.pixels.ndim == 2 else 3


class EventStream:
    """An ordered event stream tied to a sensor geometry.

    Events are stored as parallel numpy arrays (t, x, y, p) kept in
    canonical order: ascending (t, y, x, polarity).  Arrays are marked
    read-only; streams are safe to share across workers.
    """

    __slots__ = ("width", "height", "pattern", "t", "x", "y", "p")

    def __init__(self, width, height, pattern, t, x, y, p,
                 sort=False, _skip_checks=False):
        self.width = int(width)
        self.height = int(height)
        self.pattern = pattern
        self.t = np.asarray(t, dtype=np.int64)
        self.x = np.asarray(x, dtype=np.int32)
        self.y = np.asarray(y, dtype=np.int32)
        self.p = np.asarray(p, dtype=np.int8)
        if not _skip_checks:
            self._validate(sort)
        for arr in (self.t, self.x, self.y, self.p):
            arr.flags.writeable = False

    def _validate(self, sort):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("sensor dimensions must be positive")
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ValueError("event field arrays must have equal length")
        if n == 0:
            return
        if self.t.min() < 0:
            raise ValueError("event timestamps must be non-negative")
        if self.x.min() < 0 or self.x.max() >= self.width:
            raise ValueError("event x out of sensor bounds")
        if self.y.min() < 0 or self.y.max() >= self.height:
            raise ValueError("event y out of sensor bounds")
        if not np.isin(self.p, (-1, 1)).all():
            raise ValueError("polarities must be +1 or -1")
        order = np.lexsort((self.p, self.x, self.y, self.t))
        if not np.array_equal(order, np.arange(n)):
            if not sort:
                raise ValueError("events are not in canonical (t, y, x, polarity) order")
            self.t = self.t[order]
            self.x = self.x[order]
            self.y = self.y[order]
            self.p = self.p[order]

    @classmethod
    def empty(cls, width, height, pattern=None):
        z = np.zeros(0)
        return cls(width, height, pattern, z, z, z, z, _skip_checks=True)

    @classmethod
    def from_events(cls, width, height, pattern, events, sort=False):
        """Build a stream from an iterable of :class:`Event`."""
        events = list(events)
        return cls(width, height, pattern,
                   [e.t for e in events], [e.x for e in events],
                   [e.y for e in events], [e.polarity for e in events],
                   sort=sort)

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self):
        for t, x, y, p in zip(self.t.tolist(), self.x.tolist(),
                              self.y.tolist(), self.p.tolist()):
            yield Event(t, x, y, p)

    def __eq__(self, other):
        if not isinstance(other, EventStream):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and self.pattern == other.pattern
                and np.array_equal(self.t, other.t)
                and np.array_equal(self.x, other.x)
                and np.array_equal(self.y, other.y)
                and np.array_equal(self.p, other.p))

    @property
    def duration_us(self) -> int:
        """Time span between first and last event (0 if fewer than 2 events)."""
        return int(self.t[-1] - self.t[0]) if len(self) > 1 else 0

    def slice(self, start: int, stop: int) -> "EventStream":
        """Contiguous sub-stream [start:stop); shares the same geometry."""
        return EventStream(self.width, self.height, self.pattern,
                           self.t[start:stop], self.x[start:stop],
                           self.y[start:stop], self.p[start:stop],
                           _skip_checks=True)
