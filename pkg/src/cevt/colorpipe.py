"""From single-channel reconstructions to RGB.

Two color routes match the two reconstruction styles:

* Full resolution: per-pixel filters leave the Bayer mosaic intact, so
  a raw mosaic estimate is demosaiced (bilinear) into RGB.

* Quarter resolution: spatially-smoothed reconstructions destroy the
  mosaic, so events are first split per Bayer channel onto quarter
  grids, each channel is reconstructed independently, upsampled 2x
  (bicubic, Catmull-Rom), shifted into geometric alignment, and the two
  green channels are fused by their mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .events import BayerPattern, ColorChannel, EventStream, Frame
from .parallel import run_parallel, thread_count

# Catmull-Rom kernel weights for the two 2x-upsampling phases.
# Even outputs sample at source offset -0.25 (taps i-2..i+1), odd outputs
# at +0.25 (taps i-1..i+2).
_CR_EVEN = (-0.0234375, 0.2265625, 0.8671875, -0.0703125)
_CR_ODD = (-0.0703125, 0.8671875, 0.2265625, -0.0234375)

# Fixed accumulation order over the 8-neighborhood; the neighbor-average
# contract is defined in this (dy, dx) scan order.
NEIGHBOR_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, -1),
                    (0, 1), (1, -1), (1, 0), (1, 1))


@dataclass(frozen=True)
class ChannelStreams:
    """The four per-channel quarter-resolution event streams."""

    r: EventStream
    g1: EventStream
    g2: EventStream
    b: EventStream

    def __getitem__(self, channel: ColorChannel) -> EventStream:
        return {ColorChannel.R: self.r, ColorChannel.G1: self.g1,
                ColorChannel.G2: self.g2, ColorChannel.B: self.b}[channel]

    def __iter__(self):
        return iter((self.r, self.g1, self.g2, self.b))


def split_by_channel(events: EventStream) -> ChannelStreams:
    """Route each event to its Bayer channel's quarter-resolution grid."""
    if events.pattern is None:
        raise ValueError("stream carries no Bayer pattern")
    qw = -(-events.width // 2)
    qh = -(-events.height // 2)
    codes = events.pattern.channel_code(events.x, events.y)
    streams = {}
    for ch in ColorChannel:
        pick = codes == ch.value
        t = events.t[pick]
        x = events.x[pick] // 2
        y = events.y[pick] // 2
        p = events.p[pick]
        order = np.lexsort((p, x, y, t))
        streams[ch] = EventStream(qw, qh, None, t[order], x[order],
                                  y[order], p[order], _skip_checks=True)
    return ChannelStreams(streams[ColorChannel.R], streams[ColorChannel.G1],
                          streams[ColorChannel.G2], streams[ColorChannel.B])


def _upsample_axis(arr: np.ndarray, axis: int) -> np.ndarray:
    """Double one axis with Catmull-Rom interpolation, edge-clamped."""
    n = arr.shape[axis]
    base = np.arange(n)
    taps = [np.clip(base + k, 0, n - 1) for k in (-2, -1, 0, 1)]
    take = lambda idx: np.take(arr, idx, axis=axis)
    even = sum(w * take(t) for w, t in zip(_CR_EVEN, taps))
    taps = [np.clip(base + k, 0, n - 1) for k in (-1, 0, 1, 2)]
    odd = sum(w * take(t) for w, t in zip(_CR_ODD, taps))
    out_shape = list(arr.shape)
    out_shape[axis] = 2 * n
    out = np.empty(out_shape)
    sl = [slice(None)] * arr.ndim
    sl[axis] = slice(0, None, 2)
    out[tuple(sl)] = even
    sl[axis] = slice(1, None, 2)
    out[tuple(sl)] = odd
    return out


def upsample_bicubic(img: Frame, factor: int = 2) -> Frame:
    """2x bicubic (Catmull-Rom, a = -0.5) upsampling of a single channel.

    Output pixel centers follow the usual half-pixel convention
    (source = (dest + 0.5) / factor - 0.5); borders are edge-clamped.
    """
    if img.channels != 1:
        raise ValueError("upsample_bicubic expects a single-channel frame")
    if factor != 2:
        raise ValueError("only factor 2 is supported")
    out = _upsample_axis(_upsample_axis(img.pixels, 0), 1)
    return Frame(img.t, out)


def _translate(arr: np.ndarray, tx: int, ty: int) -> np.ndarray:
    """Shift content by (tx, ty) pixels; vacated borders edge-replicate."""
    h, w = arr.shape
    ys = np.clip(np.arange(h) - ty, 0, h - 1)
    xs = np.clip(np.arange(w) - tx, 0, w - 1)
    return arr[np.ix_(ys, xs)]


def align_channels(r: Frame, g1: Frame, g2: Frame, b: Frame,
                   pattern: BayerPattern):
    """Undo the one-pixel Bayer-site offsets between upsampled channels.

    Each channel is translated by the negation of its in-tile site, so
    the four planes land on a common grid; vacated borders replicate.
    """
    frames = {ColorChannel.R: r, ColorChannel.G1: g1,
              ColorChannel.G2: g2, ColorChannel.B: b}
    shape = r.pixels.shape
    for f in frames.values():
        if f.pixels.shape != shape:
            raise ValueError("channel frames must share dimensions")
    out = []
    for ch, f in frames.items():
        sx, sy = pattern.site_of(ch)
        out.append(Frame(f.t, _translate(f.pixels, -sx, -sy)))
    return tuple(out)


def fuse_rgb(r: Frame, g1: Frame, g2: Frame, b: Frame) -> Frame:
    """Stack aligned channels into RGB, averaging the two greens."""
    shape = r.pixels.shape
    for f in (g1, g2, b):
        if f.pixels.shape != shape:
            raise ValueError("channel frames must share dimensions")
    g = (g1.pixels + g2.pixels) / 2.0
    return Frame(r.t, np.stack([r.pixels, g, b.pixels], axis=-1))


def demosaic_bilinear(mosaic: Frame, pattern: BayerPattern) -> Frame:
    """Bilinear Bayer demosaicing of a full-resolution mosaic.

    Sensed sites pass through unchanged; each missing color is the mean
    of the same-color sites in the 8-neighborhood (2 or 4 of them),
    accumulated in NEIGHBOR_OFFSETS order.  The border ring is served by
    an edge-replicated pad, so boundary estimates are approximate.
    """
    if mosaic.channels != 1:
        raise ValueError("demosaic_bilinear expects a single-channel mosaic")
    h, w = mosaic.pixels.shape
    padded = np.pad(mosaic.pixels, 1, mode="edge")
    yy, xx = np.indices((h + 2, w + 2))
    codes = pattern.channel_code(xx - 1, yy - 1)

    core = (slice(1, h + 1), slice(1, w + 1))
    planes = []
    for targets in ((ColorChannel.R,), (ColorChannel.G1, ColorChannel.G2),
                    (ColorChannel.B,)):
        mask = np.isin(codes, [ch.value for ch in targets]).astype(np.float64)
        vals = padded * mask
        num = np.zeros((h, w))
        cnt = np.zeros((h, w))
        for dy, dx in NEIGHBOR_OFFSETS:
            num += vals[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx]
            cnt += mask[1 + dy:h + 1 + dy, 1 + dx:w + 1 + dx]
        sensed = mask[core].astype(bool)
        # cnt is zero only at sensed sites, which take the mosaic directly
        filled = np.divide(num, cnt, out=np.zeros_like(num), where=cnt > 0)
        planes.append(np.where(sensed, mosaic.pixels, filled))
    return Frame(mosaic.t, np.stack(planes, axis=-1))


def reconstruct_color_quarter(events: EventStream, reconstructor,
                              sample_ts) -> list[Frame]:
    """Quarter-resolution color reconstruction.

    ``reconstructor(stream, sample_ts) -> list[Frame]`` runs once per
    Bayer channel (channels may run on parallel workers); each sampled
    quarter frame is then upsampled, aligned and fused into RGB, cropped
    back to the sensor size when the dimensions are odd.
    """
    if events.pattern is None:
        raise ValueError("stream carries no Bayer pattern")
    pattern = events.pattern
    chans = split_by_channel(events)
    per_channel = run_parallel(lambda s: reconstructor(s, sample_ts),
                               list(chans), thread_count())
    counts = {len(fr) for fr in per_channel}
    if counts != {len(list(sample_ts))}:
        raise ValueError("reconstructor must return one frame per sample time")
    out = []
    for k in range(len(per_channel[0])):
        ups = [upsample_bicubic(fr[k]) for fr in per_channel]
        r, g1, g2, b = align_channels(*ups, pattern)
        rgb = fuse_rgb(r, g1, g2, b)
        out.append(Frame(rgb.t, rgb.pixels[:events.height, :events.width]))
    return out
