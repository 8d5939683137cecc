"""Color event simulation from RGB frame sequences.

RGB frames are passed through the Bayer color filter array (each pixel
keeps only its filter's component), converted to log intensity, and fed
to a per-pixel contrast-threshold event generator: log intensity is
modeled as piecewise linear between frames, and an event fires each time
the interpolated signal moves a full threshold away from the pixel's
reference level.  The reference then steps by one threshold, so a ramp
of k thresholds yields k events at the interpolated crossing times.

Crossing times are floored to integer microseconds.  Events suppressed
by the refractory period still step the reference, so a muted pixel does
not burst-catch-up when it becomes active again.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .events import NO_EVENT_T, BayerPattern, Event, EventStream, Frame
from .parallel import run_parallel, thread_count

# Threshold jitter never drops a pixel's threshold below this floor.
MIN_THRESHOLD = 0.01


@dataclass(frozen=True)
class SimConfig:
    """Event generator parameters.

    c_pos / c_neg are the ON / OFF contrast thresholds in log-intensity
    units (both stored positive).  sigma_threshold > 0 adds per-pixel
    Gaussian threshold jitter drawn once per run from ``seed``.
    """

    c_pos: float = 0.15
    c_neg: float = 0.15
    refractory_us: int = 0
    log_eps: float = 1e-3
    sigma_threshold: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.c_pos <= 0 or self.c_neg <= 0:
            raise ValueError("contrast thresholds must be positive")
        if self.refractory_us < 0:
            raise ValueError("refractory period must be non-negative")
        if self.log_eps <= 0:
            raise ValueError("log_eps must be positive")
        if self.sigma_threshold < 0:
            raise ValueError("sigma_threshold must be non-negative")


@dataclass(frozen=True)
class PixelSimState:
    """Per-pixel simulator memory between samples."""

    ref_log: float
    last_event_t: int = NO_EVENT_T
    last_log: float = 0.0
    last_t: int = 0


def mosaic(frame: Frame, pattern: BayerPattern) -> Frame:
    """Apply the color filter array: keep one RGB component per pixel."""
    if frame.channels != 3:
        raise ValueError("mosaic requires an RGB frame")
    yy, xx = np.indices((frame.height, frame.width))
    comp = pattern.rgb_component(xx, yy)
    pixels = np.take_along_axis(frame.pixels, comp[..., None].astype(np.intp),
                                axis=2)[..., 0]
    return Frame(frame.t, pixels)


def safe_log(v, log_eps: float):
    """ln(v + log_eps); rejects negative intensities. Works on arrays."""
    if log_eps <= 0:
        raise ValueError("log_eps must be positive")
    arr = np.asarray(v, dtype=np.float64)
    if arr.size and arr.min() < 0:
        raise ValueError("intensities must be non-negative")
    return np.log(arr + log_eps)


def simulate_pixel_interval(state: PixelSimState, new_log: float, new_t: int,
                            cfg: SimConfig, x: int = 0, y: int = 0):
    """Advance one pixel across a linear log-intensity segment.

    Returns the time-ordered events emitted on (state.last_t, new_t] and
    the updated state.  ``x``/``y`` only stamp the emitted events.
    """
    if new_t <= state.last_t:
        raise ValueError("sample times must be strictly increasing")
    events = []
    ref = state.ref_log
    last_ev = state.last_event_t
    d = new_log - state.last_log
    if d != 0.0:
        step = cfg.c_pos if d > 0 else -cfg.c_neg
        pol = 1 if d > 0 else -1
        taf = float(state.last_t)
        dtf = float(new_t - state.last_t)
        while True:
            tgt = ref + step
            if (d > 0 and new_log >= tgt) or (d < 0 and new_log <= tgt):
                t_star = taf + dtf * ((tgt - state.last_log) / d)
                te = math.floor(t_star)
                if te - last_ev >= cfg.refractory_us:
                    events.append(Event(te, x, y, pol))
                    last_ev = te
                ref = tgt
            else:
                break
    return events, replace(state, ref_log=ref, last_event_t=last_ev,
                           last_log=new_log, last_t=new_t)


def _interval_events(ref, last_ev, la, lb, ta, tb, c_pos, c_neg, refr):
    """Vectorized crossing extraction for one frame interval.

    Mutates ``ref`` and ``last_ev`` in place and returns (t, y, x, p)
    arrays of the emitted events, unsorted.  The arithmetic mirrors
    simulate_pixel_interval operation for operation so per-pixel results
    are bit-identical.
    """
    d = lb - la
    up = d > 0
    dn = d < 0
    taf = float(ta)
    dtf = float(tb - ta)
    out_t, out_y, out_x, out_p = [], [], [], []
    while True:
        tgt = np.where(up, ref + c_pos, ref - c_neg)
        crossed = (up & (lb >= tgt)) | (dn & (lb <= tgt))
        if not crossed.any():
            break
        yy, xx = np.nonzero(crossed)
        tgt_c = tgt[crossed]
        t_star = taf + dtf * ((tgt_c - la[crossed]) / d[crossed])
        te = np.floor(t_star).astype(np.int64)
        emit = te - last_ev[crossed] >= refr
        out_t.append(te[emit])
        out_y.append(yy[emit])
        out_x.append(xx[emit])
        out_p.append(np.where(up[crossed][emit], 1, -1).astype(np.int8))
        lev = last_ev[crossed]
        lev[emit] = te[emit]
        last_ev[crossed] = lev
        ref[crossed] = tgt_c
    if not out_t:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, empty, empty.astype(np.int8)
    return (np.concatenate(out_t), np.concatenate(out_y),
            np.concatenate(out_x), np.concatenate(out_p))


def _simulate_block(log_frames, ts, c_pos, c_neg, refr):
    """Run the generator over a (T, H, W) block of log frames."""
    ref = log_frames[0].copy()
    last_ev = np.full(ref.shape, NO_EVENT_T, dtype=np.int64)
    parts = []
    for i in range(len(ts) - 1):
        parts.append(_interval_events(ref, last_ev, log_frames[i],
                                      log_frames[i + 1], ts[i], ts[i + 1],
                                      c_pos, c_neg, refr))
    t = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    x = np.concatenate([p[2] for p in parts])
    p = np.concatenate([p[3] for p in parts])
    return t, y, x, p


def simulate(frames, pattern: BayerPattern, cfg: SimConfig,
             workers: int | None = None) -> EventStream:
    """Generate a color event stream from an ordered RGB frame sequence.

    Pixel state is initialized from frame 0 (which emits nothing); each
    consecutive frame pair is then swept for threshold crossings.  Rows
    may be partitioned across ``workers`` threads (default: CEVT_THREADS);
    the final canonical sort makes the result independent of the split.
    """
    frames = list(frames)
    if len(frames) < 2:
        raise ValueError("simulation needs at least 2 frames")
    h, w = frames[0].height, frames[0].width
    for f in frames:
        if f.channels != 3:
            raise ValueError("simulation frames must be RGB")
        if f.height != h or f.width != w:
            raise ValueError("all frames must share the same dimensions")
    ts = [f.t for f in frames]
    if any(tb <= ta for ta, tb in zip(ts, ts[1:])):
        raise ValueError("frame timestamps must be strictly increasing")

    log_frames = np.stack([safe_log(mosaic(f, pattern).pixels, cfg.log_eps)
                           for f in frames])
    if cfg.sigma_threshold > 0:
        rng = np.random.default_rng(cfg.seed)
        c_pos = np.maximum(rng.normal(cfg.c_pos, cfg.sigma_threshold, (h, w)),
                           MIN_THRESHOLD)
        c_neg = np.maximum(rng.normal(cfg.c_neg, cfg.sigma_threshold, (h, w)),
                           MIN_THRESHOLD)
    else:
        c_pos = np.full((h, w), cfg.c_pos)
        c_neg = np.full((h, w), cfg.c_neg)

    n = thread_count() if workers is None else workers
    n = max(1, min(n, h))
    bounds = np.linspace(0, h, n + 1).astype(int)
    jobs = [(log_frames[:, y0:y1, :], ts, c_pos[y0:y1], c_neg[y0:y1],
             cfg.refractory_us, y0)
            for y0, y1 in zip(bounds[:-1], bounds[1:]) if y1 > y0]

    def job(args):
        lf, tss, cp, cn, refr, y0 = args
        t, y, x, p = _simulate_block(lf, tss, cp, cn, refr)
        return t, y + y0, x, p

    parts = run_parallel(job, jobs, n)
    t = np.concatenate([p[0] for p in parts])
    y = np.concatenate([p[1] for p in parts])
    x = np.concatenate([p[2] for p in parts])
    p = np.concatenate([p[3] for p in parts])
    order = np.lexsort((p, x, y, t))
    return EventStream(w, h, pattern, t[order], x[order], y[order], p[order],
                       _skip_checks=True)
