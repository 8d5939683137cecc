"""Continuous-time per-pixel reconstruction filters.

Two events-to-frames routes:

* High-pass filter: each pixel integrates signed contrast steps and
  decays exponentially toward zero, so the image can be sampled at any
  microsecond.  The effective cutoff is ``cutoff + cutoff_per_event *
  rate`` where ``rate`` is an exponential moving average of the pixel's
  event rate; busier (noisier) pixels forget faster.  The per-event term
  is held constant between events and re-evaluated at each arrival.

* Windowed integration: a fixed-length event window is accumulated into
  a persistent image, one output frame per window.  Together with the
  5x5 bilateral post-filter this is the spatially-smoothed baseline.

Filter outputs are log-intensity estimates in plain image containers;
tone mapping happens only at export.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .events import EventStream, Frame

# Time constant (seconds) of the per-pixel event-rate moving average.
RATE_TAU_S = 1.0

US_PER_S = 1e6


@dataclass(frozen=True)
class HFParams:
    """High-pass filter gains; both cutoff gains default to 0.06."""

    cutoff: float = 0.06
    cutoff_per_event: float = 0.06
    contrast_step: float = 0.15

    def __post_init__(self):
        if self.cutoff < 0 or self.cutoff_per_event < 0:
            raise ValueError("cutoff gains must be non-negative")
        if self.contrast_step <= 0:
            raise ValueError("contrast_step must be positive")


@dataclass(frozen=True)
class HighPassState:
    """Per-pixel filter memory: current estimate, event-rate EMA, last update."""

    value: float = 0.0
    rate: float = 0.0
    last_t: int = 0


@dataclass(frozen=True)
class IntegrationParams:
    """Windowed integration parameters; the window defaults to 1000 events."""

    window_events: int = 1000
    contrast_step: float = 0.15
    decay: float = 1.0

    def __post_init__(self):
        if self.window_events < 1:
            raise ValueError("window_events must be >= 1")
        if self.contrast_step <= 0:
            raise ValueError("contrast_step must be positive")
        if not 0.0 <= self.decay <= 1.0:
            raise ValueError("decay must lie in [0, 1]")


def hf_update(state: HighPassState, event, p: HFParams) -> HighPassState:
    """Fold one event into a pixel's filter state."""
    if event.t < state.last_t:
        raise ValueError("event time precedes filter state")
    dt = (event.t - state.last_t) / US_PER_S
    alpha = p.cutoff + p.cutoff_per_event * state.rate
    value = state.value * math.exp(-alpha * dt) + event.polarity * p.contrast_step
    rate = state.rate * math.exp(-dt / RATE_TAU_S) + 1.0 / RATE_TAU_S
    return HighPassState(value, rate, event.t)


def hf_sample(state: HighPassState, t: int, p: HFParams) -> float:
    """Read the decayed estimate at time t without mutating the state."""
    if t < state.last_t:
        raise ValueError("sample time precedes filter state")
    alpha = p.cutoff + p.cutoff_per_event * state.rate
    return state.value * math.exp(-alpha * (t - state.last_t) / US_PER_S)


def hf_reconstruct(events: EventStream, sample_ts, p: HFParams) -> list[Frame]:
    """Run the high-pass filter over a stream, sampling full mosaic frames.

    Every pixel starts at value 0, rate 0.  Each returned frame is the
    raw full-resolution mosaic log estimate at one sample time; events
    at exactly a sample time are folded in before sampling.
    """
    sample_ts = [int(t) for t in sample_ts]
    if any(tb < ta for ta, tb in zip(sample_ts, sample_ts[1:])):
        raise ValueError("sample times must be sorted ascending")
    if sample_ts and sample_ts[0] < 0:
        raise ValueError("sample times must be non-negative")

    h, w = events.height, events.width
    value = np.zeros((h, w))
    rate = np.zeros((h, w))
    last_t = np.zeros((h, w), dtype=np.int64)

    ev_t = events.t.tolist()
    ev_x = events.x.tolist()
    ev_y = events.y.tolist()
    ev_p = events.p.tolist()
    cutoff, cpe, c = p.cutoff, p.cutoff_per_event, p.contrast_step

    frames = []
    i = 0
    n = len(ev_t)
    for s in sample_ts:
        while i < n and ev_t[i] <= s:
            t, x, y, pol = ev_t[i], ev_x[i], ev_y[i], ev_p[i]
            dt = (t - last_t[y, x]) / US_PER_S
            alpha = cutoff + cpe * rate[y, x]
            value[y, x] = value[y, x] * math.exp(-alpha * dt) + pol * c
            rate[y, x] = rate[y, x] * math.exp(-dt / RATE_TAU_S) + 1.0 / RATE_TAU_S
            last_t[y, x] = t
            i += 1
        alpha = cutoff + cpe * rate
        sampled = value * np.exp(-alpha * ((s - last_t) / US_PER_S))
        frames.append(Frame(s, sampled))
    return frames


def integrate_windows(events: EventStream, p: IntegrationParams) -> list[Frame]:
    """Accumulate signed contrast steps over consecutive event windows.

    Emits one frame per full window, timestamped at the window's last
    event; the accumulator is scaled by ``decay`` before each window and
    persists across windows.  An incomplete tail window is held back.
    """
    h, w = events.height, events.width
    acc = np.zeros(h * w)
    frames = []
    n_full = len(events) // p.window_events
    for k in range(n_full):
        lo = k * p.window_events
        hi = lo + p.window_events
        if p.decay != 1.0:
            acc *= p.decay
        net = np.bincount(events.y[lo:hi].astype(np.intp) * w
                          + events.x[lo:hi].astype(np.intp),
                          weights=events.p[lo:hi], minlength=h * w)
        acc += p.contrast_step * net
        frames.append(Frame(int(events.t[hi - 1]), acc.reshape(h, w).copy()))
    return frames


def integrate_sampled(events: EventStream, sample_ts,
                      p: IntegrationParams) -> list[Frame]:
    """Sample the windowed integrator at arbitrary times (hold last window).

    Adapter so the integrator fits sample-time driven pipelines: each
    sample takes the most recent window frame at or before it, or zeros
    if no window has completed yet.
    """
    sample_ts = [int(t) for t in sample_ts]
    if any(tb < ta for ta, tb in zip(sample_ts, sample_ts[1:])):
        raise ValueError("sample times must be sorted ascending")
    windows = integrate_windows(events, p)
    zero = np.zeros((events.height, events.width))
    out = []
    j = -1
    for s in sample_ts:
        while j + 1 < len(windows) and windows[j + 1].t <= s:
            j += 1
        out.append(Frame(s, windows[j].pixels if j >= 0 else zero))
    return out


def _bilateral_plane(img: np.ndarray, sigma_spatial: float,
                     sigma_range: float) -> np.ndarray:
    h, w = img.shape
    num = np.zeros((h, w))
    den = np.zeros((h, w))
    inv2ss = 1.0 / (2.0 * sigma_spatial * sigma_spatial)
    inv2sr = 1.0 / (2.0 * sigma_range * sigma_range)
    for dy in range(-2, 3):
        for dx in range(-2, 3):
            ws = math.exp(-(dx * dx + dy * dy) * inv2ss)
            # overlap of the image with itself shifted by (dy, dx);
            # out-of-bounds neighbors are simply skipped (truncation).
            ys0, ys1 = max(0, -dy), min(h, h - dy)
            xs0, xs1 = max(0, -dx), min(w, w - dx)
            centre = img[ys0:ys1, xs0:xs1]
            neigh = img[ys0 + dy:ys1 + dy, xs0 + dx:xs1 + dx]
            wgt = ws * np.exp(-((neigh - centre) ** 2) * inv2sr)
            num[ys0:ys1, xs0:xs1] += wgt * neigh
            den[ys0:ys1, xs0:xs1] += wgt
    return num / den


def bilateral_5x5(img: Frame, sigma_spatial: float = 1.0,
                  sigma_range: float | None = None) -> Frame:
    """Edge-preserving 5x5 bilateral filter.

    ``sigma_range`` defaults to a quarter of the image's value range;
    multi-channel frames are filtered channel by channel.  Border pixels
    use the in-bounds part of the neighborhood with renormalized weights.
    """
    if sigma_spatial <= 0:
        raise ValueError("sigma_spatial must be positive")
    if sigma_range is not None and sigma_range <= 0:
        raise ValueError("sigma_range must be positive")
    arr = img.pixels
    if sigma_range is None:
        spread = float(arr.max() - arr.min()) if arr.size else 0.0
        if spread == 0.0:
            return Frame(img.t, arr.copy())
        sigma_range = 0.25 * spread
    if img.channels == 1:
        return Frame(img.t, _bilateral_plane(arr, sigma_spatial, sigma_range))
    planes = [_bilateral_plane(arr[:, :, c], sigma_spatial, sigma_range)
              for c in range(3)]
    return Frame(img.t, np.stack(planes, axis=-1))
