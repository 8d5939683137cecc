"""Bit-exact readers and writers: event files, pixmap frames, config.

Event interchange comes in two flavors:

* text: one ``t x y p`` line per event, p in {0, 1} for OFF/ON.
  Timestamps with a fractional part are auto-detected as seconds and
  converted to integer microseconds (the first data line decides);
  plain integers are microseconds.
* binary: a 16-byte header (8-byte magic ``CEVTEVT1``, u16 version,
  u16 width, u16 height, u8 Bayer phase x, u8 phase y) followed by
  little-endian 13-byte records (u64 t, u16 x, u16 y, i8 polarity).

Images are binary portable pixmaps (P6 PPM for RGB, P5 PGM for gray)
with maxval 255; 8-bit values are divided by 255 on ingestion.  Frame
sequences pair numbered images with a timestamps file holding one
integer microsecond per line.

Configuration is flat ``key = value`` lines with ``#`` comments;
unknown or duplicate keys fail fast.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, fields

import numpy as np

from .errors import ConfigError, FormatError, InputError
from .events import BayerPattern, EventStream, Frame
from .filters import HFParams, IntegrationParams
from .simulate import SimConfig

EVENT_MAGIC = b"CEVTEVT1"
EVENT_VERSION = 1
_HEADER_DTYPE = np.dtype([("version", "<u2"), ("width", "<u2"),
                          ("height", "<u2"), ("phase_x", "u1"),
                          ("phase_y", "u1")])
_RECORD_DTYPE = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"),
                          ("p", "i1")])


# ---------------------------------------------------------------------------
# event files

def write_events(stream: EventStream, path, format: str = "binary") -> None:
    """Write a stream in the given format with deterministic bytes."""
    if format == "binary":
        _write_events_binary(stream, path)
    elif format == "text":
        _write_events_text(stream, path)
    else:
        raise ValueError(f"unknown event format {format!r}")


def read_events(path, format: str | None = None, width: int | None = None,
                height: int | None = None, pattern: BayerPattern | None = None,
                sort: bool = False) -> EventStream:
    """Read an event file; format is sniffed from the magic when omitted.

    Text files carry no geometry, so ``width``/``height`` are required
    for them.  Out-of-order streams are rejected unless ``sort`` is set.
    """
    if not os.path.isfile(path):
        raise InputError(f"no such event file: {path}")
    if format is None:
        with open(path, "rb") as f:
            format = "binary" if f.read(8) == EVENT_MAGIC else "text"
    if format == "binary":
        return _read_events_binary(path, sort=sort)
    if format == "text":
        if width is None or height is None:
            raise ValueError("text event files need explicit width/height")
        return _read_events_text(path, width, height, pattern, sort=sort)
    raise ValueError(f"unknown event format {format!r}")


def _write_events_binary(stream: EventStream, path) -> None:
    if stream.width > 65535 or stream.height > 65535:
        raise ValueError("binary format caps sensor dimensions at 65535")
    pattern = stream.pattern or BayerPattern()
    header = np.zeros(1, dtype=_HEADER_DTYPE)
    header["version"] = EVENT_VERSION
    header["width"] = stream.width
    header["height"] = stream.height
    header["phase_x"] = pattern.phase_x
    header["phase_y"] = pattern.phase_y
    records = np.zeros(len(stream), dtype=_RECORD_DTYPE)
    records["t"] = stream.t
    records["x"] = stream.x
    records["y"] = stream.y
    records["p"] = stream.p
    with open(path, "wb") as f:
        f.write(EVENT_MAGIC)
        f.write(header.tobytes())
        f.write(records.tobytes())


def _read_events_binary(path, sort: bool = False) -> EventStream:
    with open(path, "rb") as f:
        raw = f.read()
    head_len = 8 + _HEADER_DTYPE.itemsize
    if len(raw) < head_len or raw[:8] != EVENT_MAGIC:
        raise FormatError(f"{path}: not a binary event file")
    header = np.frombuffer(raw[8:head_len], dtype=_HEADER_DTYPE)[0]
    if header["version"] != EVENT_VERSION:
        raise FormatError(f"{path}: unsupported version {header['version']}")
    body = raw[head_len:]
    if len(body) % _RECORD_DTYPE.itemsize:
        raise FormatError(f"{path}: truncated record data "
                          f"({len(body)} bytes is not a multiple of 13)")
    width = int(header["width"])
    height = int(header["height"])
    records = np.frombuffer(body, dtype=_RECORD_DTYPE)
    pattern = BayerPattern(int(header["phase_x"]), int(header["phase_y"]))
    if len(records):
        if records["t"].max() > np.iinfo(np.int64).max:
            raise FormatError(f"{path}: timestamp out of supported range")
        if records["x"].max() >= width or records["y"].max() >= height:
            raise FormatError(f"{path}: event coordinates exceed header bounds")
        if not np.isin(records["p"], (-1, 1)).all():
            raise FormatError(f"{path}: polarity bytes must be +1 or -1")
    try:
        return EventStream(width, height, pattern,
                           records["t"].astype(np.int64), records["x"],
                           records["y"], records["p"], sort=sort)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


def _write_events_text(stream: EventStream, path) -> None:
    with open(path, "w", newline="\n") as f:
        for t, x, y, p in zip(stream.t.tolist(), stream.x.tolist(),
                              stream.y.tolist(), stream.p.tolist()):
            f.write(f"{t} {x} {y} {1 if p > 0 else 0}\n")


def _read_events_text(path, width, height, pattern, sort=False) -> EventStream:
    ts, xs, ys, ps = [], [], [], []
    seconds_mode = None
    with open(path, "r") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 4:
                raise FormatError(f"{path}:{lineno}: expected 't x y p', "
                                  f"got {line!r}")
            t_tok, x_tok, y_tok, p_tok = parts
            if seconds_mode is None:
                seconds_mode = bool(re.search(r"[.eE]", t_tok))
            try:
                if seconds_mode:
                    t = round(float(t_tok) * 1e6)
                else:
                    t = int(t_tok)
                x = int(x_tok)
                y = int(y_tok)
                p_raw = int(p_tok)
            except ValueError:
                raise FormatError(f"{path}:{lineno}: malformed event line "
                                  f"{line!r}")
            if p_raw not in (0, 1):
                raise FormatError(f"{path}:{lineno}: polarity must be 0 or 1")
            if t < 0:
                raise FormatError(f"{path}:{lineno}: negative timestamp")
            if not (0 <= x < width and 0 <= y < height):
                raise FormatError(f"{path}:{lineno}: coordinate ({x}, {y}) "
                                  f"outside {width}x{height}")
            ts.append(t)
            xs.append(x)
            ys.append(y)
            ps.append(1 if p_raw else -1)
    try:
        return EventStream(width, height, pattern, ts, xs, ys, ps, sort=sort)
    except ValueError as e:
        raise FormatError(f"{path}: {e}") from e


# ---------------------------------------------------------------------------
# pixmap images

def write_image(frame: Frame, path) -> None:
    """Write a frame as binary PGM (1 channel) or PPM (3 channels).

    Values are clipped to [0, 1] and quantized to 8 bits.
    """
    data = np.clip(frame.pixels, 0.0, 1.0)
    raster = np.rint(data * 255.0).astype(np.uint8)
    magic = b"P5" if frame.channels == 1 else b"P6"
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n255\n" % (frame.width, frame.height))
        f.write(raster.tobytes())


def read_image(path, t: int = 0) -> Frame:
    """Read a binary PGM/PPM with maxval 255 into a linear [0, 1] frame."""
    if not os.path.isfile(path):
        raise InputError(f"no such image: {path}")
    with open(path, "rb") as f:
        raw = f.read()
    magic = raw[:2]
    if magic not in (b"P5", b"P6"):
        raise FormatError(f"{path}: expected binary PGM/PPM (P5/P6)")
    tokens, pos = [], 2
    while len(tokens) < 3:
        if pos >= len(raw):
            raise FormatError(f"{path}: truncated pixmap header")
        ch = raw[pos:pos + 1]
        if ch == b"#":
            pos = raw.find(b"\n", pos)
            if pos < 0:
                raise FormatError(f"{path}: truncated pixmap header")
            continue
        if ch.isspace():
            pos += 1
            continue
        end = pos
        while end < len(raw) and not raw[end:end + 1].isspace():
            end += 1
        tokens.append(raw[pos:end])
        pos = end
    try:
        width, height, maxval = (int(tok) for tok in tokens)
    except ValueError:
        raise FormatError(f"{path}: malformed pixmap header")
    if maxval != 255:
        raise FormatError(f"{path}: unsupported image depth (maxval {maxval})")
    pos += 1  # single whitespace byte separates header from raster
    channels = 1 if magic == b"P5" else 3
    expect = width * height * channels
    body = raw[pos:pos + expect]
    if len(body) != expect:
        raise FormatError(f"{path}: raster has {len(body)} bytes, "
                          f"expected {expect}")
    raster = np.frombuffer(body, dtype=np.uint8).astype(np.float64) / 255.0
    shape = (height, width) if channels == 1 else (height, width, 3)
    return Frame(t, raster.reshape(shape))


def read_frames(frames_dir, timestamps_path=None) -> list[Frame]:
    """Load a numbered pixmap sequence plus its timestamps file."""
    if not os.path.isdir(frames_dir):
        raise InputError(f"no such frame directory: {frames_dir}")
    names = sorted(n for n in os.listdir(frames_dir)
                   if n.endswith((".ppm", ".pgm")))
    if timestamps_path is None:
        timestamps_path = os.path.join(frames_dir, "timestamps.txt")
    if not os.path.isfile(timestamps_path):
        raise InputError(f"no such timestamps file: {timestamps_path}")
    stamps = []
    with open(timestamps_path) as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                stamps.append(int(line))
            except ValueError:
                raise FormatError(f"{timestamps_path}:{lineno}: timestamps "
                                  f"must be integer microseconds")
    if len(names) != len(stamps):
        raise FormatError(f"{frames_dir}: {len(names)} images but "
                          f"{len(stamps)} timestamps")
    if any(tb <= ta for ta, tb in zip(stamps, stamps[1:])):
        raise FormatError(f"{timestamps_path}: timestamps must be strictly "
                          f"increasing")
    return [read_image(os.path.join(frames_dir, name), t=t)
            for name, t in zip(names, stamps)]


def write_frames(frames, out_dir) -> list[str]:
    """Write numbered pixmaps plus timestamps.txt; returns written paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for i, frame in enumerate(frames):
        ext = "pgm" if frame.channels == 1 else "ppm"
        path = os.path.join(out_dir, f"frame_{i:06d}.{ext}")
        write_image(frame, path)
        written.append(path)
    ts_path = os.path.join(out_dir, "timestamps.txt")
    with open(ts_path, "w", newline="\n") as f:
        for frame in frames:
            f.write(f"{frame.t}\n")
    written.append(ts_path)
    return written


# ---------------------------------------------------------------------------
# configuration

def _parse_int(raw: str) -> int:
    if re.fullmatch(r"[+-]?\d+", raw):
        return int(raw)
    raise ValueError(f"expected an integer, got {raw!r}")


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"expected a number, got {raw!r}")


def _parse_sigma_range(raw: str):
    if raw == "auto":
        return None
    value = _parse_float(raw)
    if value <= 0:
        raise ValueError("sigma_range must be positive or 'auto'")
    return value


@dataclass
class Config:
    """Every tunable parameter with its documented default."""

    sim_c_pos: float = 0.15
    sim_c_neg: float = 0.15
    sim_refractory_us: int = 0
    sim_log_eps: float = 1e-3
    sim_sigma_threshold: float = 0.0
    sim_seed: int = 0
    hf_cutoff: float = 0.06
    hf_cutoff_per_event: float = 0.06
    hf_contrast_step: float = 0.15
    mr_window_events: int = 1000
    mr_contrast_step: float = 0.15
    mr_decay: float = 1.0
    bilateral_sigma_spatial: float = 1.0
    bilateral_sigma_range: float | None = None
    voxel_bins: int = 5
    voxel_batch_size: int = 10000
    bayer_phase_x: int = 0
    bayer_phase_y: int = 0

    def sim_config(self) -> SimConfig:
        return SimConfig(c_pos=self.sim_c_pos, c_neg=self.sim_c_neg,
                         refractory_us=self.sim_refractory_us,
                         log_eps=self.sim_log_eps,
                         sigma_threshold=self.sim_sigma_threshold,
                         seed=self.sim_seed)

    def hf_params(self) -> HFParams:
        return HFParams(cutoff=self.hf_cutoff,
                        cutoff_per_event=self.hf_cutoff_per_event,
                        contrast_step=self.hf_contrast_step)

    def integration_params(self) -> IntegrationParams:
        return IntegrationParams(window_events=self.mr_window_events,
                                 contrast_step=self.mr_contrast_step,
                                 decay=self.mr_decay)

    def pattern(self) -> BayerPattern:
        return BayerPattern(self.bayer_phase_x, self.bayer_phase_y)


CONFIG_KEYS = {
    "sim.c_pos": ("sim_c_pos", _parse_float),
    "sim.c_neg": ("sim_c_neg", _parse_float),
    "sim.refractory_us": ("sim_refractory_us", _parse_int),
    "sim.log_eps": ("sim_log_eps", _parse_float),
    "sim.sigma_threshold": ("sim_sigma_threshold", _parse_float),
    "sim.seed": ("sim_seed", _parse_int),
    "hf.cutoff": ("hf_cutoff", _parse_float),
    "hf.cutoff_per_event": ("hf_cutoff_per_event", _parse_float),
    "hf.contrast_step": ("hf_contrast_step", _parse_float),
    "mr.window_events": ("mr_window_events", _parse_int),
    "mr.contrast_step": ("mr_contrast_step", _parse_float),
    "mr.decay": ("mr_decay", _parse_float),
    "bilateral.sigma_spatial": ("bilateral_sigma_spatial", _parse_float),
    "bilateral.sigma_range": ("bilateral_sigma_range", _parse_sigma_range),
    "voxel.bins": ("voxel_bins", _parse_int),
    "voxel.batch_size": ("voxel_batch_size", _parse_int),
    "bayer.phase_x": ("bayer_phase_x", _parse_int),
    "bayer.phase_y": ("bayer_phase_y", _parse_int),
}


def parse_config(path) -> Config:
    """Parse a flat ``key = value`` file onto the documented defaults."""
    if not os.path.isfile(path):
        raise InputError(f"no such config file: {path}")
    cfg = Config()
    seen = set()
    with open(path) as f:
        for lineno, line in enumerate(f, start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            if key in seen:
                raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
            seen.add(key)
            attr, parse = CONFIG_KEYS[key]
            try:
                setattr(cfg, attr, parse(raw))
            except ValueError as e:
                raise ConfigError(f"{path}:{lineno}: {key}: {e}") from e
    return cfg
