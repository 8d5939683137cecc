"""Command-line front end.

Subcommands wire the library into the end-to-end workflows: ``simulate``
turns an RGB frame sequence into a color event file, ``reconstruct``
turns events back into color video frames, ``voxelize`` exports event
tensors, ``demosaic`` converts a single mosaic image, and ``stats``
summarizes a stream.

Flags override config-file values, which override the documented
defaults.  Every failure is reported as one ``error: <code>: <detail>``
line with exit status 2, and partially written outputs are removed.
The CEVT_THREADS environment variable caps worker counts (0 = auto);
outputs are byte-identical regardless of its value.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .colorpipe import demosaic_bilinear, reconstruct_color_quarter
from .errors import CevtError
from .events import BayerPattern, ColorChannel, Frame
from .filters import bilateral_5x5, hf_reconstruct, integrate_sampled, \
    integrate_windows
from .io_formats import Config, parse_config, read_events, read_frames, \
    read_image, write_events, write_image
from .simulate import simulate
from .voxels import batch_events, read_voxel_grid, voxelize, write_voxel_grid

US_PER_S = 1_000_000
DEFAULT_FPS = 30.0


def _parse_phase(raw: str) -> BayerPattern:
    parts = raw.split(",")
    if len(parts) != 2:
        raise CevtError(f"--bayer-phase expects 'X,Y', got {raw!r}")
    try:
        px, py = int(parts[0]), int(parts[1])
    except ValueError:
        raise CevtError(f"--bayer-phase expects integers, got {raw!r}")
    try:
        return BayerPattern(px, py)
    except ValueError as e:
        raise CevtError(str(e))


def _load_config(args) -> Config:
    if getattr(args, "config", None):
        return parse_config(args.config)
    return Config()


def _read_stream(args, cfg: Config):
    pattern = cfg.pattern()
    if getattr(args, "bayer_phase", None):
        pattern = _parse_phase(args.bayer_phase)
    return read_events(args.events, width=getattr(args, "width", None),
                       height=getattr(args, "height", None),
                       pattern=pattern, sort=getattr(args, "sort", False))


def tone_map(frame: Frame) -> Frame:
    """Exponential tone map rescaled to [0, 1] (flat inputs map to black)."""
    e = np.exp(frame.pixels)
    lo, hi = float(e.min()), float(e.max())
    if hi == lo:
        return Frame(frame.t, np.zeros_like(e))
    return Frame(frame.t, (e - lo) / (hi - lo))


def _sample_times(t0: int, t1: int, fps: float) -> list[int]:
    """Uniform sample grid over [t0, t1]; the final time is always sampled."""
    if fps <= 0:
        raise CevtError("--fps must be positive")
    ts = []
    k = 1
    while True:
        t = t0 + round(k * US_PER_S / fps)
        if t > t1:
            break
        ts.append(t)
        k += 1
    if not ts or ts[-1] != t1:
        ts.append(t1)
    return ts


class _Outputs:
    """Tracks written paths so failures can remove partial results."""

    def __init__(self):
        self.paths = []

    def add(self, path):
        self.paths.append(path)
        return path

    def discard_all(self):
        for path in self.paths:
            try:
                os.remove(path)
            except OSError:
                pass


def _cmd_simulate(args, out: _Outputs) -> int:
    cfg = _load_config(args)
    if args.c_pos is not None:
        cfg.sim_c_pos = args.c_pos
    if args.c_neg is not None:
        cfg.sim_c_neg = args.c_neg
    if args.refractory_us is not None:
        cfg.sim_refractory_us = args.refractory_us
    pattern = cfg.pattern()
    if args.bayer_phase:
        pattern = _parse_phase(args.bayer_phase)
    frames = read_frames(args.frames, args.timestamps)
    if len(frames) < 2:
        raise CevtError("simulation needs at least 2 frames")
    stream = simulate(frames, pattern, cfg.sim_config())
    write_events(stream, out.add(args.out), format="binary")
    span = (frames[-1].t - frames[0].t) / US_PER_S
    print(f"events: {len(stream)}")
    print(f"duration_s: {span:.6f}")
    print(f"mean_rate_eps: {len(stream) / span:.1f}")
    return 0


def _reconstructor(args, cfg: Config):
    """Per-channel events -> frames operation for the chosen method."""
    if args.method == "hf":
        params = cfg.hf_params()
        return lambda stream, ts: hf_reconstruct(stream, ts, params)
    params = cfg.integration_params()
    return lambda stream, ts: integrate_sampled(stream, ts, params)


def _echo_params(args, cfg: Config) -> None:
    print(f"method: {args.method}")
    print(f"color: {args.color}")
    if args.method == "hf":
        print(f"hf.cutoff = {cfg.hf_cutoff}")
        print(f"hf.cutoff_per_event = {cfg.hf_cutoff_per_event}")
        print(f"hf.contrast_step = {cfg.hf_contrast_step}")
    else:
        print(f"mr.window_events = {cfg.mr_window_events}")
        print(f"mr.contrast_step = {cfg.mr_contrast_step}")
        print(f"mr.decay = {cfg.mr_decay}")
    sr = cfg.bilateral_sigma_range
    print(f"bilateral.sigma_spatial = {cfg.bilateral_sigma_spatial}")
    print(f"bilateral.sigma_range = {'auto' if sr is None else sr}")


def _cmd_reconstruct(args, out: _Outputs) -> int:
    cfg = _load_config(args)
    if args.method not in ("hf", "integrate"):
        raise CevtError(f"unknown method {args.method!r}")
    if args.color not in ("mosaic-demosaic", "quarter"):
        raise CevtError(f"unknown color mode {args.color!r}")
    stream = _read_stream(args, cfg)
    _echo_params(args, cfg)

    t0 = int(stream.t[0]) if len(stream) else 0
    t1 = int(stream.t[-1]) if len(stream) else 0
    if args.fps is not None:
        sample_ts = _sample_times(t0, t1, args.fps)
    elif args.method == "hf":
        sample_ts = _sample_times(t0, t1, DEFAULT_FPS)
    else:
        # one frame per full integration window
        windows = integrate_windows(stream, cfg.integration_params())
        sample_ts = [f.t for f in windows]
    print(f"frames: {len(sample_ts)}")

    sigma_s = cfg.bilateral_sigma_spatial
    sigma_r = cfg.bilateral_sigma_range
    if args.color == "mosaic-demosaic":
        recon = _reconstructor(args, cfg)(stream, sample_ts)
        rgb_frames = [demosaic_bilinear(f, stream.pattern) for f in recon]
    else:
        rgb_frames = reconstruct_color_quarter(stream, _reconstructor(args, cfg),
                                               sample_ts)
    os.makedirs(args.out, exist_ok=True)
    stamps = []
    for i, frame in enumerate(rgb_frames):
        smoothed = bilateral_5x5(frame, sigma_s, sigma_r)
        path = os.path.join(args.out, f"frame_{i:06d}.ppm")
        write_image(tone_map(smoothed), out.add(path))
        stamps.append(frame.t)
    ts_path = os.path.join(args.out, "timestamps.txt")
    with open(out.add(ts_path), "w", newline="\n") as f:
        for t in stamps:
            f.write(f"{t}\n")
    return 0


def _cmd_voxelize(args, out: _Outputs) -> int:
    cfg = _load_config(args)
    if args.batch is not None:
        cfg.voxel_batch_size = args.batch
    if args.bins is not None:
        cfg.voxel_bins = args.bins
    if cfg.voxel_batch_size < 1:
        raise CevtError("batch size must be >= 1")
    if cfg.voxel_bins < 1:
        raise CevtError("bins must be >= 1")
    stream = _read_stream(args, cfg)
    print(f"voxel.bins = {cfg.voxel_bins}")
    print(f"voxel.batch_size = {cfg.voxel_batch_size}")
    batches, tail = batch_events(stream, cfg.voxel_batch_size)
    os.makedirs(args.out, exist_ok=True)
    for i, batch in enumerate(batches):
        grid = voxelize(batch, bins=cfg.voxel_bins)
        path = os.path.join(args.out, f"batch_{i:06d}.vox")
        write_voxel_grid(grid, out.add(path))
        if args.verify:
            mass = float(grid.values.sum())
            pol_sum = int(batch.p.astype(np.int64).sum())
            if abs(mass - pol_sum) > 1e-6 * len(batch):
                raise CevtError(f"batch {i}: grid mass {mass} != polarity "
                                f"sum {pol_sum}")
            reread = read_voxel_grid(path)
            if reread.values.shape != grid.values.shape:
                raise CevtError(f"batch {i}: written file shape mismatch")
            print(f"verify: batch {i} ok (mass = {mass:.6f})")
    print(f"batches: {len(batches)}")
    print(f"tail_events: {len(tail)}")
    return 0


def _cmd_stats(args, out: _Outputs) -> int:
    cfg = _load_config(args)
    stream = _read_stream(args, cfg)
    n = len(stream)
    print(f"events: {n}")
    print(f"duration_s: {stream.duration_us / US_PER_S:.6f}")
    on = int((stream.p > 0).sum())
    print(f"on: {on}")
    print(f"off: {n - on}")
    pattern = stream.pattern or BayerPattern()
    codes = pattern.channel_code(stream.x, stream.y)
    for ch in ColorChannel:
        count = int((codes == ch.value).sum()) if n else 0
        share = 100.0 * count / n if n else 0.0
        print(f"channel {ch.name}: {count} ({share:.1f}%)")
    print(f"peak_rate_eps: {_peak_rate(stream.t):.1f}")
    return 0


def _peak_rate(t: np.ndarray, window_us: int = 10_000) -> float:
    """Highest event rate over any sliding window of window_us."""
    if len(t) == 0:
        return 0.0
    best = 0
    lo = 0
    tl = t.tolist()
    for hi in range(len(tl)):
        while tl[hi] - tl[lo] >= window_us:
            lo += 1
        best = max(best, hi - lo + 1)
    return best / (window_us / US_PER_S)


def _cmd_demosaic(args, out: _Outputs) -> int:
    cfg = _load_config(args)
    pattern = cfg.pattern()
    if args.bayer_phase:
        pattern = _parse_phase(args.bayer_phase)
    frame = read_image(args.in_path)
    if frame.channels != 1:
        raise CevtError("demosaic expects a single-channel PGM input")
    write_image(demosaic_bilinear(frame, pattern), out.add(args.out))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cevt",
        description="Color event camera simulation and reconstruction toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate color events from RGB frames")
    p.add_argument("--frames", required=True, help="directory of PPM frames")
    p.add_argument("--timestamps", default=None,
                   help="timestamps file (default: <frames>/timestamps.txt)")
    p.add_argument("--out", required=True, help="output binary event file")
    p.add_argument("--config", default=None)
    p.add_argument("--c-pos", type=float, default=None)
    p.add_argument("--c-neg", type=float, default=None)
    p.add_argument("--refractory-us", type=int, default=None)
    p.add_argument("--bayer-phase", default=None, metavar="X,Y")

    p = sub.add_parser("reconstruct", help="reconstruct color video from events")
    p.add_argument("--events", required=True)
    p.add_argument("--method", required=True, choices=("hf", "integrate"))
    p.add_argument("--color", required=True,
                   choices=("mosaic-demosaic", "quarter"))
    p.add_argument("--fps", type=float, default=None)
    p.add_argument("--out", required=True, help="output frame directory")
    p.add_argument("--config", default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--bayer-phase", default=None, metavar="X,Y")
    p.add_argument("--sort", action="store_true")

    p = sub.add_parser("voxelize", help="export event batches as voxel tensors")
    p.add_argument("--events", required=True)
    p.add_argument("--batch", type=int, default=None)
    p.add_argument("--bins", type=int, default=None)
    p.add_argument("--out", required=True, help="output tensor directory")
    p.add_argument("--verify", action="store_true")
    p.add_argument("--config", default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--bayer-phase", default=None, metavar="X,Y")
    p.add_argument("--sort", action="store_true")

    p = sub.add_parser("stats", help="summarize an event stream")
    p.add_argument("--events", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--width", type=int, default=None)
    p.add_argument("--height", type=int, default=None)
    p.add_argument("--bayer-phase", default=None, metavar="X,Y")
    p.add_argument("--sort", action="store_true")

    p = sub.add_parser("demosaic", help="demosaic one PGM mosaic into PPM")
    p.add_argument("--in", required=True, dest="in_path", metavar="IN")
    p.add_argument("--out", required=True)
    p.add_argument("--bayer-phase", default=None, metavar="X,Y")
    p.add_argument("--config", default=None)

    return parser


_COMMANDS = {
    "simulate": _cmd_simulate,
    "reconstruct": _cmd_reconstruct,
    "voxelize": _cmd_voxelize,
    "stats": _cmd_stats,
    "demosaic": _cmd_demosaic,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out = _Outputs()
    try:
        return _COMMANDS[args.command](args, out)
    except CevtError as e:
        out.discard_all()
        print(f"error: {e.code}: {e}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as e:
        out.discard_all()
        code = "io" if isinstance(e, OSError) else "usage"
        print(f"error: {code}: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
