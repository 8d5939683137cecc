"""Simulate a color event stream from a synthetic RGB sequence.

A color event camera puts a 2x2 RGBG filter tile in front of an
asynchronous sensor: every pixel sees one color component and fires a
signed event whenever its log intensity moves by a full contrast
threshold.  This script builds a drifting color-gradient scene, runs it
through the simulator, and prints the kind of summary the `cevt stats`
subcommand produces.

Run from the repository root:  python3 demos/01_simulate_color_events.py
"""

import os

import numpy as np

from cevt import BayerPattern, ColorChannel, Frame, SimConfig, simulate, \
    write_events, write_frames

OUT = os.path.join(os.path.dirname(__file__), "out", "01_simulate")


def drifting_gradient(size=64, n_frames=24, span_us=800_000):
    """Sinusoidal RGB gradients sliding across the image over the span."""
    yy, xx = np.indices((size, size), dtype=float)
    frames = []
    for k in range(n_frames):
        t = round(k * span_us / (n_frames - 1))
        shift = 0.5 * size * (t / span_us)
        r = 0.5 + 0.35 * np.sin(2 * np.pi * (xx + shift) / size)
        g = 0.5 + 0.35 * np.sin(2 * np.pi * (yy + shift) / size)
        b = 0.5 + 0.35 * np.sin(2 * np.pi * (xx - shift) / size)
        frames.append(Frame(t, np.stack([r, g, b], axis=-1)))
    return frames


def main():
    os.makedirs(OUT, exist_ok=True)
    frames = drifting_gradient()
    pattern = BayerPattern()  # red at (0, 0): rows alternate RG / GB

    # contrast thresholds are in log-intensity units; 0.15 is a typical
    # moderate sensitivity
    cfg = SimConfig(c_pos=0.15, c_neg=0.15, refractory_us=0)
    stream = simulate(frames, pattern, cfg)

    span_s = (frames[-1].t - frames[0].t) / 1e6
    print(f"frames:     {len(frames)} ({frames[0].width}x{frames[0].height})")
    print(f"events:     {len(stream)}")
    print(f"duration:   {span_s:.3f} s")
    print(f"mean rate:  {len(stream) / span_s:,.0f} events/s")

    # events split per Bayer site: the two greens together get half the
    # sensor, red and blue a quarter each
    codes = pattern.channel_code(stream.x, stream.y)
    for ch in ColorChannel:
        count = int((codes == ch.value).sum())
        print(f"  {ch.name:>2}: {count:6d} ({100 * count / len(stream):.1f}%)")

    write_frames(frames, os.path.join(OUT, "frames"))
    write_events(stream, os.path.join(OUT, "events.bin"))
    print(f"wrote {OUT}/frames and {OUT}/events.bin")
    print("same thing via the CLI:")
    print(f"  cevt simulate --frames {OUT}/frames --out {OUT}/events.bin")


if __name__ == "__main__":
    main()
