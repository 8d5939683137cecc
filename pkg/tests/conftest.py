import os
import subprocess
import sys

import numpy as np
import pytest

from cevt import BayerPattern, EventStream, Frame, write_events, write_frames


def run_cli(*args, env_extra=None, cwd=None):
    """Run the CLI in a subprocess; returns (exit_code, stdout, stderr)."""
    env = os.environ.copy()
    if env_extra:
        env.update(env_extra)
    proc = subprocess.run([sys.executable, "-m", "cevt", *map(str, args)],
                          capture_output=True, text=True, env=env, cwd=cwd)
    return proc.returncode, proc.stdout, proc.stderr


@pytest.fixture
def cli():
    return run_cli


@pytest.fixture
def gradient_frames_dir(tmp_path):
    """A small RGB sequence with per-pixel ramps, written as PPM files."""
    rng = np.random.default_rng(15)
    base = rng.integers(60, 200, (8, 8, 3))
    frames = []
    for k, t in enumerate((0, 400, 800, 1200)):
        px = np.clip(base + 12 * k, 0, 255) / 255.0
        frames.append(Frame(t, px))
    d = tmp_path / "frames"
    write_frames(frames, d)
    return d


@pytest.fixture
def random_events_file(tmp_path):
    def make(n=2500, w=16, h=16, t_max=1_000_000, seed=0, name="ev.bin",
             polarity=None):
        rng = np.random.default_rng(seed)
        t = np.sort(rng.integers(0, t_max, n))
        x = rng.integers(0, w, n)
        y = rng.integers(0, h, n)
        p = np.full(n, polarity, dtype=int) if polarity else rng.choice([-1, 1], n)
        stream = EventStream(w, h, BayerPattern(), t, x, y, p, sort=True)
        path = tmp_path / name
        write_events(stream, path, format="binary")
        return path, stream
    return make
