"""Spatio-temporal voxel grids: the event-tensor network input.

Learned reconstruction consumes events as fixed-size batches rendered
into B x H x W grids: each event's timestamp picks a position on the
temporal bin axis and its polarity is shared between the two nearest
bins.  Total deposited mass per event is exactly its polarity, so grid
sums are an easy integrity check.  Grids are exported as little-endian
float32 tensors with a small header for external inference code.

Run from the repository root:  python3 demos/04_voxel_grids.py
"""

import importlib
import os
import sys

import numpy as np

from cevt import BayerPattern, SimConfig, batch_events, read_voxel_grid, \
    simulate, voxelize, write_voxel_grid

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))
scene = importlib.import_module("01_simulate_color_events")

OUT = os.path.join(os.path.dirname(__file__), "out", "04_voxels")


def main():
    os.makedirs(OUT, exist_ok=True)
    frames = scene.drifting_gradient()
    stream = simulate(frames, BayerPattern(), SimConfig(c_pos=0.15, c_neg=0.15))

    batches, tail = batch_events(stream, batch_size=5000)
    print(f"{len(stream)} events -> {len(batches)} batches of 5000 "
          f"(+{len(tail)} tail events held back)")

    for i, batch in enumerate(batches):
        grid = voxelize(batch, bins=5)
        pol_sum = int(batch.p.astype(np.int64).sum())
        path = os.path.join(OUT, f"batch_{i:06d}.vox")
        write_voxel_grid(grid, path)
        span_ms = (grid.t_end - grid.t_start) / 1000
        print(f"batch {i}: span {span_ms:7.1f} ms, grid sum "
              f"{grid.values.sum():+9.3f} (polarity sum {pol_sum:+d})")

    # round trip one file to show the on-disk tensor is faithful
    back = read_voxel_grid(os.path.join(OUT, "batch_000000.vox"))
    print(f"reloaded grid: bins={back.bins}, {back.height}x{back.width}, "
          f"t=[{back.t_start}, {back.t_end}] us")
    print("same thing via the CLI:")
    print(f"  cevt voxelize --events events.bin --batch 5000 --bins 5 "
          f"--out {OUT} --verify")


if __name__ == "__main__":
    main()
