#!/usr/bin/env python3
"""Warp throughput benchmark: tracks the 1024x2048x3 spherical-warp wall time
across worker counts. The release target is 500 ms at 8 workers on a
desktop-class CPU (soft, regression-tracked)."""

import argparse
import time

import numpy as np

from omnizoom.geometry import SphericalCoord, ViewControls
from omnizoom.image import ErpImage
from omnizoom.pipeline import WarpRequest, warp
from omnizoom.resample import ResampleKernel


def run(height: int, width: int, threads: list[int], repeats: int) -> None:
    rng = np.random.default_rng(0)
    src = ErpImage(rng.uniform(size=(height, width, 3)))
    req = WarpRequest(view=ViewControls(yaw=0.5, pitch=0.2,
                                        zoom_center=SphericalCoord(0.5, 0.2),
                                        zoom_factor=1.4),
                      kernel=ResampleKernel.SPHERICAL)
    warp(src, req, threads=threads[0])  # warm-up
    for t in threads:
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            warp(src, req, threads=t)
            times.append(time.perf_counter() - t0)
        print(f"{height}x{width}x3 spherical  threads={t:<2d}  "
              f"best {min(times) * 1000:7.1f} ms   median {sorted(times)[len(times) // 2] * 1000:7.1f} ms")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--height", type=int, default=1024)
    ap.add_argument("--width", type=int, default=2048)
    ap.add_argument("--threads", type=int, nargs="+", default=[1, 2, 4, 8])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    run(args.height, args.width, args.threads, args.repeats)
