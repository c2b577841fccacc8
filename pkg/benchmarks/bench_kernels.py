"""Numba vs numpy kernel timings.

Times the two hot kernels of the segmenter (SLIC assignment and connected
components) in both flavours on random images, checks they agree, then times
an end-to-end ``explain`` run under each ``REGPD_NUMBA`` setting in a fresh
interpreter.

    python benchmarks/bench_kernels.py --sizes 64 128 256 --repeat 5
"""

import argparse
import math
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np

from regpd import _accel, _kernels
from regpd.segmentation import grid_shape

DISK = Path(__file__).resolve().parents[1] / "src" / "regpd" / "data" / "disk.png"


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def slic_case(n, k, rng):
    img = rng.uniform(0, 255, (n, n, 3))
    rows, cols = grid_shape(k, n, n)
    cell_h, cell_w = n / rows, n / cols
    yy, xx = np.meshgrid((np.arange(rows) + 0.5) * cell_h, (np.arange(cols) + 0.5) * cell_w,
                         indexing="ij")
    centers = np.empty((rows * cols, 5))
    centers[:, 0], centers[:, 1] = yy.ravel(), xx.ravel()
    centers[:, 2:] = img[yy.astype(int).ravel(), xx.astype(int).ravel()]
    weight = (10.0 / math.sqrt(n * n / k)) ** 2
    return img, centers, cell_h, cell_w, weight


def run_slic(kernel, case):
    img, centers, cell_h, cell_w, weight = case
    labels = np.full(img.shape[:2], -1, dtype=np.int64)
    dist = np.full(img.shape[:2], np.inf)
    kernel(img, centers, cell_h, cell_w, weight, labels, dist)
    return labels


def bench_kernels(sizes, k, repeat):
    rng = np.random.default_rng(0)
    print(f"{'kernel':<12}{'size':>6}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for n in sizes:
        case = slic_case(n, k, rng)
        same = np.array_equal(run_slic(_kernels.slic_assign_numba, case),
                              run_slic(_kernels.slic_assign_numpy, case))
        fast = best_of(lambda: run_slic(_kernels.slic_assign_numba, case), repeat)
        slow = best_of(lambda: run_slic(_kernels.slic_assign_numpy, case), repeat)
        print(f"{'slic_assign':<12}{n:>6}{fast * 1e3:>12.2f}{slow * 1e3:>12.2f}"
              f"{slow / fast:>9.1f}x" + ("" if same else "  MISMATCH"))

        labels = rng.integers(0, 6, (n, n))
        same = np.array_equal(_kernels.components_numba(labels)[0],
                              _kernels.components_numpy(labels)[0])
        fast = best_of(lambda: _kernels.components_numba(labels), repeat)
        slow = best_of(lambda: _kernels.components_numpy(labels), repeat)
        print(f"{'components':<12}{n:>6}{fast * 1e3:>12.2f}{slow * 1e3:>12.2f}"
              f"{slow / fast:>9.1f}x" + ("" if same else "  MISMATCH"))


def bench_explain(out_root):
    print("\nend-to-end explain on disk.png (r=5, fresh interpreter, includes import/jit load)")
    for flag in ("1", "0"):
        env = dict(os.environ, REGPD_NUMBA=flag)
        cmd = [sys.executable, "-m", "regpd.cli", "explain", "--image", str(DISK),
               "--oracle", "area-fraction", "--class", "1", "--out-dir",
               str(Path(out_root) / f"numba{flag}")]
        start = time.perf_counter()
        subprocess.run(cmd, env=env, check=True, capture_output=True)
        print(f"  REGPD_NUMBA={flag}: {time.perf_counter() - start:.2f}s")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--regions", type=int, default=32)
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--out-dir", default="bench_out")
    parser.add_argument("--skip-explain", action="store_true")
    args = parser.parse_args()
    if not _accel.HAVE_NUMBA:
        sys.exit("numba is not importable; nothing to compare")
    # first calls compile (or load the cache); keep that out of the timings
    warm = slic_case(16, 4, np.random.default_rng(1))
    run_slic(_kernels.slic_assign_numba, warm)
    _kernels.components_numba(np.zeros((4, 4), dtype=np.int64))
    bench_kernels(args.sizes, args.regions, args.repeat)
    if not args.skip_explain:
        bench_explain(args.out_dir)


if __name__ == "__main__":
    main()
