"""Compare the compiled and numpy kernel backends.

    python benchmarks/bench_kernels.py [--repeat 5]

Times ray casting for one VLP-16 and one VLP-32C frame, the closeness score
search for a typical vehicle footprint, and one full sweep cell.  The per-cell
figure swaps the backend in place, so both runs share every other code path.
"""
import argparse
import timeit

import numpy as np

from rsloc import _pykernels, kernels
from rsloc.core import Pose2D
from rsloc.experiments import SweepConfig, sweep_cell
from rsloc.lidar import DEFAULT_VEHICLE, LidarSpec, SceneModel

try:
    from rsloc import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def _swap(mod):
    kernels.cast_rays, kernels.closeness_scores = mod.cast_rays, mod.closeness_scores


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("numpy", _pykernels)] + ([("cython", _ckernels)] if _ckernels else [])
    if _ckernels is None:
        print("compiled extension not built; timing numpy only")

    scene = SceneModel(DEFAULT_VEHICLE, Pose2D(12.0, 3.0, 37.0))
    rng = np.random.default_rng(0)
    footprint = np.ascontiguousarray(rng.normal(size=(400, 2)) * [2.0, 0.8])
    thetas = np.radians(np.arange(0.0, 90.0, 1.0))
    cases = []
    for name, spec in (("cast_rays vlp16", LidarSpec.vlp16()), ("cast_rays vlp32c", LidarSpec.vlp32c())):
        a = (np.array(spec.mount), spec.ray_directions(), scene.box_rows(), True, spec.max_range)
        cases.append((name, lambda m, a=a: m.cast_rays(*a)))
    cases.append(("closeness 400 pts x 90", lambda m: m.closeness_scores(footprint, thetas, 0.01)))
    cfg = SweepConfig(correction_enabled=True)

    def cell(m):
        _swap(m)
        return sweep_cell(cfg, 18, 20)

    cases.append(("sweep cell (d=12 m)", cell))

    print(f"{'case':<26}" + "".join(f"{n:>12}" for n, _ in backends) + ("     speedup" if len(backends) > 1 else ""))
    original = kernels.cast_rays, kernels.closeness_scores
    try:
        for name, fn in cases:
            times = [_best(lambda: fn(m), args.repeat) for _, m in backends]
            row = f"{name:<26}" + "".join(f"{t * 1e3:>10.2f}ms" for t in times)
            if len(times) > 1:
                row += f"{times[0] / times[1]:>11.1f}x"
            print(row)
    finally:
        kernels.cast_rays, kernels.closeness_scores = original


if __name__ == "__main__":
    main()
