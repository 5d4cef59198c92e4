"""Compare the numba and numpy kernel backends on a DRIVE-sized phantom.

    python3 benchmarks/bench_kernels.py [--size 565 584] [--repeat 3]

Times the single-orientation kernel, the full multi-scale vesselness map and
the end-to-end pipeline, and checks both backends agree bit for bit.
"""

import argparse
import time

import numpy as np

from lipvessel import kernels
from lipvessel.lip import complement, luminance
from lipvessel.probe import build_family, fov_diameter
from lipvessel.segmentation import PipelineParams, probe_intensities, segment_vessels
from lipvessel.synthetic import fundus_phantom
from lipvessel.vesselness import vesselness_multiscale


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--size", type=int, nargs=2, default=(584, 565), metavar=("H", "W"))
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    h, w = args.size
    ph = fundus_phantom(max(h, w), seed=0)
    rgb, fov = ph.rgb[:h, :w], ph.fov[:h, :w]
    f = complement(luminance(rgb))
    params = PipelineParams()
    h_c, h_lr = probe_intensities(float(f[fov].mean()), params)
    family = build_family(fov_diameter(fov), params.fov_angle, h_c, h_lr)
    rp = family.rasterized(0)[0]

    cases = {
        "kernel (1 orientation, w1)": lambda: kernels.orientation_detector(
            f, fov, rp.center, rp.left, rp.right, h_c, h_lr, 0.2),
        f"vesselness ({len(family.probes)} scales x 18)": lambda: vesselness_multiscale(
            f, family, len(family.probes), valid=fov).data,
        "pipeline": lambda: segment_vessels(rgb, fov, params).mask,
    }

    print(f"image {h}x{w}, widths {[round(float(p.width), 2) for p in family.probes]}")
    print(f"{'case':34s} " + " ".join(f"{b:>10s}" for b in kernels.available_backends()) + "   speedup")
    for name, fn in cases.items():
        times, outs = {}, {}
        for backend in kernels.available_backends():
            with kernels.use_backend(backend):
                fn()  # warm-up, includes JIT compile
                times[backend], outs[backend] = best_of(fn, args.repeat)
        row = " ".join(f"{times[b]:9.3f}s" for b in kernels.available_backends())
        speed = times["numpy"] / times["numba"] if "numba" in times else float("nan")
        same = all(np.array_equal(outs["numpy"], o, equal_nan=True) for o in outs.values())
        print(f"{name:34s} {row}   {speed:6.2f}x  {'identical' if same else 'MISMATCH'}")


if __name__ == "__main__":
    main()
