"""Compare the compiled kernel backend against the numpy fallback.

Run:  python3 benchmarks/bench_backends.py
"""

import math
import sys
import time

import numpy as np

from fiblight import BakeConfig
from fiblight.backend import get_backend
from fiblight.bake import bake
from fiblight.geometry import Camera
from fiblight.scene import pack_scene
from fiblight.scenes import constant_scene, furnace_scene
from fiblight.sf import kernel_radius


def timed(fn, repeats=3):
    best = math.inf
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench(backend):
    rng = np.random.default_rng(0)
    results = {}

    q = rng.normal(size=(200_000, 3))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    n = 1_000_000
    results["inverse_nearest (200k queries, n=1e6)"] = \
        timed(lambda: backend.inverse_nearest_batch(q, n))
    results["neighbors k=5 (200k queries, n=1e6)"] = \
        timed(lambda: backend.neighbors_batch(q, n, 5))

    pack = pack_scene(furnace_scene())
    rays = 20_000
    dirs = rng.normal(size=(rays, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    origins = np.zeros((rays, 3))

    def trace():
        states = backend.stream_keys(0, np.arange(rays, dtype=np.uint64),
                                     np.zeros(rays, np.uint64),
                                     np.zeros(rays, np.uint64))
        backend.trace_radiance(origins, dirs, states, pack, 6)

    results["trace_radiance (20k furnace paths, depth 6)"] = timed(trace)

    lf = bake(constant_scene(), BakeConfig(m=256, n=512, spp=1))
    cam = Camera(eye=np.array([0.0, -2.5, 0.8]), look_at=np.zeros(3),
                 up=np.array([0.0, 0.0, 1.0]), fov=math.radians(45.0),
                 width=192, height=192)
    right, upv, fwd = cam.basis()
    h_m = kernel_radius(lf.m, 1.0)
    h_n = kernel_radius(lf.n, 1.0)

    def render():
        backend.render_pixels(lf.texels, lf.m, lf.n, lf.hemisphere, lf.radius,
                              lf.center, cam.eye, right, upv, fwd,
                              math.tan(cam.fov / 2.0), cam.width, cam.height,
                              True, h_m, h_n)

    results["render_pixels (192x192 filtered, 256x512 field)"] = timed(render)
    return results


def main():
    backends = {}
    for name in ("pure", "compiled"):
        try:
            backends[name] = get_backend(name)
        except ImportError:
            print(f"backend {name!r} unavailable, skipping", file=sys.stderr)
    reports = {name: bench(be) for name, be in backends.items()}
    keys = next(iter(reports.values())).keys()
    width = max(len(k) for k in keys)
    header = f"{'benchmark':<{width}}  " + "".join(f"{n:>12}" for n in reports)
    if len(reports) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for key in keys:
        row = f"{key:<{width}}  "
        row += "".join(f"{reports[n][key] * 1e3:>10.1f}ms" for n in reports)
        if len(reports) == 2:
            row += f"{reports['pure'][key] / reports['compiled'][key]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
