#!/usr/bin/env python3
"""Compare the compiled kernels against the numpy fallback on the hot paths
(polygon min-distance, point containment, raycasting, hull chain) and on a
full simulation tick. Also cross-checks that both backends return identical
results on the benchmark inputs.

Run from the repo root: python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from sightline._kernels import py_impl

try:
    from sightline._kernels import _core as core
except ImportError:
    core = None


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def star_polygon(n, radius=20.0, seed=0):
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.7, 1.0, n) * radius
    return np.ascontiguousarray(np.column_stack([r * np.cos(ang), r * np.sin(ang)]))


def bench_polygon_distance(backend, poly, queries):
    def run():
        for q in queries:
            backend.polygon_distance(poly, q[0], q[1])

    return run


def bench_contains(backend, poly, pts):
    return lambda: backend.polygon_contains_many(poly, pts)


def bench_raycast(backend, segs, dirs):
    return lambda: backend.raycast(segs, dirs, 30.0)


def bench_hull(backend, pts):
    return lambda: backend.hull_chain(pts)


def report(name, t_py, t_cy, work):
    speedup = t_py / t_cy if t_cy else float("nan")
    print(
        f"{name:<22} python {t_py * 1e3:8.2f} ms   cython "
        + (f"{t_cy * 1e3:8.2f} ms   x{speedup:5.1f}" if t_cy else "    (missing)")
        + f"   [{work}]"
    )


def main():
    rng = np.random.default_rng(7)
    poly = star_polygon(650)
    queries = rng.uniform(-10, 10, (2000, 2))
    pts = rng.uniform(-25, 25, (20000, 2))
    segs = np.ascontiguousarray(rng.uniform(-20, 20, (120, 4)))
    bearings = 2 * np.pi * np.arange(720) / 720
    dirs = np.ascontiguousarray(np.column_stack([np.cos(bearings), np.sin(bearings)]))
    cloud = rng.uniform(-20, 20, (800, 2))
    cloud = np.ascontiguousarray(cloud[np.lexsort((cloud[:, 1], cloud[:, 0]))])

    cases = [
        ("polygon_distance", bench_polygon_distance, (poly, queries), "650 edges x 2000 queries"),
        ("contains_many", bench_contains, (poly, pts), "650 edges x 20k points"),
        ("raycast", bench_raycast, (segs, dirs), "120 segs x 720 beams"),
        ("hull_chain", bench_hull, (cloud,), "800 points"),
    ]
    for name, factory, args, work in cases:
        t_py = timeit(factory(py_impl, *args))
        t_cy = timeit(factory(core, *args)) if core else None
        report(name, t_py, t_cy, work)

    if core is not None:
        # result parity on the benchmark inputs
        assert np.array_equal(
            py_impl.raycast(segs, dirs, 30.0), core.raycast(segs, dirs, 30.0)
        )
        assert np.array_equal(
            py_impl.polygon_contains_many(poly, pts), core.polygon_contains_many(poly, pts)
        )
        assert np.array_equal(py_impl.hull_chain(cloud), core.hull_chain(cloud))
        for q in queries[:200]:
            assert py_impl.polygon_distance(poly, q[0], q[1]) == core.polygon_distance(
                poly, q[0], q[1]
            )
        print("parity: identical results on all benchmark inputs")

    bench_tick()


def bench_tick():
    """End-to-end tick timing under each backend (subprocess keeps the
    backend selection clean)."""
    import os
    import subprocess
    import sys

    snippet = (
        "import numpy as np, time;"
        "from sightline import _kernels;"
        "from sightline.world import SimConfig, WorldModel, RobotState, WorldState, tick;"
        "from sightline.connectivity import ConstraintParams;"
        "from sightline.geometry import FlipConfig;"
        "cons = ConstraintParams(d_com_max=15.0, d_coll_min=0.3);"
        "cfg = SimConfig(constraints=cons, flip=FlipConfig(r_flip=150.0), beam_count=720);"
        "world = WorldModel(obstacles=[np.array([[5.,-1],[7,-1],[7,1],[5,1]]),"
        "np.array([[2.,3],[4,3],[3,5]])], bounds=[-20,-15,20,15],"
        "targets=np.array([[15.,0],[15,3],[14,-3],[13,6]]));"
        "robots=[RobotState(id=i, position=[-6.+(i%2)*2, 3.*i-4], target=i) for i in range(4)];"
        "state=WorldState(world=world, robots=robots);"
        "[tick(state,cfg) for _ in range(5)];"
        "t0=time.perf_counter();"
        "[tick(state,cfg) for _ in range(40)];"
        "print(f'{_kernels.BACKEND}: {(time.perf_counter()-t0)/40*1000:.2f} ms/tick (4 robots, 720 beams)')"
    )
    for backend in ("cython", "python"):
        env = dict(os.environ, SIGHTLINE_KERNELS=backend)
        try:
            out = subprocess.run(
                [sys.executable, "-c", snippet], env=env, capture_output=True, text=True
            )
            print(out.stdout.strip() or out.stderr.strip().splitlines()[-1])
        except Exception as exc:  # extension genuinely absent
            print(f"{backend}: skipped ({exc})")


if __name__ == "__main__":
    main()
