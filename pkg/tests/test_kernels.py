"""Backend parity: the compiled kernels and the numpy fallback must agree
bit-for-bit, so a missing extension changes speed, never results."""

import numpy as np
import pytest

from sightline._kernels import py_impl

core = pytest.importorskip("sightline._kernels._core")


def random_polygon(rng, n=40, radius=5.0):
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    r = rng.uniform(0.5, 1.0, n) * radius
    return np.ascontiguousarray(
        np.column_stack([r * np.cos(ang), r * np.sin(ang)])
    )


def test_polygon_distance_parity(rng):
    for _ in range(50):
        poly = random_polygon(rng)
        q = rng.uniform(-8, 8, 2)
        a = py_impl.polygon_distance(poly, q[0], q[1])
        b = core.polygon_distance(poly, q[0], q[1])
        assert a == b


def test_segment_distances_parity(rng):
    poly = random_polygon(rng)
    q = rng.uniform(-8, 8, 2)
    da, ta = py_impl.segment_distances(poly, q[0], q[1])
    db, tb = core.segment_distances(poly, q[0], q[1])
    assert np.array_equal(da, db)
    assert np.array_equal(ta, tb)


def test_contains_parity(rng):
    poly = random_polygon(rng)
    pts = rng.uniform(-8, 8, (500, 2))
    a = py_impl.polygon_contains_many(poly, pts)
    b = core.polygon_contains_many(poly, pts)
    assert np.array_equal(a, b)
    for q in pts[:50]:
        assert py_impl.polygon_contains(poly, q[0], q[1]) == core.polygon_contains(
            poly, q[0], q[1]
        )


def test_raycast_parity(rng):
    segs = rng.uniform(-10, 10, (60, 4))
    bearings = 2 * np.pi * np.arange(360) / 360
    dirs = np.ascontiguousarray(np.column_stack([np.cos(bearings), np.sin(bearings)]))
    a = py_impl.raycast(segs, dirs, 30.0)
    b = core.raycast(np.ascontiguousarray(segs), dirs, 30.0)
    assert np.array_equal(a, b)


def test_hull_chain_parity(rng):
    for _ in range(20):
        pts = rng.uniform(-5, 5, (200, 2))
        order = np.lexsort((pts[:, 1], pts[:, 0]))
        pts = np.ascontiguousarray(pts[order])
        a = py_impl.hull_chain(pts)
        b = core.hull_chain(pts)
        assert np.array_equal(a, b)


def test_backend_selection_env(monkeypatch):
    import importlib
    import sightline._kernels as k

    monkeypatch.setenv("SIGHTLINE_KERNELS", "python")
    mod = importlib.reload(k)
    assert mod.BACKEND == "python"
    monkeypatch.delenv("SIGHTLINE_KERNELS")
    mod = importlib.reload(k)
    assert mod.BACKEND in ("python", "cython")
