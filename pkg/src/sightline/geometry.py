"""Visible-region construction from 2D LiDAR scans.

Pipeline: augment the scan to fill bearing gaps, reflect every point through
the sphere of radius r_flip (spherical flipping), take the convex hull of the
flipped points, subdivide hull edges so no edge spans more than delta_theta of
radial angle, and flip the vertices back. The resulting polygon is a
conservative (subset) approximation of the space visible from the sensor.

Everything works in the sensor's local frame with the sensor at the origin.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels


class DegenerateGeometryError(ValueError):
    """Input collapses the construction (zero-length direction, flat hull...)."""


def _as_points(points) -> np.ndarray:
    return np.asarray(points, dtype=np.float64).reshape(-1, 2)


def _bearings(points: np.ndarray) -> np.ndarray:
    return np.arctan2(points[:, 1], points[:, 0])


@dataclass(frozen=True)
class Scan:
    """One LiDAR sweep: points in the sensor frame, sorted by bearing."""

    points: np.ndarray
    max_range: float
    beam_count: int

    @classmethod
    def from_points(cls, points, max_range: float, beam_count: int) -> "Scan":
        """Normalize: sort by bearing, keep the shorter range on duplicate
        bearings, validate ranges."""
        pts = _as_points(points)
        if pts.shape[0] > 0:
            r = np.sqrt(pts[:, 0] ** 2 + pts[:, 1] ** 2)
            if np.any(r <= 0.0):
                raise ValueError("scan contains a point at the sensor origin")
            if np.any(r > max_range * (1 + 1e-12)):
                raise ValueError("scan point beyond max_range")
            theta = _bearings(pts)
            order = np.lexsort((r, theta))
            pts = pts[order]
            theta = theta[order]
            keep = np.ones(len(pts), dtype=bool)
            keep[1:] = theta[1:] != theta[:-1]  # first of equal bearings = shortest
            pts = pts[keep]
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        return cls(points=pts, max_range=float(max_range), beam_count=int(beam_count))

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def bearings(self) -> np.ndarray:
        return _bearings(self.points)

    @property
    def ranges(self) -> np.ndarray:
        return np.sqrt(self.points[:, 0] ** 2 + self.points[:, 1] ** 2)


@dataclass(frozen=True)
class FlipConfig:
    """Parameters of the flip/hull/interpolation construction."""

    r_flip: float
    lse_alpha: float = 10.0
    delta_theta: float = np.deg2rad(1.0)

    def __post_init__(self):
        if self.r_flip <= 0:
            raise ValueError("r_flip must be positive")
        if self.lse_alpha <= 0:
            raise ValueError("lse_alpha must be positive")
        if not (0.0 < self.delta_theta < np.pi):
            raise ValueError("delta_theta must lie in (0, pi)")


def spherical_flip(q, r_flip: float) -> np.ndarray:
    """Reflect q through the sphere of radius r_flip: 2*r_flip*q/|q| - q.

    Direction-preserving involution on 0 < |q| < 2*r_flip with
    |f(q)| = 2*r_flip - |q|.
    """
    q = np.asarray(q, dtype=np.float64)
    norm = np.sqrt(np.sum(q * q, axis=-1, keepdims=True))
    if np.any(norm == 0.0):
        raise DegenerateGeometryError("spherical flip undefined at the origin")
    return 2.0 * r_flip * q / norm - q


def augment_scan(scan: Scan, gap_threshold: float) -> Scan:
    """Fill bearing gaps wider than gap_threshold with synthetic max_range
    points at uniform angular pitch <= gap_threshold. Original points are
    kept as-is."""
    if len(scan) == 0:
        raise ValueError("cannot augment an empty scan")
    theta = scan.bearings
    gaps = np.diff(theta, append=theta[0] + 2.0 * np.pi)
    # ceil with slack so an exact integer ratio doesn't gain a point
    n_pieces = np.ceil(gaps / gap_threshold - 1e-9).astype(int)
    wide = np.nonzero(n_pieces > 1)[0]
    if wide.shape[0] == 0:
        return scan
    ang = np.concatenate(
        [theta[k] + gaps[k] * np.arange(1, n_pieces[k]) / n_pieces[k] for k in wide]
    )
    synth = scan.max_range * np.column_stack([np.cos(ang), np.sin(ang)])
    merged = np.vstack([scan.points, synth])
    return Scan.from_points(merged, scan.max_range, scan.beam_count)


def ring_scan(max_range: float, pitch: float, beam_count: int) -> Scan:
    """Synthetic full-circle scan at max_range (open space, no returns)."""
    n = int(np.ceil(2.0 * np.pi / pitch))
    ang = 2.0 * np.pi * np.arange(n) / n
    pts = max_range * np.column_stack([np.cos(ang), np.sin(ang)])
    return Scan.from_points(pts, max_range, beam_count)


@dataclass(frozen=True)
class FlippedHull:
    """Convex hull of the flipped scan, counter-clockwise, origin inside."""

    vertices: np.ndarray  # (K, 2), CCW, closed implicitly (last -> first)
    face_normals: np.ndarray  # (K, 2) outward unit normal of edge k -> k+1
    origin_inside: bool
    r_flip: float

    @property
    def face_count(self) -> int:
        return self.vertices.shape[0]

    def face_offsets(self) -> np.ndarray:
        """n_k . a_k per face (positive when the origin is inside)."""
        return np.sum(self.face_normals * self.vertices, axis=1)


def flipped_convex_hull(scan: Scan, cfg: FlipConfig) -> FlippedHull:
    """Flip the scan and take the convex hull of the result."""
    if len(scan) == 0:
        raise DegenerateGeometryError("empty scan has no hull")
    ranges = scan.ranges
    if cfg.r_flip <= float(np.max(ranges)):
        raise ValueError("r_flip must exceed the largest scan range")
    flipped = spherical_flip(scan.points, cfg.r_flip)
    order = np.lexsort((flipped[:, 1], flipped[:, 0]))
    flipped = flipped[order]
    keep = np.ones(flipped.shape[0], dtype=bool)
    keep[1:] = np.any(flipped[1:] != flipped[:-1], axis=1)
    uniq = flipped[keep]
    idx = _kernels.hull_chain(np.ascontiguousarray(uniq))
    if idx.shape[0] < 3:
        raise DegenerateGeometryError("fewer than 3 non-collinear flipped points")
    verts = np.ascontiguousarray(uniq[idx])
    edges = np.roll(verts, -1, axis=0) - verts
    # CCW outward normal of edge (dx, dy) is (dy, -dx)
    normals = np.column_stack([edges[:, 1], -edges[:, 0]])
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    origin_inside = bool(np.all(np.sum(normals * verts, axis=1) > 0.0))
    if not origin_inside:
        raise DegenerateGeometryError(
            "sensor origin not inside the flipped hull (bearing gap >= pi; augment first)"
        )
    verts.setflags(write=False)
    normals.setflags(write=False)
    return FlippedHull(
        vertices=verts,
        face_normals=normals,
        origin_inside=origin_inside,
        r_flip=cfg.r_flip,
    )


@dataclass(frozen=True)
class VisibleRegionPolygon:
    """Star-convex polygon (sensor frame) under-approximating the visible set."""

    vertices: np.ndarray  # (V, 2), CCW, closed implicitly
    source_hull: Optional[FlippedHull]
    r_flip: float
    robot_id: int = field(default=-1)

    @property
    def vertex_count(self) -> int:
        return self.vertices.shape[0]


def _interpolate_edge(a: np.ndarray, b: np.ndarray, theta: float, n_pieces: int) -> np.ndarray:
    """Points on segment [a, b] at uniform radial-angle steps from a to b."""
    sign = 1.0 if (a[0] * b[1] - a[1] * b[0]) >= 0.0 else -1.0
    base = np.arctan2(a[1], a[0])
    ang = base + sign * theta * np.arange(1, n_pieces) / n_pieces
    dx = np.cos(ang)
    dy = np.sin(ang)
    e = b - a
    t = (dy * a[0] - dx * a[1]) / (dx * e[1] - dy * e[0])
    t = np.clip(t, 0.0, 1.0)
    return a[None, :] + t[:, None] * e[None, :]


def approx_visible_region(
    hull: FlippedHull, cfg: FlipConfig, robot_id: int = -1
) -> VisibleRegionPolygon:
    """Subdivide hull edges at radial pitch <= delta_theta and flip the
    vertices back.

    Interpolated points sit on the straight flipped-space edge at uniform
    radial-angle spacing, so consecutive output vertices never span more than
    delta_theta as seen from the sensor.
    """
    verts = hull.vertices
    nxt = np.roll(verts, -1, axis=0)
    norms = np.linalg.norm(verts, axis=1)
    cos_th = np.sum(verts * nxt, axis=1) / (norms * np.roll(norms, -1))
    thetas = np.arccos(np.clip(cos_th, -1.0, 1.0))
    # ceil with slack so an exact integer ratio doesn't gain a point
    n_pieces = np.maximum(np.ceil(thetas / cfg.delta_theta - 1e-9).astype(int), 1)
    if np.all(n_pieces == 1):
        pieces = [verts]
    else:
        pieces = []
        prev = 0
        for k in np.nonzero(n_pieces > 1)[0]:
            pieces.append(verts[prev : k + 1])
            pieces.append(_interpolate_edge(verts[k], nxt[k], float(thetas[k]), int(n_pieces[k])))
            prev = k + 1
        pieces.append(verts[prev:])
    flipped_back = spherical_flip(np.vstack(pieces), cfg.r_flip)
    flipped_back = np.ascontiguousarray(flipped_back)
    flipped_back.setflags(write=False)
    return VisibleRegionPolygon(
        vertices=flipped_back, source_hull=hull, r_flip=cfg.r_flip, robot_id=robot_id
    )


def region_contains(region: VisibleRegionPolygon, q) -> bool:
    """Strict interior test; points within ~1e-9 of the boundary may report
    either value."""
    q = np.asarray(q, dtype=np.float64)
    return bool(_kernels.polygon_contains(region.vertices, float(q[0]), float(q[1])))


def hull_face_distances(hull: FlippedHull, q) -> np.ndarray:
    """Signed distance of f(q) past each hull face: d_k = n_k . (f(q) - a_k)."""
    q = np.asarray(q, dtype=np.float64)
    fq = spherical_flip(q, hull.r_flip)
    diff = fq[None, :] - hull.vertices
    return np.sum(hull.face_normals * diff, axis=1)


def d_hull_max(hull: FlippedHull, q) -> float:
    """Exact visibility determination metric: max_k n_k . (f(q) - a_k).

    Positive iff q is inside the visible region defined by the hull.
    """
    return float(np.max(hull_face_distances(hull, q)))


def d_hull_logsumexp(hull: FlippedHull, q, lse_alpha: float) -> float:
    """Log-sum-exp relaxation of d_hull_max; exceeds it by at most
    log(K)/lse_alpha."""
    d = hull_face_distances(hull, q)
    m = float(np.max(d))
    return m + float(np.log(np.sum(np.exp(lse_alpha * (d - m))))) / lse_alpha
