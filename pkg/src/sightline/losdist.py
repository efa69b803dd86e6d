"""LoS-distance evaluation against visible-region polygons.

The distance of a query point to the closest polygon edge is a guaranteed
lower bound of its true clearance inside the visible region, so it is safe to
drive connectivity constraints from it. A brute-force boundary-sampling oracle
provides the exact distance (from above) for testing.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import (
    DegenerateGeometryError,
    FlippedHull,
    VisibleRegionPolygon,
    d_hull_max,
    region_contains,
    spherical_flip,
)

BRANCH_START = _kernels.BRANCH_START
BRANCH_END = _kernels.BRANCH_END
BRANCH_INTERIOR = _kernels.BRANCH_INTERIOR


@dataclass(frozen=True)
class LosParams:
    """Ramp of the LoS connectivity weight: zero below d_los_min, full
    (k_beta) above the trigger distance d_los_max."""

    d_los_min: float = 0.1
    d_los_max: float = 1.2
    k_beta: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.d_los_min < self.d_los_max):
            raise ValueError("need 0 <= d_los_min < d_los_max")
        if self.k_beta <= 0:
            raise ValueError("k_beta must be positive")


@dataclass(frozen=True)
class LosEvaluation:
    distance: float
    argmin_edge: int
    gradient: np.ndarray  # d distance / d query, unit norm away from the edge
    inside: bool


def segment_distance(q, a, b):
    """Distance from q to segment [a, b] plus the active branch
    (BRANCH_START / BRANCH_END / BRANCH_INTERIOR by projection parameter)."""
    q = np.asarray(q, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    e = b - a
    ee = float(e @ e)
    if ee == 0.0:
        raise DegenerateGeometryError("degenerate segment (a == b)")
    t = float((q - a) @ e) / ee
    if t < 0.0:
        return float(np.linalg.norm(q - a)), BRANCH_START
    if t > 1.0:
        return float(np.linalg.norm(q - b)), BRANCH_END
    cross = e[0] * (q[1] - a[1]) - e[1] * (q[0] - a[0])
    return abs(float(cross)) / math.sqrt(ee), BRANCH_INTERIOR


def segment_distance_gradient(q, a, b) -> np.ndarray:
    """Unit gradient of segment_distance w.r.t. q.

    Vertex branches point from the vertex to q; the interior branch is the
    unit perpendicular from the segment toward q.
    """
    q = np.asarray(q, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    dist, branch = segment_distance(q, a, b)
    if dist == 0.0:
        raise DegenerateGeometryError("gradient undefined on the segment")
    if branch == BRANCH_START:
        return (q - a) / dist
    if branch == BRANCH_END:
        return (q - b) / dist
    e = b - a
    t = float((q - a) @ e) / float(e @ e)
    return (q - a - t * e) / dist


def los_distance(region: VisibleRegionPolygon, q) -> LosEvaluation:
    """Min distance from q to the region boundary, with the argmin edge, its
    gradient and the interior flag. Edge ties within 1e-9 m pick the lowest
    edge index; the gradient is the winner's (zeros if q is on the boundary).
    """
    q = np.asarray(q, dtype=np.float64)
    dist, k, branch = _kernels.polygon_distance(region.vertices, float(q[0]), float(q[1]))
    nverts = region.vertices.shape[0]
    a = region.vertices[k]
    b = region.vertices[(k + 1) % nverts]
    if dist == 0.0:
        grad = np.zeros(2)
    elif branch == BRANCH_START:
        grad = (q - a) / dist
    elif branch == BRANCH_END:
        grad = (q - b) / dist
    else:
        e = b - a
        t = float((q - a) @ e) / float(e @ e)
        grad = (q - a - t * e) / dist
    return LosEvaluation(
        distance=float(dist),
        argmin_edge=int(k),
        gradient=grad,
        inside=region_contains(region, q),
    )


class ExactBoundaryOracle:
    """Exact LoS-distance by dense sampling of the true region boundary.

    The boundary is the flip-back image of the hull edges; each edge is
    sampled uniformly in its parameter, so the sampled min converges to the
    true distance from above. A 3-point parabolic refinement around the best
    sample removes most of the sampling bias. Per-edge bounding boxes let
    queries skip edges that cannot beat the current best.
    """

    def __init__(self, hull: FlippedHull, r_flip: float, samples_per_edge: int = 4096):
        if samples_per_edge < 1000:
            raise ValueError("oracle needs >= 1000 samples per edge")
        self.hull = hull
        self.r_flip = float(r_flip)
        self.samples_per_edge = int(samples_per_edge)
        verts = hull.vertices
        k = verts.shape[0]
        ts = np.linspace(0.0, 1.0, samples_per_edge)
        a = verts[:, None, :]
        e = (np.roll(verts, -1, axis=0) - verts)[:, None, :]
        flipped_pts = a + ts[None, :, None] * e  # (K, S, 2)
        back = spherical_flip(flipped_pts.reshape(-1, 2), self.r_flip).reshape(k, -1, 2)
        self._samples = back
        self._ts = ts
        self._bbox = np.stack(
            [
                back[:, :, 0].min(axis=1),
                back[:, :, 0].max(axis=1),
                back[:, :, 1].min(axis=1),
                back[:, :, 1].max(axis=1),
            ],
            axis=1,
        )

    def _bbox_lower_bounds(self, q: np.ndarray) -> np.ndarray:
        dx = np.maximum(np.maximum(self._bbox[:, 0] - q[0], q[0] - self._bbox[:, 1]), 0.0)
        dy = np.maximum(np.maximum(self._bbox[:, 2] - q[1], q[1] - self._bbox[:, 3]), 0.0)
        return np.sqrt(dx * dx + dy * dy)

    def _refine(self, q: np.ndarray, edge: int, idx: int, best: float) -> float:
        if idx == 0 or idx == self.samples_per_edge - 1:
            return best
        verts = self.hull.vertices
        a = verts[edge]
        e = verts[(edge + 1) % verts.shape[0]] - a
        t3 = self._ts[idx - 1 : idx + 2]
        d3 = np.linalg.norm(self._samples[edge, idx - 1 : idx + 2] - q[None, :], axis=1)
        # parabola through the three (t, d^2) samples
        y = d3 * d3
        denom = (y[0] - 2.0 * y[1] + y[2])
        if denom <= 0.0:
            return best
        h = t3[1] - t3[0]
        t_star = t3[1] + 0.5 * h * (y[0] - y[2]) / denom
        t_star = min(max(t_star, t3[0]), t3[2])
        p = spherical_flip(a + t_star * e, self.r_flip)
        return min(best, float(np.linalg.norm(p - q)))

    def query(self, q) -> float:
        q = np.asarray(q, dtype=np.float64)
        # the sensor origin is interior by construction and cannot be flipped
        if float(q @ q) > 0.0 and d_hull_max(self.hull, q) <= 0.0:
            raise ValueError("oracle query must lie strictly inside the visible region")
        bounds = self._bbox_lower_bounds(q)
        order = np.argsort(bounds, kind="stable")
        best = np.inf
        best_edge = -1
        best_idx = -1
        for edge in order:
            if bounds[edge] >= best:
                break
            d = np.linalg.norm(self._samples[edge] - q[None, :], axis=1)
            i = int(np.argmin(d))
            if d[i] < best:
                best = float(d[i])
                best_edge = int(edge)
                best_idx = i
        return self._refine(q, best_edge, best_idx, best)


def exact_los_oracle(hull: FlippedHull, r_flip: float, q, samples_per_edge: int = 4096) -> float:
    """One-shot exact-distance query; see ExactBoundaryOracle."""
    return ExactBoundaryOracle(hull, r_flip, samples_per_edge).query(q)


def beta_potential(distance: float, p: LosParams):
    """LoS weight and its derivative: 0 below d_los_min, half-cosine ramp on
    [d_los_min, d_los_max), k_beta beyond."""
    if distance < p.d_los_min:
        return 0.0, 0.0
    if distance >= p.d_los_max:
        return p.k_beta, 0.0
    span = p.d_los_max - p.d_los_min
    phase = math.pi * (distance - p.d_los_min) / span
    value = 0.5 * p.k_beta * (1.0 - math.cos(phase))
    deriv = 0.5 * p.k_beta * math.pi / span * math.sin(phase)
    return value, deriv


def mutual_los_distance(eval_ji: LosEvaluation, eval_ij: LosEvaluation) -> float:
    """Conservative pair distance: the smaller of the two directional values."""
    return min(eval_ji.distance, eval_ij.distance)


def effective_distance(ev: LosEvaluation) -> float:
    """Ramp input for one direction: outside the region counts as lost LoS."""
    return ev.distance if ev.inside else 0.0


def reshaped_beta_gradient(
    ev: LosEvaluation, d_pair: float, q_in_owner_frame, p: LosParams
) -> np.ndarray:
    """Gradient of the LoS weight w.r.t. the observed robot's position, in the
    region owner's local frame.

    The boundary-repulsion gradient is augmented with a radial pull toward the
    owner, scaled by the weight itself, so a healthy robot chases its neighbor
    before LoS decays while a nearly-lost one prioritizes leaving the
    boundary. Callers rotate the result into the global frame.
    """
    q = np.asarray(q_in_owner_frame, dtype=np.float64)
    norm = float(np.linalg.norm(q))
    if norm == 0.0:
        raise DegenerateGeometryError("observed robot sits on the region owner")
    _, dbeta = beta_potential(d_pair, p)
    if dbeta == 0.0:
        return np.zeros(2)
    value_here, _ = beta_potential(effective_distance(ev), p)
    return dbeta * (ev.gradient + value_here * (-q / norm))
