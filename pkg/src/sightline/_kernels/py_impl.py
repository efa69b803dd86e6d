"""Pure-numpy implementations of the hot geometry kernels.

Used when the compiled extension is unavailable (or forced via
SIGHTLINE_KERNELS=python). Formulas are kept operation-for-operation
identical to the Cython versions so both backends produce the same floats.
"""

import numpy as np

# Branch codes shared with the compiled backend.
BRANCH_START = 0
BRANCH_END = 1
BRANCH_INTERIOR = 2

# Edges whose distance is within this window of the minimum tie-break to the
# lowest edge index.
TIE_EPS = 1e-9

HULL_EPS = 1e-12


def _edge_arrays(verts):
    a = verts
    b = np.roll(verts, -1, axis=0)
    return a, b


def segment_distances(verts, x, y):
    """Per-edge point-to-segment distances for a closed polygon.

    Returns (dist, t) arrays where t is the unclamped projection parameter.
    """
    a, b = _edge_arrays(verts)
    ex = b[:, 0] - a[:, 0]
    ey = b[:, 1] - a[:, 1]
    qax = x - a[:, 0]
    qay = y - a[:, 1]
    qbx = x - b[:, 0]
    qby = y - b[:, 1]
    ee = ex * ex + ey * ey
    t = (qax * ex + qay * ey) / ee
    d_start = np.sqrt(qax * qax + qay * qay)
    d_end = np.sqrt(qbx * qbx + qby * qby)
    d_int = np.abs(ex * qay - ey * qax) / np.sqrt(ee)
    dist = np.where(t < 0.0, d_start, np.where(t > 1.0, d_end, d_int))
    return dist, t


def polygon_distance(verts, x, y):
    """Min distance from (x, y) to the boundary of a closed polygon.

    Returns (distance, edge_index, branch). Edges tying with the minimum
    within TIE_EPS resolve to the lowest index.
    """
    dist, t = segment_distances(verts, x, y)
    dmin = float(np.min(dist))
    k = int(np.argmax(dist <= dmin + TIE_EPS))
    tk = t[k]
    if tk < 0.0:
        branch = BRANCH_START
    elif tk > 1.0:
        branch = BRANCH_END
    else:
        branch = BRANCH_INTERIOR
    return float(dist[k]), k, branch


def polygon_contains(verts, x, y):
    """Even-odd crossing test. Boundary points may report either value."""
    a, b = _edge_arrays(verts)
    ya = a[:, 1]
    yb = b[:, 1]
    straddle = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = (b[:, 0] - a[:, 0]) * (y - ya) / (yb - ya) + a[:, 0]
    crossings = np.count_nonzero(straddle & (x < xs))
    return bool(crossings & 1)


def polygon_contains_many(verts, pts):
    a, b = _edge_arrays(verts)
    ya = a[:, 1][None, :]
    yb = b[:, 1][None, :]
    y = pts[:, 1][:, None]
    x = pts[:, 0][:, None]
    straddle = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xs = (b[:, 0] - a[:, 0])[None, :] * (y - ya) / (yb - ya) + a[:, 0][None, :]
    crossings = np.count_nonzero(straddle & (x < xs), axis=1)
    return (crossings & 1).astype(bool)


def raycast(segments, dirs, max_range):
    """Nearest hit distance per ray direction for rays from the origin.

    segments: (M, 4) rows (x1, y1, x2, y2); dirs: (B, 2) unit vectors
    (precomputed by the caller so both backends see identical floats).
    Misses return inf.
    """
    if segments.shape[0] == 0 or dirs.shape[0] == 0:
        return np.full(dirs.shape[0], np.inf)
    x1 = segments[:, 0][None, :]
    y1 = segments[:, 1][None, :]
    ex = (segments[:, 2] - segments[:, 0])[None, :]
    ey = (segments[:, 3] - segments[:, 1])[None, :]
    dx = dirs[:, 0][:, None]
    dy = dirs[:, 1][:, None]
    det = ex * dy - ey * dx
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (ex * y1 - ey * x1) / det
        s = (dx * y1 - dy * x1) / det
    valid = (det != 0.0) & (s >= 0.0) & (s <= 1.0) & (t > 1e-12) & (t <= max_range)
    t = np.where(valid, t, np.inf)
    return np.min(t, axis=1)


def hull_chain(pts):
    """Monotone-chain convex hull over lexicographically sorted, deduplicated
    points. Returns CCW vertex indices; collinear points (|cross| <= 1e-12)
    are dropped.
    """
    n = pts.shape[0]
    if n < 3:
        return np.arange(n, dtype=np.int64)

    def _cross(o, a, b):
        return (pts[a, 0] - pts[o, 0]) * (pts[b, 1] - pts[o, 1]) - (
            pts[a, 1] - pts[o, 1]
        ) * (pts[b, 0] - pts[o, 0])

    lower = []
    for i in range(n):
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], i) <= HULL_EPS:
            lower.pop()
        lower.append(i)
    upper = []
    for i in range(n - 1, -1, -1):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], i) <= HULL_EPS:
            upper.pop()
        upper.append(i)
    return np.array(lower[:-1] + upper[:-1], dtype=np.int64)
