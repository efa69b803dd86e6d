"""Weighted connectivity graph and the Fiedler-eigenvalue controller.

Each robot pair gets a weight A_ij = alpha * beta * gamma encoding the
communication-range, line-of-sight and collision constraints. The second
eigenpair of the resulting graph Laplacian drives a velocity that keeps the
team connected.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Tuple

import numpy as np

from .losdist import (
    LosEvaluation,
    LosParams,
    beta_potential,
    effective_distance,
    los_distance,
    reshaped_beta_gradient,
)


@dataclass(frozen=True)
class ConstraintParams:
    d_com_max: float
    d_coll_min: float
    los: LosParams = field(default_factory=LosParams)
    d_com_ramp: Optional[float] = None
    d_coll_ramp: Optional[float] = None
    lambda2_min: float = 0.05
    lambda2_eps: float = 1e-3

    def __post_init__(self):
        if self.d_com_ramp is None:
            object.__setattr__(self, "d_com_ramp", 0.2 * self.d_com_max)
        if self.d_coll_ramp is None:
            object.__setattr__(self, "d_coll_ramp", 2.0 * self.d_coll_min)
        if self.d_coll_min + self.d_coll_ramp >= self.d_com_max - self.d_com_ramp:
            raise ValueError("collision band must end below the communication fade band")
        if self.lambda2_min <= 0:
            raise ValueError("lambda2_min must be positive")


def alpha_potential(d: float, p: ConstraintParams) -> Tuple[float, float]:
    """Communication-range weight: 1 on the plateau, C1 cosine fade to 0 at
    d_com_max."""
    start = p.d_com_max - p.d_com_ramp
    if d <= start:
        return 1.0, 0.0
    if d >= p.d_com_max:
        return 0.0, 0.0
    phase = math.pi * (d - start) / p.d_com_ramp
    return 0.5 * (1.0 + math.cos(phase)), -0.5 * math.pi / p.d_com_ramp * math.sin(phase)


def gamma_potential(d: float, p: ConstraintParams) -> Tuple[float, float]:
    """Collision weight: 0 at or below d_coll_min, C1 cosine rise to 1."""
    if d <= p.d_coll_min:
        return 0.0, 0.0
    end = p.d_coll_min + p.d_coll_ramp
    if d >= end:
        return 1.0, 0.0
    phase = math.pi * (d - p.d_coll_min) / p.d_coll_ramp
    return 0.5 * (1.0 - math.cos(phase)), 0.5 * math.pi / p.d_coll_ramp * math.sin(phase)


# beta_eval callables return the directional LoS evaluation of a point in a
# region owner's local frame; the default uses the polygon metric.
BetaEval = Callable[[int, np.ndarray], LosEvaluation]


@dataclass(frozen=True)
class ConnectivityState:
    weights: np.ndarray  # (R, R) symmetric, zero diagonal
    factors: Dict[Tuple[int, int], Tuple[float, float, float]]  # (i<j) -> (a, b, g)
    laplacian: np.ndarray
    lambda2: float
    v2: np.ndarray
    grads: Dict[Tuple[int, int], np.ndarray]  # ordered (i, j) -> dA_ij/dq_i

    @property
    def robot_count(self) -> int:
        return self.weights.shape[0]

    def factor(self, i: int, j: int) -> Tuple[float, float, float]:
        return self.factors[(i, j) if i < j else (j, i)]

    def gamma(self, i: int, j: int) -> float:
        return self.factor(i, j)[2]


def _jacobi_eigh(matrix: np.ndarray, tol: float = 1e-14, max_sweeps: int = 64):
    """Cyclic Jacobi eigendecomposition for small symmetric matrices.

    Returns (eigenvalues ascending, eigenvectors as columns). Kept separate
    from the numpy-based oracle used in the tests.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v
    scale = max(float(np.max(np.abs(a))), 1.0)
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                off = max(off, abs(a[p, q]))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p] = rot_p
                a[:, q] = rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :] = rot_p
                a[q, :] = rot_q
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p] = rot_p
                v[:, q] = rot_q
    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def fix_eigenvector_sign(v: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    """Flip so the first component larger than tol in magnitude is positive."""
    for x in v:
        if abs(x) > tol:
            return v if x > 0 else -v
    return v


def fiedler_pair(laplacian: np.ndarray, snap_tol: float = 1e-12) -> Tuple[float, np.ndarray]:
    """Second-smallest eigenvalue and unit eigenvector of a graph Laplacian.

    lambda2 below snap_tol (relative to the matrix scale) snaps to exactly 0
    so disconnection is decidable by equality. The eigenvector is
    orthogonalized against the all-ones kernel direction and sign-fixed.
    """
    lap = np.asarray(laplacian, dtype=np.float64)
    n = lap.shape[0]
    if lap.shape != (n, n) or n < 2:
        raise ValueError("laplacian must be square with at least 2 rows")
    if float(np.max(np.abs(lap - lap.T))) > 1e-9:
        raise ValueError("laplacian must be symmetric")
    w, vecs = _jacobi_eigh(lap)
    lam2 = float(w[1])
    v2 = vecs[:, 1].copy()
    ones = np.full(n, 1.0 / math.sqrt(n))
    v2 -= (v2 @ ones) * ones
    norm = float(np.linalg.norm(v2))
    if norm < 1e-9:
        # degenerate zero eigenspace: take the other kernel column
        v2 = vecs[:, 0] - (vecs[:, 0] @ ones) * ones
        norm = float(np.linalg.norm(v2))
    v2 /= norm
    v2 = fix_eigenvector_sign(v2)
    scale = max(1.0, float(np.max(np.abs(lap))))
    if abs(lam2) <= snap_tol * scale:
        lam2 = 0.0
    return lam2, v2


def laplacian_from_weights(weights: np.ndarray) -> np.ndarray:
    return np.diag(weights.sum(axis=1)) - weights


def default_beta_eval(regions) -> BetaEval:
    def ev(owner: int, q_local: np.ndarray) -> LosEvaluation:
        return los_distance(regions[owner], q_local)

    return ev


def pair_terms(
    q_i: np.ndarray,
    q_j: np.ndarray,
    ev_ji: Optional[LosEvaluation],
    ev_ij: Optional[LosEvaluation],
    p: ConstraintParams,
    reshape_beta: bool = True,
):
    """Factors, weight and the two weight gradients for one robot pair.

    ev_ji is the evaluation of robot i inside robot j's region (None when the
    pair is out of communication range). Returns
    (alpha, beta, gamma, weight, dA/dq_i, dA/dq_j).
    """
    dvec = q_i - q_j
    d = float(np.linalg.norm(dvec))
    gamma, dgamma = gamma_potential(d, p)
    if d > p.d_com_max or ev_ji is None or ev_ij is None:
        return 0.0, 0.0, gamma, 0.0, np.zeros(2), np.zeros(2)
    alpha, dalpha = alpha_potential(d, p)
    d_pair = min(effective_distance(ev_ji), effective_distance(ev_ij))
    beta, _ = beta_potential(d_pair, p.los)
    weight = alpha * beta * gamma
    u_ij = dvec / d if d > 0.0 else np.zeros(2)
    out_grads = []
    for ev, sign, q_local in ((ev_ji, 1.0, dvec), (ev_ij, -1.0, -dvec)):
        if reshape_beta:
            dbeta_vec = reshaped_beta_gradient(ev, d_pair, q_local, p.los)
        else:
            _, dbeta = beta_potential(d_pair, p.los)
            dbeta_vec = dbeta * ev.gradient
        out_grads.append(
            dalpha * sign * u_ij * gamma * beta
            + alpha * dgamma * sign * u_ij * beta
            + alpha * gamma * dbeta_vec
        )
    return alpha, beta, gamma, weight, out_grads[0], out_grads[1]


def build_connectivity_state(
    positions,
    regions,
    p: ConstraintParams,
    beta_eval: Optional[BetaEval] = None,
    reshape_beta: bool = True,
) -> ConnectivityState:
    """Assemble weights, per-pair factors and weight gradients for a team.

    positions are global; each region lives in its owner's local (translated)
    frame. Pairs beyond d_com_max are skipped entirely: their weight, LoS
    factor and gradients are zero, which matches what either robot could
    compute from one-hop data.

    reshape_beta=False drops the radial chase term from the LoS gradient
    (plain chain rule); used by the finite-difference checks.
    """
    positions = [np.asarray(q, dtype=np.float64) for q in positions]
    r_count = len(positions)
    if regions is not None and len(regions) != r_count:
        raise ValueError("one region per robot required")
    if beta_eval is None:
        beta_eval = default_beta_eval(regions)

    weights = np.zeros((r_count, r_count))
    factors: Dict[Tuple[int, int], Tuple[float, float, float]] = {}
    grads: Dict[Tuple[int, int], np.ndarray] = {}

    for i in range(r_count):
        for j in range(i + 1, r_count):
            d = float(np.linalg.norm(positions[i] - positions[j]))
            if d > p.d_com_max:
                ev_ji = ev_ij = None
            else:
                ev_ji = beta_eval(j, positions[i] - positions[j])  # i in j's region
                ev_ij = beta_eval(i, positions[j] - positions[i])
            alpha, beta, gamma, weight, grad_i, grad_j = pair_terms(
                positions[i], positions[j], ev_ji, ev_ij, p, reshape_beta
            )
            weights[i, j] = weights[j, i] = weight
            factors[(i, j)] = (alpha, beta, gamma)
            grads[(i, j)] = grad_i
            grads[(j, i)] = grad_j

    lap = laplacian_from_weights(weights)
    lam2, v2 = fiedler_pair(lap) if r_count >= 2 else (float("nan"), np.zeros(1))
    weights.setflags(write=False)
    return ConnectivityState(
        weights=weights,
        factors=factors,
        laplacian=lap,
        lambda2=lam2,
        v2=v2,
        grads=grads,
    )


def fiedler_gain(lambda2: float, p: ConstraintParams) -> Tuple[float, bool]:
    """Controller gain 1/(lambda2 - lambda2_min)^2, clamped near the barrier."""
    if lambda2 <= p.lambda2_min + p.lambda2_eps:
        return 1.0 / (p.lambda2_eps * p.lambda2_eps), True
    gap = lambda2 - p.lambda2_min
    return 1.0 / (gap * gap), False


def neighbor_set(state: ConnectivityState, i: int):
    """Pairs the controller must consider: live edges plus any pair whose
    collision constraint is active."""
    out = []
    for j in range(state.robot_count):
        if j == i:
            continue
        if state.weights[i, j] > 0.0 or state.gamma(i, j) < 1.0:
            out.append(j)
    return out


def connectivity_velocity(i: int, state: ConnectivityState, p: ConstraintParams) -> np.ndarray:
    """Velocity increasing the Fiedler eigenvalue of the (masked) Laplacian.

    Gradient ascent on lambda2 through the barrier 1/(lambda2 - lambda2_min):
    u_i = gain * sum_j dA_ij/dq_i * (v2_i - v2_j)^2.
    """
    gain, _ = fiedler_gain(state.lambda2, p)
    total = np.zeros(2)
    for j in neighbor_set(state, i):
        diff = state.v2[i] - state.v2[j]
        total += state.grads[(i, j)] * (diff * diff)
    return gain * total
