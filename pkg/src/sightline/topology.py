"""Minimal-topology selection: MST over effort-based edge weights, then
masking of the weight matrix so only tree edges (and active collision terms)
remain."""

from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Tuple

import numpy as np

from .connectivity import (
    ConnectivityState,
    ConstraintParams,
    fiedler_pair,
    gamma_potential,
    laplacian_from_weights,
)

Edge = Tuple[int, int]


@dataclass(frozen=True)
class TopologyPlan:
    tree_edges: FrozenSet[Edge]  # unordered pairs, stored as (i < j)
    mst_weights: Dict[Edge, float]
    masked_weights: np.ndarray
    spanning: bool  # False when the live graph was already disconnected


def mst_edge_weight(alpha: float, beta: float, d: float, d_com_max: float) -> float:
    """Effort-based tree weight: well-connected edges are strongly negative,
    longer edges pay d/d_com_max. The collision factor is deliberately left
    out (it applies to every pair regardless of topology)."""
    return -alpha * beta + d / d_com_max


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[rb] = ra
        return True


def kruskal_mst(candidate_edges: List[Tuple[int, int, float]], robot_count: int):
    """Minimum spanning tree (or forest) over candidate edges.

    Ties break lexicographically on (weight, i, j) for reproducible
    topologies. Returns (edges as a frozenset of (i < j), spanning flag).
    """
    if robot_count == 0:
        raise ValueError("no robots")
    if robot_count == 1:
        return frozenset(), True
    normalized = [(w, min(i, j), max(i, j)) for (i, j, w) in candidate_edges]
    uf = _UnionFind(robot_count)
    chosen = []
    for w, i, j in sorted(normalized):
        if uf.union(i, j):
            chosen.append((i, j))
            if len(chosen) == robot_count - 1:
                break
    return frozenset(chosen), len(chosen) == robot_count - 1


def candidate_edges_from_state(
    state: ConnectivityState, positions, p: ConstraintParams
) -> List[Tuple[int, int, float]]:
    """Live edges (A_ij > 0) with their MST weights."""
    out = []
    r = state.robot_count
    for i in range(r):
        for j in range(i + 1, r):
            if state.weights[i, j] > 0.0:
                alpha, beta, _ = state.factors[(i, j)]
                d = float(np.linalg.norm(np.asarray(positions[i]) - np.asarray(positions[j])))
                out.append((i, j, mst_edge_weight(alpha, beta, d, p.d_com_max)))
    return out


def mask_weights(state: ConnectivityState, tree: FrozenSet[Edge]) -> np.ndarray:
    """Masked weight matrix: tree edges keep A_ij; other pairs keep only an
    active collision term (gamma < 1), else drop to zero."""
    r = state.robot_count
    for i, j in tree:
        if not (0 <= i < r and 0 <= j < r and i != j):
            raise ValueError(f"tree edge {(i, j)} not a robot pair of this state")
    masked = np.zeros_like(state.weights)
    for i in range(r):
        for j in range(i + 1, r):
            if (i, j) in tree or (j, i) in tree:
                masked[i, j] = masked[j, i] = state.weights[i, j]
            else:
                gamma = state.factors[(i, j)][2]
                masked[i, j] = masked[j, i] = 0.0 if gamma == 1.0 else gamma
    return masked


def plan_topology(state: ConnectivityState, positions, p: ConstraintParams) -> TopologyPlan:
    candidates = candidate_edges_from_state(state, positions, p)
    tree, spanning = kruskal_mst(candidates, state.robot_count)
    weights = {(i, j): w for (i, j, w) in candidates}
    return TopologyPlan(
        tree_edges=tree,
        mst_weights={e: weights[e] for e in tree},
        masked_weights=mask_weights(state, tree),
        spanning=spanning,
    )


def apply_topology_mask(
    state: ConnectivityState,
    tree: FrozenSet[Edge],
    positions,
    p: ConstraintParams,
) -> ConnectivityState:
    """Connectivity state rebuilt on the masked weights.

    Tree edges keep the full product-rule gradients; non-tree pairs with an
    active collision term keep only the gamma gradient (their masked weight
    *is* gamma); everything else is zeroed.
    """
    masked = mask_weights(state, tree)
    grads = {}
    r = state.robot_count
    for i in range(r):
        for j in range(r):
            if i == j:
                continue
            a, b = (i, j) if i < j else (j, i)
            if (a, b) in tree:
                grads[(i, j)] = state.grads[(i, j)]
            elif masked[i, j] > 0.0:
                qi = np.asarray(positions[i], dtype=np.float64)
                qj = np.asarray(positions[j], dtype=np.float64)
                d = float(np.linalg.norm(qi - qj))
                _, dgamma = gamma_potential(d, p)
                grads[(i, j)] = dgamma * (qi - qj) / d
            else:
                grads[(i, j)] = np.zeros(2)
    lap = laplacian_from_weights(masked)
    lam2, v2 = fiedler_pair(lap) if r >= 2 else (float("nan"), np.zeros(1))
    masked.setflags(write=False)
    return ConnectivityState(
        weights=masked,
        factors=state.factors,
        laplacian=lap,
        lambda2=lam2,
        v2=v2,
        grads=grads,
    )
