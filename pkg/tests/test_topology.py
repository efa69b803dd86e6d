import itertools

import numpy as np
import pytest

from conftest import make_constraints
from sightline.connectivity import ConnectivityState, fiedler_pair, laplacian_from_weights
from sightline.topology import (
    apply_topology_mask,
    kruskal_mst,
    mask_weights,
    mst_edge_weight,
    plan_topology,
)


def state_from_weights(weights, gammas=None):
    """ConnectivityState stub for masking tests (no regions involved)."""
    weights = np.asarray(weights, dtype=np.float64)
    n = weights.shape[0]
    factors = {}
    grads = {}
    for i in range(n):
        for j in range(i + 1, n):
            g = 1.0 if gammas is None else gammas.get((i, j), 1.0)
            beta = weights[i, j]
            factors[(i, j)] = (1.0, beta, g)
            grads[(i, j)] = np.zeros(2)
            grads[(j, i)] = np.zeros(2)
    lap = laplacian_from_weights(weights)
    lam2, v2 = fiedler_pair(lap)
    return ConnectivityState(
        weights=weights, factors=factors, laplacian=lap, lambda2=lam2, v2=v2, grads=grads
    )


# ------------------------------------------------------------------ weights / kruskal

def test_mst_edge_weight_examples():
    assert mst_edge_weight(1.0, 1.0, 5.0, 10.0) == pytest.approx(-0.5)
    assert mst_edge_weight(0.0, 1.0, 12.0, 10.0) == pytest.approx(1.2)
    assert mst_edge_weight(1.0, 0.0, 12.0, 10.0) == pytest.approx(1.2)


def test_kruskal_triangle():
    edges = [(0, 1, -0.9), (1, 2, -0.5), (0, 2, -0.1)]
    tree, spanning = kruskal_mst(edges, 3)
    assert spanning
    assert tree == frozenset({(0, 1), (1, 2)})


def test_kruskal_degenerate_counts():
    with pytest.raises(ValueError):
        kruskal_mst([], 0)
    tree, spanning = kruskal_mst([], 1)
    assert tree == frozenset() and spanning


def test_kruskal_forest_when_disconnected():
    edges = [(0, 1, -1.0), (2, 3, -1.0)]
    tree, spanning = kruskal_mst(edges, 4)
    assert not spanning
    assert tree == frozenset({(0, 1), (2, 3)})


def test_kruskal_tie_break_lexicographic():
    # equal weights: acceptance order is (0,1), (0,3), (1,2); (2,3) closes a cycle
    edges = [(2, 3, -1.0), (0, 1, -1.0), (1, 2, -1.0), (0, 3, -1.0)]
    for perm in itertools.permutations(edges):
        tree, _ = kruskal_mst(list(perm), 4)
        assert tree == frozenset({(0, 1), (0, 3), (1, 2)})


def _brute_force_mst_weight(edges, n):
    best = None
    for combo in itertools.combinations(edges, n - 1):
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        ok = True
        for i, j, _ in combo:
            ri, rj = find(i), find(j)
            if ri == rj:
                ok = False
                break
            parent[ri] = rj
        if ok:
            total = sum(w for _, _, w in combo)
            if best is None or total < best:
                best = total
    return best


def test_kruskal_matches_exhaustive_enumeration(rng):
    for _ in range(200):
        n = int(rng.integers(2, 7))
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.uniform() < 0.8:
                    edges.append((i, j, float(rng.uniform(-1.0, 1.5))))
        tree, spanning = kruskal_mst(edges, n)
        brute = _brute_force_mst_weight(edges, n)
        if not spanning:
            assert brute is None
            continue
        lookup = {(i, j): w for i, j, w in edges}
        total = sum(lookup[e] for e in tree)
        assert total == pytest.approx(brute, abs=1e-12)


# ------------------------------------------------------------------ masking

def test_mask_keeps_tree_drops_rest():
    w = np.array(
        [
            [0.0, 0.8, 0.5, 0.0],
            [0.8, 0.0, 0.9, 0.4],
            [0.5, 0.9, 0.0, 0.7],
            [0.0, 0.4, 0.7, 0.0],
        ]
    )
    state = state_from_weights(w)
    tree = frozenset({(0, 1), (1, 2), (2, 3)})
    masked = mask_weights(state, tree)
    assert masked[0, 1] == 0.8 and masked[1, 2] == 0.9 and masked[2, 3] == 0.7
    assert masked[0, 2] == 0.0 and masked[1, 3] == 0.0 and masked[0, 3] == 0.0


def test_mask_keeps_active_collision_term():
    w = np.array([[0.0, 0.8, 0.5], [0.8, 0.0, 0.9], [0.5, 0.9, 0.0]])
    state = state_from_weights(w, gammas={(0, 2): 0.5})
    tree = frozenset({(0, 1), (1, 2)})
    masked = mask_weights(state, tree)
    assert masked[0, 2] == 0.5  # gamma survives masking
    # idempotence
    state2 = state_from_weights(masked, gammas={(0, 2): 0.5})
    assert np.array_equal(mask_weights(state2, tree), masked)


def test_mask_rejects_foreign_edge():
    state = state_from_weights(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        mask_weights(state, frozenset({(0, 5)}))


def test_masked_tree_minus_edge_disconnects(rng):
    for _ in range(100):
        n = int(rng.integers(3, 10))
        # random spanning tree with weights in [0.1, 1]
        nodes = list(rng.permutation(n))
        edges = []
        for k in range(1, n):
            a = nodes[k]
            b = nodes[int(rng.integers(0, k))]
            edges.append((min(a, b), max(a, b), float(rng.uniform(0.1, 1.0))))
        w = np.zeros((n, n))
        for i, j, wt in edges:
            w[i, j] = w[j, i] = wt
        lam_full, _ = fiedler_pair(laplacian_from_weights(w))
        assert lam_full > 1e-9
        for i, j, wt in edges:
            w2 = w.copy()
            w2[i, j] = w2[j, i] = 0.0
            lam_cut, _ = fiedler_pair(laplacian_from_weights(w2))
            assert lam_cut < 1e-12
            assert lam_full > lam_cut + 1e-9  # restoring strictly increases


def test_plan_topology_and_apply(rng):
    from sightline.connectivity import build_connectivity_state
    from test_connectivity import open_space_region

    p = make_constraints()
    region = open_space_region()
    positions = [np.array([0.0, 0.0]), np.array([6.0, 0.0]), np.array([3.0, 5.0])]
    state = build_connectivity_state(positions, [region] * 3, p)
    plan = plan_topology(state, positions, p)
    assert plan.spanning
    assert len(plan.tree_edges) == 2
    masked_state = apply_topology_mask(state, plan.tree_edges, positions, p)
    assert masked_state.lambda2 > 0
    # non-tree pair dropped entirely (gamma = 1 in open space)
    (i, j) = next(
        (i, j)
        for i in range(3)
        for j in range(i + 1, 3)
        if (i, j) not in plan.tree_edges
    )
    assert masked_state.weights[i, j] == 0.0
    assert np.allclose(masked_state.grads[(i, j)], 0.0)


def test_safety_never_masked_away(rng):
    gammas = {(0, 1): 0.3, (0, 2): 1.0}
    w = np.array([[0.0, 0.2, 0.8], [0.2, 0.0, 0.9], [0.8, 0.9, 0.0]])
    state = state_from_weights(w, gammas=gammas)
    tree = frozenset({(0, 2), (1, 2)})
    masked = mask_weights(state, tree)
    assert masked[0, 1] == 0.3  # collision-active pair keeps a positive entry
