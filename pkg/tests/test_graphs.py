import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from flowreg.graphs import (
    CommGraph,
    NetworkTopology,
    comm_laplacian,
    incidence_matrix,
    input_indicator,
    is_connected,
    is_zero_forcing,
    minimal_zero_forcing_sets,
    numerical_rank,
    zf_closure,
    zf_closure_rescan,
)

from conftest import make_random_connected

CYCLE4 = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3), (3, 0)), actuated=(0,))
PATH4 = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3)), actuated=(0,))


def test_incidence_smallest_graph():
    topo = NetworkTopology(n=2, edges=((0, 1),), actuated=(0,))
    B = incidence_matrix(topo)
    assert B.tolist() == [[1.0], [-1.0]]


def test_incidence_cycle_rank_and_column_sums():
    B = incidence_matrix(CYCLE4)
    assert B.shape == (4, 4)
    assert np.allclose(B.sum(axis=0), 0.0)
    assert numerical_rank(B) == 3


def test_incidence_disconnected_rank_drop():
    # two 2-node components: rank B = n - (#components)
    topo = NetworkTopology(n=4, edges=((0, 1), (2, 3)), actuated=(0,))
    assert numerical_rank(incidence_matrix(topo)) == 2
    assert not is_connected(topo)


def test_is_connected_basics():
    assert is_connected(NetworkTopology(n=1, edges=(), actuated=(0,)))
    assert is_connected(CYCLE4)
    assert not is_connected(NetworkTopology(n=4, edges=((0, 1), (2, 3)), actuated=(0,)))


def test_input_indicator_all_nodes_is_identity():
    topo = NetworkTopology(n=3, edges=((0, 1), (1, 2)), actuated=(0, 1, 2))
    assert np.array_equal(input_indicator(topo), np.eye(3))


def test_input_indicator_selects_sorted_actuated():
    topo = NetworkTopology(n=4, edges=((0, 1), (1, 2), (2, 3), (3, 0)), actuated=(1, 2, 3))
    E = input_indicator(topo)
    assert E.shape == (4, 3)
    assert np.array_equal(E[:, 0], [0, 1, 0, 0])
    BE = np.hstack([incidence_matrix(topo), E])
    assert numerical_rank(BE) == 4


def test_single_actuated_node_full_row_rank():
    topo = NetworkTopology(n=5, edges=((0, 1), (1, 2), (2, 3), (3, 4)), actuated=(1,))
    BE = np.hstack([incidence_matrix(topo), input_indicator(topo)])
    assert numerical_rank(BE) == 5


@pytest.mark.parametrize("seed", range(20))
def test_rank_facts_random_connected(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    topo = make_random_connected(rng, n, extra_edges=int(rng.integers(0, 4)),
                                 p_actuated=int(rng.integers(1, n + 1)))
    B = incidence_matrix(topo)
    assert numerical_rank(B) == n - 1
    assert numerical_rank(np.hstack([B, input_indicator(topo)])) == n


# --- communication Laplacian ------------------------------------------------

def test_comm_laplacian_path_weight_1e4():
    cg = CommGraph.undirected(3, [(0, 1, 1e4), (1, 2, 1e4)])
    L = comm_laplacian(cg)
    expected = np.array([[1e4, -1e4, 0.0], [-1e4, 2e4, -1e4], [0.0, -1e4, 1e4]])
    assert np.array_equal(L, expected)


def test_comm_laplacian_complete_weight_10():
    edges = [(i, j, 10.0) for i in range(4) for j in range(i + 1, 4)]
    L = comm_laplacian(CommGraph.undirected(4, edges))
    assert np.allclose(np.diag(L), 30.0)
    off = L[~np.eye(4, dtype=bool)]
    assert np.allclose(off, -10.0)


def test_comm_laplacian_balanced_digraph_kernels():
    # directed 3-cycle is balanced and strongly connected
    cg = CommGraph(3, ((0, 1, 2.0), (1, 2, 2.0), (2, 0, 2.0)))
    L = comm_laplacian(cg)
    assert np.allclose(L @ np.ones(3), 0.0)
    assert np.allclose(np.ones(3) @ L, 0.0)


def test_comm_laplacian_quadratic_form_matches_symmetric_part(rng):
    cg = CommGraph.undirected(4, [(0, 1, 1.5), (1, 2, 0.5), (2, 3, 2.0), (3, 0, 1.0)])
    L = comm_laplacian(cg)
    S = 0.5 * (L + L.T)
    evals = np.linalg.eigvalsh(S)
    assert evals.min() > -1e-12
    for _ in range(100):
        phi = rng.standard_normal(4) * 10
        lhs = phi @ L @ phi
        rhs = phi @ S @ phi
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, phi @ phi)


def test_comm_laplacian_quadratic_form_zero_iff_consensus(rng):
    cg = CommGraph.undirected(3, [(0, 1, 1.0), (1, 2, 3.0)])
    L = comm_laplacian(cg)
    assert abs(np.ones(3) @ L @ np.ones(3)) < 1e-14
    for _ in range(50):
        phi = rng.standard_normal(3)
        phi -= phi.mean()  # orthogonal to the consensus line
        if np.linalg.norm(phi) > 1e-9:
            assert phi @ L @ phi > 0


def test_comm_graph_rejects_unbalanced():
    with pytest.raises(ValueError, match="balanced"):
        comm_laplacian(CommGraph(2, ((0, 1, 1.0),)))


def test_comm_graph_rejects_disconnected():
    cg = CommGraph(3, ((0, 1, 1.0), (1, 0, 1.0)))
    with pytest.raises(ValueError, match="strongly connected"):
        comm_laplacian(cg)


def test_comm_graph_rejects_self_loop_and_multi_arc():
    with pytest.raises(ValueError, match="[Ss]elf-loop"):
        CommGraph(2, ((0, 0, 1.0),))
    with pytest.raises(ValueError, match="repeated"):
        CommGraph(2, ((0, 1, 1.0), (0, 1, 2.0), (1, 0, 3.0)))


# --- zero forcing -------------------------------------------------------------

def test_zf_closure_chain():
    assert zf_closure(PATH4, {0}) == frozenset({0, 1, 2, 3})


def test_zf_closure_cycle_stalls_on_single_node():
    assert zf_closure(CYCLE4, {0}) == frozenset({0})


def test_zf_closure_cycle_three_nodes():
    assert zf_closure(CYCLE4, {1, 2, 3}) == frozenset({0, 1, 2, 3})
    assert is_zero_forcing(CYCLE4, {1, 2, 3})


def test_is_zero_forcing_whole_vertex_set():
    assert is_zero_forcing(CYCLE4, {0, 1, 2, 3})


def test_is_zero_forcing_single_node_on_cycle_fails():
    assert not is_zero_forcing(CYCLE4, {0})


def test_minimal_zfs_path():
    sets = minimal_zero_forcing_sets(PATH4)
    assert frozenset({0}) in sets
    assert frozenset({3}) in sets


def test_minimal_zfs_cycle_adjacent_pairs():
    sets = minimal_zero_forcing_sets(CYCLE4)
    assert min(len(s) for s in sets) == 2
    smallest = [s for s in sets if len(s) == 2]
    adjacent = {frozenset(e) for e in CYCLE4.edges}
    assert set(smallest) == adjacent


def test_minimal_zfs_complete_graph():
    k4 = NetworkTopology(n=4, edges=tuple((i, j) for i in range(4) for j in range(i + 1, 4)),
                         actuated=(0,))
    sets = minimal_zero_forcing_sets(k4)
    assert min(len(s) for s in sets) == 3


def test_minimal_zfs_refuses_large_graph():
    big = NetworkTopology(n=13, edges=tuple((i, i + 1) for i in range(12)), actuated=(0,))
    with pytest.raises(ValueError, match="refused"):
        minimal_zero_forcing_sets(big)


@given(seed=st.integers(0, 10_000), data=st.data())
@settings(max_examples=60)
def test_zf_closure_monotone_extensive_idempotent(seed, data):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    topo = make_random_connected(rng, n, extra_edges=int(rng.integers(0, 3)))
    small = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
    extra = data.draw(st.sets(st.integers(0, n - 1), max_size=n))
    big = small | extra
    c_small = zf_closure(topo, small)
    c_big = zf_closure(topo, big)
    assert small <= c_small                       # extensive
    assert c_small <= c_big                       # monotone
    assert zf_closure(topo, c_small) == c_small   # idempotent


def test_zf_closure_order_independent_100_shuffles():
    rng = np.random.default_rng(7)
    for _ in range(10):
        n = int(rng.integers(3, 9))
        topo = make_random_connected(rng, n, extra_edges=int(rng.integers(0, 3)))
        seedset = set(rng.choice(n, size=int(rng.integers(1, n)), replace=False).tolist())
        reference = zf_closure(topo, seedset)
        for _ in range(10):
            assert zf_closure_rescan(topo, seedset, rng=rng) == reference


def test_topology_validation():
    with pytest.raises(ValueError, match="endpoint"):
        NetworkTopology(n=2, edges=((0, 2),), actuated=(0,))
    with pytest.raises(ValueError, match="controllable external input"):
        NetworkTopology(n=2, edges=((0, 1),), actuated=())
    with pytest.raises(ValueError, match="[Ss]elf-loop"):
        NetworkTopology(n=2, edges=((1, 1),), actuated=(0,))
