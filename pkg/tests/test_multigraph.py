import numpy as np
import pytest

from derandlap import (
    GraphError,
    connected_components,
    from_edge_list,
    graph_lambda,
    regularize,
)
from derandlap.fixtures import (
    add_self_loops,
    complete_graph,
    cycle_graph,
    random_connected_multigraph,
    random_regular_graph,
)


def test_triangle_canonical_labeling():
    g = from_edge_list([(0, 1), (1, 2), (0, 2)], 3)
    assert g.d == 2
    w, j = g.rot(0, 0)
    assert w == 1
    assert g.rot(w, j) == (0, 0)


def test_parallel_edges():
    g = from_edge_list([(0, 1, 2)], 2)
    assert g.d == 2
    assert g.adjacency()[0, 1] == 2


def test_vertex_out_of_range():
    with pytest.raises(GraphError):
        from_edge_list([(0, 5)], 3)


def test_empty_vertex_set():
    with pytest.raises(GraphError):
        from_edge_list([], 0)


def test_self_loop_single_label():
    g = from_edge_list([(1, 1), (0, 1)], 2)
    # degree of vertex 1: one loop label + one edge label
    assert g.degree(1) == 2
    loop_labels = [i for i in range(g.degree(1)) if g.rot(1, i) == (1, i)]
    assert len(loop_labels) == 1


def test_involution_everywhere():
    for seed in range(5):
        g = random_connected_multigraph(12, seed)
        g.check_involution()
        reg = regularize(g)
        reg.graph.check_involution()


def test_rot_label_out_of_range():
    g = from_edge_list([(0, 1)], 2)
    with pytest.raises(GraphError):
        g.rot(0, 5)


def test_rot_double_application_random():
    g = random_regular_graph(10, 4, seed=3)
    rng = np.random.default_rng(0)
    for _ in range(1000):
        v = int(rng.integers(10))
        i = int(rng.integers(4))
        w, j = g.rot(v, i)
        assert g.rot(w, j) == (v, i)


def test_regularize_degree_formula():
    # max degree 3 -> f = 8
    g = from_edge_list([(0, 1), (0, 2), (0, 3)], 4)
    assert regularize(g).f == 8


def test_regularize_already_regular():
    g = random_regular_graph(6, 4, seed=1)
    reg = regularize(g)
    assert reg.f == 8
    assert np.all(reg.loops == 4)


def test_regularize_single_vertex():
    g = from_edge_list([(0, 0)], 1)
    # degenerate: degree-1 loop graph regularizes to f = 2
    assert regularize(g).f == 2


def test_regularize_preserves_laplacian_exactly():
    for seed in range(8):
        g = random_connected_multigraph(9, seed, max_multiplicity=4)
        reg = regularize(g)
        assert np.array_equal(g.laplacian(), reg.graph.laplacian())


def test_regularized_graph_is_half_lazy_power_of_two():
    for seed in range(5):
        g = random_connected_multigraph(7, 100 + seed)
        reg = regularize(g)
        f = reg.graph.d
        assert f & (f - 1) == 0
        assert reg.graph.transition_matrix().diagonal().min() >= 0.5


def test_lambda_bound_for_loop_padded_graphs():
    # connected regular graph with a self loop everywhere mixes:
    # lambda <= 1 - 1/(2 d^2 n^2)
    for seed in range(5):
        g = regularize(random_connected_multigraph(8, 200 + seed)).graph
        n, d = g.n, g.d
        assert graph_lambda(g) <= 1.0 - 1.0 / (2.0 * d * d * n * n) + 1e-12


def test_transition_matrix_complete_with_loops_uniform():
    g = complete_graph(5, loops=True)
    M = g.transition_matrix()
    assert np.allclose(M, np.full((5, 5), 0.2))


def test_transition_matrix_triangle():
    g = from_edge_list([(0, 1), (1, 2), (0, 2)], 3)
    M = g.transition_matrix()
    assert np.allclose(np.diag(M), 0.0)
    assert np.allclose(M + np.eye(3) * 0.5, 0.5)


def test_transition_requires_regular():
    g = from_edge_list([(0, 1), (1, 2)], 3)
    with pytest.raises(GraphError):
        g.transition_matrix()


def test_connected_components_two_edges():
    g = from_edge_list([(0, 1), (2, 3)], 4)
    assert connected_components(g) == [[0, 1], [2, 3]]


def test_components_cover_everything():
    g = from_edge_list([(0, 1), (3, 4), (1, 2)], 5)
    comps = connected_components(g)
    assert sorted(v for comp in comps for v in comp) == list(range(5))


def test_cycle_lambda_less_than_one_after_loops():
    g = add_self_loops(cycle_graph(8), 1)
    assert graph_lambda(g) < 1.0


def test_multiplicity_cap():
    with pytest.raises(GraphError):
        from_edge_list([(0, 1, 2**31 + 1)], 2)
