import math

import numpy as np
import pytest

from derandlap import (
    ChainInfeasibleError,
    GraphError,
    build_chain,
    check_approx,
    complete_with_loops,
    dense_level_matrix,
    dsquare,
    entry,
    entry_row,
    graph_lambda,
    materialize_level,
    regularize,
    rot_chain,
)
from derandlap.dsquare import _mixed_decode, _mixed_encode
from derandlap.fixtures import (
    add_self_loops,
    cycle_graph,
    random_regular_graph,
    random_regular_lazy,
)
from helpers import connected_regular_lazy, random_square_pair


def test_complete_expander_reproduces_exact_square():
    for seed in range(6):
        n, d = 8, 4
        g = random_regular_graph(n, d, seed)
        gs = dsquare(g, complete_with_loops(d))
        assert np.array_equal(gs.adjacency(), g.adjacency() @ g.adjacency())


def test_degree_bookkeeping():
    g = random_regular_graph(6, 4, seed=0)
    h = random_regular_graph(4, 2, seed=1)
    assert dsquare(g, h).d == 8


def test_dimension_mismatch_rejected():
    g = random_regular_graph(6, 4, seed=0)
    h = random_regular_graph(3, 2, seed=1)
    with pytest.raises(GraphError):
        dsquare(g, h)


def test_dsquare_involution_and_spectral_bound():
    for idx in range(10):
        G, H = random_square_pair(idx)
        GS = dsquare(G, H)
        GS.check_involution()
        lam = graph_lambda(GS)
        lamG, lamH = graph_lambda(G), graph_lambda(H)
        assert lam <= 1.0 - (1.0 - lamG**2) * (1.0 - lamH) + 1e-9
        assert lam <= lamG**2 + lamH + 1e-9


def test_square_approximation_certificate():
    for idx in range(6):
        G, H = random_square_pair(idx)
        GS = dsquare(G, H)
        M = G.transition_matrix()
        eps = math.log(1.0 / (1.0 - graph_lambda(H)))
        cert = check_approx(
            np.eye(G.n) - M @ M, np.eye(G.n) - GS.transition_matrix(), eps
        )
        assert cert.passed


@pytest.fixture(scope="module")
def small_chain():
    g0 = connected_regular_lazy(8, 4, seed=42)
    return build_chain(g0, mu=None, k=4, c=4)


def test_chain_metrics_counts(small_chain):
    chain = small_chain
    for level in range(5):
        chain.metrics.reset()
        label = tuple([0] * (level + 1))
        rot_chain(chain, level, 0, label)
        snap = chain.metrics.snapshot()
        assert snap["rot_base_evals"] == 2**level
        assert snap["peak_recursion_depth"] == level
        if level:
            assert snap["rot_expander_evals"] == 2**level - 1


def test_chain_involution_random_queries(small_chain):
    chain = small_chain
    rng = np.random.default_rng(7)
    for level in range(5):
        radices = chain.radices(level)
        for _ in range(200):
            v = int(rng.integers(chain.base.n))
            label = tuple(int(rng.integers(r)) for r in radices)
            w, lab2 = rot_chain(chain, level, v, label)
            assert rot_chain(chain, level, w, lab2) == (v, label)


def test_lazy_equals_materialized():
    g0 = connected_regular_lazy(8, 4, seed=5)
    chain = build_chain(g0, mu=None, k=3, c=2)
    for level in range(4):
        mat = materialize_level(chain, level)
        radices = chain.radices(level)
        for v in range(g0.n):
            for q in range(chain.degree_at(level)):
                wm, qm = mat.rot(v, q)
                wl, label = rot_chain(chain, level, v, _mixed_decode(q, radices))
                assert (wl, _mixed_encode(label, radices)) == (wm, qm)


def test_malformed_composite_label(small_chain):
    with pytest.raises(GraphError):
        rot_chain(small_chain, 2, 0, (0, 0))
    with pytest.raises(GraphError):
        rot_chain(small_chain, 1, 0, (0, 99))


def test_entry_matches_dense_and_row_stochastic(small_chain):
    chain = small_chain
    n = chain.base.n
    for level in (0, 1, 2, 3):
        dense = dense_level_matrix(chain, level)
        rows = np.array([entry_row(chain, level, i) for i in range(n)])
        assert np.max(np.abs(dense - rows)) <= 1e-12
        assert np.allclose(rows.sum(axis=1), 1.0)
        assert np.max(np.abs(dense - dense.T)) <= 1e-12


def test_entry_level_zero_is_base_transition(small_chain):
    chain = small_chain
    M0 = chain.base.transition_matrix()
    for i in range(chain.base.n):
        for j in range(chain.base.n):
            assert entry(chain, 0, i, j) == pytest.approx(M0[i, j], abs=1e-15)


def test_dense_level_one_with_complete_is_square():
    g0 = connected_regular_lazy(6, 4, seed=9)
    chain = build_chain(g0, k=2, exact=True)
    M = g0.transition_matrix()
    assert np.max(np.abs(dense_level_matrix(chain, 1) - M @ M)) <= 1e-14
    assert np.max(np.abs(dense_level_matrix(chain, 2) - (M @ M) @ (M @ M))) <= 1e-13


def test_chain_spectral_decay(small_chain):
    chain = small_chain
    lams = [

        graph_lambda(chain.base),
    ]
    for level in range(1, 4):
        from derandlap.oracle import graph_lambda_of_matrix

        lams.append(graph_lambda_of_matrix(dense_level_matrix(chain, level)))
        bound = 1.0 - (1.0 - lams[level - 1] ** 2) * (1.0 - chain.levels[level - 1].lam_bound)
        assert lams[level] <= bound + 1e-9


def test_default_parameters_follow_recipe():
    g0 = connected_regular_lazy(4, 4, seed=11)
    chain = build_chain(g0, mu=1 / 64, k=1)
    assert chain.k == 1
    assert all(lv.lam_bound <= 1 / 64 for lv in chain.levels)


def test_paper_default_chain_is_infeasible_at_desk_scale():
    # mu = 1/(30k) forces expander degrees that overflow the bit-width cap
    g0 = connected_regular_lazy(8, 4, seed=13)
    with pytest.raises(ChainInfeasibleError):
        build_chain(g0)


def test_chain_rejects_non_power_of_two_degree():
    g = add_self_loops(cycle_graph(5), 1)  # degree 3
    with pytest.raises(GraphError):
        build_chain(g, k=1, exact=True)


def test_chain_rejects_non_lazy_base():
    g = cycle_graph(8)  # no loops at all
    with pytest.raises(GraphError):
        build_chain(g, k=1, exact=True)
    # the flag overrides the laziness certificate
    chain = build_chain(g, k=1, exact=True, assume_aperiodic=True)
    assert chain.k == 1


def test_exact_chain_lambda_mixes():
    g0 = add_self_loops(cycle_graph(8), 2)
    chain = build_chain(g0, exact=True)
    from derandlap.oracle import graph_lambda_of_matrix

    lam = graph_lambda_of_matrix(dense_level_matrix(chain, chain.k))
    assert lam <= 1.0 / 3.0
