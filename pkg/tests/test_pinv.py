import math

import numpy as np
import pytest

from derandlap import (
    ExpansionPlan,
    GraphError,
    Metrics,
    build_chain,
    check_approx,
    constant_approx,
    exact_pinv,
    expansion_entry,
    identity_step,
    measured_approx_parameter,
    product_entry,
)
from derandlap.fixtures import add_self_loops, complete_graph, cycle_graph
from derandlap.pinv import certificate_delta, chain_entry_oracles, dense_oracle
from helpers import connected_regular_lazy


def test_plan_structure_and_coefficients():
    for k in (0, 1, 3, 6):
        plan = ExpansionPlan.build(k)
        assert plan.coefficient_sum() == pytest.approx(1.0, abs=1e-15)
        # term i after the leading one has exactly 2i+3 factors
        for i, (_, factors) in enumerate(plan.terms[1:]):
            assert len(factors) == 2 * i + 3


def test_identity_step_on_random_regular_graphs():
    for seed in range(6):
        g = connected_regular_lazy(10, 4, seed=seed)
        M = g.transition_matrix()
        L = np.eye(g.n) - M
        assert np.max(np.abs(identity_step(M) - exact_pinv(L))) <= 1e-8


def test_identity_step_complete_graph_fixed_point():
    g = complete_graph(6, loops=True)
    M = g.transition_matrix()
    ImJ = np.eye(6) - np.full((6, 6), 1.0 / 6.0)
    assert np.max(np.abs(identity_step(M) - ImJ)) <= 1e-12


def test_identity_step_rejects_disconnected():
    M = np.eye(4)  # two isolated loops' walk matrix has eigenvalue 1 twice
    with pytest.raises(GraphError):
        identity_step(M)


def test_product_entry_base_cases():
    A = np.array([[1.0, 2.0], [3.0, 4.0]])
    B = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert product_entry([dense_oracle(A)], 0, 1) == 2.0
    assert product_entry([dense_oracle(A), dense_oracle(B)], 0, 0) == 2.0
    with pytest.raises(ValueError):
        product_entry([], 0, 0)


def test_product_entry_matches_dense_product():
    rng = np.random.default_rng(123)
    mats = [rng.standard_normal((8, 8)) for _ in range(5)]
    dense = np.linalg.multi_dot(mats)
    for i, j in [(0, 0), (3, 5), (7, 1)]:
        val = product_entry([dense_oracle(m) for m in mats], i, j)
        assert val == pytest.approx(dense[i, j], abs=1e-10)


def test_product_entry_recursion_depth():
    rng = np.random.default_rng(5)
    for m in range(1, 12):
        mats = [rng.standard_normal((3, 3)) for _ in range(m)]
        metrics = Metrics()
        product_entry([dense_oracle(x) for x in mats], 0, 0, metrics)
        expected = math.ceil(math.log2(m)) if m > 1 else 0
        assert metrics.peak_recursion_depth == expected


@pytest.fixture(scope="module")
def lazy_chain():
    g0 = connected_regular_lazy(8, 4, seed=21)
    return build_chain(g0, mu=None, k=3, c=2)


def test_expansion_symmetry_and_kernel(lazy_chain):
    chain = lazy_chain
    plan = ExpansionPlan.build(chain.k)
    oracles = chain_entry_oracles(chain, chain.k)
    n = chain.base.n
    vals = {}
    for i in range(n):
        for j in range(i, n):
            vals[(i, j)] = expansion_entry(plan, oracles, i, j)
    for i in range(3):
        for j in range(i + 1, n):
            assert vals[(i, j)] == pytest.approx(
                expansion_entry(plan, oracles, j, i), abs=1e-12
            )
    for i in range(n):
        row = sum(vals[(min(i, j), max(i, j))] for j in range(n))
        assert row == pytest.approx(0.0, abs=1e-10)


def test_backends_agree(lazy_chain):
    chain = lazy_chain
    dense = constant_approx(chain, backend="dense")
    entrywise = constant_approx(chain, backend="entrywise")
    n = chain.base.n
    for i in range(n):
        for j in range(n):
            assert entrywise.entry(i, j) == pytest.approx(dense.matrix[i, j], abs=1e-10)


def test_constant_approx_certificate_against_oracle():
    # exact chain: a finite measured final-level certificate
    g0 = connected_regular_lazy(8, 4, seed=31)
    chain = build_chain(g0, exact=True)
    approx = constant_approx(chain)
    L = g0.normalized_laplacian()
    measured = measured_approx_parameter(exact_pinv(L), approx.matrix)
    assert measured <= approx.delta + 1e-9
    assert np.max(np.abs(approx.matrix @ np.ones(chain.base.n))) <= 1e-10
    assert np.max(np.abs(approx.matrix - approx.matrix.T)) == 0.0
    # one-level derandomized chain: per-level bias certificate honored too
    chain1 = build_chain(g0, mu=1 / 64, k=1)
    approx1 = constant_approx(chain1)
    assert certificate_delta(chain1) == approx1.delta
    measured1 = measured_approx_parameter(exact_pinv(L), approx1.matrix)
    assert measured1 <= approx1.delta + 1e-9


def test_constant_approx_complete_graph_is_imj():
    g = complete_graph(8, loops=True)
    chain = build_chain(g, k=4, exact=True, assume_aperiodic=True)
    approx = constant_approx(chain)
    ImJ = np.eye(8) - np.full((8, 8), 1.0 / 8.0)
    assert np.max(np.abs(approx.matrix - ImJ)) <= 1e-12


def test_constant_approx_rejects_disconnected():
    from derandlap import from_edge_list

    g = from_edge_list([(0, 1, 2), (2, 3, 2)], 4)
    chain = build_chain(regularize_local(g), k=2, exact=True)
    with pytest.raises(GraphError):
        constant_approx(chain)


def regularize_local(g):
    from derandlap import regularize

    return regularize(g).graph


def test_default_certificate_arithmetic():
    # k ln(1/(1-mu)) + ln(3/2) < 0.5 for the recipe mu = 1/(30k)
    for k in (10, 40, 160):
        mu = 1.0 / (30 * k)
        assert k * math.log(1.0 / (1.0 - mu)) + math.log(1.5) < 0.5


def test_exact_chain_long_certificate():
    g0 = add_self_loops(cycle_graph(8), 2)
    chain = build_chain(g0, k=12, exact=True)
    approx = constant_approx(chain)
    L = g0.normalized_laplacian()
    cert = check_approx(approx.matrix, exact_pinv(L), math.log(1.5) + 1e-6)
    assert cert.passed
    assert approx.delta <= math.log(1.5) + 1e-6
