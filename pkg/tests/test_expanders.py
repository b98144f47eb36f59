import json

import numpy as np
import pytest

from derandlap import (
    ExpanderInfeasibleError,
    ExpanderSpec,
    bias_of,
    build_expander,
    cayley_transition,
    complete_with_loops,
    duplicate_spec,
    expander_as_graph,
    graph_lambda,
)
from derandlap.oracle import graph_lambda_of_matrix


def test_full_group_has_zero_bias_and_uniform_transition():
    spec = build_expander(2, 0.25)
    assert spec.c == 4
    assert spec.verified_bias == 0.0
    M = cayley_transition(spec)
    assert np.allclose(M, np.full((4, 4), 0.25))


def test_three_nonzero_generators_bias_one_third():
    gens = (0b01, 0b10, 0b11)
    assert bias_of(2, gens) == pytest.approx(1.0 / 3.0)
    # duplication changes neither bias nor lambda
    spec = ExpanderSpec(t=2, c=6, mu=None, generators=gens * 2, verified_bias=bias_of(2, gens * 2))
    assert spec.verified_bias == pytest.approx(1.0 / 3.0)
    assert graph_lambda_of_matrix(cayley_transition(spec)) == pytest.approx(1.0 / 3.0)


def test_greedy_meets_target_when_group_too_big():
    spec = build_expander(10, 0.5)
    assert spec.c < 2**10
    assert spec.verified_bias <= 0.5
    assert graph_lambda_of_matrix(cayley_transition(spec)) == pytest.approx(
        spec.verified_bias, abs=1e-9
    )


def test_lambda_equals_verified_bias_small_widths():
    for t, mu in [(3, 0.25), (4, 0.1), (6, 0.25), (8, 0.3)]:
        spec = build_expander(t, mu)
        lam = graph_lambda_of_matrix(cayley_transition(spec))
        assert lam == pytest.approx(spec.verified_bias, abs=1e-9)
        assert spec.verified_bias <= mu


def test_rotation_is_involution():
    spec = build_expander(4, 0.25)
    g = expander_as_graph(spec)
    g.check_involution()


def test_single_zero_generator_all_loops():
    spec = ExpanderSpec(t=1, c=1, mu=None, generators=(0,), verified_bias=bias_of(1, (0,)))
    assert spec.verified_bias == 1.0
    g = expander_as_graph(spec)
    assert g.rot(0, 0) == (0, 0)
    assert g.rot(1, 0) == (1, 0)
    assert graph_lambda(g) == pytest.approx(1.0)


def test_two_copies_of_one_bit_is_a_two_cycle():
    spec = ExpanderSpec(t=1, c=2, mu=None, generators=(1, 1), verified_bias=bias_of(1, (1, 1)))
    g = expander_as_graph(spec)
    A = g.adjacency()
    assert A[0, 1] == 2 and A[1, 0] == 2


def test_determinism():
    a = build_expander(6, 0.3)
    b = build_expander(6, 0.3)
    assert a.generators == b.generators


def test_degree_within_polynomial_cap():
    for t, mu in [(4, 0.25), (8, 1 / 16), (10, 0.5), (12, 0.4)]:
        spec = build_expander(t, mu)
        cap = 4.0 * ((t + 1) / mu) ** 2
        assert spec.c <= max(cap, 2**t)


def test_infeasible_raises():
    with pytest.raises(ExpanderInfeasibleError):
        build_expander(20, 0.25)
    with pytest.raises(ExpanderInfeasibleError):
        build_expander(16, 1e-4)


def test_duplicate_spec_preserves_bias():
    spec = build_expander(3, 0.25)
    big = duplicate_spec(spec, spec.c * 4)
    assert big.verified_bias == spec.verified_bias
    assert bias_of(3, big.generators) == pytest.approx(spec.verified_bias, abs=1e-12)


def test_json_round_trip():
    spec = build_expander(5, 0.25)
    data = json.loads(json.dumps(spec.to_json_dict()))
    back = ExpanderSpec.from_json_dict(data)
    assert back.generators == spec.generators
    assert back.verified_bias == pytest.approx(spec.verified_bias, abs=1e-12)


def test_complete_with_loops_is_uniform():
    g = complete_with_loops(4)
    assert np.allclose(g.transition_matrix(), 0.25)
    assert graph_lambda(g) == pytest.approx(0.0, abs=1e-12)
    g1 = complete_with_loops(1)
    assert g1.rot(0, 0) == (0, 0)
