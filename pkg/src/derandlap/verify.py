"""Randomized property harness for the spectral-approximation calculus,
the lazy-graph equivalence, the solution-quality bound, and the
pseudoinverse axioms.

Each property draws seeded random instances, asserts the claim through the
PSD-order checker, and reports the worst slack seen.  The CLI ``verify``
subcommand runs the whole harness and emits a JSON summary.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .fixtures import random_regular_lazy
from .multigraph import connected_components
from .oracle import (
    check_approx,
    exact_pinv,
    graph_lambda,
    lnorm,
    measured_approx_parameter,
)

TOL = 1e-9


def _random_psd(rng: np.random.Generator, n: int, rank: int | None = None) -> np.ndarray:
    """PSD with bounded condition on its range: spectrum in [0.1, 3], exact kernel."""
    r = rank if rank is not None else n
    Q = np.linalg.qr(rng.standard_normal((n, n)))[0]
    vals = np.concatenate([rng.uniform(0.1, 3.0, size=r), np.zeros(n - r)])
    return (Q * vals) @ Q.T


def _approx_pair(
    rng: np.random.Generator, n: int, eps: float, rank: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """PSD pair with X ~eps~ Y by construction (shared kernel when low rank):
    Y = X^{1/2} (I + E) X^{1/2} with ||E|| <= 1 - e^{-eps}."""
    r = rank if rank is not None else n
    U = np.linalg.qr(rng.standard_normal((n, r)))[0]
    vals = rng.uniform(0.5, 2.0, size=r)
    X = (U * vals) @ U.T
    E = rng.standard_normal((r, r))
    E = 0.5 * (E + E.T)
    E *= (1.0 - math.exp(-eps)) / max(float(np.max(np.abs(np.linalg.eigvalsh(E)))), 1e-12)
    root = (U * np.sqrt(vals)) @ U.T
    Y = root @ (np.eye(n) + U @ E @ U.T) @ root
    return X, 0.5 * (Y + Y.T)


def _lazy_connected(rng: np.random.Generator):
    for _ in range(50):
        n = int(rng.integers(4, 11))
        d = int(rng.integers(2, 5)) * 2
        if (n * d // 2) % 2:
            continue
        try:
            g = random_regular_lazy(n, d, int(rng.integers(2**31)))
        except Exception:
            continue
        if len(connected_components(g)) == 1:
            return g
    raise RuntimeError("failed to draw a connected lazy graph")


# -- individual properties ----------------------------------------------------


def prop_symmetry(rng) -> float:
    n = int(rng.integers(3, 9))
    eps = float(rng.uniform(0.05, 0.8))
    X, Y = _approx_pair(rng, n, eps)
    cert = check_approx(Y, X, eps, TOL)
    assert cert.passed, "approximation is not symmetric in its arguments"
    return min(cert.lower_slack, cert.upper_slack)


def prop_scaling(rng) -> float:
    n = int(rng.integers(3, 9))
    eps = float(rng.uniform(0.05, 0.8))
    c = float(rng.uniform(0.0, 5.0))
    X, Y = _approx_pair(rng, n, eps)
    cert = check_approx(c * X, c * Y, eps, TOL)
    assert cert.passed
    return min(cert.lower_slack, cert.upper_slack)


def prop_add_common(rng) -> float:
    n = int(rng.integers(3, 9))
    eps = float(rng.uniform(0.05, 0.8))
    X, Y = _approx_pair(rng, n, eps)
    W = _random_psd(rng, n)
    cert = check_approx(X + W, Y + W, eps, TOL)
    assert cert.passed
    return min(cert.lower_slack, cert.upper_slack)


def prop_add_pairwise(rng) -> float:
    n = int(rng.integers(3, 9))
    eps = float(rng.uniform(0.05, 0.8))
    X, Y = _approx_pair(rng, n, eps)
    W, Z = _approx_pair(rng, n, eps)
    cert = check_approx(X + W, Y + Z, eps, TOL)
    assert cert.passed
    return min(cert.lower_slack, cert.upper_slack)


def prop_transitivity(rng) -> float:
    n = int(rng.integers(3, 9))
    e1 = float(rng.uniform(0.05, 0.5))
    e2 = float(rng.uniform(0.05, 0.5))
    X, Y = _approx_pair(rng, n, e1)
    # build Z approximating Y at e2 through the same construction
    root_vals, root_vecs = np.linalg.eigh(Y)
    root = (root_vecs * np.sqrt(np.maximum(root_vals, 0.0))) @ root_vecs.T
    E = rng.standard_normal((n, n))
    E = 0.5 * (E + E.T)
    E *= (1.0 - math.exp(-e2)) / max(float(np.max(np.abs(np.linalg.eigvalsh(E)))), 1e-12)
    Z = root @ (np.eye(n) + E) @ root
    Z = 0.5 * (Z + Z.T)
    cert = check_approx(X, Z, e1 + e2, TOL)
    assert cert.passed
    return min(cert.lower_slack, cert.upper_slack)


def prop_conjugation(rng) -> float:
    n = int(rng.integers(3, 9))
    eps = float(rng.uniform(0.05, 0.8))
    X, Y = _approx_pair(rng, n, eps)
    M = rng.standard_normal((n, n))
    cert = check_approx(M.T @ X @ M, M.T @ Y @ M, eps, TOL)
    assert cert.passed
    return min(cert.lower_slack, cert.upper_slack)


def prop_pseudoinverse(rng) -> float:
    n = int(rng.integers(4, 9))
    r = int(rng.integers(2, n))
    eps = float(rng.uniform(0.05, 0.8))
    X, Y = _approx_pair(rng, n, eps, rank=r)
    cert = check_approx(exact_pinv(X), exact_pinv(Y), eps, 1e-7)
    assert cert.passed, "pseudoinverse reversal failed on a shared-kernel pair"
    return min(cert.lower_slack, cert.upper_slack)


def prop_tensor_identity(rng) -> float:
    n = int(rng.integers(2, 6))
    m = int(rng.integers(2, 5))
    eps = float(rng.uniform(0.05, 0.8))
    X, Y = _approx_pair(rng, n, eps)
    I = np.eye(m)
    cert = check_approx(np.kron(I, X), np.kron(I, Y), eps, TOL)
    assert cert.passed
    return min(cert.lower_slack, cert.upper_slack)


def prop_lazy_equivalence_forward(rng) -> float:
    g = _lazy_connected(rng)
    lam = graph_lambda(g)
    L = g.normalized_laplacian()
    ImJ = np.eye(g.n) - np.full((g.n, g.n), 1.0 / g.n)
    cert = check_approx(L, ImJ, math.log(1.0 / (1.0 - min(lam + 1e-12, 1 - 1e-15))), TOL)
    assert cert.passed, "lazy graph failed the forward equivalence"
    return min(cert.lower_slack, cert.upper_slack)


def prop_lazy_equivalence_reverse(rng) -> float:
    # contrapositive: shrinking lambda below the measured value must fail the check
    for _ in range(50):
        g = _lazy_connected(rng)
        lam = graph_lambda(g)
        if lam < 0.05:
            continue
        L = g.normalized_laplacian()
        ImJ = np.eye(g.n) - np.full((g.n, g.n), 1.0 / g.n)
        lam_small = 0.5 * lam
        cert = check_approx(L, ImJ, math.log(1.0 / (1.0 - lam_small)), TOL)
        assert not cert.passed, (
            "check passed at a parameter below the graph's true lambda"
        )
        return min(cert.lower_slack, cert.upper_slack)
    raise RuntimeError("failed to draw a graph with usable lambda")


def prop_solution_quality(rng) -> float:
    g = _lazy_connected(rng)
    n = g.n
    L = g.normalized_laplacian()
    Lp = exact_pinv(L)
    eps = float(rng.uniform(0.01, math.log(2.0)))
    # random shared-kernel eps-approximation of the pseudoinverse
    vals, vecs = np.linalg.eigh(Lp)
    keep = vals > 1e-10
    Uk = vecs[:, keep]
    S = vals[keep]
    E = rng.standard_normal((len(S), len(S)))
    E = 0.5 * (E + E.T)
    E *= (1.0 - math.exp(-eps)) / max(float(np.max(np.abs(np.linalg.eigvalsh(E)))), 1e-12)
    Ltil = (Uk * np.sqrt(S)) @ (np.eye(len(S)) + E) @ (np.sqrt(S)[:, None] * Uk.T)
    Ltil = 0.5 * (Ltil + Ltil.T)
    measured = measured_approx_parameter(Lp, Ltil)
    assert measured <= eps + 1e-9
    w = rng.standard_normal(n)
    b = L @ w
    xs = Lp @ b
    xt = Ltil @ b
    lhs = lnorm(xs - xt, L)
    rhs = math.sqrt(2.0 * eps) * lnorm(xs, L)
    assert lhs <= rhs + TOL, f"quality bound violated: {lhs} > {rhs}"
    return rhs - lhs


def prop_penrose(rng) -> float:
    n = int(rng.integers(3, 9))
    r = int(rng.integers(1, n + 1))
    X = _random_psd(rng, n, rank=r)
    P = exact_pinv(X)
    worst = max(
        float(np.max(np.abs(X @ P @ X - X))),
        float(np.max(np.abs(P @ X @ P - P))),
        float(np.max(np.abs(X @ P - (X @ P).T))),
        float(np.max(np.abs(P @ X - (P @ X).T))),
    )
    assert worst <= 1e-9, f"pseudoinverse axiom violated by {worst}"
    return 1e-9 - worst


PROPERTIES: dict[str, Callable] = {
    "approx_symmetry": prop_symmetry,
    "approx_scaling": prop_scaling,
    "approx_add_common": prop_add_common,
    "approx_add_pairwise": prop_add_pairwise,
    "approx_transitivity": prop_transitivity,
    "approx_conjugation": prop_conjugation,
    "approx_pseudoinverse_shared_kernel": prop_pseudoinverse,
    "approx_tensor_identity": prop_tensor_identity,
    "lazy_equivalence_forward": prop_lazy_equivalence_forward,
    "lazy_equivalence_reverse": prop_lazy_equivalence_reverse,
    "solution_quality_bound": prop_solution_quality,
    "penrose_axioms": prop_penrose,
}


def run_harness(instances: int = 100, seed: int = 20240901) -> dict:
    """Run every property ``instances`` times; returns a JSON-ready summary."""
    results = {}
    all_pass = True
    for idx, (name, fn) in enumerate(PROPERTIES.items()):
        rng = np.random.default_rng(seed + 1009 * idx)
        worst = float("inf")
        failures = 0
        message = ""
        for _ in range(instances):
            try:
                slack = fn(rng)
                worst = min(worst, slack)
            except AssertionError as e:
                failures += 1
                message = str(e)
        results[name] = {
            "instances": instances,
            "failures": failures,
            "passed": failures == 0,
            "worst_slack": None if worst == float("inf") else worst,
        }
        if message:
            results[name]["message"] = message
        all_pass = all_pass and failures == 0
    return {"all_passed": all_pass, "properties": results}
