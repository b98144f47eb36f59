"""Pseudoinverse expansion over a squaring chain, dense and entrywise.

The normalized Laplacian pseudoinverse of the chain's base graph is
approximated by

    Z0 = (1/2)(I-J) + sum_{i=0}^{k-1} 2^{-(i+2)} W_i + 2^{-(k+1)} W_k,
    W_i = (I+M_0)...(I+M_i) (I-J) (I+M_i)...(I+M_0),

where M_i is the transition matrix of level i.  Each level contributes its
square-approximation parameter to the certificate, plus a final term for
replacing the last pseudoinverse with I-J once the chain has mixed.
"""

from __future__ import annotations

import math
from contextlib import nullcontext
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dsquare import DerandChain, dense_level_matrix, entry_row
from .metrics import Metrics
from .multigraph import GraphError, connected_components
from .oracle import exact_pinv, graph_lambda_of_matrix

FINAL_LAMBDA_TARGET = 1.0 / 3.0
FINAL_EPS_DEFAULT = math.log(1.5)
LAMBDA_MEASUREMENT_SLACK = 1e-9

FactorRef = tuple[str, int | None]


@dataclass(frozen=True)
class ExpansionPlan:
    """Coefficients and factor sequences of the k-level expansion."""

    k: int
    terms: tuple[tuple[float, tuple[FactorRef, ...]], ...]

    @staticmethod
    def build(k: int) -> "ExpansionPlan":
        if k < 0:
            raise ValueError("k must be >= 0")
        terms: list[tuple[float, tuple[FactorRef, ...]]] = [(0.5, (("ImJ", None),))]
        for i in range(k + 1):
            coeff = 2.0 ** -(i + 2) if i < k else 2.0 ** -(k + 1)
            ups: list[FactorRef] = [("IplusM", lvl) for lvl in range(i + 1)]
            downs: list[FactorRef] = [("IplusM", lvl) for lvl in range(i, -1, -1)]
            terms.append((coeff, tuple(ups + [("ImJ", None)] + downs)))
        return ExpansionPlan(k=k, terms=tuple(terms))

    def coefficient_sum(self) -> float:
        return sum(c for c, _ in self.terms)


@dataclass
class PinvApproximation:
    """A certified spectral approximation of a Laplacian pseudoinverse.

    ``matrix`` holds the dense backend; the entrywise backend holds an entry
    callable instead, so single entries can be produced without ever forming
    the matrix.  ``delta`` is the certified approximation parameter and
    ``scale`` the regularization degree f that maps the normalized result
    back to the unnormalized pseudoinverse.
    """

    n: int
    delta: float
    scale: int = 1
    matrix: np.ndarray | None = None
    entry_fn: Callable[[int, int], float] | None = None
    apply_fn: Callable[[np.ndarray], np.ndarray] | None = None

    @property
    def backend(self) -> str:
        return "dense" if self.matrix is not None else "entrywise"

    def entry(self, i: int, j: int) -> float:
        if self.matrix is not None:
            return float(self.matrix[i, j])
        return self.entry_fn(i, j)

    def as_matrix(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        out = np.empty((self.n, self.n))
        for i in range(self.n):
            for j in range(self.n):
                out[i, j] = self.entry_fn(i, j)
        return out

    def apply(self, b: np.ndarray) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix @ b
        if self.apply_fn is not None:
            return self.apply_fn(b)
        out = np.zeros(self.n)
        for i in range(self.n):
            out[i] = sum(self.entry_fn(i, j) * b[j] for j in range(self.n) if b[j] != 0.0)
        return out


# -- entry oracles -----------------------------------------------------------


class EntryOracle:
    """Square matrix exposed only through (i, j) lookups."""

    def __init__(self, n: int, fn: Callable[[int, int], float], label: str = ""):
        self.n = n
        self._fn = fn
        self.label = label

    def __call__(self, i: int, j: int) -> float:
        return self._fn(i, j)


def dense_oracle(M: np.ndarray, label: str = "") -> EntryOracle:
    return EntryOracle(M.shape[0], lambda i, j: float(M[i, j]), label)


def chain_entry_oracles(chain: DerandChain, k: int) -> dict[FactorRef, EntryOracle]:
    """Entry oracles for every factor the k-level plan references.

    (I+M_l) entries come from the chain's lazy entry evaluation with per-row
    caching (the cache trades repeated label enumerations for n floats per
    row; rotation metrics still count every underlying evaluation once).
    """
    n = chain.base.n
    oracles: dict[FactorRef, EntryOracle] = {
        ("ImJ", None): EntryOracle(n, lambda i, j: (1.0 if i == j else 0.0) - 1.0 / n, "I-J")
    }
    for lvl in range(k + 1):
        def fn(i: int, j: int, _lvl: int = lvl) -> float:
            v = entry_row(chain, _lvl, i, cache=True)[j]
            return float(v) + (1.0 if i == j else 0.0)

        oracles[("IplusM", lvl)] = EntryOracle(n, fn, f"I+M_{lvl}")
    return oracles


def product_entry(
    factors: Sequence[EntryOracle], i: int, j: int, metrics: Metrics | None = None
) -> float:
    """Entry (i, j) of the product of the factors, by recursive bisection.

    The factor list splits in half around a summed middle index, giving
    recursion depth ceil(log2(#factors)) instead of materializing any
    intermediate product.
    """
    if len(factors) == 0:
        raise ValueError("empty factor list")
    if len(factors) == 1:
        return factors[0](i, j)
    n = factors[0].n

    def rec(lo: int, hi: int, a: int, b: int) -> float:
        if hi - lo == 1:
            return factors[lo](a, b)
        with metrics.frame() if metrics is not None else nullcontext():
            mid = lo + (hi - lo + 1) // 2
            return sum(rec(lo, mid, a, m) * rec(mid, hi, m, b) for m in range(n))

    return rec(0, len(factors), i, j)


def expansion_entry(
    plan: ExpansionPlan,
    oracles: dict[FactorRef, EntryOracle],
    i: int,
    j: int,
    metrics: Metrics | None = None,
) -> float:
    """Entry (i, j) of the expansion: coefficient-weighted sum of term products."""
    total = 0.0
    for coeff, refs in plan.terms:
        total += coeff * product_entry([oracles[r] for r in refs], i, j, metrics)
    return total


# -- constant-factor approximation -------------------------------------------


def _final_eps(chain: DerandChain, *, paper_defaults_hold: bool) -> float:
    """Certificate for replacing the last level's pseudoinverse with I-J."""
    if paper_defaults_hold:
        return FINAL_EPS_DEFAULT
    Mk = dense_level_matrix(chain, chain.k)
    lam = graph_lambda_of_matrix(Mk) + LAMBDA_MEASUREMENT_SLACK
    if lam >= 1.0 - 1e-12:
        return math.inf  # level has not mixed: no usable certificate
    return math.log(1.0 / (1.0 - lam))


def certificate_delta(chain: DerandChain) -> float:
    """delta = sum of per-level square-approximation parameters + final term."""
    n, d0 = chain.base.n, chain.base.d
    k_needed = math.ceil(6.0 * math.log2(max(float(d0 * d0) * n * n, 2.0)))
    defaults_hold = chain.k >= k_needed and all(
        lv.lam_bound <= 1.0 / 100.0 for lv in chain.levels
    )
    return sum(chain.level_eps()) + _final_eps(chain, paper_defaults_hold=defaults_hold)


def constant_approx(chain: DerandChain, *, backend: str = "dense") -> PinvApproximation:
    """Constant-factor spectral approximation of the base graph's normalized
    Laplacian pseudoinverse, realized over the chain.

    Rejects a disconnected base (the pseudoinverse kernel would have
    dimension > 1); callers split components first.
    """
    if len(connected_components(chain.base)) != 1:
        raise GraphError("base graph is disconnected; split components first")
    n = chain.base.n
    k = chain.k
    delta = certificate_delta(chain)
    if backend == "entrywise":
        plan = ExpansionPlan.build(k)
        oracles = chain_entry_oracles(chain, k)

        def fn(i: int, j: int) -> float:
            return expansion_entry(plan, oracles, i, j, chain.metrics)

        return PinvApproximation(n=n, delta=delta, entry_fn=fn)
    if backend != "dense":
        raise ValueError(f"unknown backend {backend!r}")

    ImJ = np.eye(n) - np.full((n, n), 1.0 / n)
    Z = 0.5 * ImJ.copy()
    prefix = np.eye(n)
    for i in range(k + 1):
        prefix = prefix @ (np.eye(n) + dense_level_matrix(chain, i))
        coeff = 2.0 ** -(i + 2) if i < k else 2.0 ** -(k + 1)
        Z += coeff * (prefix @ ImJ @ prefix.T)
    Z = 0.5 * (Z + Z.T)
    return PinvApproximation(n=n, delta=delta, matrix=Z)


def identity_step(M: np.ndarray) -> np.ndarray:
    """One unrolling of the squaring identity, with an oracle pseudoinverse:
    (1/2)(I - J + (I+M)(I-M^2)^+(I+M)).  Test fixture, not a production path."""
    n = M.shape[0]
    ones_mult = int(np.sum(np.linalg.eigvalsh(M) > 1.0 - 1e-9))
    if ones_mult != 1:
        raise GraphError("transition matrix is not from a connected graph")
    I = np.eye(n)
    J = np.full((n, n), 1.0 / n)
    mid = exact_pinv(I - M @ M)
    return 0.5 * (I - J + (I + M) @ mid @ (I + M))
