"""End-to-end pipelines: approximate Laplacian pseudoinverses, linear solves
with an l2 guarantee, normalized-pseudoinverse application, and random-walk
statistics (hitting times, commute times, escape probabilities).

All accuracy parameters are rescaled internally with explicit, derivable
factors so the user-facing guarantee holds against the exact quantities; the
oracle test suite validates every rescale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dsquare import DerandChain, build_chain
from .multigraph import (
    GraphError,
    LabeledMultigraph,
    RegularizedGraph,
    connected_components,
    induced_subgraph,
    regularize,
)
from .pinv import PinvApproximation, constant_approx
from .richardson import BoostConfig, boost_apply, boost_matrix, make_boost_config

IMAGE_TOLERANCE = 1e-9
# escape probabilities: the normalizing denominator is the commute time,
# which is at least 2 for distinct vertices; validated by the oracle suite.
ESCAPE_COMMUTE_LOWER_BOUND = 2.0


class ContractError(ValueError):
    """A precondition of the solving contract is violated."""


@dataclass(frozen=True)
class WalkQuery:
    u: int
    v: int
    kind: str  # hitting | commute | escape
    eps: float

    def validate(self, n: int) -> None:
        if self.kind not in ("hitting", "commute", "escape"):
            raise ContractError(f"unknown query kind {self.kind!r}")
        if not (0 <= self.u < n and 0 <= self.v < n):
            raise ContractError("query vertices out of range")
        if self.u == self.v:
            raise ContractError("query vertices must differ")
        if self.eps <= 0:
            raise ContractError("eps must be positive")


@dataclass
class SolveReport:
    x: np.ndarray
    eps_requested: float
    eps_internal: float
    delta_chain: float
    f: int
    boost_iterations: int
    gamma2_bound: float
    gamma_n_bound: float
    metrics: dict = field(default_factory=dict)
    backend: str = "dense"

    def to_json_dict(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "eps_requested": self.eps_requested,
            "eps_internal": self.eps_internal,
            "delta_chain": self.delta_chain,
            "f": self.f,
            "boost_iterations": self.boost_iterations,
            "gamma2_bound": self.gamma2_bound,
            "gamma_n_bound": self.gamma_n_bound,
            "metrics": self.metrics,
            "backend": self.backend,
        }


@dataclass(frozen=True)
class ChainOptions:
    """Overrides for the squaring chain; the default is exact squaring."""

    mu: float | None = None
    k: int | None = None
    c: int | None = None

    @property
    def derandomized(self) -> bool:
        return self.mu is not None or self.c is not None


def _build_pipeline_chain(reg: RegularizedGraph, opts: ChainOptions) -> DerandChain:
    if opts.derandomized:
        return build_chain(reg.graph, mu=opts.mu, k=opts.k, c=opts.c)
    return build_chain(reg.graph, k=opts.k, exact=True)


def _check_connected(g: LabeledMultigraph, auto_split: bool) -> list[list[int]]:
    comps = connected_components(g)
    if len(comps) > 1 and not auto_split:
        raise ContractError(
            f"graph has {len(comps)} components; enable auto_split or solve per component"
        )
    return comps


def approx_pinv(
    g: LabeledMultigraph,
    eps: float,
    *,
    chain: ChainOptions = ChainOptions(),
    backend: str = "dense",
    auto_split: bool = False,
) -> PinvApproximation:
    """eps-spectral approximation of the unnormalized Laplacian pseudoinverse.

    Pipeline: regularize to an f-regular 1/2-lazy graph, run the squaring
    chain, take the constant-factor expansion, boost with Richardson
    iteration until the certificate meets eps, and divide by f (using
    (L/f)^+ = f L^+) to land back on (D - A)^+.
    """
    if eps <= 0:
        raise ContractError("eps must be positive")
    comps = _check_connected(g, auto_split)
    if len(comps) > 1:
        out = np.zeros((g.n, g.n))
        delta = 0.0
        fmax = 1
        for comp in comps:
            sub = induced_subgraph(g, comp)
            part = approx_pinv(sub, eps, chain=chain, backend="dense")
            out[np.ix_(comp, comp)] = part.as_matrix()
            delta = max(delta, part.delta)
            fmax = max(fmax, part.scale)
        return PinvApproximation(n=g.n, delta=delta, scale=fmax, matrix=out)

    if g.n == 1:
        return PinvApproximation(n=1, delta=0.0, scale=2, matrix=np.zeros((1, 1)))

    reg = regularize(g)
    f = reg.f
    if backend == "entrywise" and not chain.derandomized:
        raise ContractError(
            "the entrywise backend enumerates edge labels, which the exact-squaring "
            "chain's degrees make impossible; pass chain options (mu, k, or c) to "
            "build a bounded-degree derandomized chain"
        )
    ch = _build_pipeline_chain(reg, ChainOptions(mu=chain.mu, k=chain.k, c=chain.c))
    rough = constant_approx(ch, backend=backend)
    if rough.delta >= 0.5:
        raise ContractError(
            f"constant approximation parameter {rough.delta:.3f} >= 1/2; "
            "tighten the chain (smaller mu or larger k)"
        )
    Lnorm = reg.graph.normalized_laplacian()
    cfg = make_boost_config(rough.delta, eps) if rough.delta > eps else None
    delta_final = cfg.certified if cfg is not None else rough.delta
    boost_k = cfg.k if cfg is not None else 0

    if backend == "dense":
        if cfg is not None:
            norm_matrix = boost_matrix(Lnorm, rough, cfg).matrix
        else:
            norm_matrix = rough.as_matrix()
        result = PinvApproximation(n=g.n, delta=delta_final, scale=f, matrix=norm_matrix / f)
    else:
        # matrix-free: boosted columns on demand; the all-ones kernel is
        # annihilated by the operator, so inputs are pre-projected
        col_cache: dict[int, np.ndarray] = {}

        def apply_fn(b: np.ndarray) -> np.ndarray:
            b = np.asarray(b, dtype=np.float64)
            b = b - b.mean()
            if cfg is not None:
                return boost_apply(Lnorm, rough.apply, b, cfg) / f
            return rough.apply(b) / f

        def entry_fn(i: int, j: int) -> float:
            if j not in col_cache:
                e = np.zeros(g.n)
                e[j] = 1.0
                col_cache[j] = apply_fn(e)
            return float(col_cache[j][i])

        result = PinvApproximation(
            n=g.n, delta=delta_final, scale=f, entry_fn=entry_fn, apply_fn=apply_fn
        )
    result._chain = ch  # type: ignore[attr-defined]
    result._rough_delta = rough.delta  # type: ignore[attr-defined]
    result._boost_k = boost_k  # type: ignore[attr-defined]
    return result


def _image_check(b: np.ndarray, project: bool) -> np.ndarray:
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        return b
    drift = abs(float(b.sum())) / (math.sqrt(len(b)) * nb)
    if drift > IMAGE_TOLERANCE:
        if not project:
            raise ContractError(
                f"b has a component along the all-ones vector (relative size "
                f"{drift:.3g} > {IMAGE_TOLERANCE}); pass project=True to project it out"
            )
        return b - b.mean()
    return b


def solve(
    g: LabeledMultigraph,
    b: np.ndarray,
    eps: float,
    *,
    project: bool = False,
    auto_split: bool = False,
    chain: ChainOptions = ChainOptions(),
    backend: str = "dense",
) -> SolveReport:
    """Solve L x = b for the unnormalized Laplacian with a relative l2 guarantee:
    ||x - L^+ b||_2 <= eps ||L^+ b||_2.

    The internal pseudoinverse accuracy eps' = (eps/(4 d^2 n^2))^2 / 2 comes
    from the L-norm-to-l2 translation; d is the regularized degree.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (g.n,):
        raise ContractError(f"b has length {len(b)}, graph has {g.n} vertices")
    if eps <= 0:
        raise ContractError("eps must be positive")
    comps = _check_connected(g, auto_split)
    if len(comps) > 1:
        x = np.zeros(g.n)
        reports = []
        for comp in comps:
            sub = induced_subgraph(g, comp)
            rep = solve(sub, b[comp], eps, project=project, chain=chain, backend=backend)
            x[comp] = rep.x
            reports.append(rep)
        first = reports[0]
        return SolveReport(
            x=x,
            eps_requested=eps,
            eps_internal=max(r.eps_internal for r in reports),
            delta_chain=max(r.delta_chain for r in reports),
            f=max(r.f for r in reports),
            boost_iterations=max(r.boost_iterations for r in reports),
            gamma2_bound=min(r.gamma2_bound for r in reports),
            gamma_n_bound=max(r.gamma_n_bound for r in reports),
            metrics=first.metrics,
            backend=backend,
        )

    b = _image_check(b, project)
    n = g.n
    if n == 1 or not np.any(b):
        f = regularize(g).f
        return SolveReport(
            x=np.zeros(n),
            eps_requested=eps,
            eps_internal=eps,
            delta_chain=0.0,
            f=f,
            boost_iterations=0,
            gamma2_bound=1.0,
            gamma_n_bound=1.0,
            metrics={},
            backend=backend,
        )

    f = regularize(g).f
    # the L-norm guarantee behind the translation needs eps' <= ln 2
    eps_internal = min((eps / (4.0 * f * f * n * n)) ** 2 / 2.0, 0.99 * math.log(2.0))
    approx = approx_pinv(g, eps_internal, chain=chain, backend=backend)
    x = approx.apply(b)
    ch: DerandChain | None = getattr(approx, "_chain", None)
    return SolveReport(
        x=x,
        eps_requested=eps,
        eps_internal=eps_internal,
        delta_chain=getattr(approx, "_rough_delta", approx.delta),
        f=approx.scale,
        boost_iterations=getattr(approx, "_boost_k", 0),
        gamma2_bound=1.0 / (2.0 * f * n * n),
        gamma_n_bound=2.0 * f,
        metrics=ch.metrics.snapshot() if ch is not None else {},
        backend=backend,
    )


def apply_normalized_pinv(
    g: LabeledMultigraph,
    b: np.ndarray,
    eps: float,
    *,
    project: bool = False,
    chain: ChainOptions = ChainOptions(),
) -> np.ndarray:
    """Apply ((D-A) D^{-1})^+ to b, accurate to eps * ||D (D-A)^+ b||_2.

    Computed as K z with z ~ (D-A)^+ b at internal accuracy
    eps' = eps / (sqrt(n) ||d||_2) and K = D - (d d^T/||d||^2) D, whose image
    is orthogonal to the degree vector.
    """
    b = np.asarray(b, dtype=np.float64)
    if len(connected_components(g)) != 1:
        raise ContractError("normalized pseudoinverse application needs a connected graph")
    b = _image_check(b, project)
    n = g.n
    d = g.degrees.astype(np.float64)
    if np.any(d == 0):
        raise ContractError("graph has an isolated vertex")
    dn = float(np.linalg.norm(d))
    eps_inner = eps / (math.sqrt(n) * dn)
    z = solve(g, b, eps_inner, chain=chain).x
    K = np.diag(d) - np.outer(d, d) @ np.diag(d) / (dn * dn)
    return K @ z


def _stationary(g: LabeledMultigraph) -> tuple[np.ndarray, float]:
    d = g.degrees.astype(np.float64)
    total = float(d.sum())
    return d / total, total


def _pinv_application_error_budget(g: LabeledMultigraph) -> float:
    """Bound on ||D (D-A)^+ b||_2 for unit-norm-ish b = e_u - e_v.

    gamma_2(D - A) >= 1/(2 f n^2) for the regularization degree f, so
    ||(D-A)^+ b|| <= 2 f n^2 sqrt(2) and the degree matrix contributes at
    most the maximum degree.
    """
    n = g.n
    f = regularize(g).f
    dmax = float(g.degrees.max())
    return dmax * 2.0 * math.sqrt(2.0) * f * n * n


def hitting_time(
    g: LabeledMultigraph, u: int, v: int, eps: float, *, chain: ChainOptions = ChainOptions()
) -> float:
    """Expected steps of the random walk from u until v, within +-eps.

    H_uv = (1 - e_v/s_v)^T ((D-A) D^{-1})^+ (e_u - e_v) with stationary
    s_v = d_v / sum(d); the inner accuracy divides eps by the exact norm of
    the weighting vector times the pseudoinverse application budget.
    """
    WalkQuery(u=u, v=v, kind="hitting", eps=eps).validate(g.n)
    comps = connected_components(g)
    comp = next(c for c in comps if u in c)
    if v not in comp:
        raise ContractError(
            f"vertices {u} and {v} are in different components (hitting time infinite)"
        )
    if len(comp) < g.n:
        relabel = {w: i for i, w in enumerate(comp)}
        return hitting_time(induced_subgraph(g, comp), relabel[u], relabel[v], eps, chain=chain)

    n = g.n
    s, total = _stationary(g)
    y = np.ones(n)
    y[v] -= 1.0 / s[v]
    b = np.zeros(n)
    b[u], b[v] = 1.0, -1.0
    eps_inner = eps / (float(np.linalg.norm(y)) * _pinv_application_error_budget(g))
    x = apply_normalized_pinv(g, b, eps_inner, chain=chain)
    return float(y @ x)


def commute_time(
    g: LabeledMultigraph, u: int, v: int, eps: float, *, chain: ChainOptions = ChainOptions()
) -> float:
    """C_uv = H_uv + H_vu, each computed at accuracy eps/2."""
    WalkQuery(u=u, v=v, kind="commute", eps=eps).validate(g.n)
    return hitting_time(g, u, v, eps / 2.0, chain=chain) + hitting_time(
        g, v, u, eps / 2.0, chain=chain
    )


def escape_probabilities(
    g: LabeledMultigraph, u: int, v: int, eps: float, *, chain: ChainOptions = ChainOptions()
) -> np.ndarray:
    """Vector of probabilities that a walk from each vertex reaches u before v.

    With q = S^{-1} ((D-A) D^{-1})^+ (e_u - e_v), the escape vector is the
    affine normalization p = (q - q_v) / (q_u - q_v); the denominator equals
    the commute time (>= 2 for distinct vertices), which controls the error
    propagation of the inner approximation.
    """
    WalkQuery(u=u, v=v, kind="escape", eps=eps).validate(g.n)
    if len(connected_components(g)) != 1:
        raise ContractError("escape probabilities need a connected graph")
    n = g.n
    s, total = _stationary(g)
    b = np.zeros(n)
    b[u], b[v] = 1.0, -1.0
    sinv_max = float(total / g.degrees.min())
    budget = _pinv_application_error_budget(g)
    eps_inner = min(eps, ESCAPE_COMMUTE_LOWER_BOUND) / (4.0 * sinv_max * budget)
    x = apply_normalized_pinv(g, b, eps_inner, chain=chain)
    q = x / s
    denom = q[u] - q[v]
    p = (q - q[v]) / denom
    p[u], p[v] = 1.0, 0.0
    return np.clip(p, 0.0, 1.0)
