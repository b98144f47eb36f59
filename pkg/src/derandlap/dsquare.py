"""The derandomized square and iterated chains with lazy rotation evaluation.

``dsquare(G, H)`` places a copy of the expander H on each vertex neighborhood
of G instead of the clique the true square would use, keeping the degree at
d*c.  A chain G_0, G_1 = G_0 (s) H_1, ... supports rotation queries without
materializing any level: one level-i query unfolds into two level-(i-1)
queries plus one expander query, so a level-l query costs exactly 2^l base
evaluations and recursion depth l.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .expanders import (
    ExpanderInfeasibleError,
    ExpanderSpec,
    T_CAP,
    build_expander,
    chernoff_degree,
    complete_with_loops,
    duplicate_spec,
    expander_as_graph,
)
from .metrics import Metrics
from .multigraph import GraphError, LabeledMultigraph

DENSE_LIFT_CAP = 2**13
ENTRY_ENUM_CAP = 2**22


class ChainInfeasibleError(RuntimeError):
    pass


def compose_label(i: int, j: int, c: int) -> int:
    """Flatten the mixed-radix pair (i, j) with j in [c]."""
    return i * c + j


def split_label(q: int, c: int) -> tuple[int, int]:
    return q // c, q % c


def dsquare(g: LabeledMultigraph, h: LabeledMultigraph) -> LabeledMultigraph:
    """Materialize G (s) H as a labeled multigraph of degree d*c.

    Labels of the product are the mixed-radix pairs (i0, j0), flattened as
    i0*c + j0 in the table.  The rotation map follows the four-step rule:
    step in G, permute the label through H, step in G again.
    """
    d = g.d
    if h.n != d:
        raise GraphError(f"expander vertex count {h.n} != base degree {d}")
    c = h.d
    n = g.n
    if n * d * c > ENTRY_ENUM_CAP:
        raise GraphError("product graph too large to materialize")
    table = np.empty((n, d * c, 2), dtype=np.int64)
    for v0 in range(n):
        for i0 in range(d):
            v1, i1 = g.rot(v0, i0)
            for j0 in range(c):
                i2, j1 = h.rot(i1, j0)
                v2, i3 = g.rot(v1, i2)
                table[v0, compose_label(i0, j0, c)] = (v2, compose_label(i3, j1, c))
    return LabeledMultigraph(n, d * c, table=table)


@dataclass(frozen=True)
class ChainLevel:
    """One expander H_i of a chain, with its certified second eigenvalue.

    Chain degrees are powers of two throughout, so each level stores the
    exponent; exact-squaring chains reach degrees whose plain integer form
    would be enormous pure bookkeeping.
    """

    graph: LabeledMultigraph
    log2_degree: int
    lam_bound: float          # certified lambda(H_i); 0 for complete-with-loops
    is_complete: bool
    spec: ExpanderSpec | None = None

    @property
    def degree(self) -> int:
        return 1 << self.log2_degree

    @property
    def eps(self) -> float:
        """Spectral-approximation parameter ln(1/(1-lambda)) of this square step."""
        if self.lam_bound >= 1.0:
            return math.inf
        return math.log(1.0 / (1.0 - self.lam_bound))


@dataclass
class DerandChain:
    """G_0 and expanders H_1..H_k defining G_i = G_{i-1} (s) H_i lazily."""

    base: LabeledMultigraph
    levels: list[ChainLevel]
    metrics: Metrics = field(default_factory=Metrics)
    _row_cache: dict = field(default_factory=dict, repr=False)
    _dense_cache: dict = field(default_factory=dict, repr=False)

    @property
    def k(self) -> int:
        return len(self.levels)

    def log2_degree_at(self, level: int) -> int:
        e = self.base.d.bit_length() - 1
        for lv in self.levels[:level]:
            e += lv.log2_degree
        return e

    def degree_at(self, level: int) -> int:
        return 1 << self.log2_degree_at(level)

    @property
    def degrees(self) -> list[int]:
        return [self.degree_at(i) for i in range(self.k + 1)]

    def level_eps(self) -> list[float]:
        return [lv.eps for lv in self.levels]

    def radices(self, level: int) -> list[int]:
        """Mixed radix of a level-``level`` composite label: [d, c_1, .., c_level]."""
        return [self.base.d] + [lv.degree for lv in self.levels[:level]]


def _mixed_encode(label: tuple[int, ...], radices: list[int]) -> int:
    flat = 0
    for part, r in zip(label, radices):
        flat = flat * r + part
    return flat


def _mixed_decode(flat: int, radices: list[int]) -> tuple[int, ...]:
    parts = []
    for r in reversed(radices):
        parts.append(flat % r)
        flat //= r
    return tuple(reversed(parts))


def rot_chain(
    chain: DerandChain, level: int, v: int, label: tuple[int, ...]
) -> tuple[int, tuple[int, ...]]:
    """Rotation map of G_level, evaluated lazily from the base and expanders.

    ``label`` is the mixed-radix composite (i0, j1, ..., j_level); the
    recursion is never flattened, so metrics faithfully count 2^level base
    evaluations and recursion depth equal to the level.
    """
    if level > chain.k:
        raise GraphError(f"level {level} beyond chain length {chain.k}")
    if len(label) != level + 1:
        raise GraphError(
            f"composite label of length {len(label)} malformed for level {level}"
        )
    radices = chain.radices(level)
    for part, r in zip(label, radices):
        if not (0 <= part < r):
            raise GraphError(f"label component {part} out of range [0, {r})")
    return _rot_rec(chain, level, v, label)


def _rot_rec(
    chain: DerandChain, level: int, v: int, label: tuple[int, ...]
) -> tuple[int, tuple[int, ...]]:
    m = chain.metrics
    if level == 0:
        m.count_base()
        w, j = chain.base.rot(v, label[0])
        return w, (j,)
    with m.frame():
        h = chain.levels[level - 1]
        inner, j0 = label[:-1], label[-1]
        v1, i1 = _rot_rec(chain, level - 1, v, inner)
        radices = chain.radices(level - 1)
        m.count_expander()
        flat2, j1 = h.graph.rot(_mixed_encode(i1, radices), j0)
        i2 = _mixed_decode(flat2, radices)
        v2, i3 = _rot_rec(chain, level - 1, v1, i2)
        return v2, i3 + (j1,)


def entry_row(chain: DerandChain, level: int, i: int, *, cache: bool = False) -> np.ndarray:
    """Row i of the transition matrix of G_level by enumerating all labels."""
    if cache and (level, i) in chain._row_cache:
        return chain._row_cache[(level, i)]
    if chain.log2_degree_at(level) > ENTRY_ENUM_CAP.bit_length():
        raise GraphError("degree too large for entrywise enumeration")
    deg = chain.degree_at(level)
    if deg > ENTRY_ENUM_CAP:
        raise GraphError(f"degree {deg} too large for entrywise enumeration")
    radices = chain.radices(level)
    counts = np.zeros(chain.base.n, dtype=np.int64)
    for q in range(deg):
        w, _ = _rot_rec(chain, level, i, _mixed_decode(q, radices))
        counts[w] += 1
    row = counts.astype(np.float64) / float(deg)
    if cache:
        chain._row_cache[(level, i)] = row
    return row


def entry(chain: DerandChain, level: int, i: int, j: int, *, cache: bool = False) -> float:
    """Entry (i, j) of M_level: the fraction of labels at i leading to j."""
    n = chain.base.n
    if not (0 <= i < n and 0 <= j < n):
        raise GraphError("entry coordinates out of range")
    return float(entry_row(chain, level, i, cache=cache)[j])


def materialize_level(chain: DerandChain, level: int) -> LabeledMultigraph:
    """Explicit rotation table of G_level (test oracle for the lazy path).

    Built iteratively, one product at a time, so each evaluation is a table
    lookup rather than a 2^level unfolding.
    """
    n = chain.base.n
    if (
        chain.log2_degree_at(level) > ENTRY_ENUM_CAP.bit_length()
        or n * chain.degree_at(level) > ENTRY_ENUM_CAP
    ):
        raise GraphError("level too large to materialize")
    g = chain.base
    for lv in chain.levels[:level]:
        g = dsquare(g, lv.graph)
    return g


def _apply_expander_blocks(level: ChainLevel, blocks: np.ndarray) -> np.ndarray:
    """B @ X for each vertex block, where B is the expander transition matrix.

    blocks has shape (n, D, n) with D the expander's vertex count.  Cayley
    expanders are applied through XOR gathers over their generators; the
    complete graph averages; anything else falls back to a dense multiply.
    """
    if level.is_complete:
        mean = blocks.mean(axis=1, keepdims=True)
        return np.broadcast_to(mean, blocks.shape).copy()
    if level.spec is not None:
        idx = np.arange(blocks.shape[1])
        out = np.zeros_like(blocks)
        for s in level.spec.generators:
            out += blocks[:, idx ^ s, :]
        return out / level.spec.c
    B = level.graph.transition_matrix()
    return np.einsum("xy,nyj->nxj", B, blocks)


def dense_level_matrix(chain: DerandChain, level: int, *, lift_cap: int = DENSE_LIFT_CAP) -> np.ndarray:
    """Transition matrix of G_level via the lift / permute / expander / project
    factorization M = P A~ B~ A~ Q.

    Complete-with-loops levels shortcut to exact squaring (B~ = I x J makes the
    factorization collapse to (P A~ Q)^2 = M^2).  The lifted dimension
    n * degree(G_{level-1}) must stay within ``lift_cap``.
    """
    n = chain.base.n
    if level in chain._dense_cache:
        return chain._dense_cache[level]
    if level == 0:
        M = chain.base.transition_matrix()
        chain._dense_cache[0] = M
        return M
    lv = chain.levels[level - 1]
    if lv.is_complete:
        prev = dense_level_matrix(chain, level - 1, lift_cap=lift_cap)
        M = prev @ prev
        chain._dense_cache[level] = M
        return M
    if chain.log2_degree_at(level - 1) > lift_cap.bit_length():
        raise GraphError("lifted dimension exceeds dense cap; use the entrywise backend")
    deg = chain.degree_at(level - 1)
    if n * deg > lift_cap:
        raise GraphError(
            f"lifted dimension {n * deg} exceeds dense cap {lift_cap}; "
            "use the entrywise backend"
        )
    prev_graph = materialize_level(chain, level - 1)
    table = prev_graph.rotation_table
    # A~ Q: row (u, i) has 1/deg at the vertex reached from (u, i)
    rot_v = table[:, :, 0].reshape(-1)
    rot_flat = table[:, :, 0].reshape(-1) * deg + table[:, :, 1].reshape(-1)
    Z = np.zeros((n * deg, n), dtype=np.float64)
    Z[np.arange(n * deg), rot_v] = 1.0 / deg
    # I x B
    Z = _apply_expander_blocks(lv, Z.reshape(n, deg, n)).reshape(n * deg, n)
    # A~ again (symmetric permutation), then P sums each vertex block
    Z = Z[rot_flat]
    M = Z.reshape(n, deg, n).sum(axis=1)
    chain._dense_cache[level] = M
    return M


def _structural_degree(t: int, mu: float | None, budget: int) -> int | None:
    """Smallest power-of-two degree <= budget certifying bias <= mu at width t."""
    full = 1 << t
    if mu is None:
        return min(budget, full) if budget >= 1 else None
    need = min(chernoff_degree(t, mu), full)
    return need if need <= budget else None


def build_chain(
    g0: LabeledMultigraph,
    mu: float | None = None,
    k: int | None = None,
    *,
    c: int | None = None,
    exact: bool = False,
    assume_aperiodic: bool = False,
    degree_cap: int = 2**13,
) -> DerandChain:
    """Construct the k-level chain over ``g0`` (degree a power of two).

    Defaults follow the analysis: k = ceil(6*log2(d^2 n^2)) and mu = 1/(30k).
    ``exact=True`` uses complete-with-loops at every level (true squaring,
    per-level approximation error 0).  With ``c`` given, expanders are built
    at that shared degree regardless of bias (structural mode); the recorded
    bias is whatever the construction achieved.  Raises
    :class:`ChainInfeasibleError` when no shared degree within the caps can
    certify mu at every level's bit-width.
    """
    d0 = g0.d
    if d0 & (d0 - 1):
        raise GraphError(f"base degree {d0} is not a power of two")
    if d0 < 2 and not exact:
        raise GraphError("derandomized chains need base degree >= 2")
    if not assume_aperiodic:
        mindiag = min(
            sum(1 for i in range(d0) if g0.rot(v, i) == (v, i)) for v in range(g0.n)
        )
        if mindiag < d0 / 2:
            raise GraphError(
                "base graph is not 1/2-lazy; pass assume_aperiodic=True if it is "
                "aperiodic by other means"
            )
    n = g0.n
    if k is None:
        if exact:
            # true squaring squares the spectral gap every level, so
            # 2^k >= 2 ln(3) d^2 n^2 already drives lambda below 1/3
            k = max(math.ceil(math.log2(2.2 * float(d0 * d0) * n * n)), 1)
        else:
            k = math.ceil(6.0 * math.log2(max(float(d0 * d0) * n * n, 2.0)))
    if k < 0:
        raise ValueError("k must be >= 0")
    if mu is None and not exact and c is None:
        k_eff = max(k, 1)
        mu = 1.0 / (30.0 * k_eff)

    levels: list[ChainLevel] = []
    if exact:
        e = d0.bit_length() - 1
        for _ in range(k):
            levels.append(
                ChainLevel(
                    graph=complete_with_loops(1 << e),
                    log2_degree=e,
                    lam_bound=0.0,
                    is_complete=True,
                )
            )
            e *= 2
        return DerandChain(base=g0, levels=levels)

    t0 = d0.bit_length() - 1
    if c is not None:
        if c < 1 or c & (c - 1):
            raise ValueError("c must be a power of two")
        shared = c
    else:
        shared = None
        cand = 2
        while cand <= degree_cap:
            ok = True
            for i in range(1, k + 1):
                t_i = t0 + (i - 1) * (cand.bit_length() - 1)
                if t_i > T_CAP:
                    ok = False
                    break
                need = _structural_degree(t_i, mu, cand)
                if need is None:
                    ok = False
                    break
            if ok:
                shared = cand
                break
            cand *= 2
        if shared is None:
            raise ChainInfeasibleError(
                f"no shared expander degree <= {degree_cap} certifies mu={mu} "
                f"for k={k} levels over base degree {d0}"
            )

    log_c = shared.bit_length() - 1
    for i in range(1, k + 1):
        t_i = t0 + (i - 1) * log_c
        if t_i > T_CAP:
            raise ChainInfeasibleError(
                f"level {i} needs expanders on 2^{t_i} vertices (cap 2^{T_CAP})"
            )
        base_degree = _structural_degree(t_i, mu, shared)
        if base_degree is None:
            raise ChainInfeasibleError(
                f"degree {shared} cannot certify mu={mu} at level {i} (t={t_i})"
            )
        try:
            spec = build_expander(t_i, mu, degree=base_degree)
        except ExpanderInfeasibleError as e:
            raise ChainInfeasibleError(str(e)) from e
        spec = duplicate_spec(spec, shared)
        levels.append(
            ChainLevel(
                graph=expander_as_graph(spec),
                log2_degree=log_c,
                lam_bound=spec.verified_bias,
                is_complete=False,
                spec=spec,
            )
        )
    return DerandChain(base=g0, levels=levels)


def default_chain_parameters(d: int, n: int) -> tuple[int, float]:
    """The analysis' defaults: k = ceil(6 log2(d^2 n^2)), mu = 1/(30k)."""
    k = math.ceil(6.0 * math.log2(max(float(d * d) * n * n, 2.0)))
    return k, 1.0 / (30.0 * max(k, 1))


def chain_stats(chain: DerandChain, *, lam_cap: int = 512) -> list[dict]:
    """Per-level degree, certified eps, and measured lambda when computable."""
    from .oracle import graph_lambda_of_matrix

    out = []
    for lvl in range(chain.k + 1):
        e = chain.log2_degree_at(lvl)
        rec: dict = {"level": lvl, "log2_degree": e}
        if e <= 62:
            rec["degree"] = 1 << e
        if lvl > 0:
            rec["log2_expander_degree"] = chain.levels[lvl - 1].log2_degree
            rec["lambda_H_bound"] = chain.levels[lvl - 1].lam_bound
            rec["eps"] = chain.levels[lvl - 1].eps
        try:
            if chain.base.n <= lam_cap:
                M = dense_level_matrix(chain, lvl)
                rec["lambda"] = graph_lambda_of_matrix(M)
        except GraphError:
            pass
        out.append(rec)
    return out
