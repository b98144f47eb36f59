"""Undirected multigraphs with two-way labelings and rotation maps.

A graph on ``n`` vertices with per-vertex degree ``d(v)`` is specified by an
involutive rotation map ``rot(v, i) -> (w, j)``: label ``i`` at ``v`` is one
end of an edge whose other end is label ``j`` at ``w``.  A self loop occupies
a single label and maps to itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

MAX_VERTICES = 2**20
MAX_MULTIPLICITY = 2**31


class GraphError(ValueError):
    pass


class LabeledMultigraph:
    """Multigraph given by a rotation map, stored as a table or a rule.

    Table-backed graphs keep an ``(n, max_degree, 2)`` int array (padded with
    -1 for irregular degrees).  Rule-backed graphs evaluate a callable and may
    have vertex counts far beyond what a table could hold.
    """

    def __init__(
        self,
        n: int,
        degrees: Sequence[int] | int,
        *,
        table: np.ndarray | None = None,
        rule: Callable[[int, int], tuple[int, int]] | None = None,
        name: str = "",
    ) -> None:
        if n <= 0:
            raise GraphError("empty vertex set")
        if (table is None) == (rule is None):
            raise GraphError("exactly one of table/rule must be given")
        self.n = n
        if isinstance(degrees, (int, np.integer)):
            self._uniform_degree: int | None = int(degrees)
            self._degrees = None
        else:
            degs = np.asarray(degrees, dtype=np.int64)
            if degs.shape != (n,):
                raise GraphError("degree vector length mismatch")
            self._degrees = degs
            self._uniform_degree = int(degs[0]) if np.all(degs == degs[0]) else None
        self._table = table
        self._rule = rule
        self.name = name

    # -- structure ------------------------------------------------------

    @property
    def is_regular(self) -> bool:
        return self._uniform_degree is not None

    @property
    def d(self) -> int:
        if self._uniform_degree is None:
            raise GraphError("graph is not regular")
        return self._uniform_degree

    def degree(self, v: int) -> int:
        if self._uniform_degree is not None:
            return self._uniform_degree
        return int(self._degrees[v])

    @property
    def degrees(self) -> np.ndarray:
        if self._degrees is not None:
            return self._degrees
        return np.full(self.n, self._uniform_degree, dtype=np.int64)

    def rot(self, v: int, i: int) -> tuple[int, int]:
        """Evaluate the rotation map; raises on out-of-range labels."""
        if not (0 <= v < self.n):
            raise GraphError(f"vertex {v} out of range [0, {self.n})")
        if not (0 <= i < self.degree(v)):
            raise GraphError(f"label {i} out of range [0, {self.degree(v)}) at vertex {v}")
        if self._table is not None:
            w, j = self._table[v, i]
            return int(w), int(j)
        return self._rule(v, i)

    @property
    def has_table(self) -> bool:
        return self._table is not None

    @property
    def rotation_table(self) -> np.ndarray:
        if self._table is None:
            raise GraphError("rule-backed graph has no materialized table")
        return self._table

    # -- derived matrices -------------------------------------------------

    def adjacency(self) -> np.ndarray:
        """Integer adjacency counts; A[v, w] = number of labels at v leading to w."""
        A = np.zeros((self.n, self.n), dtype=np.int64)
        for v in range(self.n):
            for i in range(self.degree(v)):
                w, _ = self.rot(v, i)
                A[v, w] += 1
        return A

    def laplacian(self) -> np.ndarray:
        """Unnormalized Laplacian D - A (int64)."""
        A = self.adjacency()
        return np.diag(self.degrees) - A

    def transition_matrix(self) -> np.ndarray:
        """Row-stochastic M = A/d; requires a regular graph."""
        if not self.is_regular:
            raise GraphError("transition matrix requires a regular graph")
        return self.adjacency().astype(np.float64) / float(self.d)

    def normalized_laplacian(self) -> np.ndarray:
        return np.eye(self.n) - self.transition_matrix()

    # -- checks -----------------------------------------------------------

    def check_involution(self, samples: int | None = None, seed: int = 0) -> None:
        """Verify rot(rot(v,i)) == (v,i); exhaustive unless samples is given."""
        if samples is None:
            pairs: Iterable[tuple[int, int]] = (
                (v, i) for v in range(self.n) for i in range(self.degree(v))
            )
        else:
            rng = np.random.default_rng(seed)
            drawn = []
            for _ in range(samples):
                v = int(rng.integers(self.n))
                drawn.append((v, int(rng.integers(self.degree(v)))))
            pairs = drawn
        for v, i in pairs:
            w, j = self.rot(v, i)
            v2, i2 = self.rot(w, j)
            if (v2, i2) != (v, i):
                raise GraphError(f"rotation map is not an involution at ({v}, {i})")

    def same_graph(self, other: "LabeledMultigraph") -> bool:
        """Structural equality: same vertex count, degrees, and rotation map."""
        if self.n != other.n or not np.array_equal(self.degrees, other.degrees):
            return False
        for v in range(self.n):
            for i in range(self.degree(v)):
                if self.rot(v, i) != other.rot(v, i):
                    return False
        return True

    def __repr__(self) -> str:
        kind = "table" if self._table is not None else "rule"
        deg = self._uniform_degree if self.is_regular else "irregular"
        return f"LabeledMultigraph(n={self.n}, d={deg}, {kind})"


@dataclass(frozen=True)
class RegularizedGraph:
    """Result of padding a graph with self loops to an aperiodic power-of-two degree.

    The unnormalized Laplacian is untouched (loops cancel in D - A); ``f`` is
    recorded so a normalized pseudoinverse can be rescaled back, via
    (L/f)^+ = f * L^+.
    """

    graph: LabeledMultigraph
    f: int
    loops: np.ndarray
    original_degrees: np.ndarray


def from_edge_list(edges: Iterable[tuple], n: int) -> LabeledMultigraph:
    """Build a canonically labeled multigraph from (u, v[, multiplicity]) pairs.

    Labels at each vertex are assigned in sorted (neighbor, copy) order, so
    identical inputs produce identical rotation tables.  The result may be
    irregular; irregular graphs support only degree queries, components, and
    :func:`regularize`.
    """
    if n <= 0:
        raise GraphError("empty vertex set")
    if n > MAX_VERTICES:
        raise GraphError(f"vertex count {n} exceeds cap {MAX_VERTICES}")
    mult: dict[tuple[int, int], int] = {}
    for e in edges:
        if len(e) == 2:
            u, v = e
            m = 1
        else:
            u, v, m = e
        u, v, m = int(u), int(v), int(m)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"vertex index out of range in edge ({u}, {v})")
        if m < 1:
            raise GraphError(f"multiplicity {m} < 1 in edge ({u}, {v})")
        key = (u, v) if u <= v else (v, u)
        mult[key] = mult.get(key, 0) + m
        if mult[key] > MAX_MULTIPLICITY:
            raise GraphError(f"multiplicity of edge {key} exceeds cap {MAX_MULTIPLICITY}")

    # stub list per vertex: (neighbor, copy index), sorted
    stubs: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for (u, v), m in sorted(mult.items()):
        for c in range(m):
            stubs[u].append((v, c))
            if v != u:
                stubs[v].append((u, c))
    for v in range(n):
        stubs[v].sort()

    degrees = np.array([len(s) for s in stubs], dtype=np.int64)
    dmax = int(degrees.max()) if n else 0
    lookup = [{key: i for i, key in enumerate(s)} for s in stubs]
    table = np.full((n, max(dmax, 1), 2), -1, dtype=np.int64)
    for v in range(n):
        for i, (w, c) in enumerate(stubs[v]):
            if w == v:
                table[v, i] = (v, i)
            else:
                table[v, i] = (w, lookup[w][(v, c)])
    g = LabeledMultigraph(n, degrees, table=table)
    g.check_involution()
    return g


def regularize(g: LabeledMultigraph) -> RegularizedGraph:
    """Pad every vertex with self loops up to degree f = 2^ceil(log2(2*max_degree)).

    The padded graph is regular, 1/2-lazy (transition diagonal >= 1/2), and
    aperiodic; a degree-0 graph gets f = 2.
    """
    degs = g.degrees
    delta = int(degs.max())
    if delta == 0:
        f = 2
    else:
        f = 1 << (2 * delta - 1).bit_length()
    n = g.n
    table = np.full((n, f, 2), -1, dtype=np.int64)
    for v in range(n):
        for i in range(g.degree(v)):
            table[v, i] = g.rot(v, i)
        for i in range(g.degree(v), f):
            table[v, i] = (v, i)
    out = LabeledMultigraph(n, f, table=table)
    return RegularizedGraph(graph=out, f=f, loops=f - degs, original_degrees=degs.copy())


def connected_components(g: LabeledMultigraph) -> list[list[int]]:
    """Partition [n] into components by plain breadth-first traversal."""
    seen = np.zeros(g.n, dtype=bool)
    comps: list[list[int]] = []
    for src in range(g.n):
        if seen[src]:
            continue
        comp = [src]
        seen[src] = True
        frontier = [src]
        while frontier:
            nxt = []
            for v in frontier:
                for i in range(g.degree(v)):
                    w, _ = g.rot(v, i)
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        nxt.append(w)
            frontier = nxt
        comps.append(sorted(comp))
    return comps


def induced_subgraph(g: LabeledMultigraph, vertices: Sequence[int]) -> LabeledMultigraph:
    """Canonically relabeled subgraph on a union of whole components."""
    idx = {v: k for k, v in enumerate(vertices)}
    edges = []
    for v in vertices:
        for i in range(g.degree(v)):
            w, j = g.rot(v, i)
            if w not in idx:
                raise GraphError("vertex set must be closed under adjacency")
            if (w, j) >= (v, i):
                edges.append((idx[v], idx[w]))
    return from_edge_list(edges, len(vertices))
