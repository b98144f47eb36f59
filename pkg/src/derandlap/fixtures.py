"""Deterministic test-fixture graph families: cycles, paths, complete graphs,
stars, and seeded random regular / random connected multigraphs."""

from __future__ import annotations

import numpy as np

from .multigraph import GraphError, LabeledMultigraph, from_edge_list


def cycle_graph(n: int) -> LabeledMultigraph:
    if n < 3:
        raise GraphError("cycle needs n >= 3")
    return from_edge_list([(v, (v + 1) % n) for v in range(n)], n)


def path_graph(n: int) -> LabeledMultigraph:
    if n < 2:
        raise GraphError("path needs n >= 2")
    return from_edge_list([(v, v + 1) for v in range(n - 1)], n)


def complete_graph(n: int, *, loops: bool = False) -> LabeledMultigraph:
    edges = [(u, v) for u in range(n) for v in range(u + 1, n)]
    if loops:
        edges += [(v, v) for v in range(n)]
    return from_edge_list(edges, n)


def star_graph(n: int) -> LabeledMultigraph:
    if n < 2:
        raise GraphError("star needs n >= 2")
    return from_edge_list([(0, v) for v in range(1, n)], n)


def add_self_loops(g: LabeledMultigraph, count: int = 1) -> LabeledMultigraph:
    """Append ``count`` self-loop labels at every vertex (degree grows by count)."""
    if not g.is_regular:
        raise GraphError("add_self_loops expects a regular graph")
    n, d = g.n, g.d
    table = np.empty((n, d + count, 2), dtype=np.int64)
    for v in range(n):
        for i in range(d):
            table[v, i] = g.rot(v, i)
        for i in range(d, d + count):
            table[v, i] = (v, i)
    return LabeledMultigraph(n, d + count, table=table)


def random_regular_graph(n: int, d: int, seed: int) -> LabeledMultigraph:
    """Random d-regular multigraph by stub matching (no self loops;
    parallel edges allowed).  n*d must be even."""
    if n < 2 or d < 1:
        raise GraphError("need n >= 2 and d >= 1")
    if (n * d) % 2:
        raise GraphError("n*d must be even for a d-regular graph")
    rng = np.random.default_rng(seed)
    stubs = [(v, i) for v in range(n) for i in range(d)]
    for _ in range(500):
        perm = rng.permutation(len(stubs))
        rot: dict[tuple[int, int], tuple[int, int]] = {}
        ok = True
        for a in range(0, len(stubs), 2):
            x, y = stubs[perm[a]], stubs[perm[a + 1]]
            if x[0] == y[0]:
                ok = False
                break
            rot[x] = y
            rot[y] = x
        if not ok:
            continue
        table = np.empty((n, d, 2), dtype=np.int64)
        for (v, i), (w, j) in rot.items():
            table[v, i] = (w, j)
        g = LabeledMultigraph(n, d, table=table)
        g.check_involution()
        return g
    raise GraphError("stub matching failed to avoid self pairs; lower d or raise n")


def random_regular_aperiodic(n: int, d: int, seed: int) -> LabeledMultigraph:
    """Random d-regular graph with one self loop per vertex (d >= 2)."""
    if d < 2:
        raise GraphError("need d >= 2 to reserve a loop label")
    base_d = d - 1
    if (n * base_d) % 2:
        raise GraphError(f"n*(d-1) = {n * base_d} must be even")
    return add_self_loops(random_regular_graph(n, base_d, seed), 1)


def random_regular_lazy(n: int, d: int, seed: int) -> LabeledMultigraph:
    """Random d-regular 1/2-lazy graph: d/2 walk labels plus d/2 loop labels."""
    if d % 2:
        raise GraphError("lazy construction needs even d")
    half = d // 2
    if (n * half) % 2:
        raise GraphError(f"n*(d/2) = {n * half} must be even")
    return add_self_loops(random_regular_graph(n, half, seed), half)


def random_connected_multigraph(
    n: int, seed: int, *, extra_edges: int | None = None, max_multiplicity: int = 3
) -> LabeledMultigraph:
    """Random connected multigraph: a random spanning tree plus extra edges,
    with random small multiplicities.  Degrees are generally irregular."""
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int, int]] = []
    for v in range(1, n):
        u = int(rng.integers(0, v))
        edges.append((u, v, int(rng.integers(1, max_multiplicity + 1))))
    if extra_edges is None:
        extra_edges = n // 2
    for _ in range(extra_edges):
        u = int(rng.integers(0, n))
        v = int(rng.integers(0, n))
        if u == v:
            continue
        edges.append((u, v, int(rng.integers(1, max_multiplicity + 1))))
    return from_edge_list(edges, n)


def random_vector_orthogonal_to_ones(n: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    b = rng.standard_normal(n)
    return b - b.mean()
