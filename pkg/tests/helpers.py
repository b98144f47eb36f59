"""Shared instance generators for the test suite (all seeded)."""

from __future__ import annotations

import numpy as np

from derandlap import connected_components, graph_lambda
from derandlap.fixtures import (
    random_connected_multigraph,
    random_regular_aperiodic,
    random_regular_graph,
    random_regular_lazy,
)


def connected_regular_aperiodic(n: int, d: int, seed: int):
    """Connected d-regular graph with a loop at every vertex (retries seeds)."""
    for k in range(100):
        try:
            g = random_regular_aperiodic(n, d, seed + 7919 * k)
        except Exception:
            raise
        if len(connected_components(g)) == 1:
            return g
    raise RuntimeError(f"no connected instance at n={n}, d={d}")


def connected_regular_lazy(n: int, d: int, seed: int):
    for k in range(100):
        g = random_regular_lazy(n, d, seed + 104729 * k)
        if len(connected_components(g)) == 1:
            return g
    raise RuntimeError(f"no connected lazy instance at n={n}, d={d}")


def random_square_pair(idx: int):
    """(G, H) with G connected aperiodic regular (n <= 16, d <= 8) and H a
    connected regular graph on degree(G) vertices with lambda(H) < 1."""
    rng = np.random.default_rng(5000 + idx)
    for _ in range(200):
        n = int(rng.integers(4, 17))
        d = int(rng.integers(3, 9))
        if (n * (d - 1)) % 2:
            continue
        G = random_regular_aperiodic(n, d, int(rng.integers(2**31)))
        if len(connected_components(G)) != 1:
            continue
        dG = G.d
        options = [c for c in range(3, min(9, dG + 2)) if (dG * (c - 1)) % 2 == 0]
        if not options:
            continue
        c = options[int(rng.integers(len(options)))]
        H = random_regular_aperiodic(dG, c, int(rng.integers(2**31)))
        if len(connected_components(H)) != 1:
            continue
        if graph_lambda(H) > 1.0 - 1e-6:
            continue
        return G, H
    raise RuntimeError(f"pair generation failed at idx={idx}")


def connected_multigraph(n: int, seed: int):
    for k in range(50):
        g = random_connected_multigraph(n, seed + 31 * k)
        if len(connected_components(g)) == 1:
            return g
    raise RuntimeError("unreachable: spanning-tree graphs are connected")
