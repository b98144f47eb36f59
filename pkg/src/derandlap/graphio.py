"""Text formats: edge lists (`u v [mult]`, '#' comments, blank lines ignored)
and vectors (one decimal per line).

The vertex count is inferred as max index + 1, so a graph whose last vertex
is isolated cannot round-trip; emitters refuse to produce such files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .multigraph import LabeledMultigraph, from_edge_list


class FormatError(ValueError):
    def __init__(self, source: str, line: int, message: str):
        super().__init__(f"{source}:{line}: {message}")
        self.source = source
        self.line = line


def parse_graph_text(text: str, source: str = "<string>") -> LabeledMultigraph:
    edges: list[tuple[int, int, int]] = []
    max_vertex = -1
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise FormatError(source, lineno, f"expected 'u v [mult]', got {raw!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
            m = int(parts[2]) if len(parts) == 3 else 1
        except ValueError:
            raise FormatError(source, lineno, f"non-integer field in {raw!r}") from None
        if u < 0 or v < 0:
            raise FormatError(source, lineno, "vertex indices must be nonnegative")
        if m < 1:
            raise FormatError(source, lineno, f"multiplicity {m} < 1")
        edges.append((u, v, m))
        max_vertex = max(max_vertex, u, v)
    if max_vertex < 0:
        raise FormatError(source, 0, "no edges found")
    return from_edge_list(edges, max_vertex + 1)


def parse_graph(path: str | Path) -> LabeledMultigraph:
    p = Path(path)
    return parse_graph_text(p.read_text(), source=str(p))


def emit_graph(g: LabeledMultigraph) -> str:
    """Canonical edge-list text; parse(emit(g)) reproduces g exactly."""
    if g.degree(g.n - 1) == 0:
        raise ValueError("graph with an isolated last vertex cannot round-trip")
    mult: dict[tuple[int, int], int] = {}
    for v in range(g.n):
        for i in range(g.degree(v)):
            w, j = g.rot(v, i)
            if w == v and j != i:
                raise ValueError(
                    "graph has a two-label self loop; only the one-label "
                    "convention is expressible in the edge-list format"
                )
            if w > v or (w == v and j >= i):
                key = (v, w)
                mult[key] = mult.get(key, 0) + 1
    lines = []
    for (u, v), m in sorted(mult.items()):
        lines.append(f"{u} {v}" if m == 1 else f"{u} {v} {m}")
    return "\n".join(lines) + "\n"


def parse_vector_text(text: str, source: str = "<string>") -> np.ndarray:
    values: list[float] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values.append(float(line))
        except ValueError:
            raise FormatError(source, lineno, f"not a decimal: {raw!r}") from None
    if not values:
        raise FormatError(source, 0, "no values found")
    return np.array(values, dtype=np.float64)


def parse_vector(path: str | Path) -> np.ndarray:
    p = Path(path)
    return parse_vector_text(p.read_text(), source=str(p))


def emit_vector(x: np.ndarray) -> str:
    return "\n".join(repr(float(v)) for v in x) + "\n"
