"""Cayley expanders over t-bit vectors generated by small-bias multisets.

The graph on vertex set F_2^t with generator multiset S has rotation map
rot(v, i) = (v xor s_i, i); every element is its own inverse, so the map is
an involution.  Its eigenvalues are exactly the character sums
(1/|S|) * sum_s (-1)^<a, s>, so the second eigenvalue equals the bias of S
and can be verified exhaustively for t <= 16.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .multigraph import LabeledMultigraph

T_CAP = 16
DEGREE_CAP = 2**14


class ExpanderInfeasibleError(RuntimeError):
    """Raised when no degree within the cap reaches the requested bias."""


_PARITY16: np.ndarray | None = None


def _parity16() -> np.ndarray:
    global _PARITY16
    if _PARITY16 is None:
        x = np.arange(1 << 16, dtype=np.uint16)
        for shift in (1, 2, 4, 8):
            x = x ^ (x >> shift)
        _PARITY16 = (x & 1).astype(np.int8)
    return _PARITY16


def _character_column(t: int, s: int) -> np.ndarray:
    """chi_a(s) = (-1)^<a, s> for all a in F_2^t, as a +-1 vector."""
    alphas = np.arange(1 << t, dtype=np.uint32)
    bits = _parity16()[(alphas & np.uint32(s)).astype(np.uint16)]
    return 1.0 - 2.0 * bits.astype(np.float64)


def fwht(a: np.ndarray) -> np.ndarray:
    """Unnormalized fast Walsh-Hadamard transform (length a power of two)."""
    out = a.astype(np.float64).copy()
    h = 1
    n = out.shape[0]
    while h < n:
        out = out.reshape(-1, 2 * h)
        lo = out[:, :h].copy()
        hi = out[:, h:].copy()
        out[:, :h] = lo + hi
        out[:, h:] = lo - hi
        out = out.reshape(n)
        h *= 2
    return out


def bias_of(t: int, generators: list[int] | tuple[int, ...]) -> float:
    """Exhaustive bias: max over nonzero a of |sum_s chi_a(s)| / |S|."""
    m = np.zeros(1 << t, dtype=np.float64)
    for s in generators:
        m[s] += 1.0
    T = fwht(m)
    return float(np.max(np.abs(T[1:])) / len(generators))


@dataclass(frozen=True)
class ExpanderSpec:
    """A verified mu-biased generator multiset for the Cayley graph on F_2^t."""

    t: int
    c: int
    mu: float | None
    generators: tuple[int, ...]
    verified_bias: float

    def to_json_dict(self) -> dict:
        return {
            "t": self.t,
            "c": self.c,
            "mu": self.mu,
            "verified_bias": self.verified_bias,
            "generators": [format(s, "x") for s in self.generators],
        }

    @staticmethod
    def from_json_dict(d: dict) -> "ExpanderSpec":
        gens = tuple(int(s, 16) for s in d["generators"])
        spec = ExpanderSpec(
            t=int(d["t"]),
            c=int(d["c"]),
            mu=d.get("mu"),
            generators=gens,
            verified_bias=bias_of(int(d["t"]), gens),
        )
        if spec.c != len(gens):
            raise ValueError("generator count does not match declared degree")
        return spec


def _next_pow2(x: int) -> int:
    return 1 << max(x - 1, 0).bit_length() if x > 1 else 1


def chernoff_degree(t: int, mu: float) -> int:
    """Smallest power-of-two degree the greedy certifies: bias <= sqrt(2(t+1)ln2/c)."""
    return _next_pow2(math.ceil(2.0 * (t + 1) * math.log(2.0) / (mu * mu)))


def _greedy_generators(t: int, c: int) -> list[int]:
    """Derandomized greedy: each round adds the vector minimizing the cosh
    potential sum_a cosh(eta * T_a) over nonzero characters, evaluated
    exhaustively through a Walsh-Hadamard transform."""
    size = 1 << t
    eta = math.sqrt(2.0 * (t + 1) * math.log(2.0) / c)
    T = np.zeros(size, dtype=np.float64)
    gens: list[int] = []
    for _ in range(c):
        u = np.sinh(eta * T)
        u[0] = 0.0
        scores = fwht(u)
        s = int(np.argmin(scores))
        gens.append(s)
        T += _character_column(t, s)
    return gens


def build_expander(
    t: int,
    mu: float | None,
    *,
    degree: int | None = None,
    degree_cap: int = DEGREE_CAP,
) -> ExpanderSpec:
    """Deterministically construct a mu-biased generator multiset.

    When the degree budget reaches 2^t the whole group is taken (duplicated to
    the budget), which has bias exactly 0; otherwise the greedy runs at the
    smallest power-of-two degree whose certified bound meets mu.  The returned
    bias is always re-verified exhaustively.  With ``degree`` set, that degree
    is used as-is (structural mode; mu, if given, is still enforced).
    """
    if not (1 <= t <= T_CAP):
        raise ExpanderInfeasibleError(f"bit-width t={t} outside [1, {T_CAP}]")
    if mu is not None and not (0.0 < mu < 1.0):
        raise ValueError("mu must lie in (0, 1)")
    size = 1 << t

    if degree is not None:
        c = int(degree)
        if c < 1 or c & (c - 1):
            raise ValueError("degree must be a power of two")
    else:
        if mu is None:
            raise ValueError("either mu or degree must be given")
        c = min(chernoff_degree(t, mu), size)
        if c > degree_cap:
            raise ExpanderInfeasibleError(
                f"needed degree {c} exceeds cap {degree_cap} for t={t}, mu={mu}"
            )

    if c >= size:
        # powers of two, so size divides c; whole-group copies have bias 0
        gens = tuple(s for _ in range(c // size) for s in range(size))
    else:
        gens = tuple(_greedy_generators(t, c))

    bias = bias_of(t, gens)
    if mu is not None and bias > mu + 1e-12:
        raise ExpanderInfeasibleError(
            f"verified bias {bias:.6g} exceeds mu={mu} at degree {c} (t={t})"
        )
    return ExpanderSpec(t=t, c=c, mu=mu, generators=gens, verified_bias=bias)


def duplicate_spec(spec: ExpanderSpec, target_degree: int) -> ExpanderSpec:
    """Pad to a larger power-of-two degree by whole-multiset duplication.

    Duplication leaves the transition matrix, and hence the bias, unchanged;
    padding with identity generators would instead pull eigenvalues toward 1.
    """
    if target_degree == spec.c:
        return spec
    if target_degree % spec.c:
        raise ValueError("target degree must be a multiple of the current degree")
    reps = target_degree // spec.c
    return ExpanderSpec(
        t=spec.t,
        c=target_degree,
        mu=spec.mu,
        generators=spec.generators * reps,
        verified_bias=spec.verified_bias,
    )


def expander_as_graph(spec: ExpanderSpec) -> LabeledMultigraph:
    """Cayley graph: 2^t vertices, degree c, rot(v, i) = (v xor s_i, i)."""
    gens = spec.generators

    def rule(v: int, i: int) -> tuple[int, int]:
        return v ^ gens[i], i

    return LabeledMultigraph(1 << spec.t, spec.c, rule=rule, name=f"H_{spec.t}")


def cayley_transition(spec: ExpanderSpec) -> np.ndarray:
    """Dense transition matrix of the Cayley graph (for eigensolver checks)."""
    n = 1 << spec.t
    M = np.zeros((n, n), dtype=np.float64)
    v = np.arange(n)
    for s in spec.generators:
        M[v, v ^ s] += 1.0
    return M / spec.c


def complete_with_loops(d: int) -> LabeledMultigraph:
    """Complete graph with one self loop per vertex: d vertices, degree d, M = J.

    Used as the degenerate expander that turns the derandomized square into
    true squaring.  rot(v, i) = (i, v) is an involution and fixes (v, v).
    """
    if d < 1:
        raise ValueError("d must be >= 1")

    def rule(v: int, i: int) -> tuple[int, int]:
        return i, v

    return LabeledMultigraph(d, d, rule=rule, name="K_loop")
