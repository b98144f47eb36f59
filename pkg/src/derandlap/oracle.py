"""Ground-truth engines: exact pseudoinverses, second eigenvalues, the
positive-semidefinite-order approximation checker, and absorbing-walk solves.

Everything here is dense O(n^3) and deliberately independent of the lazy
production path, so it can serve as the oracle side of every dual-route test.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .multigraph import GraphError, LabeledMultigraph, connected_components

ORACLE_N_CAP = 512
KERNEL_EIG_THRESHOLD = 1e-10


def _require_symmetric(X: np.ndarray, what: str = "matrix") -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != X.shape[1]:
        raise ValueError(f"{what} must be square")
    scale = max(float(np.max(np.abs(X))), 1.0)
    if np.max(np.abs(X - X.T)) > 1e-9 * scale:
        raise ValueError(f"{what} is not symmetric")
    return 0.5 * (X + X.T)


def exact_pinv(L: np.ndarray, threshold: float = KERNEL_EIG_THRESHOLD) -> np.ndarray:
    """Moore-Penrose pseudoinverse by eigendecomposition.

    Eigenvalues with |lam| <= threshold are treated as kernel and zeroed;
    desk-scale graph spectra stay above 1/(2 d^2 n^2), far from the cut.
    """
    L = _require_symmetric(L)
    if L.shape[0] > ORACLE_N_CAP:
        raise ValueError(f"oracle capped at n <= {ORACLE_N_CAP}")
    vals, vecs = np.linalg.eigh(L)
    inv = np.where(np.abs(vals) > threshold, 1.0 / np.where(vals == 0, 1.0, vals), 0.0)
    return (vecs * inv) @ vecs.T


def orthonormal_complement_of_ones(n: int) -> np.ndarray:
    """n x (n-1) orthonormal basis of the space orthogonal to the all-ones vector."""
    basis = np.zeros((n, n - 1))
    for k in range(1, n):
        basis[:k, k - 1] = 1.0
        basis[k, k - 1] = -k
        basis[:, k - 1] /= np.sqrt(k * (k + 1))
    return basis


def graph_lambda_of_matrix(M: np.ndarray) -> float:
    """Second-largest absolute eigenvalue: max ||Mv||/||v|| over v orthogonal to 1."""
    M = _require_symmetric(M, "transition matrix")
    n = M.shape[0]
    if n == 1:
        return 0.0
    U = orthonormal_complement_of_ones(n)
    vals = np.linalg.eigvalsh(U.T @ M @ U)
    return float(np.max(np.abs(vals)))


def graph_lambda(g: LabeledMultigraph) -> float:
    if g.n > ORACLE_N_CAP:
        raise GraphError(f"eigensolver capped at n <= {ORACLE_N_CAP}")
    return graph_lambda_of_matrix(g.transition_matrix())


def spectral_gap(g: LabeledMultigraph) -> float:
    return 1.0 - graph_lambda(g)


@dataclass(frozen=True)
class SpectralCertificate:
    """Outcome of the PSD-order check e^{-eps} X <= Y <= e^{eps} X."""

    eps: float
    lower_slack: float
    upper_slack: float
    tol: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "eps": self.eps,
            "lower_slack": self.lower_slack,
            "upper_slack": self.upper_slack,
            "tol": self.tol,
            "passed": self.passed,
        }


def check_approx(X: np.ndarray, Y: np.ndarray, eps: float, tol: float = 1e-9) -> SpectralCertificate:
    """Certify the two-sided spectral approximation X ~eps~ Y.

    ``lower_slack``/``upper_slack`` are the smallest eigenvalues of
    Y - e^{-eps} X and e^{eps} X - Y; the check passes when both are above
    -tol.
    """
    X = _require_symmetric(X, "X")
    Y = _require_symmetric(Y, "Y")
    if X.shape != Y.shape:
        raise ValueError("shape mismatch between X and Y")
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    lower = float(np.min(np.linalg.eigvalsh(Y - np.exp(-eps) * X)))
    upper = float(np.min(np.linalg.eigvalsh(np.exp(eps) * X - Y)))
    return SpectralCertificate(
        eps=eps,
        lower_slack=lower,
        upper_slack=upper,
        tol=tol,
        passed=bool(lower >= -tol and upper >= -tol),
    )


def measured_approx_parameter(X: np.ndarray, Y: np.ndarray, kernel_tol: float = KERNEL_EIG_THRESHOLD) -> float:
    """Smallest eps with e^{-eps} X <= Y <= e^{eps} X, for PSD X, Y sharing a kernel.

    Computed from the generalized eigenvalues of (Y, X) restricted to the
    complement of X's kernel.
    """
    X = _require_symmetric(X, "X")
    Y = _require_symmetric(Y, "Y")
    vals, vecs = np.linalg.eigh(X)
    keep = vals > kernel_tol * max(float(vals[-1]), 1.0)
    if not np.any(keep):
        return 0.0
    U = vecs[:, keep]
    A = U.T @ Y @ U
    B = U.T @ X @ U
    Bc = np.linalg.cholesky(B)
    W = np.linalg.solve(Bc, np.linalg.solve(Bc, A.T).T)
    gen = np.linalg.eigvalsh(0.5 * (W + W.T))
    if np.min(gen) <= 0:
        return float("inf")
    return float(np.max(np.abs(np.log(gen))))


def lnorm(x: np.ndarray, L: np.ndarray) -> float:
    """The seminorm sqrt(x^T L x) induced by a PSD matrix."""
    v = float(x @ (L @ x))
    return float(np.sqrt(max(v, 0.0)))


# -- absorbing-walk oracle -------------------------------------------------


def absorbing_hitting_times(g: LabeledMultigraph, target: int) -> np.ndarray:
    """Expected steps to reach ``target`` from every vertex, by dense elimination.

    Solves the (n-1)-dimensional system (D - A) h = d on the non-target
    block with h[target] = 0; requires the graph to be connected.
    """
    if len(connected_components(g)) != 1:
        raise GraphError("hitting times are infinite on a disconnected graph")
    n = g.n
    L = g.laplacian().astype(np.float64)
    d = g.degrees.astype(np.float64)
    rest = [v for v in range(n) if v != target]
    h = np.zeros(n)
    h_rest = np.linalg.solve(L[np.ix_(rest, rest)], d[rest])
    h[rest] = h_rest
    return h


def absorbing_escape_probabilities(g: LabeledMultigraph, u: int, v: int) -> np.ndarray:
    """Probability of reaching u before v from every start, by dense elimination.

    Harmonic except at the absorbing pair: solves L_rr p_r = -L_ru on the
    remaining block with p[u] = 1, p[v] = 0.
    """
    if u == v:
        raise GraphError("u and v must differ")
    if len(connected_components(g)) != 1:
        raise GraphError("escape probabilities need a connected graph")
    n = g.n
    L = g.laplacian().astype(np.float64)
    rest = [w for w in range(n) if w not in (u, v)]
    p = np.zeros(n)
    p[u] = 1.0
    if rest:
        p[rest] = np.linalg.solve(L[np.ix_(rest, rest)], -L[rest, u])
    return p


def simulate_hitting_time(
    g: LabeledMultigraph, u: int, v: int, walks: int, seed: int
) -> tuple[float, float]:
    """Monte-Carlo mean and standard error of the hitting time u -> v."""
    rng = np.random.default_rng(seed)
    A = g.adjacency().astype(np.float64)
    P = A / A.sum(axis=1, keepdims=True)
    cdf = np.cumsum(P, axis=1)
    pos = np.full(walks, u, dtype=np.int64)
    steps = np.zeros(walks, dtype=np.int64)
    alive = pos != v
    step_cap = 1_000_000
    t = 0
    while np.any(alive):
        t += 1
        if t > step_cap:
            raise RuntimeError("walk simulation exceeded step cap")
        r = rng.random(int(alive.sum()))
        nxt = (cdf[pos[alive]] < r[:, None]).sum(axis=1)
        pos[alive] = nxt
        steps[alive] += 1
        alive = pos != v
    mean = float(steps.mean())
    stderr = float(steps.std(ddof=1) / np.sqrt(walks))
    return mean, stderr
