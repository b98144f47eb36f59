"""Preconditioned Richardson iteration: boost a rough pseudoinverse
approximation to arbitrary accuracy.

Given Ltil ~alpha~ L^+ with alpha < 1/2, the boosted operator is

    e^{-alpha} * sum_{i=0}^{k} P (I - A P)^i,   P = Ltil,  A = e^{-alpha} L,

whose certified approximation parameter decays like 6*(2*alpha)^{k+1}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pinv import PinvApproximation

KERNEL_DRIFT_TOL = 1e-12


class BoostContractError(ValueError):
    pass


@dataclass(frozen=True)
class BoostConfig:
    """Input parameter, target, and the iteration count that certifies it."""

    alpha: float
    eps: float
    k: int
    certified: float


def certified_parameter(alpha: float, k: int) -> float:
    """The explicit decay envelope 6*(2*alpha)^(k+1)."""
    return 6.0 * (2.0 * alpha) ** (k + 1)


def _envelope_valid(alpha: float, k: int) -> bool:
    """Whether 6(2a)^{k+1} really certifies the k-iterate.

    k = 0 is e^{-a} Ltil, within 2a <= 6(2a) directly.  For k >= 1 the
    geometric-tail sandwich needs x = (1-e^{-2a})^{k+1}/e^{-2a} < 1 and
    -ln(1-x) below the envelope; near a = 1/2 small k can fail this.
    """
    if k == 0:
        return True
    x = (1.0 - math.exp(-2.0 * alpha)) ** (k + 1) / math.exp(-2.0 * alpha)
    if x >= 1.0:
        return False
    return -math.log1p(-x) <= certified_parameter(alpha, k)


def make_boost_config(alpha: float, eps: float) -> BoostConfig:
    """Smallest k whose envelope 6*(2*alpha)^{k+1} meets eps and is valid."""
    if alpha >= 0.5:
        raise BoostContractError(f"boost requires alpha < 1/2, got {alpha}")
    if alpha < 0:
        raise BoostContractError("alpha must be nonnegative")
    if eps <= 0:
        raise BoostContractError("eps must be positive")
    if alpha == 0.0:
        return BoostConfig(alpha=0.0, eps=eps, k=0, certified=0.0)
    k = 0
    while certified_parameter(alpha, k) > eps or not _envelope_valid(alpha, k):
        k += 1
    return BoostConfig(alpha=alpha, eps=eps, k=k, certified=certified_parameter(alpha, k))


def richardson_sum(A: np.ndarray, P: np.ndarray, k: int) -> np.ndarray:
    """P_k = sum_{i=0}^{k} P (I - A P)^i, accumulated by Horner's rule."""
    n = A.shape[0]
    I = np.eye(n)
    X = I - A @ P
    S = I.copy()
    for _ in range(k):
        S = I + X @ S
    return P @ S


def boost_matrix(L: np.ndarray, Ltil: PinvApproximation, cfg: BoostConfig) -> PinvApproximation:
    """Dense boosted approximation of L^+ from Ltil ~alpha~ L^+."""
    if cfg.alpha >= 0.5:
        raise BoostContractError("alpha >= 1/2 violates the boosting contract")
    P = Ltil.as_matrix()
    A = math.exp(-cfg.alpha) * L
    out = math.exp(-cfg.alpha) * richardson_sum(A, P, cfg.k)
    out = 0.5 * (out + out.T)
    return PinvApproximation(n=Ltil.n, delta=cfg.certified, scale=Ltil.scale, matrix=out)


def boost_apply(
    L: np.ndarray,
    apply_ltil,
    b: np.ndarray,
    cfg: BoostConfig,
    *,
    project_kernel: bool = True,
) -> np.ndarray:
    """Matrix-free boosted solve: x = e^{-alpha} sum_i Ltil r_i with
    r_0 = b, r_{i+1} = (I - e^{-alpha} L Ltil) r_i.

    ``apply_ltil`` is any matvec for the rough approximation, so the
    entrywise backend plugs in directly.  Intermediate vectors are projected
    back to the complement of the all-ones kernel when drift exceeds the
    tolerance.
    """
    if cfg.alpha >= 0.5:
        raise BoostContractError("alpha >= 1/2 violates the boosting contract")
    scale = math.exp(-cfg.alpha)
    r = np.asarray(b, dtype=np.float64).copy()
    y = apply_ltil(r)
    acc = y.copy()
    for _ in range(cfg.k):
        r = r - scale * (L @ y)
        if project_kernel:
            drift = abs(float(r.sum())) / max(float(np.linalg.norm(r)), 1e-300)
            if drift > KERNEL_DRIFT_TOL:
                r = r - r.mean()
        y = apply_ltil(r)
        acc = acc + y
    return scale * acc
