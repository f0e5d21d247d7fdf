"""Sparse recovery solvers and the experiment success criterion.

All solvers are deterministic given their inputs, permutation-equivariant in
the columns, and scale-consistent: multiplying (A, y) by c > 0 leaves the
greedy/thresholding outputs unchanged (selection ranks and least-squares
solutions are scale-free, and the thresholding step size is taken relative
to the spectral norm), and leaves the l1 output unchanged when the penalty
is scaled by c^2. Ties in greedy selection break toward the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "RecoveryResult",
    "omp",
    "iht",
    "cosamp",
    "lasso",
    "default_lasso_penalty",
    "recovery_success",
]


@dataclass(frozen=True)
class RecoveryResult:
    x_hat: np.ndarray
    iterations: int
    residual_norm: float
    algorithm: str
    converged: bool = True
    flags: tuple[str, ...] = ()


def _spectral_norm_sq(A: np.ndarray, iters: int = 40) -> float:
    """Power iteration estimate of the largest eigenvalue of A^T A.

    Fixed iteration count and a fixed start vector keep it deterministic and
    exactly scale-equivariant (estimate scales by c^2 with A -> cA).
    """
    n = A.shape[1]
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(iters):
        w = A.T @ (A @ v)
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
    return lam


def _hard_threshold(v: np.ndarray, s: int) -> np.ndarray:
    """Best s-sparse approximation; equal magnitudes keep the lowest index."""
    out = np.zeros_like(v)
    if s <= 0:
        return out
    if s >= v.size:
        return v.copy()
    keep = _top_indices(v, s)
    out[keep] = v[keep]
    return out


def _top_indices(v: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest magnitudes, lowest index first on ties."""
    if k >= v.size:
        return np.arange(v.size)
    order = np.lexsort((np.arange(v.size), -np.abs(v)))
    return np.sort(order[:k])


def _restricted_lstsq(A: np.ndarray, y: np.ndarray, support: np.ndarray):
    sol, _, rank, _ = np.linalg.lstsq(A[:, support], y, rcond=None)
    return sol, rank < len(support)


def omp(A: np.ndarray, y: np.ndarray, s: int, tol: float = 1e-12) -> RecoveryResult:
    """Orthogonal matching pursuit: grow the support one most-correlated
    column at a time, least-squares refit after every pick."""
    if A.shape[0] < 1:
        raise ValueError("A must have at least one row")
    m, N = A.shape
    x = np.zeros(N)
    flags: list[str] = []
    support: list[int] = []
    y_norm = float(np.linalg.norm(y))
    r = y.copy()
    sol = np.zeros(0)
    for _ in range(max(0, min(s, m, N))):
        if float(np.linalg.norm(r)) <= tol * max(y_norm, 1e-300):
            break
        corr = A.T @ r
        j = int(np.argmax(np.abs(corr)))
        if corr[j] == 0.0 or j in support:
            break
        support.append(j)
        sol, deficient = _restricted_lstsq(A, y, np.asarray(support))
        if deficient and "rank-deficient" not in flags:
            flags.append("rank-deficient")
        r = y - A[:, support] @ sol
    if support:
        x[support] = sol
    return RecoveryResult(
        x_hat=x,
        iterations=len(support),
        residual_norm=float(np.linalg.norm(r)),
        algorithm="omp",
        flags=tuple(flags),
    )


def iht(
    A: np.ndarray,
    y: np.ndarray,
    s: int,
    max_iters: int = 300,
    step: float = 1.0,
) -> RecoveryResult:
    """Iterative hard thresholding x <- H_s(x + mu A^T (y - A x)).

    `step` is relative to the spectral norm: mu = step / lambda_max(A^T A),
    so the unit default is the classical step on a spectrum-normalized
    system. Ten consecutive objective increases trigger a halving of the
    step from the best iterate; if that keeps failing the result is flagged
    "diverged".
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    N = A.shape[1]
    L = _spectral_norm_sq(A)
    if s <= 0 or L == 0.0:
        return RecoveryResult(np.zeros(N), 0, float(np.linalg.norm(y)), "iht")
    mu = step / L
    mu_floor = mu / 2**20
    y_norm = float(np.linalg.norm(y))
    x = np.zeros(N)
    obj = y_norm
    best_x, best_obj = x, obj
    bad_streak = 0
    flags: list[str] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        x_new = _hard_threshold(x + mu * (A.T @ (y - A @ x)), s)
        new_obj = float(np.linalg.norm(y - A @ x_new))
        if new_obj < best_obj:
            best_x, best_obj = x_new, new_obj
        bad_streak = bad_streak + 1 if new_obj > obj else 0
        moved = float(np.max(np.abs(x_new - x))) if x_new.size else 0.0
        x, obj = x_new, new_obj
        if obj <= 1e-12 * max(y_norm, 1e-300) or moved <= 1e-14 * max(1.0, float(np.max(np.abs(x)))):
            converged = True
            break
        if bad_streak >= 10:
            mu /= 2.0
            x, obj = best_x, best_obj
            bad_streak = 0
            if "backtracked" not in flags:
                flags.append("backtracked")
            if mu < mu_floor:
                flags.append("diverged")
                break
    if not converged and "diverged" not in flags:
        flags.append("max-iters")
    return RecoveryResult(
        x_hat=best_x,
        iterations=it,
        residual_norm=best_obj,
        algorithm="iht",
        converged=converged,
        flags=tuple(flags),
    )


def cosamp(
    A: np.ndarray,
    y: np.ndarray,
    s: int,
    max_iters: int = 50,
    tol: float = 1e-12,
) -> RecoveryResult:
    """Compressive sampling matching pursuit: 2s-candidate identification,
    merge with the current support, least squares, prune back to s."""
    m, N = A.shape
    if s <= 0:
        return RecoveryResult(np.zeros(N), 0, float(np.linalg.norm(y)), "cosamp")
    x = np.zeros(N)
    r = y.copy()
    y_norm = float(np.linalg.norm(y))
    best_x, best_res = x, float(np.linalg.norm(r))
    flags: list[str] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        if float(np.linalg.norm(r)) <= tol * max(y_norm, 1e-300):
            converged = True
            break
        proxy = A.T @ r
        omega = _top_indices(proxy, min(2 * s, N))
        merged = np.union1d(omega, np.flatnonzero(x))
        sol, deficient = _restricted_lstsq(A, y, merged)
        if deficient and "rank-deficient" not in flags:
            flags.append("rank-deficient")
        b = np.zeros(N)
        b[merged] = sol
        x_new = _hard_threshold(b, s)
        r = y - A @ x_new
        res = float(np.linalg.norm(r))
        if res < best_res:
            best_x, best_res = x_new, res
        stalled = np.array_equal(np.flatnonzero(x_new), np.flatnonzero(x))
        x = x_new
        if stalled:
            converged = True  # fixed support: the iteration is stationary
            break
    if not converged:
        flags.append("max-iters")
    return RecoveryResult(
        x_hat=best_x,
        iterations=it,
        residual_norm=best_res,
        algorithm="cosamp",
        converged=converged,
        flags=tuple(flags),
    )


def default_lasso_penalty(A: np.ndarray, y: np.ndarray, coeff: float = 0.01) -> float:
    """Light-regularization default: coeff * ||A^T y||_inf."""
    return float(coeff * np.max(np.abs(A.T @ y)))


def lasso(
    A: np.ndarray,
    y: np.ndarray,
    lam: float,
    max_iters: int = 1000,
    tol: float = 1e-8,
    debias: bool = False,
) -> RecoveryResult:
    """Proximal gradient with Nesterov momentum for
    min 0.5 ||y - A x||^2 + lam ||x||_1, with momentum restart.

    With `debias`, a final least squares restricted to the recovered support
    replaces the shrunk amplitudes.
    """
    if lam <= 0:
        raise ValueError("lam must be > 0")
    N = A.shape[1]
    L = _spectral_norm_sq(A) * 1.02  # small margin over the power-iteration estimate
    if L == 0.0:
        return RecoveryResult(np.zeros(N), 0, float(np.linalg.norm(y)), "lasso")
    x = np.zeros(N)
    z = x
    t = 1.0
    flags: list[str] = []
    converged = False
    it = 0
    for it in range(1, max_iters + 1):
        grad = A.T @ (A @ z - y)
        u = z - grad / L
        x_new = np.sign(u) * np.maximum(np.abs(u) - lam / L, 0.0)
        t_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t * t))
        # momentum restart keeps the iteration monotone near the solution
        if float(np.dot(z - x_new, x_new - x)) > 0.0:
            t_new = 1.0
            z = x_new
        else:
            z = x_new + ((t - 1.0) / t_new) * (x_new - x)
        moved = float(np.max(np.abs(x_new - x)))
        x, t = x_new, t_new
        if moved <= tol * max(float(np.max(np.abs(x))), 1e-300):
            converged = True
            break
    if not converged:
        flags.append("max-iters")
    if debias:
        support = np.flatnonzero(x)
        if support.size:
            sol, deficient = _restricted_lstsq(A, y, support)
            if deficient:
                flags.append("rank-deficient")
            x = np.zeros(N)
            x[support] = sol
        flags.append("debiased")
    return RecoveryResult(
        x_hat=x,
        iterations=it,
        residual_norm=float(np.linalg.norm(y - A @ x)),
        algorithm="lasso",
        converged=converged,
        flags=tuple(flags),
    )


def recovery_success(x: np.ndarray, x_hat: np.ndarray, threshold: float = 1e-2) -> bool:
    """Relative l2 error strictly below the threshold (exactly at it fails).

    A zero true signal counts as recovered only by an exactly zero estimate.
    """
    x_norm = float(np.linalg.norm(x))
    if x_norm == 0.0:
        return float(np.linalg.norm(x_hat)) == 0.0
    return float(np.linalg.norm(x - x_hat)) / x_norm < threshold
