"""Truncated randomized SVD and multiplicative-update NMF."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, ParameterError

__all__ = ["randomized_svd", "nmf", "NMFResult"]


def _check(M, k):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ParameterError("expected a 2-D matrix")
    if not 1 <= k <= min(M.shape):
        raise ParameterError(f"k={k} must lie in [1, {min(M.shape)}]")
    if not np.any(M):
        raise DegenerateInputError("matrix is all zeros")
    return M


def randomized_svd(M, k, *, oversample=8, n_iter=4, seed=0):
    """Rank-``k`` SVD ``M ~= U @ diag(s) @ Vt`` by randomized subspace iteration.

    A Gaussian sketch of ``k + oversample`` columns is refined by ``n_iter``
    power iterations, re-orthonormalized after every multiplication.  Signs
    are fixed so that the largest-magnitude entry of each right singular
    vector is positive.
    """
    M = _check(M, k)
    m, n = M.shape
    width = min(k + oversample, m, n)
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(M @ rng.standard_normal((n, width)))
    for _ in range(n_iter):
        Z, _ = np.linalg.qr(M.T @ Q)
        Q, _ = np.linalg.qr(M @ Z)
    Ub, s, Vt = np.linalg.svd(Q.T @ M, full_matrices=False)
    U = Q @ Ub[:, :k]
    s, Vt = s[:k], Vt[:k]
    flip = np.sign(Vt[np.arange(k), np.argmax(np.abs(Vt), axis=1)])
    flip[flip == 0] = 1
    return U * flip, s, Vt * flip[:, None]


@dataclass
class NMFResult:
    H: np.ndarray  # rows x k
    W: np.ndarray  # columns x k
    objective: list  # squared Frobenius error after init and after every iteration
    n_iter: int


def nmf(M, k, *, max_iter=500, tol=1e-6, seed=0, eps=1e-12):
    """Non-negative factorization ``M ~= H @ W.T`` by Lee-Seung multiplicative updates.

    Both factors start from seeded uniform(0, 1] draws.  Iteration stops
    after ``max_iter`` sweeps or once the relative drop of the Frobenius
    error falls below ``tol``.  ``eps`` enters numerator and denominator of
    every update, which keeps each step a majorize-minimize step, so the
    recorded objective never increases.
    """
    M = _check(M, k)
    if (M < 0).any():
        raise ParameterError("NMF needs a non-negative matrix")
    rng = np.random.default_rng(seed)
    m, n = M.shape
    H = 1.0 - rng.random((m, k))
    W = 1.0 - rng.random((n, k))

    def err():
        return float(np.linalg.norm(M - H @ W.T) ** 2)

    history = [err()]
    it = 0
    for it in range(1, max_iter + 1):
        H *= (M @ W + eps) / (H @ (W.T @ W) + eps)
        W *= (M.T @ H + eps) / (W @ (H.T @ H) + eps)
        history.append(err())
        prev, cur = np.sqrt(history[-2]), np.sqrt(history[-1])
        if prev == 0 or (prev - cur) / prev < tol:
            break
    return NMFResult(H, W, history, it)
