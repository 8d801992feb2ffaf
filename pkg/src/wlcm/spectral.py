"""Numerical kernels: top-K truncated SVD and Lloyd's K-means."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.linalg.blas import dsyrk
from scipy.sparse.linalg import ArpackError, ArpackNoConvergence, eigsh

from .errors import ConvergenceFailure, DegenerateInput, NonFiniteInput
from .generators import make_rng


@dataclass(frozen=True, eq=False)
class TruncatedSvd:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    iterations: int = 0

    @property
    def K(self) -> int:
        return self.sigma.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T

    def truncate(self, k: int) -> "TruncatedSvd":
        return TruncatedSvd(self.u[:, :k], self.sigma[:k], self.v[:, :k], self.iterations)


def top_k_svd(M, K: int, max_iter: int = 25, tol: float = 1e-10) -> TruncatedSvd:
    """Leading K singular triplets of ``M``.

    The start subspace comes from a partial eigendecomposition of the smaller
    Gram matrix. It is then polished by subspace iteration with a Rayleigh-Ritz
    step until ``||(I - UU') M V||_F <= tol * sigma_1``, so that singular values
    are not limited by the squared conditioning of the Gram matrix.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ValueError("M must be a matrix")
    if not np.all(np.isfinite(M)):
        raise NonFiniteInput("matrix contains NaN or inf")
    N, J = M.shape
    if not 1 <= K <= min(N, J):
        raise ValueError(f"K={K} must lie in 1..min(N, J)={min(N, J)}")
    if N < J:
        t = top_k_svd(M.T, K, max_iter=max_iter, tol=tol)
        return _sign_fix(t.v, t.sigma, t.u, t.iterations)

    v = _gram_top_eigvecs(M, K)
    for it in range(1, max_iter + 1):
        q, _ = np.linalg.qr(M @ v)
        small = q.T @ M
        ub, s, vbt = np.linalg.svd(small, full_matrices=False)
        u = q @ ub
        v = vbt.T
        mv = M @ v
        resid = np.linalg.norm(mv - q @ (q.T @ mv))
        if resid <= tol * max(s[0], np.finfo(float).tiny):
            return _sign_fix(u, s, v, it)
        if s[0] == 0.0:
            return _sign_fix(u, s, v, it)
    raise ConvergenceFailure(f"subspace residual {resid:.3e} > {tol:.1e} * sigma_1 after {max_iter} iterations")


# Lanczos pays off once the Gram matrix is large relative to K
_LANCZOS_MIN_DIM = 64


def _gram_top_eigvecs(M: np.ndarray, K: int) -> np.ndarray:
    """Top-K eigenvectors of M'M (M is N x J with N >= J), descending."""
    J = M.shape[1]
    upper = dsyrk(1.0, M.T, trans=0)  # M.T is Fortran-ordered when M is C-ordered
    gram = np.triu(upper) + np.triu(upper, 1).T
    if J >= _LANCZOS_MIN_DIM and 2 * K < J:
        # fixed start vector keeps ARPACK deterministic
        v0 = np.random.default_rng(0x5EED).standard_normal(J)
        try:
            vals, vecs = eigsh(gram, k=K, which="LA", v0=v0, tol=0)
            return vecs[:, np.argsort(vals)[::-1]]
        except (ArpackNoConvergence, ArpackError):
            pass
    _, vecs = scipy.linalg.eigh(gram, subset_by_index=[J - K, J - 1])
    return vecs[:, ::-1]


def _sign_fix(u, s, v, iterations) -> TruncatedSvd:
    # largest-magnitude entry of each right singular vector is made nonnegative
    idx = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[idx, np.arange(v.shape[1])] < 0, -1.0, 1.0)
    return TruncatedSvd(u * signs, s.copy(), v * signs, iterations)


@dataclass(frozen=True, eq=False)
class KmeansResult:
    labels: np.ndarray  # 0-based
    centroids: np.ndarray
    objective: float
    iterations: int
    history: list[float] = field(default_factory=list)

    def labels_1based(self) -> np.ndarray:
        return self.labels + 1


# above this many N*K*d entries, distances use the norm expansion
_DIRECT_LIMIT = 4_000_000


def _sq_dists(X, C, x_sq):
    if X.shape[0] * C.shape[0] * X.shape[1] <= _DIRECT_LIMIT:
        return ((X[:, None, :] - C[None, :, :]) ** 2).sum(axis=2)
    d = x_sq[:, None] - 2.0 * (X @ C.T) + (C * C).sum(axis=1)[None, :]
    return np.maximum(d, 0.0)


def kmeans_pp_init(X: np.ndarray, K: int, rng) -> np.ndarray:
    N = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    first = rng.integers(N)
    centers[0] = X[first]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, K):
        total = d2.sum()
        if total > 0:
            idx = int(np.searchsorted(np.cumsum(d2), rng.random() * total, side="right"))
            idx = min(idx, N - 1)
        else:
            idx = int(rng.integers(N))
        centers[c] = X[idx]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _class_means(X, labels, K):
    onehot = np.zeros((X.shape[0], K))
    onehot[np.arange(X.shape[0]), labels] = 1.0
    counts = onehot.sum(axis=0)
    return (onehot.T @ X) / counts[:, None]


def _lloyd(X, K, max_iters, rng):
    x_sq = (X * X).sum(axis=1)
    centers = kmeans_pp_init(X, K, rng)
    labels = None
    history = []
    iterations = 0
    for iterations in range(1, max_iters + 1):
        d2 = _sq_dists(X, centers, x_sq)
        new = np.argmin(d2, axis=1)
        repaired = False
        counts = np.bincount(new, minlength=K)
        for c in np.flatnonzero(counts == 0):
            own = d2[np.arange(len(new)), new]
            own[counts[new] <= 1] = -1.0
            p = int(np.argmax(own))
            counts[new[p]] -= 1
            new[p] = c
            counts[c] = 1
            centers[c] = X[p]
            d2[:, c] = ((X - centers[c]) ** 2).sum(axis=1)
            repaired = True
        history.append(float(d2[np.arange(len(new)), new].sum()))
        done = labels is not None and not repaired and np.array_equal(new, labels)
        labels = new
        if done:
            break
        centers = _class_means(X, labels, K)
    centers = _class_means(X, labels, K)
    objective = float(((X - centers[labels]) ** 2).sum())
    history.append(objective)
    return KmeansResult(labels, centers, objective, iterations, history)


def kmeans(points, K: int, max_iters: int = 100, rng=None, n_init: int = 1) -> KmeansResult:
    """Lloyd's algorithm from k-means++ seeding.

    Ties go to the lowest-index centroid. An empty cluster is reseeded at the
    point farthest from its current centroid. With ``n_init > 1`` the run with
    the smallest objective wins.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    N = X.shape[0]
    if N < K:
        raise DegenerateInput(f"cannot form {K} clusters from {N} points")
    if K < 1 or X.shape[1] < 1:
        raise DegenerateInput("need K >= 1 and at least one feature")
    if not np.all(np.isfinite(X)):
        raise NonFiniteInput("points contain NaN or inf")
    rng = make_rng(rng)
    best = None
    for _ in range(n_init):
        res = _lloyd(X, K, max_iters, rng)
        if best is None or res.objective < best.objective:
            best = res
    return best
