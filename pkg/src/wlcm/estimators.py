"""SCK and RMK estimators and spectral-norm K selection."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import SingularClassMatrix
from .generators import make_rng
from .model import ClassAssignment, ResponseMatrix, profile_means
from .spectral import KmeansResult, TruncatedSvd, kmeans, top_k_svd

KMEANS_ITERS = 100


@dataclass(frozen=True, eq=False)
class Estimate:
    z_hat: ClassAssignment
    theta_hat: np.ndarray
    method: Literal["SCK", "RMK"]
    elapsed: float
    svd: TruncatedSvd | None = field(default=None, repr=False)
    clustering: KmeansResult | None = field(default=None, repr=False)


def _matrix(r) -> np.ndarray:
    if isinstance(r, ResponseMatrix):
        return r.values
    return np.asarray(r, dtype=float)


def _assignment(labels, K) -> ClassAssignment:
    if np.bincount(labels, minlength=K).min() == 0:
        raise SingularClassMatrix("an estimated class is empty; Z'Z is singular")
    return ClassAssignment(labels, K)


def theta_from_svd(svd: TruncatedSvd, z_hat: ClassAssignment) -> np.ndarray:
    """``V Sigma U' Z (Z'Z)^{-1}`` without forming the N x J matrix."""
    sizes = z_hat.sizes
    if np.any(sizes == 0):
        raise SingularClassMatrix("an estimated class is empty; Z'Z is singular")
    u_sums = np.zeros((z_hat.K, svd.K))
    np.add.at(u_sums, z_hat.labels, svd.u)
    return (svd.v * svd.sigma) @ (u_sums.T / sizes[None, :])


def sck(r, K: int, rng=None, *, max_iters: int = KMEANS_ITERS, n_init: int = 1) -> Estimate:
    """Spectral clustering with K-means.

    K-means runs on the rows of the top-K left singular vectors; the item
    matrix is the per-class mean of the rank-K approximation's rows.
    """
    R = _matrix(r)
    rng = make_rng(rng)
    t0 = time.perf_counter()
    svd = top_k_svd(R, K)
    km = kmeans(svd.u, K, max_iters=max_iters, rng=rng, n_init=n_init)
    z_hat = _assignment(km.labels, K)
    theta_hat = theta_from_svd(svd, z_hat)
    elapsed = time.perf_counter() - t0
    return Estimate(z_hat, theta_hat, "SCK", elapsed, svd, km)


def rmk(r, K: int, rng=None, *, max_iters: int = KMEANS_ITERS, n_init: int = 1) -> Estimate:
    """K-means directly on the rows of R; item matrix from class means of R."""
    R = _matrix(r)
    rng = make_rng(rng)
    t0 = time.perf_counter()
    km = kmeans(R, K, max_iters=max_iters, rng=rng, n_init=n_init)
    z_hat = _assignment(km.labels, K)
    theta_hat = profile_means(R, z_hat)
    elapsed = time.perf_counter() - t0
    return Estimate(z_hat, theta_hat, "RMK", elapsed, None, km)


# On the population matrix the same code paths are the oracle algorithms.
ideal_sck = sck
ideal_rmk = rmk

METHODS = {"SCK": sck, "RMK": rmk}


@dataclass(frozen=True, eq=False)
class KSelection:
    k_hat: int
    scores: np.ndarray  # scores[k - 1] = ||R - Z_k Theta_k'||_2
    estimates: list[Estimate] = field(default_factory=list, repr=False)


def spectral_norm(M) -> float:
    M = np.asarray(M, dtype=float)
    if not M.any():
        return 0.0
    return float(top_k_svd(M, 1).sigma[0])


def estimate_k(r, k_max: int, rng=None, tie_rtol: float = 1e-10) -> KSelection:
    """Pick the k in 1..k_max whose SCK fit minimizes ``||R - Z_hat Theta_hat'||_2``.

    One top-k_max SVD is computed and truncated for every k. Each k gets its
    own child RNG stream, so scores do not depend on evaluation order.
    Scores within ``tie_rtol * sigma_1(R)`` of the minimum count as ties and
    the smallest such k wins.
    """
    R = _matrix(r)
    if not 1 <= k_max <= min(R.shape):
        raise ValueError(f"k_max={k_max} must lie in 1..{min(R.shape)}")
    rng = make_rng(rng)
    children = rng.spawn(k_max)
    full = top_k_svd(R, k_max)
    scores = np.empty(k_max)
    fits = []
    for k in range(1, k_max + 1):
        svd = full.truncate(k)
        km = kmeans(svd.u, k, max_iters=KMEANS_ITERS, rng=children[k - 1])
        z_hat = _assignment(km.labels, k)
        theta_hat = theta_from_svd(svd, z_hat)
        scores[k - 1] = spectral_norm(R - theta_hat[:, z_hat.labels].T)
        fits.append(Estimate(z_hat, theta_hat, "SCK", 0.0, svd, km))
    tol = tie_rtol * full.sigma[0]
    k_hat = int(np.flatnonzero(scores <= scores.min() + tol)[0]) + 1
    return KSelection(k_hat, scores, fits)
