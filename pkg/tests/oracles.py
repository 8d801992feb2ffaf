"""Slow, independent reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def jacobi_svd(A, sweeps=60, eps=1e-15):
    """One-sided Jacobi SVD: rotate column pairs until mutually orthogonal."""
    A = np.array(A, dtype=float)
    transposed = A.shape[0] < A.shape[1]
    if transposed:
        A = A.T
    m, n = A.shape
    U = A.copy()
    V = np.eye(n)
    for _ in range(sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                alpha = U[:, p] @ U[:, p]
                beta = U[:, q] @ U[:, q]
                gamma = U[:, p] @ U[:, q]
                if alpha == 0 or beta == 0:
                    continue
                off = max(off, abs(gamma) / math.sqrt(alpha * beta))
                if abs(gamma) <= eps * math.sqrt(alpha * beta):
                    continue
                zeta = (beta - alpha) / (2 * gamma)
                t = math.copysign(1.0, zeta) / (abs(zeta) + math.sqrt(1 + zeta * zeta))
                c = 1 / math.sqrt(1 + t * t)
                s = c * t
                up, uq = U[:, p].copy(), U[:, q].copy()
                U[:, p], U[:, q] = c * up - s * uq, s * up + c * uq
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p], V[:, q] = c * vp - s * vq, s * vp + c * vq
        if off <= eps:
            break
    sigma = np.sqrt((U * U).sum(axis=0))
    order = np.argsort(-sigma)
    sigma = sigma[order]
    V = V[:, order]
    U = U[:, order]
    nz = sigma > 0
    U[:, nz] = U[:, nz] / sigma[nz]
    if transposed:
        return V, sigma, U
    return U, sigma, V


def brute_kmeans(X, K):
    """Exhaustive minimum within-cluster sum of squares over all K-partitions."""
    X = np.asarray(X, dtype=float)
    n = len(X)
    best = (math.inf, None)
    for rest in itertools.product(range(K), repeat=n - 1):
        labels = (0,) + rest
        if len(set(labels)) < K:
            continue
        lab = np.array(labels)
        cost = sum(((X[lab == k] - X[lab == k].mean(axis=0)) ** 2).sum() for k in range(K))
        if cost < best[0]:
            best = (cost, lab)
    return best


def confusion_loops(t, e, K):
    c = [[0] * K for _ in range(K)]
    for a, b in zip(t, e):
        c[a][b] += 1
    return np.array(c)


def hamming_brute(t, e, K):
    n = len(t)
    return min(sum(1 for a, b in zip(t, e) if p[a] != b) for p in itertools.permutations(range(K))) / n


def clustering_error_brute(t, e, K):
    t, e = list(t), list(e)
    n = len(t)
    best = math.inf
    for p in itertools.permutations(range(K)):
        worst = 0.0
        for k in range(K):
            Tk = {i for i in range(n) if t[i] == k}
            Ek = {i for i in range(n) if e[i] == p[k]}
            worst = max(worst, len(Tk ^ Ek) / len(Tk))
        best = min(best, worst)
    return best


def theta_errors_brute(theta, theta_hat):
    K = theta.shape[1]
    l1 = min(np.abs(theta_hat - theta[:, list(p)]).sum() for p in itertools.permutations(range(K)))
    l2 = min(np.linalg.norm(theta_hat - theta[:, list(p)]) for p in itertools.permutations(range(K)))
    return l1 / np.abs(theta).sum(), l2 / np.linalg.norm(theta)


def nmi_formula(t, e):
    n = len(t)
    C = {}
    for a, b in zip(t, e):
        C[(a, b)] = C.get((a, b), 0) + 1
    rows, cols = {}, {}
    for (a, b), v in C.items():
        rows[a] = rows.get(a, 0) + v
        cols[b] = cols.get(b, 0) + v
    num = -2 * sum(v * math.log(v * n / (rows[a] * cols[b])) for (a, b), v in C.items())
    den = sum(v * math.log(v / n) for v in rows.values()) + sum(v * math.log(v / n) for v in cols.values())
    return num / den


def ari_pairs(t, e):
    """ARI by explicit pair counting."""
    n = len(t)
    same_t = same_e = both = 0
    for i in range(n):
        for j in range(i + 1, n):
            st, se = t[i] == t[j], e[i] == e[j]
            same_t += st
            same_e += se
            both += st and se
    total = n * (n - 1) / 2
    expected = same_t * same_e / total
    return (both - expected) / (0.5 * (same_t + same_e) - expected)
