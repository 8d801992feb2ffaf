"""Partition and parameter recovery metrics with permutation alignment."""

from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching

from .errors import DimensionMismatch, ZeroTheta
from .model import ClassAssignment

BRUTE_FORCE_MAX_K = 8

METRIC_NAMES = ("clustering_error", "hamming_error", "nmi", "ari", "rel_l1", "rel_l2")


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    c: np.ndarray  # c[k, l] = |true_k & est_l|

    @property
    def row_sums(self) -> np.ndarray:
        return self.c.sum(axis=1)

    @property
    def col_sums(self) -> np.ndarray:
        return self.c.sum(axis=0)

    @property
    def N(self) -> int:
        return int(self.c.sum())


def _labels(z) -> tuple[np.ndarray, int]:
    if isinstance(z, ClassAssignment):
        return z.labels, z.K
    a = np.asarray(z, dtype=np.int64)
    return a, int(a.max()) + 1


def confusion(true_z, est_z) -> ConfusionMatrix:
    t, kt = _labels(true_z)
    e, ke = _labels(est_z)
    if t.shape != e.shape:
        raise DimensionMismatch(f"{t.shape[0]} vs {e.shape[0]} subjects")
    c = np.zeros((kt, ke), dtype=np.int64)
    np.add.at(c, (t, e), 1)
    return ConfusionMatrix(c)


@lru_cache(maxsize=None)
def _all_perms(K: int) -> np.ndarray:
    return np.array(list(itertools.permutations(range(K))), dtype=np.int64).reshape(-1, K)


def best_permutation(
    cost, sense: Literal["minimize", "maximize"] = "minimize", method: str = "auto"
) -> np.ndarray:
    """Optimal assignment ``perm`` (row k -> column perm[k]) for a square matrix.

    ``method="auto"`` enumerates all permutations for K <= 8 and uses the
    Hungarian algorithm beyond.
    """
    cost = np.asarray(cost, dtype=float)
    K = cost.shape[0]
    if cost.ndim != 2 or cost.shape[1] != K:
        raise DimensionMismatch("cost matrix must be square")
    if method == "auto":
        method = "brute" if K <= BRUTE_FORCE_MAX_K else "hungarian"
    if method == "hungarian":
        _, cols = linear_sum_assignment(cost, maximize=(sense == "maximize"))
        return cols.astype(np.int64)
    perms = _all_perms(K)
    totals = cost[np.arange(K), perms].sum(axis=1)
    best = np.argmax(totals) if sense == "maximize" else np.argmin(totals)
    return perms[best].copy()


def bottleneck_permutation(cost, method: str = "auto") -> np.ndarray:
    """Permutation minimizing ``max_k cost[k, perm[k]]``."""
    cost = np.asarray(cost, dtype=float)
    K = cost.shape[0]
    if method == "auto":
        method = "brute" if K <= BRUTE_FORCE_MAX_K else "threshold"
    if method == "brute":
        perms = _all_perms(K)
        worst = cost[np.arange(K), perms].max(axis=1)
        return perms[np.argmin(worst)].copy()
    # smallest threshold admitting a perfect matching
    values = np.unique(cost)
    lo, hi = 0, len(values) - 1
    best = None
    while lo <= hi:
        mid = (lo + hi) // 2
        match = maximum_bipartite_matching(csr_matrix(cost <= values[mid]), perm_type="column")
        if np.all(match >= 0):
            best, hi = match, mid - 1
        else:
            lo = mid + 1
    return best.astype(np.int64)


def _check_square(cm: ConfusionMatrix):
    if cm.c.shape[0] != cm.c.shape[1]:
        raise DimensionMismatch("true and estimated partitions must have the same K")


def _class_error_matrix(cm: ConfusionMatrix, denominator: str) -> np.ndarray:
    c = cm.c.astype(float)
    sym = cm.row_sums[:, None] - c + cm.col_sums[None, :] - c
    if denominator == "class":
        denom = cm.row_sums[:, None].astype(float)
    elif denominator == "last":
        denom = float(cm.row_sums[-1])
    else:
        raise ValueError(f"unknown denominator {denominator!r}")
    return sym / denom


def clustering_error(true_z, est_z, denominator: str = "class", method: str = "auto") -> float:
    """Best-permutation worst-class symmetric difference, as a fraction of class size.

    ``denominator="last"`` divides every class by the size of the last true
    class instead, the literal reading of the printed formula.
    """
    cm = confusion(true_z, est_z)
    _check_square(cm)
    err = _class_error_matrix(cm, denominator)
    perm = bottleneck_permutation(err, method=method)
    return float(err[np.arange(len(perm)), perm].max())


def hamming_error(true_z, est_z, literal: bool = False, method: str = "auto") -> float:
    """Fraction of subjects misclassified under the best relabeling.

    ``literal=True`` counts mismatched entries of the one-hot matrices, which
    is exactly twice the subject count.
    """
    cm = confusion(true_z, est_z)
    _check_square(cm)
    perm = best_permutation(cm.c, "maximize", method=method)
    wrong = cm.N - int(cm.c[np.arange(len(perm)), perm].sum())
    if literal:
        wrong *= 2
    return wrong / cm.N


def nmi(true_z, est_z) -> float:
    cm = confusion(true_z, est_z)
    c = cm.c.astype(float)
    n = float(cm.N)
    rows, cols = cm.row_sums.astype(float), cm.col_sums.astype(float)
    single_t, single_e = np.count_nonzero(rows) == 1, np.count_nonzero(cols) == 1
    if single_t and single_e:
        return 1.0
    if single_t or single_e:
        return 0.0
    k, l = np.nonzero(c)
    num = -2.0 * np.sum(c[k, l] * np.log(c[k, l] * n / (rows[k] * cols[l])))
    rr, cc = rows[rows > 0], cols[cols > 0]
    den = np.sum(rr * np.log(rr / n)) + np.sum(cc * np.log(cc / n))
    return float(num / den)


def _comb2(x):
    x = np.asarray(x, dtype=float)
    return x * (x - 1) / 2


def ari(true_z, est_z) -> float:
    cm = confusion(true_z, est_z)
    if cm.N < 2:
        return 1.0  # no pairs to disagree on
    index = _comb2(cm.c).sum()
    a, b = _comb2(cm.row_sums).sum(), _comb2(cm.col_sums).sum()
    expected = a * b / _comb2(cm.N)
    den = 0.5 * (a + b) - expected
    if den == 0:
        return 1.0 if _same_partition(cm) else 0.0
    return float((index - expected) / den)


def _same_partition(cm: ConfusionMatrix) -> bool:
    nz = cm.c > 0
    return bool(np.all(nz.sum(axis=0) <= 1) and np.all(nz.sum(axis=1) <= 1))


def relative_theta_errors(theta, theta_hat, method: str = "auto") -> tuple[float, float]:
    """Relative l1 and Frobenius errors of ``theta_hat`` under the best column permutation.

    The two minima are taken independently.
    """
    theta = np.asarray(theta, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    if theta.shape != theta_hat.shape:
        raise DimensionMismatch(f"{theta.shape} vs {theta_hat.shape}")
    l1, l2 = np.abs(theta).sum(), np.sqrt((theta**2).sum())
    if l1 == 0:
        raise ZeroTheta("theta is identically zero")
    diff = theta[:, :, None] - theta_hat[:, None, :]  # (J, k_true, l_est)
    cost1 = np.abs(diff).sum(axis=0)
    cost2 = (diff**2).sum(axis=0)
    K = theta.shape[1]
    p1 = best_permutation(cost1, method=method)
    p2 = best_permutation(cost2, method=method)
    e1 = cost1[np.arange(K), p1].sum() / l1
    e2 = np.sqrt(cost2[np.arange(K), p2].sum()) / l2
    return float(e1), float(e2)


@dataclass(frozen=True)
class MetricVector:
    clustering_error: float
    hamming_error: float
    nmi: float
    ari: float
    rel_l1: float
    rel_l2: float

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


def evaluate(true_z, theta, est_z, theta_hat) -> MetricVector:
    rel_l1, rel_l2 = relative_theta_errors(theta, theta_hat)
    return MetricVector(
        clustering_error=clustering_error(true_z, est_z),
        hamming_error=hamming_error(true_z, est_z),
        nmi=nmi(true_z, est_z),
        ari=ari(true_z, est_z),
        rel_l1=rel_l1,
        rel_l2=rel_l2,
    )
