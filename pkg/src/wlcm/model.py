"""Data model of the weighted latent class model.

A population response matrix is ``R0 = Z @ Theta.T`` where ``Z`` is the N x K
one-hot classification matrix and ``Theta`` the J x K item parameter matrix.
Labels are 0-based in memory; CSV/JSON output converts to 1-based.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import (
    AllZero,
    DimensionMismatch,
    EmptyClass,
    RhoOutOfRange,
)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ClassAssignment:
    """Hard assignment of N subjects to K non-empty classes (0-based labels)."""

    labels: np.ndarray
    K: int

    def __post_init__(self):
        labels = np.asarray(self.labels)
        if labels.ndim != 1:
            raise DimensionMismatch("labels must be a vector")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
        if self.K < 1:
            raise ValueError("K must be positive")
        if labels.size and (labels.min() < 0 or labels.max() >= self.K):
            raise ValueError(f"labels must lie in 0..{self.K - 1}")
        sizes = np.bincount(labels, minlength=self.K)
        empty = np.flatnonzero(sizes == 0)
        if empty.size:
            raise EmptyClass(int(empty[0]) + 1)
        object.__setattr__(self, "labels", _frozen(labels))

    @classmethod
    def from_labels(cls, labels, K: int | None = None, base: int = 0) -> "ClassAssignment":
        labels = np.asarray(labels, dtype=np.int64) - base
        if K is None:
            K = int(labels.max()) + 1
        return cls(labels, K)

    @property
    def N(self) -> int:
        return self.labels.shape[0]

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.K)

    @property
    def z(self) -> np.ndarray:
        out = np.zeros((self.N, self.K))
        out[np.arange(self.N), self.labels] = 1.0
        return out

    def labels_1based(self) -> np.ndarray:
        return self.labels + 1

    def permuted(self, perm) -> "ClassAssignment":
        """Relabel class k as perm[k]."""
        perm = np.asarray(perm)
        return ClassAssignment(perm[self.labels], self.K)


def one_hot(labels, K: int, base: int = 0) -> ClassAssignment:
    """Build a :class:`ClassAssignment`; ``base=1`` accepts labels in 1..K."""
    return ClassAssignment.from_labels(labels, K, base=base)


@dataclass(frozen=True, eq=False)
class ItemParams:
    theta: np.ndarray
    rho: float
    b: np.ndarray

    @classmethod
    def from_theta(cls, theta) -> "ItemParams":
        rho, b = scaling_split(theta)
        return cls(_frozen(np.asarray(theta, dtype=float)), rho, _frozen(b))

    @property
    def J(self) -> int:
        return self.theta.shape[0]

    @property
    def K(self) -> int:
        return self.theta.shape[1]


def scaling_split(theta) -> tuple[float, np.ndarray]:
    """Split ``theta`` into ``rho = max|theta|`` and ``b = theta / rho``."""
    theta = np.asarray(theta, dtype=float)
    if theta.ndim != 2:
        raise DimensionMismatch("theta must be a J x K matrix")
    rho = float(np.max(np.abs(theta))) if theta.size else 0.0
    if rho == 0.0:
        raise AllZero("theta is identically zero")
    return rho, theta / rho


@dataclass(frozen=True, eq=False)
class ResponseMatrix:
    values: np.ndarray
    kind: Literal["observed", "population"] = "observed"

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2:
            raise DimensionMismatch("response matrix must be 2-D")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape


def _values(r) -> np.ndarray:
    if isinstance(r, ResponseMatrix):
        return r.values
    return np.asarray(r, dtype=float)


def _theta(theta) -> np.ndarray:
    if isinstance(theta, ItemParams):
        return theta.theta
    return np.asarray(theta, dtype=float)


def population_matrix(z: ClassAssignment, theta) -> ResponseMatrix:
    """``R0 = Z Theta'``, i.e. ``R0[i, j] = theta[j, labels[i]]``."""
    th = _theta(theta)
    if th.ndim != 2 or th.shape[1] != z.K:
        raise DimensionMismatch(f"theta has shape {th.shape}, expected (J, {z.K})")
    return ResponseMatrix(th[:, z.labels].T, kind="population")


def profile_means(r, z: ClassAssignment) -> np.ndarray:
    """J x K matrix of per-class item averages."""
    v = _values(r)
    if v.shape[0] != z.N:
        raise DimensionMismatch(f"{v.shape[0]} response rows vs {z.N} labels")
    sizes = z.sizes
    if np.any(sizes == 0):
        raise EmptyClass(int(np.flatnonzero(sizes == 0)[0]) + 1)
    sums = np.zeros((z.K, v.shape[1]))
    np.add.at(sums, z.labels, v)
    return (sums / sizes[:, None]).T


class Kind(str, enum.Enum):
    BERNOULLI = "bernoulli"
    BINOMIAL = "binomial"
    POISSON = "poisson"
    NORMAL = "normal"
    EXPONENTIAL = "exponential"
    UNIFORM = "uniform"
    SIGNED = "signed"


# kinds whose item matrix may carry negative entries
SIGNED_THETA_KINDS = frozenset({Kind.NORMAL, Kind.SIGNED})


@dataclass(frozen=True)
class DistributionSpec:
    kind: Kind
    m: int | None = None
    sigma2: float | None = None

    def __post_init__(self):
        kind = Kind(str(self.kind).lower() if not isinstance(self.kind, Kind) else self.kind)
        object.__setattr__(self, "kind", kind)
        if kind is Kind.BINOMIAL:
            if self.m is None or int(self.m) != self.m or self.m < 1:
                raise ValueError("binomial requires a positive integer m")
            object.__setattr__(self, "m", int(self.m))
        elif self.m is not None:
            raise ValueError(f"m is only meaningful for binomial, not {kind.value}")
        if kind is Kind.NORMAL:
            if self.sigma2 is None or not self.sigma2 > 0:
                raise ValueError("normal requires a positive sigma2")
            object.__setattr__(self, "sigma2", float(self.sigma2))
        elif self.sigma2 is not None:
            raise ValueError(f"sigma2 is only meaningful for normal, not {kind.value}")

    @classmethod
    def of(cls, kind, m=None, sigma2=None) -> "DistributionSpec":
        """Like the constructor but fills in default parameters (m=5, sigma2=1)."""
        kind = Kind(str(kind.value if isinstance(kind, Kind) else kind).lower())
        if kind is Kind.BINOMIAL and m is None:
            m = 5
        if kind is Kind.NORMAL and sigma2 is None:
            sigma2 = 1.0
        return cls(kind, m=m, sigma2=sigma2)

    def domain(self) -> tuple[float, float, bool, bool]:
        """(low, high, low_closed, high_closed) for legal R0 entries."""
        inf = math.inf
        return {
            Kind.BERNOULLI: (0.0, 1.0, True, True),
            Kind.BINOMIAL: (0.0, float(self.m or 0), True, True),
            Kind.POISSON: (0.0, inf, True, False),
            Kind.NORMAL: (-inf, inf, False, False),
            Kind.EXPONENTIAL: (0.0, inf, False, False),
            Kind.UNIFORM: (0.0, inf, False, False),
            Kind.SIGNED: (-1.0, 1.0, True, True),
        }[self.kind]

    def in_domain(self, values) -> np.ndarray:
        lo, hi, lo_closed, hi_closed = self.domain()
        v = np.asarray(values, dtype=float)
        ok = np.isfinite(v)
        ok &= (v >= lo) if lo_closed else (v > lo)
        ok &= (v <= hi) if hi_closed else (v < hi)
        return ok

    def rho_range(self) -> tuple[float, float]:
        """Legal scaling parameter range, open at 0 and closed at the top."""
        if self.kind in (Kind.BERNOULLI, Kind.SIGNED):
            return 0.0, 1.0
        if self.kind is Kind.BINOMIAL:
            return 0.0, float(self.m)
        return 0.0, math.inf

    def check_rho(self, rho: float) -> None:
        lo, hi = self.rho_range()
        if not (rho > lo and rho <= hi):
            raise RhoOutOfRange(f"rho={rho} outside ({lo}, {hi}] for {self.kind.value}")

    def variance(self, r0) -> np.ndarray:
        """Per-entry variance of R given its mean ``r0``."""
        r0 = np.asarray(r0, dtype=float)
        k = self.kind
        if k is Kind.BERNOULLI:
            return r0 * (1 - r0)
        if k is Kind.BINOMIAL:
            return r0 * (1 - r0 / self.m)
        if k is Kind.POISSON:
            return r0.copy()
        if k is Kind.NORMAL:
            return np.full_like(r0, self.sigma2)
        if k is Kind.EXPONENTIAL:
            return r0**2
        if k is Kind.UNIFORM:
            return (2 * r0) ** 2 / 12
        return 1 - r0**2

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.m is not None:
            d["m"] = self.m
        if self.sigma2 is not None:
            d["sigma2"] = self.sigma2
        return d


@dataclass(frozen=True)
class AssumptionReport:
    gamma_bound: float
    gamma_exact: bool
    tau_bound: float | None
    threshold: float | None
    satisfied: bool | Literal["indeterminate"]
    log_factor: float = field(repr=False, default=0.0)


def check_assumption(spec: DistributionSpec, rho: float, N: int, J: int) -> AssumptionReport:
    """Check ``gamma >= tau^2 log(N+J) / max(N, J)`` using per-distribution bounds.

    gamma and tau are replaced by their distribution-specific upper bounds;
    when no bound on tau is available the verdict is ``"indeterminate"``.
    """
    spec.check_rho(rho)
    k = spec.kind
    gamma = {
        Kind.BERNOULLI: rho,
        Kind.BINOMIAL: rho,
        Kind.POISSON: rho,
        Kind.NORMAL: spec.sigma2,
        Kind.EXPONENTIAL: rho**2,
        Kind.UNIFORM: rho**2 / 3,
        Kind.SIGNED: 1.0,
    }[k]
    tau = {
        Kind.BERNOULLI: 1.0,
        Kind.BINOMIAL: float(spec.m or 0),
        Kind.UNIFORM: 2 * rho,
        Kind.SIGNED: 2.0,
    }.get(k)
    log_factor = math.log(N + J) / max(N, J)
    if tau is None:
        return AssumptionReport(gamma, k is Kind.NORMAL, None, None, "indeterminate", log_factor)
    threshold = tau**2 * log_factor
    return AssumptionReport(gamma, k is Kind.NORMAL, tau, threshold, bool(gamma >= threshold), log_factor)
