"""Seeded generation of planted-class instances.

All randomness flows through ``numpy.random.Generator`` backed by PCG64.
Seeds for replicate ``r`` of a run with master seed ``s`` come from
``SeedSequence(s, spawn_key=(r,))``; each replicate then spawns named child
streams so that drawing more from one stream never shifts another.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainViolation, RankDeficient, RetriesExhausted
from .model import (
    SIGNED_THETA_KINDS,
    ClassAssignment,
    DistributionSpec,
    ItemParams,
    Kind,
    ResponseMatrix,
    population_matrix,
)

MAX_CLASS_RETRIES = 100
RANK_RTOL = 1e-10

STREAMS = ("classes", "params", "responses", "sck", "rmk")


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def replicate_seed(master_seed: int, replicate: int) -> np.random.SeedSequence:
    return np.random.SeedSequence(int(master_seed), spawn_key=(int(replicate),))


def replicate_streams(master_seed: int, replicate: int) -> dict[str, np.random.Generator]:
    children = replicate_seed(master_seed, replicate).spawn(len(STREAMS))
    return {name: np.random.Generator(np.random.PCG64(ss)) for name, ss in zip(STREAMS, children)}


@dataclass(frozen=True)
class SimulationDesign:
    N: int
    K: int
    spec: DistributionSpec
    rho: float
    J: int | None = None
    replicates: int = 50
    master_seed: int = 0

    def __post_init__(self):
        if self.J is None:
            object.__setattr__(self, "J", default_items(self.N))
        if self.N < self.K or self.J < self.K:
            raise ValueError(f"need N >= K and J >= K (N={self.N}, J={self.J}, K={self.K})")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")


def default_items(N: int) -> int:
    """J = N/5, rounded down when N is not a multiple of 5."""
    return N // 5


def sample_classes(N: int, K: int, rng) -> ClassAssignment:
    """Uniform i.i.d. labels, redrawn as a whole until every class is non-empty."""
    if N < K:
        raise ValueError(f"N={N} < K={K}")
    rng = make_rng(rng)
    for _ in range(MAX_CLASS_RETRIES):
        labels = rng.integers(0, K, size=N)
        if np.bincount(labels, minlength=K).min() > 0:
            return ClassAssignment(labels, K)
    raise RetriesExhausted(f"no valid assignment after {MAX_CLASS_RETRIES} draws (N={N}, K={K})")


def check_full_rank(theta) -> None:
    s = np.linalg.svd(np.asarray(theta, dtype=float), compute_uv=False)
    K = np.asarray(theta).shape[1]
    if len(s) < K or s[K - 1] <= RANK_RTOL * s[0]:
        raise RankDeficient("item parameter matrix must have rank K")


def sample_item_params(spec: DistributionSpec, J: int, K: int, rho: float, rng) -> ItemParams:
    spec.check_rho(rho)
    rng = make_rng(rng)
    b = rng.random((J, K))
    if spec.kind in SIGNED_THETA_KINDS:
        b = 2 * b - 1
    b = b / np.max(np.abs(b))
    theta = rho * b
    check_full_rank(theta)
    _check_domain(theta.T, spec)
    return ItemParams(theta=theta, rho=float(rho), b=b)


def _check_domain(r0: np.ndarray, spec: DistributionSpec) -> None:
    ok = spec.in_domain(r0)
    if not ok.all():
        i, j = np.argwhere(~ok)[0]
        raise DomainViolation(int(i), int(j), spec.kind.value, float(r0[i, j]))


def sample_responses(r0, spec: DistributionSpec, rng) -> ResponseMatrix:
    """Draw R entrywise independently with E[R] = R0."""
    r0 = r0.values if isinstance(r0, ResponseMatrix) else np.asarray(r0, dtype=float)
    _check_domain(r0, spec)
    rng = make_rng(rng)
    k = spec.kind
    if k is Kind.BERNOULLI:
        r = (rng.random(r0.shape) < r0).astype(float)
    elif k is Kind.BINOMIAL:
        p = r0 / spec.m
        r = np.zeros(r0.shape)
        for _ in range(spec.m):
            r += rng.random(r0.shape) < p
    elif k is Kind.POISSON:
        r = rng.poisson(r0).astype(float)
    elif k is Kind.NORMAL:
        r = r0 + np.sqrt(spec.sigma2) * rng.standard_normal(r0.shape)
    elif k is Kind.EXPONENTIAL:
        # rate 1/R0, i.e. scale R0
        r = r0 * rng.standard_exponential(r0.shape)
    elif k is Kind.UNIFORM:
        u = rng.random(r0.shape)
        # open interval: redraw exact zeros
        while not u.all():
            zeros = u == 0
            u[zeros] = rng.random(int(zeros.sum()))
        r = 2 * r0 * u
    else:
        up = rng.random(r0.shape) < (1 + r0) / 2
        r = np.where(up, 1.0, -1.0)
    return ResponseMatrix(r, kind="observed")


@dataclass(frozen=True, eq=False)
class Instance:
    z: ClassAssignment
    params: ItemParams
    r0: ResponseMatrix
    r: ResponseMatrix
    spec: DistributionSpec


def simulate(design_or_N, K=None, spec=None, rho=None, J=None, *, streams) -> Instance:
    """Draw (Z, Theta, R) for one replicate from the three data streams."""
    if isinstance(design_or_N, SimulationDesign):
        d = design_or_N
        N, K, spec, rho, J = d.N, d.K, d.spec, d.rho, d.J
    else:
        N = design_or_N
        J = default_items(N) if J is None else J
    z = sample_classes(N, K, streams["classes"])
    params = sample_item_params(spec, J, K, rho, streams["params"])
    r0 = population_matrix(z, params)
    r = sample_responses(r0, spec, streams["responses"])
    return Instance(z, params, r0, r, spec)


def fixed_instance(z: ClassAssignment, theta, spec: DistributionSpec, rng) -> Instance:
    """Instance with given (Z, Theta); only R is random."""
    params = ItemParams.from_theta(theta)
    check_full_rank(params.theta)
    r0 = population_matrix(z, params)
    return Instance(z, params, r0, sample_responses(r0, spec, rng), spec)
