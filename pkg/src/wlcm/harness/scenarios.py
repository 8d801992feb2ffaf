"""Scenario configs and the Monte-Carlo replicate engine."""

from __future__ import annotations

import json
import logging
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .. import __version__
from ..errors import ConfigError, WLCMError
from ..estimators import METHODS
from ..generators import default_items, fixed_instance, replicate_streams, simulate
from ..metrics import METRIC_NAMES, evaluate
from ..model import ClassAssignment, DistributionSpec

log = logging.getLogger(__name__)

SWEEPS = ("rho", "N", "fixed")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario_id: str
    sweep: str
    grid: tuple[float, ...]
    distribution: str
    N: int | None = None
    rho: float | None = None
    K: int = 3
    J: int | None = None  # None: N // 5
    m: int | None = None
    sigma2: float | None = None
    replicates: int = 50
    master_seed: int = 0
    methods: tuple[str, ...] = ("SCK", "RMK")
    design: str = "planted"  # or "sim8"

    def __post_init__(self):
        object.__setattr__(self, "grid", tuple(float(g) for g in self.grid))
        object.__setattr__(self, "methods", tuple(m.upper() for m in self.methods))
        if self.sweep not in SWEEPS:
            raise ConfigError(f"sweep must be one of {SWEEPS}, got {self.sweep!r}")
        if not self.grid:
            raise ConfigError("grid is empty")
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("grid must be strictly increasing")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.methods or any(m not in METHODS for m in self.methods):
            raise ConfigError(f"methods must be a non-empty subset of {sorted(METHODS)}")
        if self.design not in ("planted", "sim8"):
            raise ConfigError(f"unknown design {self.design!r}")
        try:
            spec = self.spec
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.design == "planted":
            if self.sweep == "rho":
                if self.N is None:
                    raise ConfigError("a rho sweep needs a fixed N")
                rhos, Ns = self.grid, [self.N]
            elif self.sweep == "N":
                if self.rho is None:
                    raise ConfigError("an N sweep needs a fixed rho")
                if any(g != int(g) for g in self.grid):
                    raise ConfigError("N grid must hold integers")
                rhos, Ns = [self.rho], [int(g) for g in self.grid]
            else:
                raise ConfigError("the fixed sweep is only available for the sim8 design")
            for r in rhos:
                try:
                    spec.check_rho(r)
                except WLCMError as exc:
                    raise ConfigError(str(exc)) from exc
            for n in Ns:
                j = self.items_for(n)
                if n < self.K or j < self.K:
                    raise ConfigError(f"N={n}, J={j} too small for K={self.K}")

    @property
    def spec(self) -> DistributionSpec:
        return DistributionSpec(self.distribution, m=self.m, sigma2=self.sigma2)

    def items_for(self, N: int) -> int:
        return self.J if self.J is not None else default_items(N)

    def point(self, value: float) -> tuple[int, float]:
        """(N, rho) at a grid value."""
        if self.sweep == "rho":
            return self.N, value
        if self.sweep == "N":
            return int(value), self.rho
        return SIM8_N, value

    def to_dict(self) -> dict:
        d = asdict(self)
        d["grid"] = list(self.grid)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_json(cls, path) -> "ScenarioConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


def _grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(n))


SIM8_N, SIM8_J = 16, 10


def sim8_truth() -> tuple[ClassAssignment, np.ndarray]:
    """K=2, N=16, J=10; subjects 1-8 in class 1; Theta(j,1)=100, Theta(j,2)=110-10j."""
    labels = np.repeat([0, 1], 8)
    j = np.arange(1, SIM8_J + 1)
    theta = np.column_stack([np.full(SIM8_J, 100.0), 110.0 - 10.0 * j])
    return ClassAssignment(labels, 2), theta


CANNED: dict[str, ScenarioConfig] = {
    c.scenario_id: c
    for c in [
        ScenarioConfig("sim1a", "rho", _grid(0.1, 1.0, 0.1), "bernoulli", N=500),
        ScenarioConfig("sim1b", "N", _grid(1000, 5000, 1000), "bernoulli", rho=0.1),
        ScenarioConfig("sim2a", "rho", _grid(0.2, 2.0, 0.2), "binomial", N=500, m=5),
        ScenarioConfig("sim2b", "N", _grid(1000, 5000, 1000), "binomial", rho=0.1, m=5),
        ScenarioConfig("sim3a", "rho", _grid(0.2, 2.0, 0.2), "poisson", N=500),
        ScenarioConfig("sim3b", "N", _grid(1000, 5000, 1000), "poisson", rho=0.1),
        ScenarioConfig("sim4a", "rho", _grid(0.2, 2.0, 0.2), "normal", N=500, sigma2=2.0),
        ScenarioConfig("sim4b", "N", _grid(1000, 5000, 1000), "normal", rho=0.5, sigma2=2.0),
        ScenarioConfig("sim5a", "rho", _grid(1, 20, 1), "exponential", N=300),
        ScenarioConfig("sim5b", "N", _grid(300, 3000, 300), "exponential", rho=1.0),
        ScenarioConfig("sim6a", "rho", _grid(1, 20, 1), "uniform", N=120),
        ScenarioConfig("sim6b", "N", _grid(300, 3000, 300), "uniform", rho=1.0),
        ScenarioConfig("sim7a", "rho", _grid(0.1, 1.0, 0.1), "signed", N=500),
        ScenarioConfig("sim7b", "N", _grid(1000, 5000, 1000), "signed", rho=0.2),
        ScenarioConfig("sim8a", "fixed", (100.0,), "normal", K=2, J=SIM8_J, sigma2=1.0, design="sim8"),
        ScenarioConfig("sim8b", "fixed", (100.0,), "poisson", K=2, J=SIM8_J, design="sim8"),
    ]
}


def get_scenario(name_or_path: str, **overrides) -> ScenarioConfig:
    if name_or_path in CANNED:
        cfg = CANNED[name_or_path]
    elif Path(name_or_path).is_file():
        cfg = ScenarioConfig.from_json(name_or_path)
    else:
        raise ConfigError(f"{name_or_path!r} is neither a canned scenario ({', '.join(CANNED)}) nor a file")
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return replace(cfg, **overrides) if overrides else cfg


@dataclass
class ScenarioReport:
    config: ScenarioConfig
    summary: list[dict]
    replicate_rows: list[dict]
    provenance: dict = field(default_factory=dict)

    def select(self, method: str, grid_value: float | None = None) -> list[dict]:
        return [
            row
            for row in self.summary
            if row["method"] == method and (grid_value is None or row["grid_value"] == grid_value)
        ]

    def mean_curve(self, metric: str, method: str = "SCK") -> np.ndarray:
        return np.array([row[f"{metric}_mean"] for row in self.select(method)])


def run_replicate(config: ScenarioConfig, grid_index: int, replicate: int) -> list[dict]:
    value = config.grid[grid_index]
    N, rho = config.point(value)
    streams = replicate_streams(config.master_seed, replicate)
    base = {"grid_index": grid_index, "grid_value": value, "replicate": replicate, "N": N}
    if config.design == "sim8":
        z, theta = sim8_truth()
        inst = fixed_instance(z, theta, config.spec, streams["responses"])
    else:
        inst = simulate(N, config.K, config.spec, rho, config.items_for(N), streams=streams)
    base["J"] = inst.params.J
    rows = []
    for method in config.methods:
        row = dict(base, method=method)
        try:
            est = METHODS[method](inst.r, config.K, streams[method.lower()])
            row.update(evaluate(inst.z, inst.params.theta, est.z_hat, est.theta_hat).as_dict())
            row["elapsed"] = est.elapsed
            row["error"] = ""
        except WLCMError as exc:
            log.warning("replicate %d at %s=%s failed for %s: %s", replicate, config.sweep, value, method, exc)
            row.update({name: float("nan") for name in METRIC_NAMES})
            row["elapsed"] = float("nan")
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    return rows


def aggregate(config: ScenarioConfig, rows: list[dict]) -> list[dict]:
    summary = []
    for gi, value in enumerate(config.grid):
        N, rho = config.point(value)
        for method in config.methods:
            sel = [r for r in rows if r["grid_index"] == gi and r["method"] == method]
            ok = [r for r in sel if not r["error"]]
            out = {
                "scenario": config.scenario_id,
                "sweep": config.sweep,
                "grid_value": value,
                "N": N,
                "J": sel[0]["J"] if sel else config.items_for(N),
                "rho": rho,
                "method": method,
                "replicates": len(sel),
                "failures": len(sel) - len(ok),
            }
            for name in METRIC_NAMES + ("elapsed",):
                vals = np.array([r[name] for r in ok], dtype=float)
                out[f"{name}_mean"] = float(vals.mean()) if len(vals) else float("nan")
                out[f"{name}_std"] = float(vals.std(ddof=1)) if len(vals) > 1 else 0.0
            summary.append(out)
    return summary


def run_scenario(config: ScenarioConfig, threads: int = 1) -> ScenarioReport:
    """Run every (grid point, replicate) and aggregate in (grid, replicate) order.

    Replicate ``r`` uses the same seed at every grid point, so rho sweeps
    compare the methods on common random numbers.
    """
    tasks = [(gi, r) for gi in range(len(config.grid)) for r in range(config.replicates)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda t: run_replicate(config, *t), tasks))
    else:
        results = [run_replicate(config, *t) for t in tasks]
    rows = [row for chunk in results for row in chunk]
    notes = []
    if config.J is None:
        Ns = [config.point(v)[0] for v in config.grid]
        odd = sorted({n for n in Ns if n % 5})
        if odd:
            notes.append(f"J = N // 5 rounded down for N in {odd}")
            log.warning(notes[-1])
    provenance = {
        "package": "wlcm",
        "version": __version__,
        "numpy": np.__version__,
        "python": platform.python_version(),
        "prng": "PCG64 via SeedSequence(master_seed, spawn_key=(replicate,))",
        "master_seed": config.master_seed,
        "config": config.to_dict(),
        "notes": notes,
    }
    return ScenarioReport(config, aggregate(config, rows), rows, provenance)
