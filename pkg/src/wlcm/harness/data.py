"""Real-data ingestion and profile analysis."""

from __future__ import annotations

import csv
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import EmptyAfterFilter, SchemaError
from ..estimators import estimate_k, sck
from ..generators import make_rng
from ..model import ClassAssignment, profile_means

DEFAULT_MISSING = ("", "NA")
DEFAULT_KMAX = 15


@dataclass
class CsvSchema:
    responses: list[str]
    covariates: dict[str, str] = field(default_factory=dict)  # name -> "numeric" | "categorical"
    missing: tuple[str, ...] = DEFAULT_MISSING
    response_range: tuple[float, float] | None = None
    ranges: dict[str, tuple[float, float]] = field(default_factory=dict)
    categories: dict[str, set[str]] = field(default_factory=dict)


@dataclass
class Dataset:
    R: np.ndarray
    items: list[str]
    covariates: dict[str, np.ndarray]
    covariate_types: dict[str, str]
    row_numbers: np.ndarray  # 1-based data-line numbers of kept rows
    dropped: list[tuple[int, str]]

    @property
    def N(self) -> int:
        return self.R.shape[0]

    @property
    def J(self) -> int:
        return self.R.shape[1]


def _expand(header: list[str], spec: list[str] | str) -> list[str]:
    """Resolve names; ``"A..B"`` means every header column from A through B."""
    if isinstance(spec, str):
        spec = [s.strip() for s in spec.split(",") if s.strip()]
    out = []
    for item in spec:
        if ".." in item:
            a, b = item.split("..", 1)
            for name in (a, b):
                if name not in header:
                    raise SchemaError(f"column {name!r} not in header")
            i, j = header.index(a), header.index(b)
            if j < i:
                raise SchemaError(f"range {item!r} runs backwards")
            out.extend(header[i : j + 1])
        else:
            if item not in header:
                raise SchemaError(f"column {item!r} not in header")
            out.append(item)
    return out


def load_response_csv(path, schema: CsvSchema) -> Dataset:
    """Read a header-first CSV, dropping rows with missing or illegal values.

    Every dropped row is logged as ``(line_number, reason)`` where line 1 is
    the first data row.
    """
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise SchemaError(f"{path} is empty") from None
        items = _expand(header, schema.responses)
        covs = _expand(header, list(schema.covariates))
        for name, kind in schema.covariates.items():
            if kind not in ("numeric", "categorical"):
                raise SchemaError(f"covariate {name!r} has unknown type {kind!r}")
        idx = {name: header.index(name) for name in items + covs}
        missing = set(schema.missing)
        rows, cov_rows, kept, dropped = [], [], [], []
        for line, raw in enumerate(reader, start=1):
            if not raw or all(not c.strip() for c in raw):
                continue
            reason = _check_row(raw, idx, items, covs, schema, missing)
            if reason is not None:
                dropped.append((line, reason))
                continue
            rows.append([float(raw[idx[c]]) for c in items])
            cov_rows.append([raw[idx[c]].strip() for c in covs])
            kept.append(line)
    if not rows:
        raise EmptyAfterFilter(f"no rows left in {path} after filtering ({len(dropped)} dropped)")
    covariates = {}
    for j, name in enumerate(covs):
        col = [r[j] for r in cov_rows]
        if schema.covariates[name] == "numeric":
            covariates[name] = np.array([float(v) for v in col])
        else:
            covariates[name] = np.array(col, dtype=object)
    return Dataset(
        R=np.array(rows, dtype=float),
        items=items,
        covariates=covariates,
        covariate_types={c: schema.covariates[c] for c in covs},
        row_numbers=np.array(kept),
        dropped=dropped,
    )


def _check_row(raw, idx, items, covs, schema, missing):
    for name in items + covs:
        i = idx[name]
        cell = raw[i].strip() if i < len(raw) else ""
        if cell in missing:
            return f"missing {name}"
        is_response = name in items
        numeric = is_response or schema.covariates.get(name) == "numeric"
        if numeric:
            try:
                v = float(cell)
            except ValueError:
                return f"non-numeric {name}={cell!r}"
            if not math.isfinite(v):
                return f"non-finite {name}"
            rng = schema.response_range if is_response else None
            rng = schema.ranges.get(name, rng)
            if rng is not None and not (rng[0] <= v <= rng[1]):
                return f"{name}={cell} outside [{rng[0]}, {rng[1]}]"
        elif name in schema.categories and cell not in schema.categories[name]:
            return f"{name}={cell!r} not an allowed category"
    return None


@dataclass
class AnalysisReport:
    k: int
    k_scores: np.ndarray | None
    labels: np.ndarray  # 0-based
    theta_hat: np.ndarray
    item_means: np.ndarray  # J x K averages of R per profile
    mean_gap: float  # max |item_means - theta_hat|
    sizes: np.ndarray
    covariate_summary: dict
    elapsed: float
    items: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "k_scores": None if self.k_scores is None else self.k_scores.tolist(),
            "sizes": self.sizes.tolist(),
            "labels": (self.labels + 1).tolist(),
            "items": self.items,
            "theta_hat": self.theta_hat.tolist(),
            "item_means": self.item_means.tolist(),
            "mean_gap": self.mean_gap,
            "covariates": self.covariate_summary,
            "elapsed": self.elapsed,
        }


def _summarize_covariates(data: Dataset, z: ClassAssignment) -> dict:
    out: dict = {}
    cats = {c: v for c, v in data.covariates.items() if data.covariate_types[c] == "categorical"}
    nums = {c: v for c, v in data.covariates.items() if data.covariate_types[c] == "numeric"}
    for name, col in cats.items():
        levels = sorted(set(col.tolist()))
        entry = {"type": "categorical", "levels": levels, "counts": {}, "item_means": {}}
        for lev in levels:
            mask = col == lev
            entry["counts"][lev] = [int(np.sum(mask & (z.labels == k))) for k in range(z.K)]
            # per-profile item averages within this category; None for empty cells
            means = []
            for k in range(z.K):
                sel = mask & (z.labels == k)
                means.append(data.R[sel].mean(axis=0).tolist() if sel.any() else None)
            entry["item_means"][lev] = means
        for num, x in nums.items():
            entry.setdefault("numeric_means", {})[num] = {
                lev: [_mean(x[(col == lev) & (z.labels == k)]) for k in range(z.K)] for lev in levels
            }
        out[name] = entry
    for name, x in nums.items():
        out[name] = {"type": "numeric", "means": [_mean(x[z.labels == k]) for k in range(z.K)]}
    return out


def _mean(x) -> float | None:
    return float(np.mean(x)) if len(x) else None


def analyze_dataset(data: Dataset, k: int | str = "auto", k_max: int = DEFAULT_KMAX, rng=None) -> AnalysisReport:
    """Fit SCK to a dataset, choosing K by spectral-norm residual when ``k="auto"``."""
    rng = make_rng(rng)
    fit_rng, select_rng = rng.spawn(2)
    scores = None
    if k == "auto":
        k_max = min(k_max, data.N, data.J)
        sel = estimate_k(data.R, k_max, select_rng)
        k, scores = sel.k_hat, sel.scores
    k = int(k)
    t0 = time.perf_counter()
    est = sck(data.R, k, fit_rng)
    elapsed = time.perf_counter() - t0
    means = profile_means(data.R, est.z_hat)
    return AnalysisReport(
        k=k,
        k_scores=scores,
        labels=est.z_hat.labels,
        theta_hat=est.theta_hat,
        item_means=means,
        mean_gap=float(np.max(np.abs(means - est.theta_hat))),
        sizes=est.z_hat.sizes,
        covariate_summary=_summarize_covariates(data, est.z_hat),
        elapsed=elapsed,
        items=list(data.items),
    )


def emit_analysis(report: AnalysisReport, data: Dataset, path) -> None:
    doc = report.to_dict()
    doc["N"], doc["J"] = data.N, data.J
    doc["row_numbers"] = data.row_numbers.tolist()
    doc["dropped"] = [{"line": line, "reason": reason} for line, reason in data.dropped]
    with open(Path(path), "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
