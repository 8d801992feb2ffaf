"""CSV / JSON serialization of scenario reports."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from ..errors import ConfigError
from ..metrics import METRIC_NAMES

SUMMARY_COLUMNS = (
    ["scenario", "sweep", "grid_value", "N", "J", "rho", "method", "replicates", "failures"]
    + [f"{m}_{s}" for m in METRIC_NAMES for s in ("mean", "std")]
    + ["elapsed_mean", "elapsed_std"]
)
REPLICATE_COLUMNS = ["grid_index", "grid_value", "replicate", "N", "J", "method", *METRIC_NAMES, "elapsed", "error"]


def _fmt(v) -> str:
    if isinstance(v, float):
        return "%.17g" % v
    return str(v)


def _json_value(v):
    # strict JSON has no NaN
    if isinstance(v, float) and not math.isfinite(v):
        return None
    return v


def replicates_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".replicates.csv")


def _write_csv(path, columns, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def emit_report(report, fmt: str, path) -> list[Path]:
    """Write ``report``; returns the files written.

    CSV writes the summary to ``path`` and per-replicate rows next to it
    (``<stem>.replicates.csv``). JSON holds both tables plus provenance.
    """
    if not report.summary:
        raise ConfigError("refusing to write an empty report")
    path = Path(path)
    if fmt == "csv":
        _write_csv(path, SUMMARY_COLUMNS, report.summary)
        rpath = replicates_path(path)
        _write_csv(rpath, REPLICATE_COLUMNS, report.replicate_rows)
        return [path, rpath]
    if fmt == "json":
        doc = {
            "provenance": report.provenance,
            "columns": SUMMARY_COLUMNS,
            "summary": [{c: _json_value(row[c]) for c in SUMMARY_COLUMNS} for row in report.summary],
            "replicates": [{c: _json_value(row[c]) for c in REPLICATE_COLUMNS} for row in report.replicate_rows],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=1, allow_nan=False)
        return [path]
    raise ConfigError(f"unknown format {fmt!r}")


def _parse(v: str):
    for cast in (int, float):
        try:
            return cast(v)
        except ValueError:
            pass
    return v


def read_csv_report(path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: _parse(v) for k, v in row.items()} for row in csv.DictReader(fh)]
