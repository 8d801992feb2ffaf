"""Run canned simulation scenarios and write one CSV report per scenario.

    python3 scripts/run_simulations.py --out results/ --replicates 20 --scenarios sim1a sim3b
    python3 scripts/run_simulations.py --out results/ --quick     # N capped at 500, 10 replicates
"""

import argparse
import logging
import time
from dataclasses import replace
from pathlib import Path

from wlcm.harness.report import emit_report
from wlcm.harness.scenarios import CANNED, run_scenario

log = logging.getLogger("run_simulations")


def quick(cfg):
    """Shrink a scenario so the whole set finishes in about a minute."""
    if cfg.sweep == "N":
        grid = tuple(n for n in cfg.grid if n <= 2000) or cfg.grid[:1]
        return replace(cfg, grid=grid, replicates=min(cfg.replicates, 10))
    if cfg.sweep == "rho" and cfg.N > 250:
        return replace(cfg, N=250, replicates=min(cfg.replicates, 10))
    return replace(cfg, replicates=min(cfg.replicates, 10))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True, type=Path)
    ap.add_argument("--scenarios", nargs="*", default=sorted(CANNED))
    ap.add_argument("--replicates", type=int)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")

    args.out.mkdir(parents=True, exist_ok=True)
    for name in args.scenarios:
        cfg = replace(CANNED[name], master_seed=args.seed)
        if args.replicates:
            cfg = replace(cfg, replicates=args.replicates)
        if args.quick:
            cfg = quick(cfg)
        t0 = time.perf_counter()
        report = run_scenario(cfg, threads=args.threads)
        emit_report(report, "csv", args.out / f"{name}.csv")
        sck = report.mean_curve("clustering_error", "SCK")
        log.info(
            "%-6s %-11s %d points x %d reps  SCK clustering error %.3f -> %.3f  (%.1fs)",
            name, cfg.distribution, len(cfg.grid), cfg.replicates, sck[0], sck[-1], time.perf_counter() - t0,
        )


if __name__ == "__main__":
    main()
