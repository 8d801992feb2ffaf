"""Print the fixed-design comparison table (K=2, N=16, J=10) for SCK and RMK.

Each cell is the mean over replicates, with the Poisson scenario in parentheses.

    python3 scripts/fixed_design_table.py --replicates 50
"""

import argparse

from wlcm.harness.scenarios import get_scenario, run_scenario
from wlcm.metrics import METRIC_NAMES


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--replicates", type=int, default=50)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    normal = run_scenario(get_scenario("sim8a", replicates=args.replicates, master_seed=args.seed))
    poisson = run_scenario(get_scenario("sim8b", replicates=args.replicates, master_seed=args.seed))

    print(f"{'method':<6} " + " ".join(f"{m:>22}" for m in METRIC_NAMES))
    for method in ("SCK", "RMK"):
        a, b = normal.select(method)[0], poisson.select(method)[0]
        cells = [f"{a[m + '_mean']:.4f} ({b[m + '_mean']:.4f})" for m in METRIC_NAMES]
        print(f"{method:<6} " + " ".join(f"{c:>22}" for c in cells))


if __name__ == "__main__":
    main()
