"""Command line entry point: ``wlcm simulate | fit | generate``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .errors import DataError, NumericalError
from .generators import default_items, replicate_streams, simulate
from .harness.data import DEFAULT_KMAX, CsvSchema, analyze_dataset, emit_analysis, load_response_csv
from .harness.report import emit_report
from .harness.scenarios import get_scenario, run_scenario
from .model import DistributionSpec, Kind

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3

log = logging.getLogger("wlcm")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _covariate_spec(text: str) -> tuple[dict, dict, dict]:
    """Parse ``age:num=13..100,gender:cat=1|2`` into (types, ranges, categories)."""
    types, ranges, cats = {}, {}, {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        name, _, rest = part.partition(":")
        kind, _, constraint = rest.partition("=")
        kind = {"num": "numeric", "numeric": "numeric", "cat": "categorical", "categorical": "categorical"}.get(
            kind or "cat"
        )
        if kind is None:
            raise argparse.ArgumentTypeError(f"bad covariate type in {part!r}")
        types[name] = kind
        if constraint:
            if kind == "numeric":
                lo, _, hi = constraint.partition("..")
                ranges[name] = (float(lo), float(hi))
            else:
                cats[name] = set(constraint.split("|"))
    return types, ranges, cats


def _range(text: str) -> tuple[float, float]:
    lo, sep, hi = text.partition("..")
    if not sep:
        raise argparse.ArgumentTypeError("expected LO..HI")
    return float(lo), float(hi)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wlcm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a canned or JSON-configured simulation scenario")
    s.add_argument("--scenario", required=True, help="canned id (sim1a..sim8b) or JSON config file")
    s.add_argument("--replicates", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--out", required=True)
    s.add_argument("--format", choices=("csv", "json"), default="csv")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--methods", help="comma-separated subset of SCK,RMK")

    f = sub.add_parser("fit", help="fit SCK to a response CSV")
    f.add_argument("--input", required=True)
    f.add_argument("--responses", required=True, help="comma list of columns; A..B spans a header range")
    f.add_argument("--covariates", default="", help="e.g. age:num=13..100,gender:cat=1|2")
    f.add_argument("--k", default="auto", help="integer or 'auto'")
    f.add_argument("--kmax", type=int, default=DEFAULT_KMAX)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--range", type=_range, dest="response_range", help="legal response range LO..HI")
    f.add_argument("--missing", default=",NA", help="comma list of missing markers (default: empty,NA)")
    f.add_argument("--out", required=True)

    g = sub.add_parser("generate", help="write a planted benchmark matrix with its ground truth")
    g.add_argument("--dist", required=True, choices=[k.value for k in Kind])
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--j", type=int)
    g.add_argument("--k", type=int, default=3)
    g.add_argument("--rho", type=float, required=True)
    g.add_argument("--m", type=int)
    g.add_argument("--sigma2", type=float)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--truth", required=True)
    return p


def _simulate(args) -> int:
    overrides = {"replicates": args.replicates, "master_seed": args.seed}
    if args.methods:
        overrides["methods"] = tuple(m.strip() for m in args.methods.split(","))
    cfg = get_scenario(args.scenario, **overrides)
    report = run_scenario(cfg, threads=args.threads)
    for path in emit_report(report, args.format, args.out):
        log.info("wrote %s", path)
    return 0


def _fit(args) -> int:
    try:
        types, ranges, cats = _covariate_spec(args.covariates)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        print(f"wlcm fit: bad --covariates: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.k != "auto":
        try:
            k = int(args.k)
        except ValueError:
            print("wlcm fit: --k must be an integer or 'auto'", file=sys.stderr)
            return EXIT_USAGE
    else:
        k = "auto"
    schema = CsvSchema(
        responses=args.responses,
        covariates=types,
        missing=tuple(args.missing.split(",")),
        response_range=args.response_range,
        ranges=ranges,
        categories=cats,
    )
    data = load_response_csv(args.input, schema)
    for line, reason in data.dropped:
        log.info("dropped row %d: %s", line, reason)
    if k != "auto" and not 1 <= k <= min(data.N, data.J):
        raise DataError(f"k={k} must lie in 1..{min(data.N, data.J)}")
    report = analyze_dataset(data, k=k, k_max=args.kmax, rng=args.seed)
    emit_analysis(report, data, args.out)
    log.info("K=%d, sizes=%s", report.k, report.sizes.tolist())
    return 0


def _generate(args) -> int:
    spec = DistributionSpec.of(args.dist, m=args.m, sigma2=args.sigma2)
    J = args.j if args.j is not None else default_items(args.n)
    inst = simulate(args.n, args.k, spec, args.rho, J, streams=replicate_streams(args.seed, 0))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"I{j + 1}" for j in range(J)])
        for row in inst.r.values:
            w.writerow(["%.17g" % v for v in row])
    truth = Path(args.truth)
    with open(truth, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["subject", "label"])
        for i, lab in enumerate(inst.z.labels_1based(), start=1):
            w.writerow([i, int(lab)])
    theta_path = truth.with_name(truth.stem + "_theta.csv")
    with open(theta_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["item"] + [f"profile{k + 1}" for k in range(args.k)])
        for j, row in enumerate(inst.params.theta, start=1):
            w.writerow([f"I{j}"] + ["%.17g" % v for v in row])
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    handler = {"simulate": _simulate, "fit": _fit, "generate": _generate}[args.command]
    try:
        return handler(args)
    except NumericalError as exc:
        print(f"wlcm: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, OSError) as exc:
        print(f"wlcm: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"wlcm: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
