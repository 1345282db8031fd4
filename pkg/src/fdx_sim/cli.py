"""Command-line entry point: ``fdx-sim run``."""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .errors import ConfigError, InvalidInputError, NumericalError
from .simulator import PROFILES, load_config, make_config, monte_carlo, replace_config, write_results

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

log = logging.getLogger("fdx_sim")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fdx-sim", description="Full-duplex MIMO link simulator.")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a Monte Carlo TX-power sweep")
    run.add_argument("--config", help="YAML file with SimConfig overrides")
    run.add_argument("--profile", choices=sorted(PROFILES), default="desk",
                     help="parameter profile (default: desk)")
    run.add_argument("--taps", type=int, help="number of analog canceller taps")
    run.add_argument("--basis", choices=["linear", "wl", "full"], help="digital canceller basis")
    run.add_argument("--seed", type=int, help="base seed; run i uses seed + i")
    run.add_argument("--runs", type=int, help="Monte Carlo runs per power point")
    run.add_argument("--powers", type=float, nargs="+", metavar="DBM", help="TX powers to sweep")
    run.add_argument("--workers", type=int, help="worker processes")
    run.add_argument("--out", default=".", help="output directory for results.csv and curves.csv")
    run.add_argument("-v", "--verbose", action="store_true")
    return parser


def _config_from_args(args):
    cfg = load_config(args.config, args.profile) if args.config else make_config(args.profile)
    overrides = {
        "n_taps": args.taps,
        "basis": args.basis,
        "base_seed": args.seed,
        "n_runs": args.runs,
        "tx_powers_dbm": args.powers,
        "workers": args.workers,
    }
    return replace_config(cfg, **{k: v for k, v in overrides.items() if v is not None})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config_from_args(args)
    except (ConfigError, InvalidInputError) as exc:
        print(f"fdx-sim: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        sweep = monte_carlo(cfg)
        results, curves = write_results(sweep, args.out)
    except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"fdx-sim: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for c in sweep.curves():
        log.info("P=%.1f dBm sat=%.3f R_fd=%.2f ber=%.2e", c["tx_power_dbm"], c["sat_prob"],
                 c["r_fd_mean"], c["ber"])
    print(f"wrote {results} and {curves}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
