"""Command-line entry point: run / verify / sweep."""

import argparse
import sys

from .harness import VERIFY_SUITES, cmd_run, cmd_sweep, cmd_verify


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="coneftrl",
        description="FTRL approachability experiments: run configured "
                    "problems, verify the theorem bounds and identities, "
                    "and sweep convergence rates.")
    sub = p.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="run a configured experiment")
    runp.add_argument("--config", required=True, help="JSON config file")
    runp.add_argument("--out", required=True,
                      help="directory for steps.csv and summary.json")

    verp = sub.add_parser("verify", help="run a property suite")
    verp.add_argument("--suite", default="all",
                      choices=sorted(VERIFY_SUITES) + ["all"])

    swp = sub.add_parser("sweep", help="rate sweep over a grid of horizons")
    swp.add_argument("--config", required=True, help="JSON config file")
    swp.add_argument("--T", required=True,
                     help="comma-separated ascending horizons, "
                          "e.g. 256,1024,4096,16384")
    swp.add_argument("--out", default=None,
                     help="directory for rates.csv (default: config "
                          "output_dir, else the working directory)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "run":
        return cmd_run(args.config, args.out)
    if args.command == "verify":
        return cmd_verify(args.suite)
    if args.command == "sweep":
        try:
            grid = [int(s) for s in args.T.split(",") if s.strip()]
        except ValueError:
            print(f"cannot parse --T {args.T!r}", file=sys.stderr)
            return 1
        return cmd_sweep(args.config, grid, args.out)
    return 1


if __name__ == "__main__":
    sys.exit(main())
