"""Run the three bundled reference scenarios end to end.

Verifies the certificates once, then simulates each scenario and prints the
per-agent steady-state error peaks alongside the ellipsoid entry times.
Outputs (trajectory CSVs, metric files, reports) land in ./out by default.

Usage: python scripts/run_paper_examples.py [outdir]
"""

import sys

from minellip import cli, scenario

OUT = sys.argv[1] if len(sys.argv) > 1 else "out"


def run(command, name):
    args = cli.build_parser().parse_args(
        [command, "--config", str(scenario.bundled_path(name)), "--out", OUT]
    )
    cfg = scenario.load(args.config)
    code = args.func(cfg, args)
    print(f"[{name}] {command} -> exit {code}\n")
    return code


def main():
    worst = 0
    worst |= run("verify", "paper_example1")
    worst |= run("minimize", "paper_example1")
    for name in ("paper_example1", "paper_example2", "paper_example3"):
        worst |= run("simulate", name)
    worst |= run("report", "paper_example1")
    return worst


if __name__ == "__main__":
    sys.exit(main())
