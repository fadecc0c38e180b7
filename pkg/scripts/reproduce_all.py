#!/usr/bin/env python3
"""End-to-end reproduction run: dataset, model, every figure and the CV table.

Equivalent to calling the CLI by hand:

    pcadetect generate --antennas 256 --grid train --seed S --out train.csv
    pcadetect train --data train.csv --out model.json --seed S --depth 1
    pcadetect reproduce fig4 ... fig8, table3 --check

Artifacts land in the output directory; exits nonzero if any reproduction
band is violated.
"""

import argparse
import sys
from pathlib import Path

from pcadetect.cli import main as cli


def run(argv):
    print(f"$ pcadetect {' '.join(str(a) for a in argv)}")
    rc = cli([str(a) for a in argv])
    if rc != 0:
        print(f"  -> exit code {rc}")
    return rc


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, required=True)
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--threads", type=int, default=2)
    parser.add_argument("--skip-checks", action="store_true",
                        help="emit artifacts without verifying reproduction bands")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dataset = out / "train_m256.csv"
    model = out / "model.json"

    failures = 0
    failures += run(["generate", "--antennas", 256, "--grid", "train",
                     "--seed", args.seed, "--out", dataset, "--threads", args.threads])
    failures += run(["train", "--data", dataset, "--out", model, "--seed", args.seed])

    for figure in ("fig4", "fig5", "fig6", "fig7", "fig8", "table3"):
        argv = ["reproduce", figure, "--seed", args.seed, "--out", out,
                "--threads", args.threads]
        if figure in ("fig4", "fig5", "fig6", "fig8"):
            argv += ["--model", model]
        if not args.skip_checks:
            argv.append("--check")
        failures += run(argv)

    print(f"\ndone; artifacts in {out}/" + ("" if not failures else
          f"  ({failures} step(s) reported problems)"))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
