"""Paired toy-GAN runs on the 8-mode ring: plain gradients against LSVGD.

For each seed both update modes train from the same initial networks and
data stream. Checkpoint metrics go to <out>/<mode>-seed<k>/ (as written by
``lsvgd gan``); the final coverage table is printed and saved to
coverage.csv.
"""

import argparse
import csv
import os
import sys

import numpy as np

from lsvgd.cli import main as cli_main
from lsvgd.experiments import CsvSink

MODES = ("sgd", "lsvgd")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/gan_ring")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--iters", default="20000")
    ap.add_argument("--conditional", action="store_true")
    args = ap.parse_args()

    final = {m: [] for m in MODES}
    status = 0
    for seed in range(args.seeds):
        for mode in MODES:
            out = os.path.join(args.out, f"{mode}-seed{seed}")
            cli = ["gan", "--update", mode, "--seed", str(seed), "--iters", args.iters, "--out", out]
            if args.conditional:
                cli.append("--conditional")
            status |= cli_main(cli)
            with open(os.path.join(out, "metrics.csv"), encoding="utf-8") as fh:
                rows = list(csv.DictReader(fh))
            final[mode].append(int(rows[-1]["modes_covered"]) if rows else 0)
    with CsvSink(os.path.join(args.out, "coverage.csv"), ["mode", *[f"seed{s}" for s in range(args.seeds)], "median"]) as sink:
        for mode in MODES:
            sink.row([mode, *final[mode], float(np.median(final[mode]))])
            print(f"{mode:6s} modes covered {final[mode]} median {np.median(final[mode]):g}")
    return status


if __name__ == "__main__":
    sys.exit(main())
