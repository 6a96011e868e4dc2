"""KL and variance against kernel bandwidth for SVGD and LSVGD.

Thin wrapper around ``lsvgd sweep`` with the full grid: bandwidths 2^-10 to
2^-2, 20/50/100 particles, 5 seeds, 500 iterations. Per-cell rows land in
sweep.csv and seed means/stds in summary.csv.
"""

import argparse
import sys

from lsvgd.cli import main as cli_main


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/bandwidth_sweep")
    ap.add_argument("--particles", default="20,50,100")
    ap.add_argument("--seeds", default="0,1,2,3,4")
    ap.add_argument("--jobs", default="1")
    args = ap.parse_args()
    return cli_main(
        [
            "sweep",
            "--method", "svgd,lsvgd",
            "--gamma-list", ",".join(f"2^{k}" for k in range(-10, -1)),
            "--particles", args.particles,
            "--seeds", args.seeds,
            "--iters", "500",
            "--jobs", args.jobs,
            "--out", args.out,
        ]
    )


if __name__ == "__main__":
    sys.exit(main())
