"""Command line: ``lsvgd run|sweep|gan [CONFIG] [flags]``.

An optional positional CONFIG file supplies ``key = value`` settings; flags
override it. Without ``--out`` results go to ``./runs/<timestamp>-<seed>/``.
"""

import argparse
import os
import sys
import time

from lsvgd.config import (
    CONVERTERS,
    ConfigError,
    build_config,
    parse_config_text,
)
from lsvgd.experiments import run_gan, run_single, run_sweep

COMMANDS = {"run": run_single, "sweep": run_sweep, "gan": run_gan}

HELP = {
    "method": "sampler: svgd or lsvgd (sweep: comma list)",
    "target_file": "key=value file with weights, means ('x y; x y') and variances",
    "particles": "particle count (sweep: comma list; gan: batch size)",
    "iters": "iterations (>= 1)",
    "gamma": "kernel bandwidth (gan: feature-space bandwidth)",
    "gamma_list": "comma list of bandwidths for sweep, e.g. 2^-10,2^-9",
    "step": "step size delta (gan: particle step of the feature-space update)",
    "seed": "integer seed",
    "seeds": "comma list of distinct seeds for sweep",
    "out": "output directory",
    "jobs": "parallel sweep cells",
    "update": "gan particle update: sgd, svgd or lsvgd",
    "conditional": "gan: condition on the mode index with an auxiliary classifier",
    "checkpoint_every": "diagnostics cadence in iterations",
}


def _flag_type(key):
    conv = CONVERTERS[key]

    def parse(text):
        try:
            return conv(text)
        except ValueError as err:
            raise argparse.ArgumentTypeError(str(err)) from None

    parse.__name__ = key
    return parse


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lsvgd", description="SVGD and Langevin SVGD experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", nargs="?", help="optional key=value config file")
        for key in CONVERTERS:
            flag = "--" + key.replace("_", "-")
            if key == "conditional":
                p.add_argument(flag, action="store_true", default=None, help=HELP[key])
            else:
                p.add_argument(flag, dest=key, default=None, type=_flag_type(key), help=HELP[key])
    return parser


def default_out_dir(seed: int) -> str:
    return os.path.join("runs", f"{time.strftime('%Y%m%d-%H%M%S')}-{seed}")


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    flags = {k: getattr(args, k) for k in CONVERTERS}
    try:
        file_values = {}
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_values = parse_config_text(fh.read(), args.config)
        cfg = build_config(args.command, file_values, flags)
        out = cfg.out or default_out_dir(cfg.seed)
        return COMMANDS[args.command](cfg, out)
    except (ConfigError, ValueError, OSError) as err:
        parser.error(str(err))


if __name__ == "__main__":
    sys.exit(main())
