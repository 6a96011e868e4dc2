"""Experiment drivers behind the command line: single runs, sweeps, toy GAN.

Every driver writes UTF-8 CSV files with a header row, ``\\n`` line endings
and floats printed with 17 significant digits, so identical inputs give
byte-identical files. Nothing time-dependent is written into a CSV.

Sweep rows are ordered by particle count, then bandwidth, then seed, then
method (in the order the methods were given), independent of ``--jobs``.
"""

import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from lsvgd import seeding
from lsvgd.config import ExperimentConfig, load_target
from lsvgd.diagnostics import GridKl, KlEstimatorConfig, particle_variance
from lsvgd.gan import GanTrainConfig, gan_train, make_bundle
from lsvgd.kernels import KernelConfig
from lsvgd.langevin import LsvgdConfig, lsvgd_run
from lsvgd.svgd import SamplerConfig, svgd_run
from lsvgd.targets import ring_mixture

# Bandwidth 0.5 is Scott's rule for 100 particles and the bimodal target's
# spread; the wider box keeps noisy particles inside the grid.
HARNESS_KL = KlEstimatorConfig(grid_bounds=((-6.0, 6.0), (-6.0, 6.0)), grid_resolution=300, kde_bandwidth=0.5)

TRAJECTORY_COLUMNS = ["iteration", "kl", "variance", "clamp_count", "mean_drift", "mean_sigma"]
SWEEP_COLUMNS = [
    "n",
    "gamma",
    "seed",
    "method",
    "final_kl",
    "final_variance",
    "total_clamps",
    "iterations_done",
    "status",
    "error",
]
SUMMARY_COLUMNS = ["n", "gamma", "method", "cells_ok", "kl_mean", "kl_std", "variance_mean", "variance_std"]


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


class CsvSink:
    """Row writer that flushes after each row, so a crash leaves a valid prefix."""

    def __init__(self, path, columns):
        self.fh = open(path, "w", encoding="utf-8", newline="")
        self.writer = csv.writer(self.fh, lineterminator="\n")
        self.writer.writerow(columns)
        self.fh.flush()

    def row(self, values):
        self.writer.writerow([fmt(v) for v in values])
        self.fh.flush()

    def close(self):
        self.fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def write_points(path, points):
    pts = np.asarray(points)
    with CsvSink(path, [f"x{d}" for d in range(pts.shape[1])]) as sink:
        for p in pts:
            sink.row(p)


def write_config(out_dir, cfg: ExperimentConfig):
    with open(os.path.join(out_dir, "config.txt"), "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(cfg.to_lines()) + "\n")


INIT_SEED = 0


def initial_particles(n: int, dim: int) -> np.ndarray:
    """Standard normal start shared by every run, so the run seed only drives the Langevin noise."""
    return seeding.stream(INIT_SEED, seeding.INIT).standard_normal((n, dim))


def simulate(method, target, n, gamma, step, iters, seed, hook=None):
    """One sampler run from the seeded start.

    ``hook(t, particles, state)`` gets ``state=None`` for SVGD.
    Returns the engine's run result.
    """
    base = SamplerConfig(step_size=step, iterations=iters, kernel=KernelConfig(gamma=gamma))
    x0 = initial_particles(n, target.dim)
    if method == "svgd":
        h = None if hook is None else (lambda t, x: hook(t, x, None))
        return svgd_run(x0, target, base, h)
    return lsvgd_run(x0, target, LsvgdConfig(base=base), seed, hook)


def safe_kl(kl: Optional[GridKl], x):
    """KL estimate, or ``None`` when it is undefined (not 2-D, or off the grid)."""
    if kl is None:
        return None
    try:
        return kl(x)
    except ValueError:
        return None


def _kl_for(target):
    return GridKl(target, HARNESS_KL) if target.dim == 2 else None


def _variance(x):
    return particle_variance(x) if len(x) > 1 else 0.0


def run_single(cfg: ExperimentConfig, out_dir: str, log=sys.stderr) -> int:
    """Writes ``trajectory.csv``, ``particles.csv`` and ``config.txt``; returns the exit status."""
    if len(cfg.method) != 1 or len(cfg.particles) != 1:
        raise ValueError("run takes a single method and a single particle count")
    method, n = cfg.method[0], cfg.particles[0]
    target = load_target(cfg.target_file)
    kl = _kl_for(target)
    every = cfg.checkpoint_every or 1
    os.makedirs(out_dir, exist_ok=True)
    write_config(out_dir, cfg)
    with CsvSink(os.path.join(out_dir, "trajectory.csv"), TRAJECTORY_COLUMNS) as sink:
        x0 = initial_particles(n, target.dim)
        sink.row([0, safe_kl(kl, x0), _variance(x0), None, None, None])

        def hook(t, x, state):
            it = t + 1
            if it % every and it != cfg.iters:
                return
            if state is None:
                sink.row([it, safe_kl(kl, x), _variance(x), None, None, None])
            else:
                sink.row(
                    [it, safe_kl(kl, x), _variance(x), state.clamp_count, state.drift.mean(), state.sigmas.mean()]
                )

        res = simulate(method, target, n, cfg.gamma, cfg.step, cfg.iters, cfg.seed, hook)
    write_points(os.path.join(out_dir, "particles.csv"), res.particles)
    if res.error is not None:
        print(f"run failed after {res.iterations_done} iterations: {res.error}", file=log)
        return 1
    return 0


@dataclass(frozen=True)
class SweepCell:
    n: int
    gamma: float
    seed: int
    method: str
    step: float
    iters: int
    target_file: Optional[str]


def sweep_cells(cfg: ExperimentConfig) -> List[SweepCell]:
    return [
        SweepCell(n, g, s, m, cfg.step, cfg.iters, cfg.target_file)
        for n in cfg.particles
        for g in cfg.gammas
        for s in cfg.seed_list
        for m in cfg.method
    ]


def run_cell(cell: SweepCell) -> list:
    """One sweep row; failures are recorded in the row instead of raised."""
    try:
        target = load_target(cell.target_file)
        res = simulate(cell.method, target, cell.n, cell.gamma, cell.step, cell.iters, cell.seed)
    except Exception as err:  # a broken cell must not stop the sweep
        return [cell.n, cell.gamma, cell.seed, cell.method, None, None, None, 0, "error", repr(err)]
    clamps = getattr(res, "total_clamps", None)
    status = "ok" if res.error is None else "failed"
    err = "" if res.error is None else str(res.error)
    final_kl = safe_kl(_kl_for(target), res.particles)
    if final_kl is None and target.dim == 2:
        err = (err + "; " if err else "") + "particles outside the KL grid"
    return [
        cell.n,
        cell.gamma,
        cell.seed,
        cell.method,
        final_kl,
        _variance(res.particles),
        clamps,
        res.iterations_done,
        status,
        err,
    ]


def summarize(rows) -> list:
    """Mean and sample std over seeds for each (n, gamma, method), in row order."""
    groups = {}
    for r in rows:
        groups.setdefault((r[0], r[1], r[3]), []).append(r)
    out = []
    for (n, g, m), rs in groups.items():
        ok = [r for r in rs if r[8] == "ok" and r[4] is not None]
        kls = np.array([r[4] for r in ok])
        vs = np.array([r[5] for r in ok])

        def mean_std(a):
            if len(a) == 0:
                return None, None
            return float(a.mean()), (float(a.std(ddof=1)) if len(a) > 1 else None)

        out.append([n, g, m, len(ok), *mean_std(kls), *mean_std(vs)])
    return out


def run_sweep(cfg: ExperimentConfig, out_dir: str, log=sys.stderr) -> int:
    """Writes ``sweep.csv`` (one row per cell) and ``summary.csv``; returns the exit status."""
    cells = sweep_cells(cfg)
    os.makedirs(out_dir, exist_ok=True)
    write_config(out_dir, cfg)
    rows = []
    with CsvSink(os.path.join(out_dir, "sweep.csv"), SWEEP_COLUMNS) as sink:
        if cfg.jobs == 1:
            results = map(run_cell, cells)
            pool = None
        else:
            pool = ProcessPoolExecutor(max_workers=cfg.jobs)
            results = pool.map(run_cell, cells)
        try:
            for row in results:
                rows.append(row)
                sink.row(row)
        finally:
            if pool is not None:
                pool.shutdown()
    with CsvSink(os.path.join(out_dir, "summary.csv"), SUMMARY_COLUMNS) as sink:
        for row in summarize(rows):
            sink.row(row)
    bad = [r for r in rows if r[8] != "ok"]
    for r in bad:
        print(f"cell n={r[0]} gamma={r[1]} seed={r[2]} method={r[3]}: {r[8]} {r[9]}", file=log)
    return 1 if bad else 0


def gan_config(cfg: ExperimentConfig, seed: int) -> GanTrainConfig:
    if len(cfg.particles) != 1:
        raise ValueError("gan takes a single batch size")
    return GanTrainConfig(
        update_mode=cfg.update,
        batch_size=cfg.particles[0],
        iterations=cfg.iters,
        kernel=KernelConfig(gamma=cfg.gamma),
        lsvgd=LsvgdConfig(base=SamplerConfig(step_size=cfg.step, iterations=1)),
        conditional=cfg.conditional,
        seed=seed,
        checkpoint_every=cfg.checkpoint_every or 1000,
    )


def run_gan(cfg: ExperimentConfig, out_dir: str, log=sys.stderr) -> int:
    """Writes ``metrics.csv`` and ``samples/samples_<iteration>.csv``; returns the exit status.

    The data default to the 8-mode ring; in conditional mode the class label
    is the ring-mode index.
    """
    data = load_target(cfg.target_file) if cfg.target_file else ring_mixture()
    gcfg = gan_config(cfg, cfg.seed)
    bundle = make_bundle(cfg.seed, data_dim=data.dim, n_classes=data.n_components if cfg.conditional else 0)
    os.makedirs(os.path.join(out_dir, "samples"), exist_ok=True)
    write_config(out_dir, cfg)
    columns = ["iteration", "modes_covered", "variance"] + [f"fraction_{k}" for k in range(data.n_components)]
    with CsvSink(os.path.join(out_dir, "metrics.csv"), columns) as sink:

        def hook(cp):
            sink.row([cp.iteration, cp.modes_covered, cp.variance, *cp.mode_fractions])
            write_points(os.path.join(out_dir, "samples", f"samples_{cp.iteration:07d}.csv"), cp.samples)

        res = gan_train(bundle, data, gcfg, hook)
    if res.error is not None:
        print(f"gan training failed: {res.error}", file=log)
        return 1
    return 0
