"""Experiment configuration: dataclass, key=value files and target files.

A config file holds ``key = value`` lines; ``#`` starts a comment. Keys are
the command-line flag names without the leading dashes (``gamma-list`` and
``gamma_list`` are both accepted). List-valued keys take comma-separated
items, and bandwidths may be written as powers of two (``2^-5``).
"""

from dataclasses import dataclass, fields, replace
from typing import Dict, Optional, Tuple

import numpy as np

from lsvgd.targets import GaussianMixture, bimodal_target

METHODS = ("svgd", "lsvgd")
GAN_UPDATES = ("sgd", "plain", "plain-gradient", "svgd", "lsvgd")
SWEEP_GAMMAS = tuple(2.0**k for k in range(-10, -1))


class ConfigError(ValueError):
    """Malformed configuration; ``line`` is set when the problem is in a file."""

    def __init__(self, message, line: Optional[int] = None, path: Optional[str] = None):
        where = ""
        if line is not None:
            where = f"{path or '<config>'}:{line}: "
        super().__init__(where + message)
        self.line = line


def parse_float(text: str) -> float:
    t = text.strip()
    if "^" in t:
        base, _, exp = t.partition("^")
        return float(base) ** float(exp)
    return float(t)


def parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _split(text: str):
    if text.strip().lower() in ("", "none"):
        return []
    items = [p.strip() for p in text.split(",")]
    if any(not p for p in items):
        raise ValueError(f"empty item in list {text!r}")
    return items


def _ints(text):
    return tuple(int(p) for p in _split(text))


def _floats(text):
    return tuple(parse_float(p) for p in _split(text))


def _optional_int(text):
    return None if text.strip().lower() in ("", "none") else int(text)


def _optional_str(text):
    return None if text.strip().lower() in ("", "none") else text.strip()


CONVERTERS = {
    "method": lambda t: tuple(_split(t)),
    "target_file": _optional_str,
    "particles": _ints,
    "iters": int,
    "gamma": parse_float,
    "gamma_list": _floats,
    "step": parse_float,
    "seed": int,
    "seeds": _ints,
    "out": _optional_str,
    "jobs": int,
    "update": str.strip,
    "conditional": parse_bool,
    "checkpoint_every": _optional_int,
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved settings for one ``run``, ``sweep`` or ``gan`` invocation.

    The bare defaults describe a single LSVGD run with 100 particles on the
    bimodal target, bandwidth 0.01 and 500 iterations. ``gamma_list`` and
    ``seeds`` fall back to ``(gamma,)`` and ``(seed,)`` when empty.
    ``checkpoint_every`` is the diagnostics cadence (``None``: the
    subcommand's own default).
    """

    method: Tuple[str, ...] = ("lsvgd",)
    target_file: Optional[str] = None
    particles: Tuple[int, ...] = (100,)
    iters: int = 500
    gamma: float = 0.01
    gamma_list: Tuple[float, ...] = ()
    step: float = 0.2
    seed: int = 0
    seeds: Tuple[int, ...] = ()
    out: Optional[str] = None
    jobs: int = 1
    update: str = "lsvgd"
    conditional: bool = False
    checkpoint_every: Optional[int] = None

    def __post_init__(self):
        if not self.method or any(m not in METHODS for m in self.method):
            raise ConfigError(f"method must be a non-empty list drawn from {METHODS}, got {self.method}")
        if len(set(self.method)) != len(self.method):
            raise ConfigError("methods must be distinct")
        if not self.particles or any(n < 1 for n in self.particles):
            raise ConfigError("particles must be a non-empty list of positive counts")
        if self.iters < 1:
            raise ConfigError("iters must be >= 1")
        if not all(g > 0 for g in (self.gamma,) + self.gamma_list):
            raise ConfigError("bandwidths must be positive")
        if not self.step > 0:
            raise ConfigError("step must be positive")
        if self.seed < 0 or any(s < 0 for s in self.seeds):
            raise ConfigError("seeds must be non-negative")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be distinct")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        if self.update not in GAN_UPDATES:
            raise ConfigError(f"update must be one of {GAN_UPDATES}, got {self.update!r}")
        if self.checkpoint_every is not None and self.checkpoint_every < 1:
            raise ConfigError("checkpoint-every must be >= 1")

    @property
    def gammas(self) -> Tuple[float, ...]:
        return self.gamma_list or (self.gamma,)

    @property
    def seed_list(self) -> Tuple[int, ...]:
        return self.seeds or (self.seed,)

    def to_lines(self):
        """``key = value`` lines that parse back to this config."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                text = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v) or "none"
            elif v is None:
                text = "none"
            elif isinstance(v, float):
                text = repr(v)
            else:
                text = str(v)
            out.append(f"{f.name.replace('_', '-')} = {text}")
        return out


# Per-subcommand defaults layered under the config file and flags.
COMMAND_DEFAULTS: Dict[str, Dict[str, object]] = {
    "run": {"checkpoint_every": 1},
    "sweep": {
        "method": METHODS,
        "particles": (20, 50, 100),
        "gamma_list": SWEEP_GAMMAS,
        "seeds": (0, 1, 2, 3, 4),
    },
    "gan": {"particles": (64,), "iters": 20000, "gamma": 0.05, "step": 100.0, "checkpoint_every": 1000},
}


def read_key_values(text: str, path: Optional[str] = None) -> Dict[str, Tuple[str, int]]:
    """Raw ``{key: (value, line_number)}`` from key=value text."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or not key:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno, path)
        if key in out:
            raise ConfigError(f"duplicate key {key!r}", lineno, path)
        out[key] = (value.strip(), lineno)
    return out


def parse_config_text(text: str, path: Optional[str] = None) -> Dict[str, object]:
    """Typed overrides from a config file; unknown keys and bad values name their line."""
    values = {}
    for key, (value, lineno) in read_key_values(text, path).items():
        if key not in CONVERTERS:
            raise ConfigError(f"unknown key {key!r}", lineno, path)
        try:
            values[key] = CONVERTERS[key](value)
        except ValueError as err:
            raise ConfigError(f"bad value for {key!r}: {err}", lineno, path) from None
    return values


def build_config(command: str, file_values=None, flag_values=None) -> ExperimentConfig:
    """Subcommand defaults, then config-file values, then flags."""
    given = dict(file_values or {})
    given.update({k: v for k, v in (flag_values or {}).items() if v is not None})
    merged = dict(COMMAND_DEFAULTS.get(command, {}))
    # a scalar given without its list form means a one-element sweep axis
    for scalar, plural in (("seed", "seeds"), ("gamma", "gamma_list")):
        if scalar in given and plural not in given:
            merged.pop(plural, None)
    merged.update(given)
    return replace(ExperimentConfig(), **merged)


def _vector(text):
    return np.array([parse_float(p) for p in text.replace(",", " ").split()])


def parse_target_text(text: str, path: Optional[str] = None) -> GaussianMixture:
    """Gaussian mixture from ``weights``, ``means`` and ``variances`` keys.

    ``means`` lists one point per component separated by ``;``, e.g.
    ``means = -1 0; 1 0``.
    """
    kv = read_key_values(text, path)
    for key in ("weights", "means", "variances"):
        if key not in kv:
            raise ConfigError(f"target file lacks {key!r}", None, path)
    extra = set(kv) - {"weights", "means", "variances"}
    if extra:
        key = sorted(extra)[0]
        raise ConfigError(f"unknown key {key!r}", kv[key][1], path)
    try:
        weights = _vector(kv["weights"][0])
        means = np.array([_vector(row) for row in kv["means"][0].split(";")])
        variances = _vector(kv["variances"][0])
        return GaussianMixture(weights, means, variances)
    except ValueError as err:
        raise ConfigError(f"invalid mixture: {err}", kv["means"][1], path) from None


def load_target(path: Optional[str]) -> GaussianMixture:
    if path is None:
        return bimodal_target()
    with open(path, encoding="utf-8") as fh:
        return parse_target_text(fh.read(), path)
