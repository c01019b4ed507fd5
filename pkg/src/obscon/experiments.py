"""Experiment configuration and runners behind the command-line interface."""
from __future__ import annotations

import math
import os
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import ConfigurationError
from .observability import asymptotic_constant, finite_time_constant, j_functional
from .optimizer import maximize_relaxed
from .perturbation import POTENTIAL_FAMILIES, perturbed_family
from .quadrature import QUARTER_SECTORS, Grid1D, GridDisk, IntervalUnion, RadialAngular
from .spectral_basis import Domain, enumerate_basis

TABLE_EPS = (0.01, 0.05, 0.1, 0.5, 1.0)
TABLE_DELTA = (0.1, 0.2, 0.3, 0.4, 0.475)
DEFAULT_POTENTIAL = {Domain.UNIT_INTERVAL: "interval-x2", Domain.UNIT_DISK: "disk-r"}
DEFAULT_SIZE = {Domain.UNIT_INTERVAL: 200, Domain.UNIT_DISK: 25}
DEFAULT_MESH = {Domain.UNIT_INTERVAL: 1000, Domain.UNIT_DISK: 301}
THREADS_ENV = "OBSCON_THREADS"


def worker_count():
    cap = os.environ.get(THREADS_ENV)
    n = os.cpu_count() or 1
    if cap:
        try:
            n = min(n, int(cap))
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {cap!r}") from None
    return max(1, n)


def parallel_map(fn, items):
    """Map over ``items`` on a thread pool; results come back in input order."""
    items = list(items)
    workers = min(worker_count(), len(items)) or 1
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ------------------------------------------------------------- configuration

_NUMBER = re.compile(r"^\s*([+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)?\s*\*?\s*(pi)?\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_number(text):
    """Float with optional ``pi`` factor: ``0.25``, ``pi/4``, ``3pi/4``, ``1.5*pi``."""
    m = _NUMBER.match(str(text))
    if not m or (m.group(1) is None and m.group(2) is None):
        raise ConfigurationError(f"cannot parse number {text!r}")
    value = float(m.group(1)) if m.group(1) is not None else 1.0
    if m.group(2):
        value *= math.pi
    if m.group(3):
        value /= float(m.group(3))
    return value


def parse_list(text):
    items = [t for t in re.split(r"[,\s]+", str(text).strip()) if t]
    if not items:
        raise ConfigurationError("empty list")
    return tuple(parse_number(t) for t in items)


def parse_subset(text, domain):
    """``whole``, ``sectors`` (disk quarter sectors) or ``lo:hi[,lo:hi...]``."""
    domain = Domain.parse(domain)
    text = str(text).strip().lower()
    if text in ("whole", "all", "full"):
        return None
    if text in ("sectors", "quarter", "quarter-sectors"):
        if domain is not Domain.UNIT_DISK:
            raise ConfigurationError("'sectors' is a disk subset")
        return QUARTER_SECTORS
    pieces = []
    for chunk in text.split(","):
        if ":" not in chunk:
            raise ConfigurationError(f"subset piece {chunk!r} must look like lo:hi")
        lo, hi = chunk.split(":", 1)
        pieces.append((parse_number(lo), parse_number(hi)))
    return IntervalUnion(pieces) if domain is Domain.UNIT_INTERVAL else RadialAngular(pieces)


def describe_subset(subset):
    return {"kind": "whole"} if subset is None else subset.describe()


@dataclass(frozen=True)
class ExperimentConfig:
    domain: Domain = Domain.UNIT_INTERVAL
    potential: str = "interval-x2"
    eps: tuple = TABLE_EPS
    delta: tuple = TABLE_DELTA
    subset: str = "0:0.5"
    N: int = 200
    mesh: int = 1000
    truncation: int = 0          # 0 means N
    T: float = 1.0
    L: float = 0.5
    seed: int = 0
    out: str = ""
    format: str = "csv"
    full_precision: bool = False
    timing: bool = True

    def __post_init__(self):
        errors = []
        if not self.eps:
            errors.append("eps: list is empty")
        if not self.delta:
            errors.append("delta: list is empty")
        if any(not (e >= 0 and math.isfinite(e)) for e in self.eps):
            errors.append(f"eps: all values must be finite and >= 0, got {list(self.eps)}")
        hi_open = self.domain is Domain.UNIT_DISK
        for d in self.delta:
            ok = 0 < d < 1 if hi_open else 0 < d <= 0.5
            if not ok:
                rng = "(0, 1)" if hi_open else "(0, 0.5]"
                errors.append(f"delta: {d} not in {rng} for the {self.domain.value}")
        if self.potential not in POTENTIAL_FAMILIES:
            errors.append(f"potential: unknown {self.potential!r}; "
                          f"choose from {sorted(POTENTIAL_FAMILIES)}")
        elif not self.potential.startswith(self.domain.value):
            errors.append(f"potential: {self.potential!r} does not live on the {self.domain.value}")
        if self.N < 1:
            errors.append("N: must be >= 1")
        if self.truncation and self.truncation < self.N:
            errors.append("truncation: must be >= N")
        if self.mesh < 1:
            errors.append("mesh: must be >= 1")
        if not self.T > 0:
            errors.append("T: must be > 0")
        if not 0 < self.L < 1:
            errors.append("L: must lie in (0, 1)")
        if self.format not in ("csv", "json"):
            errors.append(f"format: {self.format!r} is not csv or json")
        if errors:
            raise ConfigurationError("; ".join(errors))
        parse_subset(self.subset, self.domain)

    @classmethod
    def defaults(cls, domain):
        domain = Domain.parse(domain)
        return cls(domain=domain, potential=DEFAULT_POTENTIAL[domain],
                   subset="0:0.5" if domain is Domain.UNIT_INTERVAL else "sectors",
                   N=DEFAULT_SIZE[domain], mesh=DEFAULT_MESH[domain])

    def updated(self, **changes):
        return replace(self, **{k: v for k, v in changes.items() if v is not None})

    @property
    def grid(self):
        if self.domain is Domain.UNIT_INTERVAL:
            return Grid1D(0.0, 1.0, self.mesh)
        return GridDisk(self.mesh, self.mesh)

    @property
    def subset_spec(self):
        return parse_subset(self.subset, self.domain)

    @property
    def truncation_size(self):
        return self.truncation or self.N

    def echo(self):
        d = asdict(self)
        d["domain"] = self.domain.value
        d["eps"], d["delta"] = list(self.eps), list(self.delta)
        for key in ("out", "format", "full_precision", "timing"):
            d.pop(key)
        return d


# ------------------------------------------------------------------- tables


@dataclass(frozen=True, eq=False)
class TableResult:
    eps: tuple
    delta: tuple
    values: np.ndarray = field(repr=False)
    title: str = ""

    def cell(self, eps, delta):
        return float(self.values[self.eps.index(eps), self.delta.index(delta)])

    def to_csv(self, full_precision=False):
        fmt = "{:.17g}" if full_precision else "{:.9f}"
        lines = ["eps\\delta," + ",".join(repr(float(d)) for d in self.delta)]
        for e, row in zip(self.eps, self.values):
            lines.append(repr(float(e)) + "," + ",".join(fmt.format(v) for v in row))
        return "\n".join(lines) + "\n"


def _family(config, basis, epsilon, delta, mock_degenerate):
    potential = POTENTIAL_FAMILIES[config.potential](delta, epsilon)
    return perturbed_family(basis, potential, config.N, config.truncation_size,
                            mock_degenerate)


def run_grid(config, mock_degenerate=None, title=""):
    """J_N over the (eps, delta) grid of ``config``; cells run in parallel."""
    mock = config.domain is Domain.UNIT_DISK if mock_degenerate is None else mock_degenerate
    basis = enumerate_basis(config.domain, config.truncation_size)
    subset, grid = config.subset_spec, config.grid

    def cell(pair):
        e, d = pair
        fam = _family(config, basis, e, d, mock)
        return j_functional(fam, subset, config.N, grid).j_value

    pairs = [(e, d) for e in config.eps for d in config.delta]
    values = np.array(parallel_map(cell, pairs)).reshape(len(config.eps), len(config.delta))
    return TableResult(tuple(config.eps), tuple(config.delta), values, title)


def run_table1(config=None):
    config = config or ExperimentConfig.defaults(Domain.UNIT_INTERVAL)
    if config.domain is not Domain.UNIT_INTERVAL:
        raise ConfigurationError("domain: table1 runs on the interval")
    return run_grid(config, mock_degenerate=False, title="J_N on [0, 0.5], V0 = x^2")


def run_disk_tables(config=None):
    """Both disk tables: ``(1/r^2 core, r core)``."""
    config = config or ExperimentConfig.defaults(Domain.UNIT_DISK)
    if config.domain is not Domain.UNIT_DISK:
        raise ConfigurationError("domain: disk-tables runs on the disk")
    inverse = run_grid(config.updated(potential="disk-1/r2"), True, "J_N on the disk, V0 = 1/r^2")
    linear = run_grid(config.updated(potential="disk-r"), True, "J_N on the disk, V0 = r")
    return inverse, linear


# --------------------------------------------------------- single runs


def _single_family(config):
    basis = enumerate_basis(config.domain, config.truncation_size)
    eps, delta = config.eps[0], config.delta[0]
    if eps == 0:
        return basis.truncated(config.N)
    return _family(config, basis, eps, delta, config.domain is Domain.UNIT_DISK)


def _timed(fn):
    start = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - start


def run_functional(config):
    fam = _single_family(config)
    report, wall = _timed(lambda: j_functional(fam, config.subset_spec, config.N, config.grid))
    data = {"command": "functional"}
    data.update(report.to_dict())
    data["config"] = config.echo()
    data["subset"] = describe_subset(config.subset_spec)
    if config.timing:
        data["wall_time_s"] = wall
    return data


def run_constant(config):
    fam = _single_family(config)
    subset, grid = config.subset_spec, config.grid

    def compute():
        report = j_functional(fam, subset, config.N, grid)
        return (report,
                finite_time_constant(fam, subset, config.N, config.T, grid),
                asymptotic_constant(fam, subset, config.N, grid))

    (report, finite, asymptotic), wall = _timed(compute)
    data = {
        "command": "constant",
        "config": config.echo(),
        "subset": describe_subset(subset),
        "value": finite,
        "finite_time_constant": finite,
        "finite_time_constant_over_T": finite / config.T,
        "asymptotic_constant": asymptotic,
        "j_value": report.j_value,
        "argmin": report.to_dict()["argmin"],
        "per_mode_mass": list(report.per_mode_mass),
    }
    if config.timing:
        data["wall_time_s"] = wall
    return data


def run_optimize(config):
    fam = _single_family(config)
    grid = config.grid
    sol, wall = _timed(lambda: maximize_relaxed(fam, config.N, config.L, grid))
    masses = j_functional(fam, sol.density, config.N, grid)
    data = {"command": "optimize", "config": config.echo()}
    data.update(sol.to_dict())
    data["per_mode_mass"] = list(masses.per_mode_mass)
    data["trace_length"] = len(sol.trace)
    if config.timing:
        data["wall_time_s"] = wall
    return data, sol
