"""Fixed quadrature rules on the unit interval and the unit disk, plus subsets.

Every rule exposes ``nodes()`` (a tuple of coordinate arrays) and ``weights()``
(an array broadcastable against the nodes), so integration is always
``sum(weights * f(*nodes))``. Disk nodes are polar ``(r, theta)`` meshes and the
weights already contain the Jacobian ``r``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import ConfigurationError, NumericalFailure

TWO_PI = 2.0 * math.pi

# Closed-subset membership slack; absorbs rounding in i*h node positions.
MEMBERSHIP_TOL = 1e-12

LEFT_POINT = "left"
TRAPEZOID = "trapezoid"


def _trapezoid_weights(n_cells, length):
    w = np.full(n_cells + 1, length / n_cells)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


@dataclass(frozen=True)
class Grid1D:
    a: float = 0.0
    b: float = 1.0
    n_cells: int = 1000
    rule: str = LEFT_POINT

    def __post_init__(self):
        if self.n_cells < 1:
            raise ConfigurationError("n_cells must be >= 1")
        if not self.a < self.b:
            raise ConfigurationError(f"empty interval [{self.a}, {self.b}]")
        if self.rule not in (LEFT_POINT, TRAPEZOID):
            raise ConfigurationError(f"unknown 1-d rule {self.rule!r}")

    @property
    def dim(self):
        return 1

    @property
    def step(self):
        return (self.b - self.a) / self.n_cells

    def nodes(self):
        count = self.n_cells if self.rule == LEFT_POINT else self.n_cells + 1
        return (self.a + np.arange(count) * self.step,)

    def weights(self):
        if self.rule == LEFT_POINT:
            return np.full(self.n_cells, self.step)
        return _trapezoid_weights(self.n_cells, self.b - self.a)


@dataclass(frozen=True)
class GridDisk:
    """Tensor trapezoid rule in (r, theta) on [0, 1] x [0, 2 pi].

    ``n_r``/``n_theta`` count increments, so there are ``n + 1`` nodes per axis.
    The r = 0 ring gets weight zero through the Jacobian.
    """

    n_r: int = 301
    n_theta: int = 301

    def __post_init__(self):
        if self.n_r < 1 or self.n_theta < 1:
            raise ConfigurationError("disk mesh needs at least one increment per axis")

    @property
    def dim(self):
        return 2

    def nodes(self):
        r = np.linspace(0.0, 1.0, self.n_r + 1)
        theta = np.linspace(0.0, TWO_PI, self.n_theta + 1)
        return tuple(np.meshgrid(r, theta, indexing="ij"))

    def weights(self):
        r = np.linspace(0.0, 1.0, self.n_r + 1)
        wr = _trapezoid_weights(self.n_r, 1.0) * r
        wt = _trapezoid_weights(self.n_theta, TWO_PI)
        return np.outer(wr, wt)


@dataclass(frozen=True)
class GaussLegendre1D:
    """Composite Gauss-Legendre rule on a union of intervals.

    Used where matrix elements must be near exact (the reference computations
    were done with an adaptive integrator, not with the sampling grid).
    """

    intervals: tuple = ((0.0, 1.0),)
    panels: int = 64
    order: int = 24

    @property
    def dim(self):
        return 1

    def _rule(self):
        g, w = leggauss(self.order)
        xs, ws = [], []
        for lo, hi in self.intervals:
            edges = np.linspace(lo, hi, self.panels + 1)
            half = 0.5 * np.diff(edges)
            mid = 0.5 * (edges[1:] + edges[:-1])
            xs.append((mid[:, None] + half[:, None] * g[None, :]).ravel())
            ws.append((half[:, None] * w[None, :]).ravel())
        if not xs:
            return np.zeros(0), np.zeros(0)
        return np.concatenate(xs), np.concatenate(ws)

    def nodes(self):
        return (self._rule()[0],)

    def weights(self):
        return self._rule()[1]


Rule = Union[Grid1D, GridDisk, GaussLegendre1D]


def default_grid(dim):
    """Sampling grids used for the interval and disk tables."""
    if dim == 1:
        return Grid1D(0.0, 1.0, 1000, LEFT_POINT)
    return GridDisk(301, 301)


def sample(f, rule):
    """Evaluate ``f`` on the nodes of ``rule``; non-finite values are an error."""
    nodes = rule.nodes()
    values = np.broadcast_to(np.asarray(f(*nodes), dtype=float), nodes[0].shape)
    bad = ~np.isfinite(values)
    if bad.any():
        idx = tuple(int(i[0]) for i in np.nonzero(bad))
        coord = tuple(float(c[idx]) for c in nodes)
        raise NumericalFailure(f"non-finite integrand at node {idx}, coordinates {coord}")
    return values


def integrate(f, rule):
    values = sample(f, rule)
    if isinstance(rule, Grid1D) and rule.rule == LEFT_POINT:
        # h * sum f(a + i h), the rule as written
        return float(rule.step * np.sum(values))
    return float(np.sum(rule.weights() * values))


def integrate_1d(f, grid):
    """Left-point or composite trapezoid integral of ``f(x)`` on ``grid``."""
    if grid.dim != 1:
        raise ConfigurationError("integrate_1d needs a 1-d grid")
    return integrate(f, grid)


def integrate_disk(f, grid):
    """Tensor trapezoid integral of ``f(r, theta)`` over the unit disk."""
    if not isinstance(grid, GridDisk):
        raise ConfigurationError("integrate_disk needs a GridDisk")
    return integrate(f, grid)


# ---------------------------------------------------------------- subsets


def _normalise_intervals(intervals, upper):
    out = []
    for item in intervals:
        lo, hi = (float(v) for v in item)
        if not 0.0 <= lo < hi <= upper + MEMBERSHIP_TOL:
            raise ConfigurationError(f"interval [{lo}, {hi}] not inside [0, {upper:g}]")
        out.append((lo, hi))
    out.sort()
    for (a0, b0), (a1, b1) in zip(out, out[1:]):
        if a1 < b0:
            raise ConfigurationError(f"intervals [{a0}, {b0}] and [{a1}, {b1}] overlap")
    return tuple(out)


def _in_union(x, intervals):
    inside = np.zeros(np.shape(x), dtype=bool)
    for lo, hi in intervals:
        inside |= (x >= lo - MEMBERSHIP_TOL) & (x <= hi + MEMBERSHIP_TOL)
    return inside


@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of closed subintervals of [0, 1].

    ``closed=True`` gives nodes on an interior endpoint full weight instead of 1/2.
    """

    intervals: tuple
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "intervals", _normalise_intervals(self.intervals, 1.0))

    dim = 1

    @property
    def measure_fraction(self):
        return sum(hi - lo for lo, hi in self.intervals)

    def indicator(self, x):
        """1 inside, 1/2 at an endpoint interior to (0, 1), 0 outside.

        The half value is the trapezoid-consistent weight of a node sitting on
        the boundary of the subset; with it ``[0, 1/2]`` gets exactly half of
        every symmetric mass on a uniform grid.
        """
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape)
        for lo, hi in self.intervals:
            inside = (x >= lo - MEMBERSHIP_TOL) & (x <= hi + MEMBERSHIP_TOL)
            value = np.where(inside, 1.0, 0.0)
            for end in (lo, hi):
                if not self.closed and 0.0 < end < 1.0:
                    value[np.abs(x - end) <= MEMBERSHIP_TOL] = 0.5
            out += value
        return np.minimum(out, 1.0)

    def describe(self):
        return {"kind": "interval_union", "intervals": [list(iv) for iv in self.intervals],
                "endpoints": "closed" if self.closed else "half"}


@dataclass(frozen=True)
class RadialAngular:
    """Disk sectors ``{(r, theta): theta in arcs}``, arcs inside [0, 2 pi].

    Nodes on an arc endpoint get weight 1/2 (``closed=True``: full weight).
    """

    arcs: tuple
    closed: bool = False

    def __post_init__(self):
        object.__setattr__(self, "arcs", _normalise_intervals(self.arcs, TWO_PI))

    dim = 2

    @property
    def measure_fraction(self):
        return sum(hi - lo for lo, hi in self.arcs) / TWO_PI

    def indicator(self, r, theta):
        """1 inside, 1/2 on an arc endpoint, 0 outside (theta taken mod 2 pi).

        ``theta = 0`` and ``theta = 2 pi`` are the same ray; an arc ending at
        2 pi and one starting at 0 together give that ray full weight.
        """
        phi = np.mod(np.asarray(theta, dtype=float), TWO_PI)
        phi = np.where(np.abs(phi - TWO_PI) <= MEMBERSHIP_TOL, 0.0, phi)
        edge = 1.0 if self.closed else 0.5
        out = np.zeros(phi.shape)
        for lo, hi in self.arcs:
            at_lo = np.abs(phi - lo) <= MEMBERSHIP_TOL
            at_hi = (np.abs(phi - hi) <= MEMBERSHIP_TOL) | (np.abs(phi + TWO_PI - hi) <= MEMBERSHIP_TOL)
            inside = (phi > lo + MEMBERSHIP_TOL) & (phi < hi - MEMBERSHIP_TOL)
            out += np.where(inside, 1.0, 0.0) + edge * at_lo + edge * at_hi
        out = np.minimum(out, 1.0)
        return np.broadcast_to(out, np.broadcast(np.asarray(r), phi).shape).astype(float)

    def describe(self):
        return {"kind": "radial_angular", "arcs": [list(a) for a in self.arcs],
                "endpoints": "closed" if self.closed else "half"}


@dataclass(frozen=True, eq=False)
class Density:
    """Relaxed observation density a(x) in [0, 1] sampled on the nodes of ``grid``."""

    grid: Rule
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        shape = self.grid.nodes()[0].shape
        vals = np.array(np.broadcast_to(np.asarray(self.values, dtype=float), shape))
        if not np.all(np.isfinite(vals)):
            raise ConfigurationError("density values must be finite")
        if vals.min() < -MEMBERSHIP_TOL or vals.max() > 1.0 + MEMBERSHIP_TOL:
            raise ConfigurationError("density values must lie in [0, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, level, grid):
        return cls(grid, np.full(grid.nodes()[0].shape, float(level)))

    @property
    def dim(self):
        return self.grid.dim

    @property
    def domain_measure(self):
        return 1.0 if self.dim == 1 else math.pi

    @property
    def mass(self):
        return float(np.sum(self.grid.weights() * self.values))

    @property
    def measure_fraction(self):
        return self.mass / self.domain_measure

    def indicator(self, *coords):
        # exact at grid nodes, which is the only place it is integrated
        if self.dim == 1:
            (x,) = coords
            return np.interp(x, self.grid.nodes()[0], self.values)
        r, theta = coords
        i = np.clip(np.rint(np.asarray(r) * self.grid.n_r).astype(int), 0, self.grid.n_r)
        j = np.rint(np.mod(theta, TWO_PI) / TWO_PI * self.grid.n_theta).astype(int)
        return self.values[i, np.clip(j, 0, self.grid.n_theta)]

    def describe(self):
        return {"kind": "density", "measure_fraction": self.measure_fraction}


SubsetSpec = Union[IntervalUnion, RadialAngular, Density]

QUARTER_SECTORS = RadialAngular(
    tuple((k * math.pi / 2, k * math.pi / 2 + math.pi / 4) for k in range(4))
)


def restrict(f: Callable, subset: SubsetSpec, dim=None) -> Callable:
    """Return ``f * chi_omega`` (or ``f * a`` for a density) as a new function."""
    if dim is not None and dim != subset.dim:
        raise ConfigurationError(
            f"{type(subset).__name__} is {subset.dim}-d but the domain is {dim}-d"
        )

    def masked(*coords):
        if len(coords) != subset.dim:
            raise ConfigurationError(
                f"{type(subset).__name__} is {subset.dim}-d, got {len(coords)} coordinates"
            )
        return f(*coords) * subset.indicator(*coords)

    return masked


def subset_weights(subset, rule):
    """Quadrature weights of ``rule`` multiplied by the subset indicator/density."""
    if subset is None:
        return rule.weights()
    if subset.dim != rule.dim:
        raise ConfigurationError(
            f"{type(subset).__name__} is {subset.dim}-d but the rule is {rule.dim}-d"
        )
    return rule.weights() * subset.indicator(*rule.nodes())
