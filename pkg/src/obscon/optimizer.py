"""Maximisation of the randomized observability functional over densities and indicator sets.

The relaxed problem is

    max_a  min_{j <= N}  sum_nodes w * a * phi_j^2
    subject to 0 <= a <= 1,  sum_nodes w * a = L * |Omega|

solved by projected supergradient ascent. The ascent works in the
``w``-weighted inner product, in which the supergradient of the active term is
simply ``phi_j^2`` and the projection onto the constraint set is a clip after
an additive shift.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalFailure
from .quadrature import Density, Grid1D, default_grid

MASS_TOL = 1e-10
STALL_PATIENCE = 200


@dataclass(frozen=True, eq=False)
class RelaxedSolution:
    density: Density
    value: float
    trace: tuple = field(repr=False)
    iterations: int = 0
    argmin_index: object = None

    def to_dict(self):
        label = self.argmin_index
        return {
            "value": self.value,
            "argmin": list(label) if isinstance(label, tuple) else label,
            "iterations": self.iterations,
            "mass_fraction": self.density.measure_fraction,
        }


@dataclass(frozen=True, eq=False)
class IndicatorSolution:
    """A 0/1 density on grid cells together with its attained value."""

    subset: Density
    cells: tuple
    value: float
    swaps: int = 0


def _check_problem(family, count, level, grid):
    if not 0.0 < level < 1.0:
        raise ConfigurationError(f"L must lie in (0, 1), got {level!r}")
    count = len(family) if count is None else int(count)
    if not 1 <= count <= len(family):
        raise ConfigurationError(f"N = {count} outside 1..{len(family)}")
    grid = grid or default_grid(family.domain.dim)
    if grid.dim != family.domain.dim:
        raise ConfigurationError(f"{grid.dim}-d grid for a {family.domain.dim}-d family")
    return count, grid


def _squared_modes(family, count, grid):
    shape = grid.nodes()[0].shape
    phi = family.evaluate(*grid.nodes(), count=count).reshape(count, -1)
    w = np.broadcast_to(grid.weights(), shape).ravel().astype(float)
    return phi * phi, w, shape


def project_mass(y, w, target, tol=MASS_TOL, max_iter=200):
    """Weighted projection of ``y`` onto ``{0 <= a <= 1, sum(w a) = target}``.

    The minimiser of ``sum w (a - y)^2`` on that set is ``clip(y + mu, 0, 1)``;
    ``mu`` is found by bisection.
    """
    total = float(np.sum(w))
    if not 0.0 <= target <= total:
        raise ConfigurationError("mass target outside [0, total weight]")
    lo, hi = -float(np.max(y)), 1.0 - float(np.min(y))
    a = np.clip(y + 0.5 * (lo + hi), 0.0, 1.0)
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        a = np.clip(y + mid, 0.0, 1.0)
        resid = float(w @ a) - target
        if abs(resid) <= tol:
            return a
        if resid > 0:
            hi = mid
        else:
            lo = mid
    if abs(float(w @ a) - target) > 1e3 * tol:
        raise NumericalFailure("mass projection bisection did not converge")
    return a


def maximize_relaxed(family, count, level, grid=None, max_iter=5000, tol=1e-8):
    """Projected supergradient ascent with a Polyak step toward an adaptive target.

    The target level is ``best + gamma``; ``gamma`` is halved after
    ``STALL_PATIENCE`` non-improving steps and the run stops once ``gamma < tol``
    or after ``max_iter`` steps. Starts from ``a = L`` and returns the best iterate.
    """
    count, grid = _check_problem(family, count, level, grid)
    sq, w, shape = _squared_modes(family, count, grid)
    measure = family.domain.measure
    target_mass = level * measure
    total_w = float(np.sum(w))
    a = project_mass(np.full(w.shape, level), w, target_mass)
    masses = sq @ (w * a)
    best_a, best_f = a, float(masses.min())
    gamma = max(0.1 * best_f, 10 * tol)
    trace, stale, it = [best_f], 0, 0
    for it in range(1, max_iter + 1):
        j = int(np.argmin(masses))
        g = sq[j]
        g = g - float(w @ g) / total_w       # tangent to the mass constraint
        gn2 = float(w @ (g * g))
        if gn2 <= 1e-300:
            break
        step = (best_f + gamma - float(masses[j])) / gn2
        a = project_mass(a + step * g, w, target_mass)
        masses = sq @ (w * a)
        f = float(masses.min())
        trace.append(f)
        if f > best_f:
            best_a, best_f, stale = a, f, 0
        else:
            stale += 1
        if stale >= STALL_PATIENCE:
            gamma *= 0.5
            stale = 0
            if gamma < tol:
                break
    best_masses = sq @ (w * best_a)
    k = int(np.argmin(best_masses))
    density = Density(grid, best_a.reshape(shape))
    return RelaxedSolution(density, float(best_masses[k]), tuple(trace), it, family.labels[k])


def bathtub(weight, w, target, tol=MASS_TOL):
    """Exact maximiser of ``sum w * a * weight`` under the box and mass constraints.

    Fills nodes in decreasing ``weight`` order (ties by lowest index); at most
    one node is fractional.
    """
    weight = np.asarray(weight, dtype=float).ravel()
    order = np.lexsort((np.arange(weight.size), -weight))
    a = np.zeros(weight.size)
    left = float(target)
    for i in order:
        if left <= tol:
            break
        if w[i] <= 0:
            continue
        take = min(1.0, left / w[i])
        a[i] = take
        left -= take * w[i]
    return a


def search_indicator(family, count, level, grid=None, seed=0, max_swaps=100_000,
                     chunk=8):
    """Steepest-ascent swap search over indicator sets of fixed cell count.

    The start set is stratified: one cell per stride of ``n / k`` cells at a
    random phase drawn from ``seed``. Each step applies the swap (one selected
    cell out, one unselected cell in) that most increases ``min_j`` mass, ties
    broken by lowest (out, in) cell index; stops when no swap improves.
    """
    count, grid = _check_problem(family, count, level, grid)
    if not isinstance(grid, Grid1D):
        raise ConfigurationError("indicator search needs a 1-d grid")
    sq, w, shape = _squared_modes(family, count, grid)
    n = w.size
    k = int(round(level * family.domain.measure / grid.step))
    if not 0 < k < n:
        raise ConfigurationError(f"L = {level} selects {k} of {n} cells")
    contrib = sq * w                                   # (N, n)
    rng = np.random.default_rng(seed)
    phase = rng.random()
    chosen = np.unique(np.floor((np.arange(k) + phase) * n / k).astype(int) % n)
    selected = np.zeros(n, dtype=bool)
    selected[chosen] = True
    masses = contrib[:, selected].sum(axis=1)
    swaps = 0
    scale = max(1.0, float(np.max(np.abs(masses))))
    while swaps < max_swaps:
        inside = np.flatnonzero(selected)
        outside = np.flatnonzero(~selected)
        current = float(masses.min())
        best = (current + 1e-14 * scale, None, None)
        c_out = contrib[:, outside]                    # (N, n_out)
        for start in range(0, inside.size, chunk):
            ids = inside[start:start + chunk]
            base = masses[None, :] - contrib[:, ids].T  # (c, N)
            vals = (base[:, :, None] + c_out[None, :, :]).min(axis=1)   # (c, n_out)
            flat = int(np.argmax(vals))
            r, c = divmod(flat, vals.shape[1])
            if vals[r, c] > best[0]:
                best = (float(vals[r, c]), int(ids[r]), int(outside[c]))
        if best[1] is None:
            break
        _, i_out, i_in = best
        selected[i_out], selected[i_in] = False, True
        masses = masses - contrib[:, i_out] + contrib[:, i_in]
        swaps += 1
    subset = Density(grid, selected.astype(float).reshape(shape))
    value = float((contrib @ selected.astype(float)).min())
    return IndicatorSolution(subset, tuple(int(i) for i in np.flatnonzero(selected)),
                             value, swaps)


def density_rows(density):
    """Rows ``(*coords, weight, a)`` for every grid node."""
    nodes = [np.ravel(c) for c in density.grid.nodes()]
    w = np.broadcast_to(density.grid.weights(), density.values.shape).ravel()
    a = density.values.ravel()
    return [tuple(float(c[i]) for c in nodes) + (float(w[i]), float(a[i]))
            for i in range(a.size)]


def write_density_csv(density, path):
    header = ["x"] if density.dim == 1 else ["r", "theta"]
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header + ["weight", "a"])
            for row in density_rows(density):
                writer.writerow([repr(v) for v in row])
    except OSError as exc:
        raise OSError(f"cannot write density to {path}: {exc.strerror}") from exc
