"""Observability functionals built from eigenfunction masses on a subset.

A *family* is anything with ``domain``, ``labels``, ``eigenvalues``,
``clusters``, ``len()`` and ``evaluate(*coords, count=None)``: an unperturbed
:class:`SpectralBasis` or a :class:`PerturbedFamily`.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, NumericalFailure, UnsupportedDegeneracyError
from .linalg import jacobi_eigvalsh
from .perturbation import perturbed_family
from .quadrature import Density, default_grid, subset_weights

HERMITIAN_TOL = 1e-10
TIE_TOL = 1e-12


@dataclass(frozen=True)
class ObservabilityReport:
    per_mode_mass: tuple
    j_value: float
    argmin_index: object
    config_echo: dict = field(default_factory=dict)

    def to_dict(self):
        label = self.argmin_index
        return {
            "value": self.j_value,
            "argmin": list(label) if isinstance(label, tuple) else label,
            "per_mode_mass": list(self.per_mode_mass),
            "config": self.config_echo,
        }


def _grid_for(subset, family_dim, grid):
    if isinstance(subset, Density):
        if grid is not None and grid != subset.grid:
            raise ConfigurationError("a density must be integrated on its own grid")
        grid = subset.grid
    grid = grid or default_grid(family_dim)
    if grid.dim != family_dim:
        raise ConfigurationError(f"{grid.dim}-d grid for a {family_dim}-d family")
    if subset is not None and subset.dim != family_dim:
        raise ConfigurationError(
            f"{type(subset).__name__} is {subset.dim}-d but the family is {family_dim}-d"
        )
    return grid


def _check_count(family, count):
    if len(family) == 0:
        raise ConfigurationError("empty family")
    count = len(family) if count is None else int(count)
    if not 1 <= count <= len(family):
        raise ConfigurationError(f"N = {count} outside 1..{len(family)}")
    return count


def subset_gram(family, subset, count=None, grid=None):
    """``G[a, b] = integral over omega of phi_a phi_b`` for the first ``count`` modes."""
    count = _check_count(family, count)
    grid = _grid_for(subset, family.domain.dim, grid)
    phi = family.evaluate(*grid.nodes(), count=count).reshape(count, -1)
    w = np.broadcast_to(subset_weights(subset, grid), grid.nodes()[0].shape).ravel()
    g = (phi * w) @ phi.T
    return 0.5 * (g + g.T)


def mode_masses(family, subset, count=None, grid=None):
    count = _check_count(family, count)
    grid = _grid_for(subset, family.domain.dim, grid)
    # evaluate every mode so a mode's mass does not depend on count (BLAS blocking)
    size = len(family)
    phi = family.evaluate(*grid.nodes(), count=size).reshape(size, -1)
    w = np.broadcast_to(subset_weights(subset, grid), grid.nodes()[0].shape).ravel()
    return np.einsum("ij,ij,j->i", phi, phi, w)[:count]


def mode_mass(pair, subset, grid=None):
    """Integral of phi^2 over omega (or of a * phi^2 for a density).

    ``pair`` is an :class:`EigenPair` or any callable with a ``domain`` attribute.
    """
    dim = pair.domain.dim
    grid = _grid_for(subset, dim, grid)
    nodes = grid.nodes()
    vals = np.asarray(pair(*nodes))
    return float(np.sum(subset_weights(subset, grid) * vals * vals))


def j_functional(family, subset, count=None, grid=None):
    """min over the first ``count`` modes of the mass on ``subset``; ties go to the lowest index."""
    count = _check_count(family, count)
    masses = mode_masses(family, subset, count, grid)
    # masses within TIE_TOL of the minimum count as ties; report the lowest index
    k = int(np.flatnonzero(masses <= masses.min() + TIE_TOL)[0])
    echo = {
        "domain": family.domain.value,
        "N": count,
        "subset": subset.describe() if subset is not None else {"kind": "whole"},
        "grid": repr(_grid_for(subset, family.domain.dim, grid)),
    }
    pot = getattr(family, "potential", None)
    if pot is not None:
        echo["potential"] = pot.describe()
        echo["truncation"] = family.truncation
    return ObservabilityReport(tuple(float(m) for m in masses), float(masses.min()),
                               family.labels[k], echo)


def alpha(lambda_j, lambda_k, T):
    """integral_0^T exp(i (lambda_j - lambda_k) t) dt."""
    if not T > 0:
        raise ConfigurationError("T must be positive")
    d = lambda_j - lambda_k
    if not (math.isfinite(lambda_j) and math.isfinite(lambda_k) and math.isfinite(T)):
        raise NumericalFailure("non-finite input to alpha")
    if abs(d) < 1e-12:
        return complex(T, 0.0)
    return (cmath.exp(1j * d * T) - 1.0) / (1j * d)


def alpha_matrix(eigenvalues, T):
    if not T > 0:
        raise ConfigurationError("T must be positive")
    lam = np.asarray(eigenvalues, dtype=float)
    d = lam[:, None] - lam[None, :]
    same = np.abs(d) < 1e-12
    safe = np.where(same, 1.0, d)
    return np.where(same, T + 0j, np.expm1(1j * safe * T) / (1j * safe))


@dataclass(frozen=True, eq=False)
class GramBlock:
    """Truncated observability Gram matrix ``M_jk = lam_j lam_k alpha_jk int_omega phi_j phi_k``.

    ``weights`` holds ``lam_j^2``; the observability quotient is
    ``c^H M c / sum(weights |c|^2)``.
    """

    matrix: np.ndarray
    weights: np.ndarray
    T: float

    @property
    def hermitian_defect(self):
        m = self.matrix
        return float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0

    def normalized(self):
        """``D^{-1/2} M D^{-1/2}`` with ``D = diag(weights)``."""
        s = 1.0 / np.sqrt(self.weights)
        return self.matrix * s[:, None] * s[None, :]


def gram_block(family, subset, count, T, grid=None):
    count = _check_count(family, count)
    lam = np.asarray(family.eigenvalues[:count], dtype=float)
    if np.any(lam <= 0):
        raise ConfigurationError("finite-time constant needs positive eigenvalues")
    g = subset_gram(family, subset, count, grid)
    m = np.outer(lam, lam) * alpha_matrix(lam, T) * g
    return GramBlock(m, lam * lam, float(T))


def finite_time_constant(family, subset, count, T, grid=None):
    """Truncated observability constant.

    Smallest value of the quotient ``c^H M c / sum lam_j^2 |c_j|^2`` over the first
    ``count`` modes, i.e. the smallest eigenvalue of the normalised Gram block.
    """
    if not T > 0:
        raise ConfigurationError("T must be positive")
    block = gram_block(family, subset, count, T, grid)
    a = block.normalized()
    scale = max(1.0, float(np.max(np.abs(a))))
    if block.hermitian_defect > HERMITIAN_TOL * scale * float(np.max(block.weights)):
        raise NumericalFailure(
            f"observability matrix not Hermitian (defect {block.hermitian_defect:.3g})"
        )
    w = jacobi_eigvalsh(0.5 * (a + a.conj().T))
    return float(w[0])


def asymptotic_constant(family, subset, count=None, grid=None):
    """Cluster-grouped infimum: per cluster the smallest eigenvalue of its subset Gram block."""
    count = _check_count(family, count)
    g = subset_gram(family, subset, count, grid)
    # same diagonal as j_functional, so simple clusters reproduce it exactly
    g[np.diag_indices(count)] = mode_masses(family, subset, count, grid)
    best = math.inf
    for cluster in family.clusters:
        idx = [i for i in cluster if i < count]
        if not idx:
            continue
        if len(idx) > 2:
            raise UnsupportedDegeneracyError(f"cluster of size {len(idx)} not supported")
        block = g[np.ix_(idx, idx)]
        if len(idx) == 1:
            val = block[0, 0]
        else:
            # closed-form smallest eigenvalue of a symmetric 2x2 block
            mean = 0.5 * (block[0, 0] + block[1, 1])
            half = 0.5 * (block[0, 0] - block[1, 1])
            # never above the smaller diagonal entry; min() only trims roundoff
            val = min(mean - math.hypot(half, block[0, 1]), block[0, 0], block[1, 1])
        best = min(best, float(val))
    return best


def relaxed_gap(density, potential, basis, count=None, truncation=None,
                mock_degenerate=False):
    """|J_N(a) of the perturbed family - J_N(a) of the unperturbed basis|."""
    if not isinstance(density, Density):
        raise ConfigurationError("relaxed_gap needs a Density")
    fam = perturbed_family(basis, potential, count, truncation, mock_degenerate)
    n = len(fam)
    perturbed = j_functional(fam, density, n).j_value
    plain = j_functional(basis, density, n).j_value
    return abs(perturbed - plain)
