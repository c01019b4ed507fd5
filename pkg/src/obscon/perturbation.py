"""First- and second-order eigenpair corrections for H = -Laplacian + eps * V0.

Everything here works in the truncated unperturbed basis: the potential enters
only through the symmetric matrix ``V[m, n] = <V0 phi_m, phi_n>`` over the first
``M`` modes. That matrix is integrated with a rule independent of the sampling
grid used for observability masses: composite Gauss-Legendre on the potential's
support for the interval, the 301-increment polar trapezoid mesh for the disk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, DegenerateSpectrumError, NumericalFailure
from .linalg import spectral_norm
from .quadrature import GaussLegendre1D, GridDisk, IntervalUnion, SubsetSpec, default_grid
from .spectral_basis import Domain, SpectralBasis

DEFAULT_TRUNCATION = {Domain.UNIT_INTERVAL: 200, Domain.UNIT_DISK: 25}


# ------------------------------------------------------------ base potentials
# Small frozen callables so that equal potentials hash equal and share cached
# matrix elements.


@dataclass(frozen=True)
class QuadraticWell:
    """x^2 on [0.5 - delta, 0.5 + delta], zero elsewhere (interval)."""

    delta: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        inside = (x >= 0.5 - self.delta) & (x <= 0.5 + self.delta)
        return np.where(inside, x * x, 0.0)

    @property
    def support(self):
        return IntervalUnion(((max(0.0, 0.5 - self.delta), min(1.0, 0.5 + self.delta)),))


@dataclass(frozen=True)
class InverseSquareCore:
    """1/r^2 on r <= delta (disk)."""

    delta: float

    def __call__(self, r, theta):
        r = np.asarray(r, dtype=float)
        inside = (r > 0.0) & (r <= self.delta)
        # the r = 0 node carries zero quadrature weight; give it a finite value
        safe = np.where(inside, r, 1.0)
        out = np.where(inside, 1.0 / (safe * safe), 0.0)
        return np.broadcast_to(out, np.broadcast(r, np.asarray(theta)).shape)

    support = None


@dataclass(frozen=True)
class LinearCore:
    """r on r <= delta (disk)."""

    delta: float

    def __call__(self, r, theta):
        r = np.asarray(r, dtype=float)
        out = np.where(r <= self.delta, r, 0.0)
        return np.broadcast_to(out, np.broadcast(r, np.asarray(theta)).shape)

    support = None


@dataclass(frozen=True)
class ConstantField:
    value: float
    dim: int = 1

    def __call__(self, *coords):
        return np.full(np.broadcast(*[np.asarray(c) for c in coords]).shape, float(self.value))

    support = None


@dataclass(frozen=True)
class Potential:
    """V(x) = epsilon * V0(x) on ``domain``.

    ``support`` is the region where V0 may be nonzero (None means the whole
    domain). It only steers where matrix elements are integrated.
    """

    base: Callable
    domain: Domain
    epsilon: float = 0.0
    support: Optional[SubsetSpec] = None
    name: str = "custom"
    delta: Optional[float] = None

    def __post_init__(self):
        if not (self.epsilon >= 0.0 and math.isfinite(self.epsilon)):
            raise ConfigurationError(f"epsilon must be finite and >= 0, got {self.epsilon!r}")

    def __call__(self, *coords):
        return self.epsilon * self.base(*coords)

    def with_epsilon(self, epsilon):
        return replace(self, epsilon=float(epsilon))

    @property
    def sup_norm(self):
        """max |V0| over the default sampling grid of the domain."""
        grid = default_grid(self.domain.dim)
        return float(np.max(np.abs(self.base(*grid.nodes()))))

    def describe(self):
        return {"name": self.name, "epsilon": self.epsilon, "delta": self.delta}


def quadratic_well(delta, epsilon=0.0):
    """x^2 chi_[0.5 - delta, 0.5 + delta] on the unit interval."""
    if not 0.0 < delta <= 0.5:
        raise ConfigurationError(f"interval delta must be in (0, 0.5], got {delta}")
    base = QuadraticWell(float(delta))
    return Potential(base, Domain.UNIT_INTERVAL, float(epsilon), base.support,
                     "interval-x2", float(delta))


def inverse_square_core(delta, epsilon=0.0):
    """(1/r^2) chi_{r <= delta} on the unit disk."""
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"disk delta must be in (0, 1), got {delta}")
    return Potential(InverseSquareCore(float(delta)), Domain.UNIT_DISK, float(epsilon),
                     None, "disk-1/r2", float(delta))


def linear_core(delta, epsilon=0.0):
    """r chi_{r <= delta} on the unit disk."""
    if not 0.0 < delta < 1.0:
        raise ConfigurationError(f"disk delta must be in (0, 1), got {delta}")
    return Potential(LinearCore(float(delta)), Domain.UNIT_DISK, float(epsilon),
                     None, "disk-r", float(delta))


def constant_potential(value, domain, epsilon=0.0):
    domain = Domain.parse(domain)
    return Potential(ConstantField(float(value), domain.dim), domain, float(epsilon),
                     None, "constant")


POTENTIAL_FAMILIES = {
    "interval-x2": quadratic_well,
    "disk-1/r2": inverse_square_core,
    "disk-r": linear_core,
}


# ------------------------------------------------------------ matrix elements


def matrix_rule(potential, truncation):
    """Rule used for <V0 phi_m, phi_n>: Gauss on the support (1-d) or the disk mesh."""
    if potential.domain is Domain.UNIT_DISK:
        return GridDisk(301, 301)
    support = potential.support if isinstance(potential.support, IntervalUnion) else None
    intervals = support.intervals if support is not None else ((0.0, 1.0),)
    length = sum(hi - lo for lo, hi in intervals)
    # about one highest-frequency wavelength of phi_m * phi_n per panel
    panels = max(16, math.ceil(length * truncation))
    return GaussLegendre1D(intervals, panels=panels, order=24)


def norm_rule(domain, truncation):
    if domain is Domain.UNIT_DISK:
        return GridDisk(301, 301)
    return GaussLegendre1D(((0.0, 1.0),), panels=max(16, truncation), order=24)


@lru_cache(maxsize=64)
def _elements(basis, base, domain, support, truncation, rule):
    # epsilon-free: depends only on V0 and the truncated basis
    pot = Potential(base, domain, 0.0, support)
    rule = rule or matrix_rule(pot, truncation)
    nodes = rule.nodes()
    phi = basis.evaluate(*nodes, count=truncation).reshape(truncation, -1)
    w = (rule.weights() * np.broadcast_to(base(*nodes), nodes[0].shape)).ravel()
    v = (phi * w) @ phi.T
    v = 0.5 * (v + v.T)
    nrule = norm_rule(domain, truncation) if rule.dim == 1 else rule
    nphi = basis.evaluate(*nrule.nodes(), count=truncation).reshape(truncation, -1)
    norms = (nphi * nphi) @ np.broadcast_to(nrule.weights(), nrule.nodes()[0].shape).ravel()
    v.setflags(write=False)
    norms.setflags(write=False)
    return v, norms


def potential_matrix(basis, potential, truncation=None, rule=None):
    """Symmetric ``(M, M)`` matrix of <V0 phi_m, phi_n> plus the ``(M,)`` norms <phi_n, phi_n>."""
    truncation = _truncation(basis, potential, truncation)
    return _elements(basis, potential.base, potential.domain, potential.support,
                     truncation, rule)


def _truncation(basis, potential, truncation):
    if basis.domain is not potential.domain:
        raise ConfigurationError(
            f"potential lives on {potential.domain.value}, basis on {basis.domain.value}"
        )
    m = DEFAULT_TRUNCATION[basis.domain] if truncation is None else int(truncation)
    if m < 1 or m > len(basis):
        raise ConfigurationError(f"truncation {m} outside 1..{len(basis)}")
    return m


def _position(n, truncation):
    if int(n) != n or not 1 <= n <= truncation:
        raise ConfigurationError(f"mode number {n} outside 1..{truncation}")
    return int(n) - 1


def _partners(basis, i, truncation, mock_degenerate):
    """Positions k < M coupled to mode i; same-cluster modes excluded."""
    cluster = [k for k in basis.cluster_of(i) if k < truncation]
    if len(cluster) > 1 and not mock_degenerate:
        raise DegenerateSpectrumError(
            f"mode {basis.pairs[i].label} lies in a degenerate cluster",
            [basis.pairs[k].label for k in cluster],
        )
    mask = np.ones(truncation, dtype=bool)
    mask[cluster] = False
    return mask


# ------------------------------------------------------------ operations


@dataclass(frozen=True)
class PerturbedPair:
    base_index: object
    epsilon: float
    eigenvalue: float        # lambda_0 + eps * lambda1
    lambda1: float
    lambda2: float
    vector_coeffs: dict = field(repr=False)   # label -> coefficient (eps included)
    truncation: int = 0


def first_order_eigenvalue(n, potential, basis, truncation=None, rule=None):
    """lambda_n0 + eps * <V0 phi_n0, phi_n0> / <phi_n0, phi_n0>."""
    m = _truncation(basis, potential, truncation)
    i = _position(n, m)
    lam0 = basis.pairs[i].eigenvalue
    if potential.epsilon == 0.0:
        return lam0
    v, norms = potential_matrix(basis, potential, m, rule)
    if norms[i] < 1e-8:
        raise NumericalFailure(f"norm of mode {basis.pairs[i].label} is {norms[i]:.3g}")
    return lam0 + potential.epsilon * v[i, i] / norms[i]


def _lambda1(v, norms, i, label):
    if norms[i] < 1e-8:
        raise NumericalFailure(f"norm of mode {label} is {norms[i]:.3g}")
    return v[i, i] / norms[i]


def _coefficients(v, lam, i, mask, epsilon):
    coeffs = np.zeros(len(lam))
    coeffs[mask] = epsilon * v[i, mask] / (lam[i] - lam[mask])
    return coeffs


def first_order_eigenvector(n, potential, basis, truncation=None, mock_degenerate=False,
                            rule=None):
    """Perturbed pair for mode ``n`` (1-based position in ``basis``) truncated at ``M`` modes."""
    m = _truncation(basis, potential, truncation)
    i = _position(n, m)
    mask = _partners(basis, i, m, mock_degenerate)
    v, norms = potential_matrix(basis, potential, m, rule)
    lam = basis.eigenvalues[:m]
    coeffs = _coefficients(v, lam, i, mask, potential.epsilon)
    l1 = _lambda1(v, norms, i, basis.pairs[i].label)
    l2 = _lambda2(v, lam, i, mask)
    labels = basis.labels
    return PerturbedPair(
        base_index=labels[i],
        epsilon=potential.epsilon,
        eigenvalue=lam[i] + potential.epsilon * l1,
        lambda1=l1,
        lambda2=l2,
        vector_coeffs={labels[k]: float(coeffs[k]) for k in np.flatnonzero(mask)},
        truncation=m,
    )


def _lambda2(v, lam, i, mask):
    return float(-np.sum(v[i, mask] ** 2 / (lam[mask] - lam[i])))


def second_order_eigenvalue(n, potential, basis, truncation=None, mock_degenerate=False,
                            rule=None):
    """Coefficient of eps^2: -sum_{k != n} <V0 phi_n, phi_k>^2 / (lambda_k - lambda_n)."""
    m = _truncation(basis, potential, truncation)
    i = _position(n, m)
    mask = _partners(basis, i, m, mock_degenerate)
    v, _ = potential_matrix(basis, potential, m, rule)
    return _lambda2(v, basis.eigenvalues[:m], i, mask)


def eigenfunction_closeness(n, potential, basis, truncation=None, mock_degenerate=False,
                            rule=None):
    """L^2 norm of the first-order eigenvector correction (Parseval in the basis)."""
    pair = first_order_eigenvector(n, potential, basis, truncation, mock_degenerate, rule)
    return float(np.sqrt(sum(c * c for c in pair.vector_coeffs.values())))


@dataclass(frozen=True)
class KatoDiagnostics:
    """Truncated norms p = |V0 P|, q = |V0 S|, s = |S - alpha P| and the resulting bound.

    When ``applicable`` is False the bound does not hold for this epsilon:
    ``psi`` and ``second_order_bound`` are then None.
    """

    p: float
    q: float
    s: float
    epsilon: float
    applicable: bool
    psi: Optional[float]
    second_order_bound: Optional[float]


def kato_diagnostics(n, potential, basis, truncation=None, alpha=0.0, mock_degenerate=False,
                     rule=None):
    """Bound on |lambda - lambda_0 - eps * lambda1| from the reduced-resolvent norms."""
    m = _truncation(basis, potential, truncation)
    i = _position(n, m)
    mask = _partners(basis, i, m, mock_degenerate)
    v, _ = potential_matrix(basis, potential, m, rule)
    lam = basis.eigenvalues[:m]
    proj = np.zeros((m, m))
    proj[i, i] = 1.0
    resolvent = np.zeros(m)
    resolvent[mask] = 1.0 / (lam[mask] - lam[i])
    reduced = np.diag(resolvent)
    p = spectral_norm(v @ proj)
    q = spectral_norm(v @ reduced)
    s = spectral_norm(reduced - alpha * proj)
    eps = potential.epsilon
    lead = 1.0 - (p * s + q) * eps
    disc = lead * lead - 4.0 * p * s * eps * eps
    if disc < 0.0 or lead <= 0.0:
        return KatoDiagnostics(p, q, s, eps, False, None, None)
    psi = math.sqrt(disc)
    return KatoDiagnostics(p, q, s, eps, True, psi, 2.0 * p * q * eps * eps / (lead + psi))


# ------------------------------------------------------------ perturbed family


@dataclass(frozen=True, eq=False)
class PerturbedFamily:
    """First ``size`` first-order perturbed eigenpairs, each a combination of ``truncation`` modes.

    Row ``n`` of ``mixing`` holds the coefficients of perturbed mode ``n`` in the
    unperturbed basis (1 on the diagonal).
    """

    basis: SpectralBasis
    potential: Potential
    size: int
    truncation: int
    mixing: np.ndarray = field(repr=False)
    eigenvalues: np.ndarray = field(repr=False)
    mock_degenerate: bool = False

    def __len__(self):
        return self.size

    @property
    def domain(self):
        return self.basis.domain

    @property
    def labels(self):
        return self.basis.labels[: self.size]

    @property
    def clusters(self):
        return self.basis.truncated(self.size).clusters

    def evaluate(self, *coords, count=None):
        count = self.size if count is None else min(count, self.size)
        phi = self.basis.evaluate(*coords, count=self.truncation)
        return np.tensordot(self.mixing[:count], phi, axes=1)

    def mode(self, n):
        """Callable perturbed eigenfunction for 1-based mode ``n``."""
        row = self.mixing[_position(n, self.size)]
        basis, m = self.basis, self.truncation

        def phi(*coords):
            return np.tensordot(row, basis.evaluate(*coords, count=m), axes=1)

        phi.domain = self.domain
        return phi


def perturbed_family(basis, potential, size=None, truncation=None, mock_degenerate=False,
                     rule=None):
    m = _truncation(basis, potential, truncation)
    size = m if size is None else int(size)
    if not 1 <= size <= m:
        raise ConfigurationError(f"family size {size} must be in 1..{m} (the truncation)")
    lam = basis.eigenvalues[:m]
    mixing = np.zeros((size, m))
    eigenvalues = np.empty(size)
    if potential.epsilon == 0.0:
        mixing[:, :size] = np.eye(size)
        eigenvalues[:] = lam[:size]
    else:
        v, norms = potential_matrix(basis, potential, m, rule)
        for i in range(size):
            mask = _partners(basis, i, m, mock_degenerate)
            mixing[i] = _coefficients(v, lam, i, mask, potential.epsilon)
            mixing[i, i] = 1.0
            eigenvalues[i] = lam[i] + potential.epsilon * _lambda1(
                v, norms, i, basis.pairs[i].label)
    mixing.setflags(write=False)
    eigenvalues.setflags(write=False)
    return PerturbedFamily(basis, potential, size, m, mixing, eigenvalues, mock_degenerate)
