import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from obscon.errors import ConfigurationError, UnsupportedDegeneracyError
from obscon.observability import (
    ObservabilityReport,
    alpha,
    alpha_matrix,
    asymptotic_constant,
    finite_time_constant,
    gram_block,
    j_functional,
    mode_mass,
    mode_masses,
    relaxed_gap,
    subset_gram,
)
from obscon.perturbation import inverse_square_core, linear_core, perturbed_family, quadratic_well
from obscon.quadrature import (
    QUARTER_SECTORS,
    Density,
    GridDisk,
    IntervalUnion,
    RadialAngular,
    default_grid,
)
from obscon.spectral_basis import disk_pair, interval_pair

from conftest import TABLE_INTERVAL

FINE_DISK = GridDisk(1201, 1201)


def test_mode_mass_half_interval(half_interval):
    for n in (1, 2, 7, 50, 199):
        assert mode_mass(interval_pair(n), half_interval) == pytest.approx(0.5, abs=1e-3)


def test_mode_mass_constant_density():
    d = Density.constant(0.37, default_grid(1))
    for n in (1, 3, 40):
        assert mode_mass(interval_pair(n), d) == pytest.approx(0.37, abs=1e-6)


def test_mode_mass_disk_quarter_sectors():
    # the cos^2 angular factor integrates to exactly half over the four sectors
    assert mode_mass(disk_pair(1, 1, 1), QUARTER_SECTORS) == pytest.approx(0.5, abs=1e-4)
    assert mode_mass(disk_pair(1, 1, 2), QUARTER_SECTORS) == pytest.approx(0.5, abs=1e-4)


@pytest.mark.parametrize("eps,delta,i,j", [(0.01, 0.1, 0, 0), (1.0, 0.475, 4, 4),
                                           (0.1, 0.3, 2, 2)])
def test_j_functional_table_corners(interval_basis, half_interval, eps, delta, i, j):
    fam = perturbed_family(interval_basis, quadratic_well(delta, eps), 200)
    rep = j_functional(fam, half_interval, 200)
    assert rep.j_value == pytest.approx(TABLE_INTERVAL[i, j], abs=5e-6)


def test_report_invariants(interval_basis, half_interval):
    fam = perturbed_family(interval_basis, quadratic_well(0.2, 0.5), 200)
    rep = j_functional(fam, half_interval)
    masses = np.array(rep.per_mode_mass)
    assert rep.j_value == masses.min()
    assert np.all(masses >= -1e-9) and np.all(masses <= 1 + 1e-9)
    assert rep.argmin_index == int(np.argmin(masses)) + 1
    echo = rep.to_dict()["config"]
    assert echo["N"] == 200 and echo["potential"]["name"] == "interval-x2"


def test_unperturbed_ties_go_to_lowest_index(interval_basis, half_interval):
    rep = j_functional(interval_basis, half_interval, 200)
    assert rep.j_value == pytest.approx(0.5, abs=1e-12)
    assert rep.argmin_index == 1


def test_j_functional_errors(interval_basis, half_interval):
    with pytest.raises(ConfigurationError):
        j_functional(interval_basis, half_interval, 0)
    with pytest.raises(ConfigurationError):
        j_functional(interval_basis, half_interval, 201)
    with pytest.raises(ConfigurationError):
        j_functional(interval_basis, QUARTER_SECTORS, 5)


def test_alpha_examples():
    assert alpha(3.0, 3.0, 2.0) == 2.0
    T = 1.7
    assert abs(alpha(5.0 + 2 * math.pi / T, 5.0, T)) < 1e-12
    with pytest.raises(ConfigurationError):
        alpha(1.0, 2.0, 0.0)


@settings(max_examples=200, deadline=None)
@given(lj=st.floats(0.0, 1e4), gap=st.floats(1e-3, 1e3), T=st.floats(1e-3, 100.0))
def test_alpha_factor_two_bound_and_direct_integral(lj, gap, T):
    a = alpha(lj + gap, lj, T)
    assert abs(a) <= 2.0 / gap * (1 + 1e-12)
    assert abs(a) <= T * (1 + 1e-12)
    # antisymmetric pair is the conjugate
    assert alpha(lj, lj + gap, T) == pytest.approx(a.conjugate(), abs=1e-12)


def test_alpha_against_midpoint_integral():
    d, T = 3.3, 2.0
    t = (np.arange(200_000) + 0.5) * T / 200_000
    ref = complex(np.sum(np.exp(1j * d * t)) * T / 200_000)
    assert abs(alpha(d, 0.0, T) - ref) < 1e-9
    m = alpha_matrix([1.0, 1.0 + d], T)
    assert m[0, 0] == T and abs(m[1, 0] - ref) < 1e-9


def test_gram_block_structure(interval_basis, half_interval):
    block = gram_block(interval_basis, half_interval, 6, 1.5)
    assert block.hermitian_defect < 1e-10
    lam = interval_basis.eigenvalues[:6]
    g = subset_gram(interval_basis, half_interval, 6)
    assert np.allclose(np.diag(block.matrix).real, 1.5 * lam ** 2 * np.diag(g), rtol=1e-14)
    assert np.all(np.diag(block.matrix).imag == 0.0)


def test_finite_time_constant_single_mode(interval_basis, half_interval):
    T = 2.5
    got = finite_time_constant(interval_basis, half_interval, 1, T)
    assert got == pytest.approx(T * mode_mass(interval_pair(1), half_interval), rel=1e-12)


def test_finite_time_constant_whole_domain(interval_basis):
    T = 3.0
    got = finite_time_constant(interval_basis, None, 8, T, grid=default_grid(1))
    assert got == pytest.approx(T, abs=1e-6 * T)


def test_finite_time_constant_beats_random_vectors(interval_basis, half_interval):
    T, N = 1.0, 5
    value = finite_time_constant(interval_basis, half_interval, N, T)
    block = gram_block(interval_basis, half_interval, N, T)
    a = block.normalized()
    rng = np.random.default_rng(2024)
    c = rng.standard_normal((100_000, N)) + 1j * rng.standard_normal((100_000, N))
    c /= np.linalg.norm(c, axis=1, keepdims=True)
    q = np.einsum("si,ij,sj->s", c.conj(), a, c).real
    assert q.min() >= value - 1e-8
    assert value / T <= j_functional(interval_basis, half_interval, N).j_value + 0.05


def test_finite_time_constant_nonincreasing_in_n(interval_basis, half_interval):
    T = 0.7
    vals = [finite_time_constant(interval_basis, half_interval, n, T) / T for n in range(1, 16)]
    assert all(b <= a + 1e-10 for a, b in zip(vals, vals[1:]))


def test_finite_time_constant_errors(interval_basis, half_interval):
    with pytest.raises(ConfigurationError):
        finite_time_constant(interval_basis, half_interval, 3, -1.0)


def test_asymptotic_equals_j_for_simple_spectrum(interval_basis):
    omega = IntervalUnion(((0.1, 0.35), (0.6, 0.7)))
    fam = perturbed_family(interval_basis, quadratic_well(0.2, 0.3), 50)
    assert asymptotic_constant(fam, omega) == pytest.approx(j_functional(fam, omega).j_value,
                                                            abs=1e-15)


def test_asymptotic_disk_whole_domain(disk_basis):
    got = asymptotic_constant(disk_basis, None, 25, grid=FINE_DISK)
    assert got == pytest.approx(1.0, abs=1e-4)


def test_asymptotic_disk_sectors_below_j(disk_basis):
    for fam in (disk_basis,
                perturbed_family(disk_basis, linear_core(0.4, 0.5), mock_degenerate=True),
                perturbed_family(disk_basis, inverse_square_core(0.2, 0.1), mock_degenerate=True)):
        assert asymptotic_constant(fam, QUARTER_SECTORS) <= \
            j_functional(fam, QUARTER_SECTORS).j_value + 1e-15


def test_asymptotic_cluster_reduction_by_sampling(disk_basis):
    sector = RadialAngular(((0.0, 1.0), (2.0, 2.5)))
    g = subset_gram(disk_basis, sector, 25)
    t = np.linspace(0, 2 * math.pi, 10_000, endpoint=False)
    c = np.stack([np.cos(t), np.sin(t)])
    worst = math.inf
    for cluster in disk_basis.clusters:
        block = g[np.ix_(cluster, cluster)]
        if len(cluster) == 1:
            worst = min(worst, block[0, 0])
        else:
            worst = min(worst, float(np.min(np.einsum("is,ij,js->s", c, block, c))))
    assert asymptotic_constant(disk_basis, sector, 25) == pytest.approx(worst, abs=1e-6)


class _TripleCluster:
    """Interval basis that pretends its first three modes share an eigenvalue."""

    def __init__(self, basis):
        self._basis = basis
        self.domain = basis.domain
        self.eigenvalues = basis.eigenvalues
        self.labels = basis.labels
        self.clusters = ((0, 1, 2),) + tuple((i,) for i in range(3, len(basis)))

    def __len__(self):
        return len(self._basis)

    def evaluate(self, *coords, count=None):
        return self._basis.evaluate(*coords, count=count)


def test_asymptotic_rejects_large_clusters(interval_basis, half_interval):
    with pytest.raises(UnsupportedDegeneracyError):
        asymptotic_constant(_TripleCluster(interval_basis), half_interval, 10)


def test_relaxed_gap_zero_at_zero_epsilon(interval_basis):
    a = Density.constant(0.5, default_grid(1))
    assert relaxed_gap(a, quadratic_well(0.3, 0.0), interval_basis, 50) == 0.0
    assert j_functional(interval_basis, a).j_value == pytest.approx(0.5, abs=1e-6)


@pytest.mark.parametrize("delta", [0.1, 0.3, 0.475])
def test_relaxed_gap_scales_quadratically(interval_basis, delta):
    a = Density.constant(0.5, default_grid(1))
    gaps = [relaxed_gap(a, quadratic_well(delta, e), interval_basis, 200)
            for e in (0.05, 0.1, 0.2)]
    assert 3.0 <= gaps[1] / gaps[0] <= 5.0
    assert 3.0 <= gaps[2] / gaps[1] <= 5.0


def test_relaxed_gap_needs_density(interval_basis, half_interval):
    with pytest.raises(ConfigurationError):
        relaxed_gap(half_interval, quadratic_well(0.3, 0.1), interval_basis)


@pytest.mark.parametrize("lo,hi,delta", [(0.2, 0.8, 0.1), (0.0, 0.7, 0.2), (0.3, 0.9, 0.15)])
def test_small_perturbation_stays_in_bracket(interval_basis, lo, hi, delta):
    omega = IntervalUnion(((lo, hi),))
    pot = quadratic_well(delta)
    eps = 0.01 / pot.sup_norm
    base = j_functional(interval_basis, omega, 200).j_value
    pert = j_functional(perturbed_family(interval_basis, pot.with_epsilon(eps), 200),
                        omega, 200).j_value
    assert 0.5 * base <= pert <= 1.5 * base


def test_masses_of_subsets_lie_in_unit_interval(disk_basis):
    fam = perturbed_family(disk_basis, linear_core(0.4, 1.0), mock_degenerate=True)
    m = mode_masses(fam, QUARTER_SECTORS)
    assert np.all(m >= -1e-9) and np.all(m <= 1 + 1e-9)


def test_report_to_dict_uses_plain_types(disk_basis):
    rep = j_functional(disk_basis, QUARTER_SECTORS, 5)
    d = rep.to_dict()
    assert isinstance(rep, ObservabilityReport)
    assert isinstance(d["argmin"], list) and len(d["per_mode_mass"]) == 5
    assert not any(isinstance(v, complex) for v in d["per_mode_mass"])
    assert cmath.isfinite(d["value"])
