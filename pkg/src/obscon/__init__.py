"""Observability functionals for Schrodinger operators -Laplacian + eps V0.

Covers the unit interval and the unit disk: Dirichlet eigenbases, first/second
order perturbed eigenpairs, eigenfunction masses on observation subsets, the
finite-time and asymptotic observability constants, and the relaxed
optimal-placement problem.
"""
from .errors import (
    CapacityError,
    ConfigurationError,
    DegenerateSpectrumError,
    DomainError,
    InvalidIndexError,
    NumericalFailure,
    ObsconError,
    UnsupportedDegeneracyError,
    UnsupportedOrderError,
)
from .observability import (
    GramBlock,
    ObservabilityReport,
    alpha,
    asymptotic_constant,
    finite_time_constant,
    gram_block,
    j_functional,
    mode_mass,
    relaxed_gap,
)
from .optimizer import RelaxedSolution, maximize_relaxed, search_indicator
from .perturbation import (
    Potential,
    first_order_eigenvalue,
    first_order_eigenvector,
    inverse_square_core,
    kato_diagnostics,
    linear_core,
    perturbed_family,
    quadratic_well,
    second_order_eigenvalue,
)
from .quadrature import (
    QUARTER_SECTORS,
    Density,
    Grid1D,
    GridDisk,
    IntervalUnion,
    RadialAngular,
    integrate_1d,
    integrate_disk,
)
from .special_functions import BesselZeroTable, bessel_j, bessel_j_prime, bessel_zero
from .spectral_basis import Domain, EigenPair, SpectralBasis, enumerate_basis

__version__ = "0.1.0"
