"""Shared fixtures and frozen reference data.

Reference values are of three kinds:
  * reference table values (9 decimals),
  * values computed once with an independent oracle (mpmath at 40 digits,
    scipy's HiGHS LP solver) and frozen here,
  * live oracles that are too cheap to freeze (a tridiagonal finite-difference
    eigensolver from scipy).
"""
import numpy as np
import pytest
from scipy.linalg import eigh_tridiagonal

from obscon.quadrature import IntervalUnion
from obscon.spectral_basis import enumerate_basis

EPS_GRID = (0.01, 0.05, 0.1, 0.5, 1.0)
DELTA_GRID = (0.1, 0.2, 0.3, 0.4, 0.475)

# J_N on [0, 0.5], interval, V0 = x^2 on [0.5 - delta, 0.5 + delta], N = 200.
TABLE_INTERVAL = np.array([
    [0.499997124, 0.499984760, 0.499972504, 0.499968543, 0.499968340],
    [0.499985619, 0.499923804, 0.499862542, 0.499842757, 0.499841748],
    [0.499971238, 0.499847620, 0.499725137, 0.499685621, 0.499683617],
    [0.499856202, 0.499238531, 0.498627808, 0.498432406, 0.498422979],
    [0.499712437, 0.498478145, 0.497260919, 0.496875569, 0.496858189],
])

# J_N on the quarter sectors of the disk, V0 = (1/r^2) chi_{r <= delta}, N = 25.
# Two reference cells are garbled at the source: (0.5, 0.1) is taken as 0.5 and
# (1, 0.4) as 0.499995642 once the stray character is dropped.
TABLE_DISK_INVERSE_SQUARE = np.array([
    [0.499999996, 0.499999997, 0.499999763, 0.499995606, 0.499999756],
    [0.5, 0.499999988, 0.499998816, 0.499987946, 0.499998898],
    [0.5, 0.499999975, 0.499997638, 0.499999650, 0.499998085],
    [0.5, 0.499999988, 0.499998824, 0.499988114, 0.499998896],
    [0.499999999, 0.499999997, 0.499999764, 0.499995642, 0.499999756],
])

# Same, V0 = r chi_{r <= delta}.
TABLE_DISK_LINEAR = np.array([
    [0.5, 0.5, 0.499999995, 0.499999759, 0.499998584],
    [0.5, 0.5, 0.499999975, 0.499998825, 0.499999896],
    [0.5, 0.5, 0.499999950, 0.499997720, 0.499999794],
    [0.499999999, 0.499999999, 0.499999748, 0.499991449, 0.499999063],
    [0.499999997, 0.499999998, 0.499999496, 0.499990010, 0.499998365],
])

# mpmath.besselj at 40 digits: (order, x, J_order(x)).
BESSEL_VALUES = [
    (0, 1.0, 0.7651976865579666),
    (1, 2.5, 0.49709410246427405),
    (2, 7.9, -0.13887338916488554),
    (3, 8.1, -0.29026442564925165),
    (5, 10.3, -0.2562083718639027),
    (10, 25.0, -0.07517984394852328),
    (20, 12.0, 0.00025121327024539954),
    (33, 150.0, 0.058158388262573656),
    (60, 61.0, 0.13976523619361894),
    (0, 199.5, -0.039613637334785144),
]

# mpmath.besseljzero at 40 digits: (order, rank, zero).
BESSEL_ZEROS = [
    (0, 1, 2.404825557695773),
    (1, 1, 3.8317059702075125),
    (0, 2, 5.520078110286311),
    (2, 3, 11.619841172149059),
    (5, 3, 15.70017407971167),
    (11, 1, 15.589847884455486),
    (20, 7, 48.43423919520568),
    (60, 60, 275.3961761760795),
]

# mpmath.quad of int 2 x^2 sin^2(n pi x) over [0.5 - delta, 0.5 + delta]: (delta, n, value).
FIRST_ORDER_COEFFS = [
    (0.1, 1, 0.09803067721754072), (0.1, 2, 0.012445992085411558), (0.1, 3, 0.0759874189527907),
    (0.2, 1, 0.18405071139117704), (0.3, 2, 0.20476961658909915), (0.3, 3, 0.1498789833327528),
    (0.4, 2, 0.2996783971526831), (0.475, 1, 0.28257383293283855),
    (0.475, 3, 0.3268229100299464),
]

# -sum_{k != n, k <= 200} V_nk^2 / (lambda_k - lambda_n) with mpmath matrix elements.
SECOND_ORDER_COEFFS = [
    (0.1, 1, -0.00011834076116208934), (0.1, 2, -6.882188146490551e-06),
    (0.3, 1, -0.0005436021211700507), (0.3, 2, 0.0002683343984676407),
]

# Exact optimum of the discretised relaxed problem (left-point grid, n = 1000),
# unperturbed interval basis, from scipy.optimize.linprog(method="highs").
RELAXED_LP_OPTIMUM = {
    (1, 0.25): 0.47507833855829906, (1, 0.5): 0.8183088389855503,
    (1, 0.75): 0.9750783385582998,
    (5, 0.25): 0.2985323420245221, (5, 0.5): 0.587444491419291,
    (5, 0.75): 0.8501664412983868,
    (20, 0.25): 0.2622451142123436, (20, 0.5): 0.5228154807098978,
    (20, 0.75): 0.7787321810857354,
    (200, 0.25): 0.2512152075263328, (200, 0.5): 0.502299552796783,
    (200, 0.75): 0.7529530205453457,
}

FD_POINTS = 1000


def fd_eigenvalue(epsilon, delta, k, points=FD_POINTS):
    """k-th eigenvalue of the finite-difference operator -u'' + eps V0 u on [0, 1].

    V0 = x^2 on [0.5 - delta, 0.5 + delta] is averaged exactly over each cell so
    the jump in V0 does not spoil the O(h^2) accuracy. Bisection on the
    tridiagonal matrix (LAPACK stebz) selects the single eigenvalue.
    """
    h = 1.0 / (points + 1)
    x = np.arange(1, points + 1) * h
    lo, hi = 0.5 - delta, 0.5 + delta
    a = np.clip(x - h / 2, lo, hi)
    b = np.clip(x + h / 2, lo, hi)
    v = (b ** 3 - a ** 3) / (3 * h)
    w = eigh_tridiagonal(2 / h ** 2 + epsilon * v, -np.ones(points - 1) / h ** 2,
                         select="i", select_range=(k - 1, k - 1), lapack_driver="stebz")[0]
    return float(w[0])


def fd_eigenvector(epsilon, delta, k, points=FD_POINTS):
    """Nodes and the L2-normalised k-th FD eigenvector, sign fixed by the first interior lobe."""
    h = 1.0 / (points + 1)
    x = np.arange(1, points + 1) * h
    lo, hi = 0.5 - delta, 0.5 + delta
    a = np.clip(x - h / 2, lo, hi)
    b = np.clip(x + h / 2, lo, hi)
    v = (b ** 3 - a ** 3) / (3 * h)
    _, vec = eigh_tridiagonal(2 / h ** 2 + epsilon * v, -np.ones(points - 1) / h ** 2,
                              select="i", select_range=(k - 1, k - 1))
    u = vec[:, 0] / np.sqrt(h)
    if u[np.argmax(np.abs(u[: points // (2 * k)]))] < 0:
        u = -u
    return x, u, h


@pytest.fixture(scope="session")
def interval_basis():
    return enumerate_basis("interval", 200)


@pytest.fixture(scope="session")
def disk_basis():
    return enumerate_basis("disk", 25)


@pytest.fixture(scope="session")
def half_interval():
    return IntervalUnion(((0.0, 0.5),))


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
