"""Fast consistency checks run by ``obscon selftest``."""
from __future__ import annotations

import math
import sys

from .observability import alpha, finite_time_constant, j_functional
from .perturbation import perturbed_family, quadratic_well
from .quadrature import QUARTER_SECTORS, IntervalUnion
from .special_functions import bessel_j, bessel_zero
from .spectral_basis import enumerate_basis


def _checks():
    interval = enumerate_basis("interval", 200)
    disk = enumerate_basis("disk", 25)
    half = IntervalUnion(((0.0, 0.5),))
    yield "bessel zeros", max(abs(bessel_j(j, bessel_zero(j, k)))
                              for j in range(5) for k in range(1, 6)) < 1e-12
    yield "alpha on a full period", abs(alpha(2 * math.pi, 0.0, 1.0)) < 1e-12
    yield "unperturbed interval J = 0.5", abs(j_functional(interval, half, 200).j_value - 0.5) < 1e-3
    yield "unperturbed disk J = 0.5", abs(j_functional(disk, QUARTER_SECTORS, 25).j_value - 0.5) < 1e-3
    yield "1x1 finite-time constant", abs(finite_time_constant(interval, half, 1, 2.0) - 1.0) < 1e-3
    fam = perturbed_family(interval, quadratic_well(0.1, 0.01))
    yield "reference cell eps=0.01 delta=0.1", abs(j_functional(fam, half, 200).j_value
                                                   - 0.499997124) < 5e-6


def run_selftest(stream=sys.stdout):
    """Print one line per check; return 0 if all pass, 2 otherwise."""
    failed = 0
    for name, ok in _checks():
        stream.write(f"{'PASS' if ok else 'FAIL'}  {name}\n")
        failed += not ok
    return 0 if failed == 0 else 2
