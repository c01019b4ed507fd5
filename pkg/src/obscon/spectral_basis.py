"""Dirichlet eigenbases of -Laplacian on the unit interval and the unit disk."""
from __future__ import annotations

import enum
import heapq
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ConfigurationError, InvalidIndexError
from .special_functions import DEFAULT_TABLE, MAX_ORDER, MAX_RANK, bessel_j, bessel_j_prime

CLUSTER_RTOL = 1e-9
SQRT2 = math.sqrt(2.0)
PI_SQUARED = math.pi ** 2


class Domain(enum.Enum):
    UNIT_INTERVAL = "interval"
    UNIT_DISK = "disk"

    @property
    def dim(self):
        return 1 if self is Domain.UNIT_INTERVAL else 2

    @property
    def measure(self):
        return 1.0 if self is Domain.UNIT_INTERVAL else math.pi

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ConfigurationError(f"unknown domain {value!r}; use 'interval' or 'disk'") from None


@dataclass(frozen=True)
class EigenPair:
    """One unperturbed Dirichlet eigenpair.

    ``index`` is ``(n,)`` on the interval and ``(j, k, m)`` on the disk.
    Call the pair (or ``evaluate``) with ``x`` on the interval and with
    ``(r, theta)`` on the disk.
    """

    eigenvalue: float
    index: tuple
    domain: Domain
    zero: float = 0.0           # z_jk on the disk; unused on the interval
    radial_norm: float = 1.0    # |J_j'(z_jk)| on the disk
    is_unperturbed: bool = True

    def evaluate(self, *coords):
        if self.domain is Domain.UNIT_INTERVAL:
            (x,) = coords
            (n,) = self.index
            return SQRT2 * np.sin(n * math.pi * np.asarray(x, dtype=float))
        r, theta = coords
        j, _, m = self.index
        radial = _radial(j, self.zero, self.radial_norm, r)
        if j == 0:
            return radial / math.sqrt(2.0 * math.pi)
        ang = np.cos(j * np.asarray(theta)) if m == 1 else np.sin(j * np.asarray(theta))
        return radial * ang / math.sqrt(math.pi)

    __call__ = evaluate

    @property
    def label(self):
        return self.index[0] if len(self.index) == 1 else self.index


def _radial(j, z, norm, r):
    r = np.asarray(r, dtype=float)
    # meshes repeat each radius many times; evaluate the Bessel function once per radius
    uniq, inverse = np.unique(r, return_inverse=True)
    vals = bessel_j(j, z * np.clip(uniq, 0.0, None))
    return (SQRT2 / norm) * vals[inverse].reshape(r.shape)


def interval_pair(n):
    """Eigenpair ``(n^2 pi^2, sqrt(2) sin(n pi x))`` of the unit interval."""
    if int(n) != n or n < 1:
        raise InvalidIndexError(f"interval mode index must be >= 1, got {n!r}")
    n = int(n)
    return EigenPair(n * n * PI_SQUARED, (n,), Domain.UNIT_INTERVAL)


def disk_pair(j, k, m=1, table=None):
    """Eigenpair with radial part ``sqrt(2) J_j(z_jk r)/|J_j'(z_jk)|``.

    The angular factor is ``1/sqrt(2 pi)`` for ``j = 0`` and ``cos(j theta)/sqrt(pi)``
    (``m = 1``) or ``sin(j theta)/sqrt(pi)`` (``m = 2``) otherwise, which makes the
    family orthonormal in L^2(disk).
    """
    if int(j) != j or j < 0 or int(k) != k or k < 1 or m not in (1, 2):
        raise InvalidIndexError(f"invalid disk mode index ({j}, {k}, {m})")
    if j == 0 and m == 2:
        raise InvalidIndexError("j = 0 has only the m = 1 mode")
    j, k = int(j), int(k)
    if j > MAX_ORDER or k > MAX_RANK:
        raise CapacityError(f"disk mode ({j}, {k}) outside the zero table range")
    z = (table or DEFAULT_TABLE).zero(j, k)
    return EigenPair(z * z, (j, k, m), Domain.UNIT_DISK, zero=z,
                     radial_norm=abs(bessel_j_prime(j, z)))


@dataclass(frozen=True)
class SpectralBasis:
    """First ``len(pairs)`` eigenpairs in nondecreasing eigenvalue order.

    ``clusters`` partitions positions 0..len-1 into runs of equal eigenvalue.
    """

    domain: Domain
    pairs: tuple
    clusters: tuple

    def __len__(self):
        return len(self.pairs)

    @property
    def eigenvalues(self):
        return np.array([p.eigenvalue for p in self.pairs])

    @property
    def labels(self):
        return [p.label for p in self.pairs]

    def evaluate(self, *coords, count=None):
        """Stack of mode values, shape ``(count, *coords_shape)``."""
        pairs = self.pairs if count is None else self.pairs[:count]
        return np.stack([p.evaluate(*coords) for p in pairs])

    def cluster_of(self, position):
        for c in self.clusters:
            if position in c:
                return c
        raise IndexError(position)

    def truncated(self, count):
        if count > len(self.pairs):
            raise ConfigurationError(f"basis has only {len(self.pairs)} modes")
        clusters = tuple(
            t for t in (tuple(i for i in c if i < count) for c in self.clusters) if t
        )
        return SpectralBasis(self.domain, self.pairs[:count], clusters)


def group_clusters(eigenvalues, rtol=CLUSTER_RTOL):
    clusters, current = [], [0]
    for i in range(1, len(eigenvalues)):
        prev = eigenvalues[current[0]]
        if abs(eigenvalues[i] - prev) <= rtol * max(abs(prev), 1.0):
            current.append(i)
        else:
            clusters.append(tuple(current))
            current = [i]
    if len(eigenvalues):
        clusters.append(tuple(current))
    return tuple(clusters)


def _disk_pairs(count, table):
    # z_{j,k} < z_{j,k+1} and z_{j,1} < z_{j+1,1}, so popping from this heap
    # yields the zeros in increasing order.  Zeros outside the table are pushed
    # as sentinels keyed by a lower bound (consecutive zeros are > 3 apart);
    # popping one means the request is beyond capacity.
    heap = [(table.zero(0, 1), 0, 1, False)]
    pairs = []
    while len(pairs) < count:
        z, j, k, beyond = heapq.heappop(heap)
        if beyond:
            raise CapacityError(
                f"{count} disk modes need zeros beyond order {MAX_ORDER} / rank {MAX_RANK}"
            )
        pairs.extend(disk_pair(j, k, m, table) for m in ((1,) if j == 0 else (1, 2)))
        if k + 1 <= MAX_RANK:
            heapq.heappush(heap, (table.zero(j, k + 1), j, k + 1, False))
        else:
            heapq.heappush(heap, (z + 3.0, j, k + 1, True))
        if k == 1:
            if j + 1 <= MAX_ORDER:
                heapq.heappush(heap, (table.zero(j + 1, 1), j + 1, 1, False))
            else:
                heapq.heappush(heap, (z, j + 1, 1, True))
    pairs = pairs[:count]
    # stable sort: equal eigenvalues keep lexicographic (j, k, m) order
    pairs.sort(key=lambda p: (p.eigenvalue, p.index))
    return pairs


def enumerate_basis(domain, count, table=None):
    """First ``count`` Dirichlet eigenpairs of ``domain`` in eigenvalue order."""
    domain = Domain.parse(domain)
    if int(count) != count or count < 1:
        raise ConfigurationError(f"count must be a positive integer, got {count!r}")
    if domain is Domain.UNIT_INTERVAL:
        pairs = [interval_pair(n) for n in range(1, int(count) + 1)]
    else:
        pairs = _disk_pairs(int(count), table or DEFAULT_TABLE)
    return SpectralBasis(domain, tuple(pairs),
                         group_clusters(np.array([p.eigenvalue for p in pairs])))
