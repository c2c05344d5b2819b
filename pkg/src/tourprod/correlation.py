"""One-dimensional tours through the correlations of consecutive steps.

Steps ``r[i+1] - r[i]`` of a tour on the line are Gaussian with variance 2.
Normalised, neighbouring steps have correlation -1/2 and all others 0.
The expected product of the step lengths then follows from arcsin formulas
in the (partial) correlations.

All step indices in this module are **1-based**: ``rho(1, 2)`` is the
correlation of the first and second steps.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, DomainError, UnsupportedError
from .special import gaussian_step_mean

__all__ = [
    "StepCorrelationStructure",
    "PartialCorrelation",
    "step_correlations",
    "partial_correlation_1",
    "partial_correlation_2",
    "gram_determinant",
    "orthant_probability_gamma",
    "mu1_open",
]


@dataclass(frozen=True, eq=False)
class StepCorrelationStructure:
    n: int
    matrix: np.ndarray

    def rho(self, i, j):
        """Correlation of steps ``i`` and ``j`` (1-based)."""
        self._check(i, j)
        return float(self.matrix[i - 1, j - 1])

    def _check(self, *idx):
        for i in idx:
            if not 1 <= i <= self.n:
                raise DomainError(f"step index {i} outside 1..{self.n}")


@dataclass(frozen=True)
class PartialCorrelation:
    value: float
    conditioning_set: tuple

    def __float__(self):
        return self.value


def step_correlations(n):
    """Tridiagonal correlation matrix of ``n`` consecutive steps."""
    if int(n) != n or n < 1:
        raise DomainError(f"need n >= 1 steps, got {n!r}")
    n = int(n)
    m = np.eye(n)
    idx = np.arange(n - 1)
    m[idx, idx + 1] = -0.5
    m[idx + 1, idx] = -0.5
    m.setflags(write=False)
    return StepCorrelationStructure(n, m)


def _distinct(*idx):
    if len(set(idx)) != len(idx):
        raise DomainError(f"indices must be distinct, got {idx}")


def _partial1(s, i, j, k):
    rik, rjk = s.rho(i, k), s.rho(j, k)
    denom = (1.0 - rik * rik) * (1.0 - rjk * rjk)
    if denom <= 0.0:
        raise DegenerateError(f"rho_{i}{k} or rho_{j}{k} has magnitude 1")
    return (s.rho(i, j) - rik * rjk) / math.sqrt(denom)


def partial_correlation_1(s, i, j, k):
    """Correlation of steps i and j with step k regressed out."""
    _distinct(i, j, k)
    return PartialCorrelation(_partial1(s, i, j, k), (k,))


def partial_correlation_2(s, i, j, k, l):
    """Correlation of steps i and j with steps k and l regressed out.

    Built by nesting the single-variable formula: first condition on k,
    then on l.
    """
    _distinct(i, j, k, l)
    r_ij = _partial1(s, i, j, k)
    r_il = _partial1(s, i, l, k)
    r_jl = _partial1(s, j, l, k)
    denom = (1.0 - r_il * r_il) * (1.0 - r_jl * r_jl)
    if denom <= 0.0:
        raise DegenerateError(f"partial correlations given {k} reach magnitude 1")
    return PartialCorrelation((r_ij - r_il * r_jl) / math.sqrt(denom), (k, l))


def gram_determinant(s):
    """Determinant R_n of the step correlation matrix.

    Uses the three-term recurrence for tridiagonal determinants, so for the
    canonical structure the result is exactly ``(n + 1) / 2**n``.
    """
    prev, cur = 1.0, float(s.matrix[0, 0])
    for k in range(1, s.n):
        off = float(s.matrix[k - 1, k]) * float(s.matrix[k, k - 1])
        prev, cur = cur, float(s.matrix[k, k]) * cur - off * prev
    return cur


# P(r1 < r2 < ... < r5) for iid continuous points: one ordering out of 5!.
_ORTHANT_4 = 1.0 / math.factorial(5)


def orthant_probability_gamma():
    """Return ``(P, gamma)`` for four consecutive steps on the line.

    P is the probability that all four steps are positive and gamma is
    E[sgn of their product]. They are tied by
    ``P = 1/16 + sum_{i<j} asin(rho_ij) / (8 pi) + gamma / 16``.
    P is known exactly (1/120), so gamma is solved from the identity.
    """
    s = step_correlations(4)
    arcs = math.fsum(math.asin(s.rho(i, j)) for i, j in itertools.combinations(range(1, 5), 2))
    gamma = 16.0 * (_ORTHANT_4 - 1.0 / 16.0 - arcs / (8.0 * math.pi))
    return _ORTHANT_4, gamma


def _asin(x):
    if not -1.0 < x < 1.0:
        raise DomainError(f"arcsin argument {x!r} not strictly inside (-1, 1)")
    return math.asin(x)


def mu1_open(n):
    """E of the product of step lengths of an open ``n``-step tour on the line.

    Evaluated from the arcsin/partial-correlation formulas (n <= 4), not
    from the closed-form catalogue.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"need n >= 1 steps, got {n!r}")
    n = int(n)
    if n == 1:
        return gaussian_step_mean(1)
    if n > 4:
        raise UnsupportedError("no correlation formula for open tours beyond 4 steps")
    s = step_correlations(n)
    r = s.rho
    root_det = math.sqrt(gram_determinant(s))
    if n == 2:
        return 4.0 / math.pi * (root_det + r(1, 2) * _asin(r(1, 2)))
    if n == 3:
        total = root_det
        # term for pair (i, j) conditioned on the remaining step k
        for i, j, k in ((1, 2, 3), (1, 3, 2), (2, 3, 1)):
            pc = partial_correlation_1(s, i, j, k).value
            total += (r(i, j) + r(i, k) * r(j, k)) * _asin(pc)
        return 8.0 / math.pi**1.5 * total
    total = root_det
    # pair (i, j) conditioned on the complementary pair (k, l)
    for k, l in itertools.combinations(range(1, 5), 2):
        i, j = (x for x in range(1, 5) if x not in (k, l))
        pc = partial_correlation_2(s, i, j, k, l).value
        coeff = r(i, j) + r(k, i) * r(k, j) + r(l, i) * r(l, j)
        total += math.sqrt(1.0 - r(k, l) ** 2) * coeff * _asin(pc)
    _, gamma = orthant_probability_gamma()
    pairing = r(1, 2) * r(3, 4) + r(1, 3) * r(2, 4) + r(1, 4) * r(2, 3)
    return 16.0 / math.pi**2 * total + 4.0 * pairing * gamma
