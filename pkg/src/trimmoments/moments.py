"""Trimmed moments: sample versions, population constants and schemes.

The j-th sample trimmed moment discards the lowest floor(n*a_j) and
highest floor(n*b_j) order statistics of the data and averages h_j over
the kept block.  Its population counterpart is the integral of
H_j = h_j o F^{-1} over the probability window [a_j, 1-b_j], normalized
by the window length.  The constants c_k (normal quantile powers) and
kappa_k (powers of Delta(u) = log(-log u)) make those population
moments explicit for the families supported here.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .models import Family, ParameterVector
from .quadrature import integrate

__all__ = [
    "SchemeError",
    "SchemeTag",
    "TrimmingScheme",
    "MomentConstants",
    "validate_scheme",
    "sample_trimmed_moment",
    "c_k",
    "kappa_k",
    "eta_constants",
    "zeta_constants",
    "population_moments",
]


class SchemeError(ValueError):
    """Invalid trimming proportions or window ordering."""


class SchemeTag(enum.Enum):
    EQUAL = "equal"
    CONDITION8 = "condition8"
    CONDITION12 = "condition12"


@dataclass(frozen=True)
class TrimmingScheme:
    """Two per-moment trimming windows with a validated nesting order."""

    a1: float
    b1: float
    a2: float
    b2: float
    tag: SchemeTag

    @property
    def bbar1(self) -> float:
        return 1.0 - self.b1

    @property
    def bbar2(self) -> float:
        return 1.0 - self.b2

    def window(self, j: int):
        """(a_j, 1-b_j) for moment j in {1, 2}."""
        if j == 1:
            return (self.a1, self.bbar1)
        if j == 2:
            return (self.a2, self.bbar2)
        raise ValueError(f"moment index must be 1 or 2, got {j}")

    def proportions(self):
        return (self.a1, self.b1, self.a2, self.b2)

    def label(self) -> str:
        return (f"({self.a1:g},{self.b1:g})/({self.a2:g},{self.b2:g})")


def validate_scheme(a1, b1, a2, b2) -> TrimmingScheme:
    """Validate two trimming pairs and classify their window ordering.

    Accepted orderings are the two nested configurations,
    a2 <= a1 < 1-b2 <= 1-b1 or a1 <= a2 < 1-b1 <= 1-b2; a scheme
    satisfying both (equal proportions) is tagged Equal.  The four
    remaining orderings of overlapping but non-nested windows are
    rejected.
    """
    for name, v in (("a1", a1), ("b1", b1), ("a2", a2), ("b2", b2)):
        if not (0.0 <= v < 1.0):
            raise SchemeError(f"{name} must lie in [0, 1), got {v}")
    if a1 + b1 >= 1.0:
        raise SchemeError(f"a1 + b1 must be < 1, got {a1 + b1}")
    if a2 + b2 >= 1.0:
        raise SchemeError(f"a2 + b2 must be < 1, got {a2 + b2}")
    bbar1 = 1.0 - b1
    bbar2 = 1.0 - b2
    # The boundary case a_i == bbar_j (windows touching rather than
    # overlapping) is admitted: every quantity below is continuous in
    # the window endpoints there.
    cond8 = a2 <= a1 <= bbar2 <= bbar1
    cond12 = a1 <= a2 <= bbar1 <= bbar2
    if cond8 and cond12:
        tag = SchemeTag.EQUAL
    elif cond8:
        tag = SchemeTag.CONDITION8
    elif cond12:
        tag = SchemeTag.CONDITION12
    else:
        raise SchemeError(
            "trimming windows are not nested: need a2 <= a1 and b2 <= b1 "
            f"or a1 <= a2 and b1 <= b2, got ({a1},{b1}) and ({a2},{b2})"
        )
    return TrimmingScheme(a1, b1, a2, b2, tag)


def sample_trimmed_moment(data, a, b, h):
    """Mean of h over the order statistics kept by the (a, b) trim.

    The data are sorted, the lowest floor(n*a) and highest floor(n*b)
    observations are discarded, and h is averaged over the kept block.
    """
    x = np.sort(np.asarray(data, dtype=float))
    n = x.size
    if n == 0:
        raise ValueError("data must be nonempty")
    lo = math.floor(n * a)
    hi = math.floor(n * b)
    if n - lo - hi < 1:
        raise SchemeError(
            f"trimming ({a}, {b}) keeps no observations out of n={n}"
        )
    kept = x[lo: n - hi]
    return float(np.mean(h(kept)))


@lru_cache(maxsize=None)
def _c_cached(family_value: str, a: float, bbar: float, k: int) -> float:
    if family_value == "frechet":
        f = lambda u: np.log(-np.log(u)) ** k
    else:
        f = lambda u: ndtri(u) ** k
    return integrate(f, a, bbar) / (bbar - a)


def _check_window(a, bbar, k):
    if not (0.0 <= a < bbar <= 1.0):
        raise SchemeError(f"window must satisfy 0 <= a < bbar <= 1, got ({a}, {bbar})")
    if k not in (1, 2, 3, 4):
        raise ValueError(f"k must be in 1..4, got {k}")


def c_k(family: Family, a: float, bbar: float, k: int) -> float:
    """Window-averaged k-th power of the standard normal quantile."""
    if family is Family.FRECHET:
        raise ValueError("c_k is defined for the location-scale families; use kappa_k")
    _check_window(a, bbar, k)
    return _c_cached("normal", a, bbar, k)


def kappa_k(a: float, bbar: float, k: int) -> float:
    """Window-averaged k-th power of Delta(u) = log(-log u)."""
    _check_window(a, bbar, k)
    return _c_cached("frechet", a, bbar, k)


@dataclass(frozen=True)
class MomentConstants:
    """Scheme-level constants used to invert the moment equations.

    m1_11 is the first-order constant on window 1, m1_22 and m2_22 the
    first and second-order constants on window 2; eta_12 and eta_22 are
    the quadratic forms eta(a1, bbar2) and eta(a2, bbar2) (zeta for the
    Frechet family) and eta_r their ratio.
    """

    kind: str  # "c" (location-scale) or "kappa" (Frechet)
    m1_11: float
    m1_22: float
    m2_22: float
    eta_12: float
    eta_22: float
    eta_r: float


def _constants(scheme: TrimmingScheme, const) -> MomentConstants:
    a1, bbar1 = scheme.window(1)
    a2, bbar2 = scheme.window(2)
    m1_11 = const(a1, bbar1, 1)
    m1_22 = const(a2, bbar2, 1)
    m2_22 = const(a2, bbar2, 2)
    eta_12 = m1_11 * m1_11 - 2.0 * m1_11 * m1_22 + m2_22
    eta_22 = m2_22 - m1_22 * m1_22
    kind = "kappa" if const is kappa_k else "c"
    return MomentConstants(kind, m1_11, m1_22, m2_22, eta_12, eta_22,
                           eta_22 / eta_12)


def eta_constants(family: Family, scheme: TrimmingScheme) -> MomentConstants:
    """Location-scale constants c and the eta quadratic forms."""
    return _constants(scheme, lambda a, b, k: c_k(family, a, b, k))


def zeta_constants(scheme: TrimmingScheme) -> MomentConstants:
    """Frechet constants kappa and the zeta quadratic forms."""
    return _constants(scheme, kappa_k)


def population_moments(family: Family, params: ParameterVector,
                       scheme: TrimmingScheme):
    """Population trimmed moments (T1, T2).

    For the location-scale families these are moments of X itself (of
    log X for lognormal data, since the fit runs on logs); for Frechet
    they are moments of log X.
    """
    params.validate(family)
    a1, bbar1 = scheme.window(1)
    a2, bbar2 = scheme.window(2)
    if family is Family.FRECHET:
        beta, sigma = params.beta, params.sigma
        k1_11 = kappa_k(a1, bbar1, 1)
        k1_22 = kappa_k(a2, bbar2, 1)
        k2_22 = kappa_k(a2, bbar2, 2)
        ls = math.log(sigma)
        t1 = ls - beta * k1_11
        t2 = ls * ls - 2.0 * beta * ls * k1_22 + beta * beta * k2_22
        return t1, t2
    theta, sigma = params.theta, params.sigma
    c1_11 = c_k(family, a1, bbar1, 1)
    c1_22 = c_k(family, a2, bbar2, 1)
    c2_22 = c_k(family, a2, bbar2, 2)
    t1 = theta + sigma * c1_11
    t2 = theta * theta + 2.0 * theta * sigma * c1_22 + sigma * sigma * c2_22
    return t1, t2
