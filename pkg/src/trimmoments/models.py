"""Parametric families: normal, lognormal and Frechet (location zero).

Each family exposes quantile/cdf/pdf/sampling plus the moment transform
functions h1, h2 used by the trimmed-moment machinery.  The lognormal
model is a thin adapter over the normal one: it is fitted by applying
the location-scale machinery to log-data, with (theta, sigma) reported
on the log scale.

Parameters
----------
Location-scale families carry (theta, sigma); the Frechet family
carries (beta, sigma) where beta = 1/alpha is the tail index and the
location is fixed at zero.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

__all__ = [
    "Family",
    "ParameterVector",
    "standard_quantile",
    "quantile",
    "cdf",
    "pdf",
    "sample",
    "h_functions",
]


class Family(enum.Enum):
    NORMAL = "normal"
    LOGNORMAL = "lognormal"
    FRECHET = "frechet"

    @classmethod
    def parse(cls, name: str) -> "Family":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown family {name!r}") from None


@dataclass(frozen=True)
class ParameterVector:
    """Model parameters.

    theta is the location (log-scale location for lognormal), sigma the
    scale, and beta the Frechet tail index (1/alpha); beta is None for
    the location-scale families.
    """

    theta: float = 0.0
    sigma: float = 1.0
    beta: Optional[float] = None

    def validate(self, family: Family) -> None:
        if not (self.sigma > 0):
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if family is Family.FRECHET:
            if self.beta is None or not (self.beta > 0):
                raise ValueError(f"beta must be positive, got {self.beta}")


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("u must lie strictly inside (0, 1)")
    return u


def standard_quantile(family: Family, u):
    """Quantile of the standardized family.

    Normal and lognormal both use Phi^{-1}; Frechet uses the unit
    (sigma = beta = 1) quantile (-log u)^{-1}.
    """
    u = _check_u(u)
    if family in (Family.NORMAL, Family.LOGNORMAL):
        return ndtri(u)
    return 1.0 / (-np.log(u))


def quantile(family: Family, params: ParameterVector, u):
    """F^{-1}(u) for the parametrized model."""
    params.validate(family)
    u = _check_u(u)
    if family is Family.NORMAL:
        return params.theta + params.sigma * ndtri(u)
    if family is Family.LOGNORMAL:
        return np.exp(params.theta + params.sigma * ndtri(u))
    return params.sigma * (-np.log(u)) ** (-params.beta)


def cdf(family: Family, params: ParameterVector, x):
    params.validate(family)
    x = np.asarray(x, dtype=float)
    if family is Family.NORMAL:
        return ndtr((x - params.theta) / params.sigma)
    if np.any(x <= 0.0):
        raise ValueError(f"{family.value} support is x > 0")
    if family is Family.LOGNORMAL:
        return ndtr((np.log(x) - params.theta) / params.sigma)
    return np.exp(-((x / params.sigma) ** (-1.0 / params.beta)))


def pdf(family: Family, params: ParameterVector, x):
    params.validate(family)
    x = np.asarray(x, dtype=float)
    if family is Family.NORMAL:
        z = (x - params.theta) / params.sigma
        return np.exp(-0.5 * z * z) / (params.sigma * math.sqrt(2.0 * math.pi))
    if np.any(x <= 0.0):
        raise ValueError(f"{family.value} support is x > 0")
    if family is Family.LOGNORMAL:
        z = (np.log(x) - params.theta) / params.sigma
        return np.exp(-0.5 * z * z) / (x * params.sigma * math.sqrt(2.0 * math.pi))
    alpha = 1.0 / params.beta
    t = (x / params.sigma) ** (-alpha)
    return (alpha / params.sigma) * (x / params.sigma) ** (-alpha - 1.0) * np.exp(-t)


def sample(family: Family, params: ParameterVector, n: int, seed) -> np.ndarray:
    """n i.i.d. draws by inverse transform from a seeded uniform stream.

    `seed` may be an int, a SeedSequence or a Generator; identical seeds
    give identical output.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    params.validate(family)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random(n)
    # Keep u strictly inside (0, 1); random() can return exactly 0.
    u = np.clip(u, 1e-300, 1.0 - 1e-16)
    return quantile(family, params, u)


def h_functions(family: Family):
    """The per-family moment transforms (h1, h2).

    Location-scale families use x and x^2 (applied to log-data for the
    lognormal model); the Frechet family uses log x and (log x)^2.
    """
    if family is Family.FRECHET:
        return (lambda x: np.log(x), lambda x: np.log(x) ** 2)
    return (lambda x: x, lambda x: x * x)
