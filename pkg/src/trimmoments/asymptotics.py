"""Asymptotic covariances, Jacobians, ARE and breakdown points.

The covariance of the sample trimmed-moment vector has entries
sigma2_ij = Gamma(i,j) * V(i,j) where V is a double integral of the
kernel K(w,v) = min(w,v) - wv against the derivatives of the population
moment functions H_i.  V reduces to a combination of single integrals
and endpoint evaluations; that closed form is the production path here,
while the raw double integral survives as a brute-force oracle for
testing.  Delta-method covariances S_T = D Sigma_T D' follow from the
branch-aware Jacobians of the estimator maps, and the asymptotic
relative efficiency versus maximum likelihood is
(det S_MLE / det S_T)^(1/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import ndtri

from .models import Family, ParameterVector
from .moments import (
    MomentConstants,
    TrimmingScheme,
    eta_constants,
    population_moments,
    zeta_constants,
)
from .quadrature import integrate

__all__ = [
    "SingularityError",
    "AreResult",
    "kernel",
    "i_integrals",
    "v_entry",
    "v_entry_bruteforce",
    "lambda_entries",
    "psi_entries",
    "sigma_T",
    "sigma_T_location_scale",
    "sigma_T_frechet",
    "jacobian_location_scale",
    "jacobian_frechet",
    "jacobian_at_moments",
    "delta_covariance",
    "s_mle",
    "are",
    "breakdown_points",
    "fit_covariance",
]

EULER_GAMMA = 0.57721566490

# Discriminant threshold below which the scale formula is treated as
# singular instead of producing an exploding variance.
_SINGULAR_TOL = 1e-12


class SingularityError(Exception):
    """The scale discriminant T2 - r*T1^2 vanished (or went negative)."""


@dataclass(frozen=True)
class AreResult:
    family: Family
    params: ParameterVector
    scheme: TrimmingScheme
    det_s_mle: float
    det_s_t: float
    are: float
    singular: bool = False


def kernel(w, v):
    """Covariance kernel of the uniform empirical process."""
    return np.minimum(w, v) - np.asarray(w) * np.asarray(v)


def _guarded(coef, H, u):
    """coef * H(u), skipping the evaluation when coef is exactly zero
    (H may diverge at u in {0, 1})."""
    if coef == 0.0:
        return 0.0
    return coef * float(H(u))


def i_integrals(H, a, b):
    """The pair (I, Ibar) over [a, b].

    I = b H(b) - a H(a) - int_a^b H;  Ibar = (1-b) H(b) - (1-a) H(a)
    + int_a^b H.  Zero-width intervals give (0, 0) without evaluating H.
    """
    if not (0.0 <= a <= b <= 1.0):
        raise ValueError(f"need 0 <= a <= b <= 1, got ({a}, {b})")
    if a == b:
        return 0.0, 0.0
    s = integrate(H, a, b)
    return _i_lower(H, a, b, s), _i_upper(H, a, b, s)


def _i_lower(H, a, b, s):
    """I(a, b) given the precomputed integral s of H over [a, b]."""
    if a == b:
        return 0.0
    return _guarded(b, H, b) - _guarded(a, H, a) - s


def _i_upper(H, a, b, s):
    """Ibar(a, b) given the precomputed integral s of H over [a, b]."""
    if a == b:
        return 0.0
    return _guarded(1.0 - b, H, b) - _guarded(1.0 - a, H, a) + s


def _v_pair(HA, winA, HB, winB):
    """The closed-form double integral of K against HA', HB' over
    winA x winB, with the index roles normalized so that the inner
    window (role j) starts no later and ends no later than the outer
    one (role i).  K's symmetry makes the swap harmless."""
    aA, bbarA = winA
    aB, bbarB = winB
    if aB <= aA and bbarB <= bbarA:
        Hi, (ai, bbari) = HA, winA
        Hj, (aj, bbarj) = HB, winB
    elif aA <= aB and bbarA <= bbarB:
        Hi, (ai, bbari) = HB, winB
        Hj, (aj, bbarj) = HA, winA
    else:
        raise ValueError(f"windows {winA} and {winB} are not nested")
    if not (ai <= bbarj):
        raise ValueError(f"windows {winA} and {winB} do not overlap")
    bi = 1.0 - bbari
    bj = 1.0 - bbarj

    if ai < bbarj:
        int_hi_mid = integrate(Hi, ai, bbarj)
        int_hj_mid = integrate(Hj, ai, bbarj)
        int_hihj_mid = integrate(lambda u: Hi(u) * Hj(u), ai, bbarj)
    else:
        int_hi_mid = int_hj_mid = int_hihj_mid = 0.0
    int_hi_right = integrate(Hi, bbarj, bbari) if bbarj < bbari else 0.0

    # The [aj, ai] strip is empty when aj == ai, in which case Ibar_i
    # (which diverges at ai == 0) must not be touched at all.
    if aj < ai:
        i_j_left = _i_lower(Hj, aj, ai, integrate(Hj, aj, ai))
        ibar_i_full = _i_upper(Hi, ai, bbari,
                               int_hi_mid + int_hi_right)
        total = i_j_left * ibar_i_full
    else:
        total = 0.0
    if bi != 0.0:
        i_j_mid = _i_lower(Hj, ai, bbarj, int_hj_mid)
        total += bi * float(Hi(bbari)) * i_j_mid
    if ai != 0.0:
        ibar_j_mid = _i_upper(Hj, ai, bbarj, int_hj_mid)
        total -= ai * float(Hi(ai)) * ibar_j_mid
    total += int_hihj_mid
    if int_hi_right != 0.0:
        total += (_guarded(bbarj, Hj, bbarj) - _guarded(ai, Hj, ai)) * int_hi_right
    total -= (_guarded(ai, Hj, ai) + _guarded(bj, Hj, bbarj)) * int_hi_mid
    total -= int_hj_mid * int_hi_mid
    total -= int_hj_mid * int_hi_right
    return total


def _delta(u):
    return np.log(-np.log(u))


def _h_population(family: Family, params: ParameterVector):
    """(H1, H2): population moment functions h_j o F^{-1} on (0, 1)."""
    if family is Family.FRECHET:
        beta, ls = params.beta, math.log(params.sigma)
        return (
            lambda u: ls - beta * _delta(u),
            lambda u: (ls - beta * _delta(u)) ** 2,
        )
    theta, sigma = params.theta, params.sigma
    return (
        lambda u: theta + sigma * ndtri(u),
        lambda u: (theta + sigma * ndtri(u)) ** 2,
    )


def _h_derivatives(family: Family, params: ParameterVector):
    """(H1', H2') for the brute-force double integral."""
    if family is Family.FRECHET:
        beta, ls = params.beta, math.log(params.sigma)

        def d1(u):
            return -beta / (u * np.log(u))

        def d2(u):
            return (2.0 * beta / (u * np.log(u))) * (beta * _delta(u) - ls)

        return d1, d2
    theta, sigma = params.theta, params.sigma

    def qprime(u):
        q = ndtri(u)
        return np.sqrt(2.0 * np.pi) * np.exp(0.5 * q * q)

    return (
        lambda u: sigma * qprime(u),
        lambda u: 2.0 * sigma * (theta + sigma * ndtri(u)) * qprime(u),
    )


def v_entry(family: Family, params: ParameterVector, i: int, j: int,
            scheme: TrimmingScheme) -> float:
    """Closed-form V(i, j) for the given model and scheme."""
    params.validate(family)
    h1, h2 = _h_population(family, params)
    hs = {1: h1, 2: h2}
    return _v_pair(hs[i], scheme.window(i), hs[j], scheme.window(j))


def v_entry_bruteforce(family: Family, params: ParameterVector, i: int, j: int,
                       scheme: TrimmingScheme, grid_n: int = 400) -> float:
    """Midpoint-rule evaluation of the double integral defining V(i, j).

    Test oracle only; the production path is the closed form above.
    """
    if grid_n < 200:
        raise ValueError("grid_n must be >= 200")
    params.validate(family)
    d1, d2 = _h_derivatives(family, params)
    ds = {1: d1, 2: d2}
    ai, bbari = scheme.window(i)
    aj, bbarj = scheme.window(j)
    w = ai + (bbari - ai) * (np.arange(grid_n) + 0.5) / grid_n
    v = aj + (bbarj - aj) * (np.arange(grid_n) + 0.5) / grid_n
    kmat = np.minimum(v[:, None], w[None, :]) - np.outer(v, w)
    integrand = kmat * ds[j](v)[:, None] * ds[i](w)[None, :]
    dv = (bbarj - aj) / grid_n
    dw = (bbari - ai) / grid_n
    return float(np.sum(integrand) * dv * dw)


def _entries_from_base(scheme: TrimmingScheme, base, half_sq):
    """The six parameter-free covariance building blocks for one model,
    evaluated through the closed-form V routine.

    base is the standardized quantile kernel (Phi^{-1} or Delta) and
    half_sq its squared half, whose derivative weight is base itself.
    """
    w1 = scheme.window(1)
    w2 = scheme.window(2)
    g1 = 1.0 / (1.0 - scheme.a1 - scheme.b1)
    g2 = 1.0 / (1.0 - scheme.a2 - scheme.b2)
    return {
        "111": g1 * g1 * _v_pair(base, w1, base, w1),
        "121": g1 * g2 * _v_pair(base, w1, base, w2),
        "122": g1 * g2 * _v_pair(base, w1, half_sq, w2),
        "221": g2 * g2 * _v_pair(base, w2, base, w2),
        "222": g2 * g2 * _v_pair(base, w2, half_sq, w2),
        "223": g2 * g2 * _v_pair(half_sq, w2, half_sq, w2),
    }


@lru_cache(maxsize=None)
def _lambda_cached(key):
    scheme = TrimmingScheme(*key)
    return _entries_from_base(scheme, ndtri, lambda u: 0.5 * ndtri(u) ** 2)


@lru_cache(maxsize=None)
def _psi_cached(key):
    scheme = TrimmingScheme(*key)
    return _entries_from_base(scheme, _delta, lambda u: 0.5 * _delta(u) ** 2)


def _key(scheme: TrimmingScheme):
    return (scheme.a1, scheme.b1, scheme.a2, scheme.b2, scheme.tag)


def lambda_entries(scheme: TrimmingScheme) -> dict:
    """Location-scale covariance constants Lambda_ijk (parameter-free)."""
    return dict(_lambda_cached(_key(scheme)))


def psi_entries(scheme: TrimmingScheme) -> dict:
    """Frechet covariance constants Psi_ijk (parameter-free)."""
    return dict(_psi_cached(_key(scheme)))


def sigma_T_location_scale(params: ParameterVector,
                           scheme: TrimmingScheme) -> np.ndarray:
    """Asymptotic covariance of (T1_hat, T2_hat), location-scale case."""
    theta, sigma = params.theta, params.sigma
    lam = _lambda_cached(_key(scheme))
    s11 = sigma ** 2 * lam["111"]
    s12 = 2.0 * theta * sigma ** 2 * lam["121"] + 2.0 * sigma ** 3 * lam["122"]
    s22 = (4.0 * theta ** 2 * sigma ** 2 * lam["221"]
           + 8.0 * theta * sigma ** 3 * lam["222"]
           + 4.0 * sigma ** 4 * lam["223"])
    return np.array([[s11, s12], [s12, s22]])


def sigma_T_frechet(params: ParameterVector,
                    scheme: TrimmingScheme) -> np.ndarray:
    """Asymptotic covariance of the log-data trimmed moments, Frechet."""
    beta, ls = params.beta, math.log(params.sigma)
    psi = _psi_cached(_key(scheme))
    s11 = beta ** 2 * psi["111"]
    s12 = 2.0 * beta ** 2 * ls * psi["121"] - 2.0 * beta ** 3 * psi["122"]
    s22 = (4.0 * beta ** 2 * ls ** 2 * psi["221"]
           - 8.0 * beta ** 3 * ls * psi["222"]
           + 4.0 * beta ** 4 * psi["223"])
    return np.array([[s11, s12], [s12, s22]])


def sigma_T(family: Family, params: ParameterVector,
            scheme: TrimmingScheme) -> np.ndarray:
    params.validate(family)
    if family is Family.FRECHET:
        return sigma_T_frechet(params, scheme)
    return sigma_T_location_scale(params, scheme)


def _check_discriminant(t1, t2, eta_r):
    disc = t2 - eta_r * t1 * t1
    if disc < _SINGULAR_TOL * max(1.0, t1 * t1):
        raise SingularityError(
            f"scale discriminant {disc:.4e} is vanishing or negative"
        )
    return disc


def jacobian_at_moments(family: Family, t1, t2, constants: MomentConstants,
                        branch: str = "plus", sigma=None) -> np.ndarray:
    """Jacobian of the estimator map (g1, g2) at moment values (t1, t2).

    Rows are ordered (location, scale) for the location-scale families
    and (tail index, scale) for Frechet.  branch selects the sign of
    the square-root candidate ("plus" or "minus").  The Frechet rows
    need the scale value; pass the true (or fitted) sigma, otherwise it
    is reconstructed from the plus-branch tail index.
    """
    if branch not in ("plus", "minus"):
        raise ValueError(f"branch must be 'plus' or 'minus', got {branch!r}")
    sign = 1.0 if branch == "plus" else -1.0
    disc = _check_discriminant(t1, t2, constants.eta_r)
    e = constants.eta_12
    root = math.sqrt(e) * math.sqrt(disc)
    if family is Family.FRECHET:
        d11 = sign * (-constants.eta_r * t1 / root) \
            + (constants.m1_22 - constants.m1_11) / e
        d12 = sign / (2.0 * root)
        if sigma is None:
            beta_plus = math.sqrt(disc) / math.sqrt(e) \
                + t1 * (constants.m1_22 - constants.m1_11) / e
            sigma = math.exp(t1 + beta_plus * constants.m1_11)
        d21 = sigma * (1.0 + d11 * constants.m1_11)
        d22 = sigma * d12 * constants.m1_11
        return np.array([[d11, d12], [d21, d22]])
    d21 = sign * (-constants.eta_r * t1 / root) \
        + (constants.m1_11 - constants.m1_22) / e
    d22 = sign / (2.0 * root)
    d11 = 1.0 - constants.m1_11 * d21
    d12 = -constants.m1_11 * d22
    return np.array([[d11, d12], [d21, d22]])


def jacobian_location_scale(params: ParameterVector, scheme: TrimmingScheme,
                            branch: str = "plus",
                            family: Family = Family.NORMAL) -> np.ndarray:
    """Population-level location-scale Jacobian for the given branch."""
    t1, t2 = population_moments(family, params, scheme)
    return jacobian_at_moments(family, t1, t2,
                               eta_constants(family, scheme), branch)


def jacobian_frechet(params: ParameterVector, scheme: TrimmingScheme,
                     branch: str = "plus") -> np.ndarray:
    """Population-level Frechet Jacobian for the given branch."""
    t1, t2 = population_moments(Family.FRECHET, params, scheme)
    return jacobian_at_moments(Family.FRECHET, t1, t2,
                               zeta_constants(scheme), branch, params.sigma)


def delta_covariance(sigma_t: np.ndarray, jac: np.ndarray) -> np.ndarray:
    """Delta-method covariance S_T = D Sigma_T D'."""
    s = jac @ sigma_t @ jac.T
    return 0.5 * (s + s.T)


def s_mle(family: Family, params: ParameterVector) -> np.ndarray:
    """Asymptotic covariance of the MLE.

    The Frechet form (with the Euler-Mascheroni constant) has
    det = 6 beta^4 sigma^2 / pi^2.  The normal form is the standard
    Fisher-information result diag(sigma^2, sigma^2/2).
    """
    params.validate(family)
    if family is Family.FRECHET:
        beta, sigma = params.beta, params.sigma
        g = EULER_GAMMA
        off = (1.0 - g) * sigma * beta ** 2
        return (6.0 / math.pi ** 2) * np.array([
            [beta ** 2, off],
            [off, (sigma * beta) ** 2 * ((g - 1.0) ** 2 + math.pi ** 2 / 6.0)],
        ])
    return np.array([[params.sigma ** 2, 0.0],
                     [0.0, params.sigma ** 2 / 2.0]])


def are(family: Family, params: ParameterVector,
        scheme: TrimmingScheme) -> AreResult:
    """Asymptotic relative efficiency of the trimmed estimator vs MLE.

    Uses the plus-branch Jacobian; by the determinant identity
    det(D-) = -det(D+) the branch choice cannot affect the result.
    """
    params.validate(family)
    det_mle = float(np.linalg.det(s_mle(family, params)))
    constants = (zeta_constants(scheme) if family is Family.FRECHET
                 else eta_constants(family, scheme))
    t1, t2 = population_moments(family, params, scheme)
    try:
        jac = jacobian_at_moments(family, t1, t2, constants, "plus",
                                  params.sigma)
    except SingularityError:
        return AreResult(family, params, scheme, det_mle, math.inf, 0.0, True)
    s_t = delta_covariance(sigma_T(family, params, scheme), jac)
    det_t = float(np.linalg.det(s_t))
    return AreResult(family, params, scheme, det_mle, det_t,
                     math.sqrt(max(det_mle, 0.0) / det_t), False)


def breakdown_points(scheme: TrimmingScheme):
    """(lower, upper) breakdown points of the trimmed estimator."""
    return (min(scheme.a1, scheme.a2), min(scheme.b1, scheme.b2))


def fit_covariance(fit) -> np.ndarray:
    """Delta-method covariance S_T at the fitted values, using the sign
    branch the estimator actually selected.  Stored on the fit and
    returned; divide by n for standard errors."""
    from .estimators import Branch  # local import to avoid a cycle

    branch = "minus" if fit.branch is Branch.MINUS else "plus"
    jac = jacobian_at_moments(fit.family, fit.t1, fit.t2, fit.constants,
                              branch, fit.params.sigma)
    s_t = delta_covariance(sigma_T(fit.family, fit.params, fit.scheme), jac)
    fit.cov = s_t
    return s_t
