"""Lashin's integral operator on the meromorphic class.

On coefficients the operator is a multiplier,

    a_k  ->  (beta / (k + beta + 1))**alpha * a_k,      pole untouched,

and ``lashin_quadrature`` evaluates the defining integral directly so the two
routes can be checked against each other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_genlaguerre

from .errors import DomainError, OracleUnstable
from .series import AnalyticSeries, MeromorphicSeries, evaluate

QUAD_NODES = 96
QUAD_CHECK_NODES = 128
QUAD_TOL = 1e-7


@dataclass(frozen=True)
class LashinParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise ValueError(f"alpha and beta must be positive, got {self.alpha}, {self.beta}")
        if not (math.isfinite(self.alpha) and math.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")


def multipliers(alpha: float, beta: float, order: int) -> np.ndarray:
    """(beta / (k + beta + 1))**alpha for k = 0..order.

    Defined for every real alpha, so the shifted operators with exponent
    alpha - 1 and alpha - 2 use the same formula.
    """
    k = np.arange(order + 1, dtype=float)
    return (beta / (k + beta + 1.0)) ** alpha


def apply_exponent(f: MeromorphicSeries, alpha: float, beta: float) -> MeromorphicSeries:
    """Multiplier map for an arbitrary real exponent (no positivity check)."""
    m = multipliers(alpha, beta, f.order)
    return MeromorphicSeries(m[1:] * f.tail, m[0] * f.constant)


def apply_lashin(f: MeromorphicSeries, prm: LashinParams) -> MeromorphicSeries:
    return apply_exponent(f, prm.alpha, prm.beta)


def z_lashin(f: MeromorphicSeries, alpha: float, beta: float) -> AnalyticSeries:
    """z * P^alpha_beta f(z) as an analytic series with constant term 1."""
    return apply_exponent(f, alpha, beta).times_z()


@lru_cache(maxsize=64)
def _rule(n: int, a: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_genlaguerre(n, a)
    return x, w


def lashin_quadrature(f: MeromorphicSeries, prm: LashinParams, z: complex) -> complex:
    """P^alpha_beta f(z) from the integral form.

    With t = z u and u = exp(-s) the integral becomes

        (1 / (Gamma(alpha) z)) * int_0^inf x^(alpha-1) e^(-x) F(z e^(-x/beta)) dx

    where F(w) = w f(w) is analytic with F(0) = 1; the pole of f is absorbed
    into the weight.  A generalized Gauss-Laguerre rule integrates it, and a
    second, larger rule supplies the error estimate.
    """
    z = complex(z)
    if not 1e-3 <= abs(z) <= 0.9:
        raise DomainError(f"quadrature oracle needs 1e-3 <= |z| <= 0.9, got |z| = {abs(z):.4g}")
    alpha, beta = prm.alpha, prm.beta
    regular = AnalyticSeries(np.concatenate([[f.constant], f.tail]))

    def F(w: np.ndarray) -> np.ndarray:
        return 1.0 + w * evaluate(regular, w)

    def integrate(n: int) -> complex:
        x, w = _rule(n, alpha - 1.0)
        return complex(np.dot(w, F(z * np.exp(-x / beta))))

    coarse = integrate(QUAD_NODES)
    fine = integrate(QUAD_CHECK_NODES)
    scale = 1.0 / (math.gamma(alpha) * z)
    err = abs(fine - coarse) * abs(scale)
    if not math.isfinite(err) or err > QUAD_TOL:
        raise OracleUnstable(err)
    return fine * scale


def recurrence_residuals(f: MeromorphicSeries, prm: LashinParams) -> np.ndarray:
    """Coefficient residuals of z (P^a f)' - beta P^(a-1) f + (beta+1) P^a f.

    Index 0 is the z^{-1} (pole) coefficient; index k + 1 is z^k.
    """
    alpha, beta = prm.alpha, prm.beta
    pa = apply_exponent(f, alpha, beta)
    pa1 = apply_exponent(f, alpha - 1.0, beta)
    k = np.arange(f.order + 1, dtype=float)
    reg_a = pa.regular_part()
    reg_a1 = pa1.regular_part()
    # the pole coefficient is 1 in every operator image; z d/dz z^{-1} = -z^{-1}
    pole = -1.0 - (beta * 1.0 - (beta + 1.0) * 1.0)
    regular = k * reg_a - (beta * reg_a1 - (beta + 1.0) * reg_a)
    return np.concatenate([[pole], regular])


def check_recurrence(f: MeromorphicSeries, prm: LashinParams) -> float:
    return float(np.max(np.abs(recurrence_residuals(f, prm))))
