"""Composite expressions of the sandwich theorems, built as truncated series.

Naming follows the objects the theorems talk about:

* ``base_series``  -- (1 - lam) z P^{a-1} f + lam z P^a f   (optionally / lam)
* ``k_series``     -- base ** mu
* ``logderiv_form``  -- 1 + gamma beta mu * N / D, the logarithmic-derivative form
* ``psi_series``   -- the quadratic transform built from p = (z P^a f) ** mu
* ``phi_series``   -- the linear transform  k * [m + mu ell N / C]
* ``q_family``     -- the four dominant families
* ``rhs_builder``  -- right-hand sides built from a dominant q
* ``hypothesis_value`` -- the series whose real part a hypothesis constrains

with N = lam P^a + (1 - 2 lam) P^{a-1} + (lam - 1) P^{a-2}, C = (1 - lam) P^{a-1} + lam P^a and
D = -C.  All of them are computed on z-multiplied operator images, which are
analytic with constant term 1.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import DegenerateBase, SpecError, UsageError
from .lashin import LashinParams, z_lashin
from .series import (
    DIVIDE_FLOOR,
    AnalyticSeries,
    MeromorphicSeries,
    complex_power,
    differentiate,
    divide,
    geometric,
    monomial_order_for,
    series_exp,
    z_times_derivative,
)


class BaseMode(enum.Enum):
    CONVEX = "convex"
    AS_WRITTEN = "as-written"


@dataclass(frozen=True)
class TheoremParams:
    lashin: LashinParams
    lam: complex = 1.0
    mu: complex = 1.0
    gamma: complex = 1.0
    eta: complex = 1.0
    delta: complex = 0.0
    m: complex = -1.0
    ell: complex = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        for name in ("lam", "mu", "gamma", "eta", "delta", "m", "ell"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.mu == 0:
            raise ValueError("mu must be nonzero")
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")
        if self.ell == 0:
            raise ValueError("ell must be nonzero")
        if not 0.0 < self.sigma <= 1.0:
            raise ValueError("sigma must lie in (0, 1]")

    @property
    def alpha(self) -> float:
        return self.lashin.alpha

    @property
    def beta(self) -> float:
        return self.lashin.beta

    def to_dict(self) -> dict:
        out = {"alpha": self.alpha, "beta": self.beta}
        for name in ("lam", "mu", "gamma", "eta", "delta", "m", "ell"):
            c = getattr(self, name)
            out[name] = [c.real, c.imag]
        out["sigma"] = self.sigma
        return out

    @classmethod
    def from_dict(cls, d: dict) -> TheoremParams:
        kw = {name: complex(*d[name]) for name in ("lam", "mu", "gamma", "eta", "delta", "m", "ell")}
        return cls(LashinParams(d["alpha"], d["beta"]), sigma=d["sigma"], **kw)


class QKind(enum.Enum):
    EXPONENTIAL = "exponential"
    HALF_PLANE_POWER = "half-plane-power"
    MACOVEI_MOBIUS = "macovei-mobius"
    JANOWSKI = "janowski"


@dataclass(frozen=True)
class QFamilySpec:
    kind: QKind
    tau: complex = 1.0
    rho: float = 1.0
    A: float = 0.5
    B: float = -0.5

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "A", float(self.A))
        object.__setattr__(self, "B", float(self.B))
        if self.kind is QKind.EXPONENTIAL and abs(self.tau) > 1:
            raise SpecError(f"exponential family needs |tau| <= 1, got {self.tau}")
        if self.kind is QKind.HALF_PLANE_POWER and not 0 < self.rho <= 1:
            raise SpecError(f"half-plane power needs 0 < rho <= 1, got {self.rho}")
        if self.kind is QKind.MACOVEI_MOBIUS and not (-1 < self.A < 1 and self.A != 0):
            raise SpecError(f"Mobius family needs A in (-1, 0) U (0, 1), got {self.A}")
        if self.kind is QKind.JANOWSKI and not -1 <= self.B < self.A <= 1:
            raise SpecError(f"Janowski family needs -1 <= B < A <= 1, got A={self.A}, B={self.B}")

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "tau": [self.tau.real, self.tau.imag], "rho": self.rho, "A": self.A, "B": self.B}

    @classmethod
    def from_dict(cls, d: dict) -> QFamilySpec:
        return cls(QKind(d["kind"]), complex(*d["tau"]), d["rho"], d["A"], d["B"])


# --- f-side builders ----------------------------------------------------------


def _zp(f: MeromorphicSeries, prm: TheoremParams, shift: int) -> AnalyticSeries:
    return z_lashin(f, prm.alpha - shift, prm.beta)


def base_series(f: MeromorphicSeries, prm: TheoremParams, mode: BaseMode = BaseMode.CONVEX) -> AnalyticSeries:
    lam = prm.lam
    base = (1 - lam) * _zp(f, prm, 1) + lam * _zp(f, prm, 0)
    if mode is BaseMode.AS_WRITTEN:
        base = base / lam
    if abs(base.coeffs[0]) <= DIVIDE_FLOOR:
        raise DegenerateBase(f"base constant term {complex(base.coeffs[0])!r} vanishes")
    return base


def k_series(f: MeromorphicSeries, prm: TheoremParams, mode: BaseMode = BaseMode.CONVEX) -> AnalyticSeries:
    """base ** mu on the principal branch.

    In as-written mode the base starts at 1/lam; the power is taken of the
    normalized base and rescaled by the principal value lam ** (-mu).
    """
    base = base_series(f, prm, mode)
    if mode is BaseMode.AS_WRITTEN:
        scale = cmath.exp(-prm.mu * cmath.log(prm.lam))
        return complex_power(base * prm.lam, prm.mu) * scale
    return complex_power(base, prm.mu)


def p_series(f: MeromorphicSeries, prm: TheoremParams) -> AnalyticSeries:
    """(z P^a f) ** mu."""
    return complex_power(_zp(f, prm, 0), prm.mu)


def _n_c(f: MeromorphicSeries, prm: TheoremParams) -> tuple[AnalyticSeries, AnalyticSeries]:
    lam = prm.lam
    z0, z1, z2 = _zp(f, prm, 0), _zp(f, prm, 1), _zp(f, prm, 2)
    n = lam * z0 + (1 - 2 * lam) * z1 + (lam - 1) * z2
    c = (1 - lam) * z1 + lam * z0
    return n, c


def signed_ratio(f: MeromorphicSeries, prm: TheoremParams) -> AnalyticSeries:
    """N / D with D = (lam - 1) P^{a-1} - lam P^a (note the sign: D = -C)."""
    n, c = _n_c(f, prm)
    return divide(n, -c)


def logderiv_form(f: MeromorphicSeries, prm: TheoremParams, mode: BaseMode = BaseMode.CONVEX) -> AnalyticSeries:
    # N / D carries no division by lam, so the base mode does not enter
    return 1 + prm.gamma * prm.beta * prm.mu * signed_ratio(f, prm)


def logderiv_form_unit_lambda(f: MeromorphicSeries, prm: TheoremParams) -> AnalyticSeries:
    """1 - gamma mu beta (1 - P^{a-1} f / P^a f), the lam = 1 specialization."""
    ratio = divide(_zp(f, prm, 1), _zp(f, prm, 0))
    return 1 - prm.gamma * prm.mu * prm.beta * (1 - ratio)


def psi_series(f: MeromorphicSeries, prm: TheoremParams) -> AnalyticSeries:
    z0 = _zp(f, prm, 0)
    p = complex_power(z0, prm.mu)
    ratio = divide(_zp(f, prm, 1), z0)
    inner = prm.delta * p + prm.gamma * prm.mu * prm.beta * (ratio - 1) + prm.eta
    return p * inner


def phi_series(f: MeromorphicSeries, prm: TheoremParams, mode: BaseMode = BaseMode.CONVEX) -> AnalyticSeries:
    n, c = _n_c(f, prm)
    k = k_series(f, prm, mode)
    return k * (prm.m + prm.mu * prm.ell * divide(n, c))


# --- dominant families ----------------------------------------------------------

HALF_PLANE_ORDER = 768


def q_family(spec: QFamilySpec, order: Optional[int] = None) -> AnalyticSeries:
    """Truncated Taylor series of the selected dominant, q(0) = 1.

    The default order is chosen so that the truncation error at |z| = 0.95
    sits at rounding level; the half-plane family has slowly decaying
    coefficients and gets a long expansion.
    """
    kind = spec.kind
    if kind is QKind.EXPONENTIAL:
        order = order or 64
        n = np.arange(order + 1)
        c = np.array([spec.tau**k / math.factorial(k) for k in n], dtype=np.complex128)
        return AnalyticSeries(c)
    if kind is QKind.MACOVEI_MOBIUS:
        order = order or max(64, monomial_order_for(spec.A))
        c = 2.0 * spec.A ** np.arange(order + 1, dtype=float)
        c[0] = 1.0
        return AnalyticSeries(c)
    if kind is QKind.JANOWSKI:
        order = order or max(64, monomial_order_for(spec.B))
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = 1.0
        c[1:] = (spec.A - spec.B) * (-spec.B) ** np.arange(order, dtype=float)
        return AnalyticSeries(c)
    if kind is QKind.HALF_PLANE_POWER:
        order = order or HALF_PLANE_ORDER
        if spec.rho == 1.0:
            c = np.full(order + 1, 2.0, dtype=np.complex128)
            c[0] = 1.0
            return AnalyticSeries(c)
        # log((1+z)/(1-z)) = 2 (z + z^3/3 + z^5/5 + ...)
        log_c = np.zeros(order + 1, dtype=np.complex128)
        odd = np.arange(1, order + 1, 2)
        log_c[odd] = 2.0 / odd
        return series_exp(AnalyticSeries(log_c) * spec.rho)
    raise SpecError(f"unknown family {kind!r}")


def shrink_toward_one(s: AnalyticSeries, factor: float = 0.5) -> AnalyticSeries:
    """1 + factor (s - 1): the same shape with its range scaled about 1."""
    return 1 + factor * (s - 1)


# --- right-hand sides and hypothesis integrands ------------------------------------


class RhsKind(enum.Enum):
    LOG_DERIV = "log-deriv"
    QUADRATIC = "quadratic"
    LINEAR = "linear"
    MACOVEI = "macovei"


def rhs_builder(kind: RhsKind, q: AnalyticSeries, prm: TheoremParams) -> AnalyticSeries:
    zq = z_times_derivative(q)
    if kind is RhsKind.LOG_DERIV:
        return 1 + prm.gamma * divide(zq, q)
    if kind is RhsKind.QUADRATIC:
        return prm.delta * q * q + prm.eta * q + prm.gamma * zq
    if kind is RhsKind.LINEAR:
        return prm.m * q - (prm.ell / prm.beta) * zq
    if kind is RhsKind.MACOVEI:
        return prm.delta * q * q + prm.eta * q + prm.sigma * zq
    raise UsageError(f"unknown right-hand side {kind!r}")


def log_derivative(q: AnalyticSeries) -> AnalyticSeries:
    """z q'/q."""
    return divide(z_times_derivative(q), q)


def second_log_derivative(q: AnalyticSeries) -> AnalyticSeries:
    """z q''/q'."""
    d1 = differentiate(q)
    return divide(z_times_derivative(d1), d1)


def hypothesis_value(kind: str, q: AnalyticSeries, prm: TheoremParams, spec: Optional[QFamilySpec] = None) -> tuple[AnalyticSeries, float]:
    """(integrand, bound) for a condition of the form Re(integrand) > bound."""
    if kind == "(3.2)":
        return second_log_derivative(q) - log_derivative(q) + 1, 0.0
    if kind == "(3.18)":
        return prm.eta / prm.gamma + (2 * prm.delta / prm.gamma) * q, 0.0
    if kind == "(3.34)":
        return 1 + second_log_derivative(q), max(0.0, (prm.m * prm.beta / prm.ell).real)
    if kind == "(2.2)":
        # general-lemma form with psi = m and gamma = -ell/beta; same bound as the linear case
        psi, gam = prm.m, -prm.ell / prm.beta
        return 1 + second_log_derivative(q), max(0.0, -(psi / gam).real)
    if kind == "(4.1)":
        return (prm.eta / prm.gamma + (2 * prm.delta / prm.gamma) * q) * differentiate(q), 0.0
    if kind == "(3.40)":
        if spec is None or spec.kind is not QKind.HALF_PLANE_POWER:
            raise UsageError(f"{kind} is only defined for the half-plane power family")
        order = q.order
        num = np.zeros(order + 1, dtype=np.complex128)
        num[0], num[1], num[2] = 1.0, 2 * spec.rho, 1.0
        den = np.zeros(order + 1, dtype=np.complex128)
        den[0], den[2] = 1.0, -1.0
        return divide(AnalyticSeries(num), AnalyticSeries(den)), max(0.0, (prm.m * prm.beta / prm.ell).real)
    raise UsageError(f"unknown hypothesis {kind!r}")


def mobius_scalar_condition(prm: TheoremParams, A: float) -> float:
    """Left side of the scalar Mobius-family condition, with its alpha, beta bound to delta, eta.

    Both terms carry the factor (1 + A)/(1 - A).
    """
    a, b, s = prm.delta.real, prm.eta.real, prm.sigma
    ratio = (1 + A) / (1 - A)
    return (2 * a / s) * ratio + (b / s) * ratio


# --- preset registry ----------------------------------------------------------------


@dataclass(frozen=True)
class Preset:
    name: str
    theorem: str
    family: QFamilySpec
    params: TheoremParams
    family_lower: Optional[QFamilySpec] = None  # q1 for the sandwich theorems
    pinned: frozenset = frozenset()
    extended_class: bool = False
    condition_override: Optional[str] = None
    description: str = ""

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "theorem": self.theorem,
            "family": self.family.to_dict(),
            "params": self.params.to_dict(),
            "pinned": sorted(self.pinned),
            "extended_class": self.extended_class,
        }
        if self.family_lower is not None:
            out["family_lower"] = self.family_lower.to_dict()
        if self.condition_override:
            out["condition_override"] = self.condition_override
        out["description"] = self.description
        return out


def _p(alpha, beta, **kw) -> TheoremParams:
    return TheoremParams(LashinParams(alpha, beta), **kw)


_EXP, _HPP, _MOB, _JAN = QKind.EXPONENTIAL, QKind.HALF_PLANE_POWER, QKind.MACOVEI_MOBIUS, QKind.JANOWSKI

PRESETS: dict[str, Preset] = {}


def _register(p: Preset) -> None:
    PRESETS[p.name] = p


# Strict-class suites use a steep multiplier (alpha = 20, beta = 4) so the
# z^2 term dominates k and p; mu then sets how close trials sit to the
# boundary of the premise.  alpha and beta are pinned because the steep
# multipliers amplify any jitter.
_STEEP = frozenset({"alpha", "beta"})

_register(Preset(
    "cor-3.2", "3.1", QFamilySpec(_EXP, tau=1.0),
    _p(20.0, 4.0, lam=-1.0, mu=16000.0, gamma=1.0),
    pinned=_STEEP,
    description="exponential dominant e^{tau z}, general lambda",
))
_register(Preset(
    "cor-3.3", "3.1", QFamilySpec(_EXP, tau=1.0),
    _p(20.0, 4.0, lam=1.0, mu=32000.0, gamma=1.0),
    pinned=_STEEP | {"lam", "tau"},
    description="tau = lambda = 1",
))
_register(Preset(
    "cor-3.4", "3.1", QFamilySpec(_HPP, rho=1.0),
    _p(1.0, 8.0, lam=1.0, mu=2.5, gamma=1.0),
    pinned=frozenset({"lam"}),
    extended_class=True,
    description="half-plane power dominant ((1+z)/(1-z))^rho, lambda = 1",
))
_register(Preset(
    "cor-3.6", "3.5", QFamilySpec(_MOB, A=0.1),
    _p(20.0, 4.0, lam=1.0, mu=12000.0, gamma=0.2, eta=1.0, delta=0.5),
    pinned=_STEEP,
    description="Mobius dominant (1+Az)/(1-Az), eta, delta > 0, gamma in (0, 1]",
))
_register(Preset(
    "cor-3.7", "3.5", QFamilySpec(_EXP, tau=0.1),
    _p(20.0, 4.0, lam=1.0, mu=6000.0, gamma=0.2, eta=1.0, delta=0.5),
    pinned=_STEEP,
    description="exponential dominant for the quadratic transform",
))
_register(Preset(
    "cor-3.9", "3.8", QFamilySpec(_HPP, rho=0.1),
    _p(20.0, 4.0, lam=1.0, mu=8000.0, m=-1.0, ell=1.0),
    pinned=_STEEP | {"lam"},
    condition_override="(3.40)",
    description="half-plane power dominant, lambda = 1, rational convexity condition in place of the general one",
))
_register(Preset(
    "cor-3.10", "3.8", QFamilySpec(_JAN, A=0.1, B=-0.1),
    _p(20.0, 4.0, lam=1.0, mu=10000.0, m=-1.0, ell=1.0),
    pinned=_STEEP | {"lam"},
    description="Janowski dominant (1+Az)/(1+Bz), lambda = 1",
))
_register(Preset(
    "cor-4.2", "4.1", QFamilySpec(_EXP, tau=0.1),
    _p(1.0, 8.0, lam=1.0, mu=1.0, gamma=0.2, eta=1.0, delta=0.5),
    extended_class=True,
    description="exponential subordinant",
))
_register(Preset(
    "cor-4.4", "4.3", QFamilySpec(_JAN, A=0.07, B=-0.07),
    _p(1.0, 8.0, lam=1.0, mu=1.0, m=-1.0, ell=1.0),
    pinned=frozenset({"lam"}),
    extended_class=True,
    description="Janowski subordinant, lambda = 1",
))
_register(Preset(
    "cor-4.5", "4.3", QFamilySpec(_HPP, rho=0.025),
    _p(1.0, 8.0, lam=1.0, mu=1.0, m=-1.0, ell=1.0),
    pinned=frozenset({"lam"}),
    extended_class=True,
    description="half-plane power subordinant, lambda = 1",
))
_register(Preset(
    "thm-5.1", "5.1", QFamilySpec(_MOB, A=0.5), _p(1.0, 8.0, lam=1.0, mu=1.0, gamma=0.2, eta=1.0, delta=0.5),
    family_lower=QFamilySpec(_MOB, A=0.05),
    extended_class=True,
    description="nested Mobius pair for the quadratic sandwich",
))
_register(Preset(
    "thm-5.2", "5.2", QFamilySpec(_MOB, A=0.5), _p(1.0, 8.0, lam=1.0, mu=1.0, m=-1.0, ell=1.0),
    family_lower=QFamilySpec(_MOB, A=0.05),
    extended_class=True,
    description="nested Mobius pair for the linear sandwich",
))
_register(Preset(
    "lemma-2.6", "2.6", QFamilySpec(_MOB, A=0.3), _p(1.0, 8.0, lam=1.0, mu=1.0, eta=1.0, delta=0.5, sigma=0.2),
    extended_class=True,
    description="Macovei lemma: delta, eta, sigma carry the lemma's alpha, beta, sigma",
))

THEOREM_DEFAULT_PRESET = {
    "3.1": "cor-3.2",
    "3.5": "cor-3.7",
    "3.8": "cor-3.10",
    "4.1": "cor-4.2",
    "4.3": "cor-4.4",
    "5.1": "thm-5.1",
    "5.2": "thm-5.2",
    "2.6": "lemma-2.6",
}


def get_preset(name: str) -> Preset:
    try:
        return PRESETS[name]
    except KeyError:
        raise UsageError(f"unknown preset {name!r}; known: {', '.join(PRESETS)}") from None
