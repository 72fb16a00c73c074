"""Truncated series over complex coefficients.

Two carriers live here:

``AnalyticSeries``
    c_0 + c_1 z + ... + c_K z^K, trusted for |z| <= r_max.
``MeromorphicSeries``
    z^{-1} + a_0 + a_1 z + ... + a_K z^K.  The pole coefficient is always 1
    and is not stored.  The strict class has a_0 = 0; ``constant`` holds a_0
    for the extended class.

Coefficients are dense numpy arrays, lowest order first.  Every value is
immutable; binary operations pad the shorter operand with zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    BranchRisk,
    DegenerateDivision,
    DomainError,
    NotSchwarz,
    ParseError,
)

DEFAULT_ORDER = 64
DIVIDE_FLOOR = 1e-8
POWER_BASE_TOL = 1e-9
POLE_GUARD = 1e-3

# slack on |z| <= r_max so that points built as r*exp(i t) with r == r_max pass
_RADIUS_SLACK = 1e-12

Number = Union[int, float, complex]


def _frozen(values: Iterable[Number]) -> np.ndarray:
    arr = np.array(values, dtype=np.complex128, copy=True).reshape(-1)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class AnalyticSeries:
    coeffs: np.ndarray
    r_max: float = 1.0

    def __post_init__(self):
        arr = _frozen(self.coeffs)
        if arr.size < 2:
            raise ValueError("truncation order must be >= 1")
        if not np.all(np.isfinite(arr)):
            raise ValueError("series coefficients must be finite")
        if not 0.0 < self.r_max <= 1.0:
            raise ValueError(f"validity radius must lie in (0, 1], got {self.r_max}")
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "r_max", float(self.r_max))

    @classmethod
    def constant(cls, value: Number, order: int = DEFAULT_ORDER, r_max: float = 1.0) -> AnalyticSeries:
        c = np.zeros(order + 1, dtype=np.complex128)
        c[0] = value
        return cls(c, r_max)

    @classmethod
    def identity(cls, order: int = DEFAULT_ORDER, r_max: float = 1.0) -> AnalyticSeries:
        """The series ``z``."""
        c = np.zeros(order + 1, dtype=np.complex128)
        c[1] = 1.0
        return cls(c, r_max)

    @property
    def order(self) -> int:
        return self.coeffs.size - 1

    def padded(self, order: int) -> AnalyticSeries:
        if order == self.order:
            return self
        if order < self.order:
            raise ValueError("padding cannot shrink a series")
        c = np.zeros(order + 1, dtype=np.complex128)
        c[: self.coeffs.size] = self.coeffs
        return AnalyticSeries(c, self.r_max)

    def truncated(self, order: int) -> AnalyticSeries:
        return AnalyticSeries(self.coeffs[: order + 1], self.r_max)

    def with_radius(self, r_max: float) -> AnalyticSeries:
        return AnalyticSeries(self.coeffs, r_max)

    def __call__(self, z):
        return evaluate(self, z)

    def __getitem__(self, n: int) -> complex:
        return complex(self.coeffs[n])

    def __len__(self) -> int:
        return self.coeffs.size

    # arithmetic sugar over the module functions
    def __add__(self, other):
        if isinstance(other, AnalyticSeries):
            return linear_combine([(1.0, self), (1.0, other)])
        return _shift_constant(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, AnalyticSeries):
            return linear_combine([(1.0, self), (-1.0, other)])
        return _shift_constant(self, -other)

    def __rsub__(self, other):
        return _shift_constant(-self, other)

    def __neg__(self):
        return AnalyticSeries(-self.coeffs, self.r_max)

    def __mul__(self, other):
        if isinstance(other, AnalyticSeries):
            return multiply(self, other)
        return AnalyticSeries(self.coeffs * complex(other), self.r_max)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, AnalyticSeries):
            return divide(self, other)
        return AnalyticSeries(self.coeffs / complex(other), self.r_max)

    def __rtruediv__(self, other):
        return divide(AnalyticSeries.constant(other, self.order, self.r_max), self)

    def __pow__(self, mu):
        return complex_power(self, mu)

    def __repr__(self) -> str:
        head = ", ".join(f"{c:.4g}" for c in self.coeffs[:4])
        return f"AnalyticSeries(K={self.order}, r_max={self.r_max}, [{head}, ...])"


@dataclass(frozen=True, eq=False)
class MeromorphicSeries:
    """z^{-1} + constant + sum_{k=1..K} tail[k-1] z^k."""

    tail: np.ndarray
    constant: complex = 0j

    def __post_init__(self):
        arr = _frozen(self.tail)
        if arr.size < 1:
            raise ValueError("truncation order must be >= 1")
        if not np.all(np.isfinite(arr)) or not np.isfinite(self.constant):
            raise ValueError("series coefficients must be finite")
        object.__setattr__(self, "tail", arr)
        object.__setattr__(self, "constant", complex(self.constant))

    @classmethod
    def pole(cls, order: int = DEFAULT_ORDER) -> MeromorphicSeries:
        """The pure pole z^{-1}."""
        return cls(np.zeros(order, dtype=np.complex128))

    @property
    def order(self) -> int:
        return self.tail.size

    @property
    def is_strict(self) -> bool:
        return self.constant == 0

    def coefficient(self, k: int) -> complex:
        if k == 0:
            return self.constant
        return complex(self.tail[k - 1])

    def regular_part(self) -> np.ndarray:
        """a_0, a_1, ..., a_K as one array."""
        return np.concatenate([[self.constant], self.tail])

    def times_z(self) -> AnalyticSeries:
        """z f(z) = 1 + a_0 z + a_1 z^2 + ..., order K + 1."""
        return AnalyticSeries(np.concatenate([[1.0], self.regular_part()]))

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other: MeromorphicSeries) -> MeromorphicSeries:
        # the pole stays at 1: this is the affine combination f + g - z^{-1}
        n = max(self.order, other.order)
        t = np.zeros(n, dtype=np.complex128)
        t[: self.order] += self.tail
        t[: other.order] += other.tail
        return MeromorphicSeries(t, self.constant + other.constant)

    def __repr__(self) -> str:
        head = ", ".join(f"{c:.4g}" for c in self.tail[:3])
        return f"MeromorphicSeries(K={self.order}, a0={self.constant:.4g}, [{head}, ...])"


def _shift_constant(s: AnalyticSeries, value: Number) -> AnalyticSeries:
    c = s.coeffs.copy()
    c[0] += value
    return AnalyticSeries(c, s.r_max)


def _common_order(series: Sequence[AnalyticSeries]) -> int:
    return max(s.order for s in series)


def linear_combine(terms: Sequence[tuple[Number, AnalyticSeries]]) -> AnalyticSeries:
    """Coefficient-wise weighted sum; the result is trusted on the smallest input radius."""
    if not terms:
        raise ValueError("linear_combine needs at least one term")
    order = _common_order([s for _, s in terms])
    out = np.zeros(order + 1, dtype=np.complex128)
    for weight, s in terms:
        out[: s.coeffs.size] += complex(weight) * s.coeffs
    return AnalyticSeries(out, min(s.r_max for _, s in terms))


def multiply(s1: AnalyticSeries, s2: AnalyticSeries) -> AnalyticSeries:
    """Cauchy product truncated at the larger order."""
    order = max(s1.order, s2.order)
    prod = np.convolve(s1.coeffs, s2.coeffs)[: order + 1]
    if prod.size < order + 1:
        prod = np.concatenate([prod, np.zeros(order + 1 - prod.size)])
    return AnalyticSeries(prod, min(s1.r_max, s2.r_max))


def divide(s1: AnalyticSeries, s2: AnalyticSeries) -> AnalyticSeries:
    """The series d with d * s2 == s1 through the common order."""
    b0 = complex(s2.coeffs[0])
    if abs(b0) <= DIVIDE_FLOOR:
        raise DegenerateDivision(abs(b0))
    order = max(s1.order, s2.order)
    a = s1.padded(order).coeffs
    b = s2.padded(order).coeffs
    d = np.zeros(order + 1, dtype=np.complex128)
    d[0] = a[0] / b0
    for n in range(1, order + 1):
        d[n] = (a[n] - np.dot(b[1 : n + 1], d[n - 1 :: -1])) / b0
    return AnalyticSeries(d, min(s1.r_max, s2.r_max))


def differentiate(s: AnalyticSeries) -> AnalyticSeries:
    """Term-wise derivative.  The order is kept; the top coefficient becomes 0."""
    n = np.arange(1, s.order + 1)
    c = np.zeros(s.order + 1, dtype=np.complex128)
    c[:-1] = n * s.coeffs[1:]
    return AnalyticSeries(c, s.r_max)


def z_times_derivative(s: AnalyticSeries) -> AnalyticSeries:
    """z s'(z), exact at every stored order."""
    return AnalyticSeries(np.arange(s.order + 1) * s.coeffs, s.r_max)


def series_log(s: AnalyticSeries) -> AnalyticSeries:
    """Principal log of a series whose constant term is 1."""
    c0 = complex(s.coeffs[0])
    if abs(c0 - 1.0) > POWER_BASE_TOL:
        raise BranchRisk(c0)
    a = s.coeffs / c0
    order = s.order
    out = np.zeros(order + 1, dtype=np.complex128)
    out[0] = np.log(c0)
    kl = np.zeros(order + 1, dtype=np.complex128)
    # a' = a * l'  =>  n l_n = n a_n - sum_{k=1}^{n-1} k l_k a_{n-k}
    for n in range(1, order + 1):
        acc = np.dot(kl[1:n], a[n - 1 : 0 : -1]) if n > 1 else 0.0
        kl[n] = n * a[n] - acc
        out[n] = kl[n] / n
    return AnalyticSeries(out, s.r_max)


def series_exp(s: AnalyticSeries) -> AnalyticSeries:
    order = s.order
    kg = np.arange(order + 1) * s.coeffs
    e = np.zeros(order + 1, dtype=np.complex128)
    e[0] = 1.0
    for n in range(1, order + 1):
        e[n] = np.dot(kg[1 : n + 1], e[n - 1 :: -1]) / n
    return AnalyticSeries(e * np.exp(s.coeffs[0]), s.r_max)


def complex_power(s: AnalyticSeries, mu: Number) -> AnalyticSeries:
    """exp(mu * log s) on the principal branch; s(0) must be 1."""
    c0 = complex(s.coeffs[0])
    if abs(c0 - 1.0) > POWER_BASE_TOL:
        raise BranchRisk(c0)
    mu = complex(mu)
    if mu == 0:
        return AnalyticSeries.constant(1.0, s.order, s.r_max)
    if mu == 1:
        return s
    return series_exp(series_log(s) * mu)


def _check_radius(z: np.ndarray, r_max: float) -> None:
    if np.any(np.abs(z) > r_max * (1 + _RADIUS_SLACK)):
        worst = complex(z.flat[int(np.argmax(np.abs(z)))])
        raise DomainError(f"|z| = {abs(worst):.6g} exceeds validity radius {r_max}")


def evaluate(s: AnalyticSeries | MeromorphicSeries, z):
    """Horner evaluation at a scalar or an array of points."""
    zz = np.asarray(z, dtype=np.complex128)
    if isinstance(s, MeromorphicSeries):
        _check_radius(zz, 1.0)
        if np.any(np.abs(zz) < POLE_GUARD):
            raise DomainError(f"|z| below pole guard {POLE_GUARD}")
        regular = np.zeros_like(zz)
        for c in s.tail[::-1]:
            regular = regular * zz + c
        out = 1.0 / zz + s.constant + zz * regular
    else:
        _check_radius(zz, s.r_max)
        out = np.zeros_like(zz)
        for c in s.coeffs[::-1]:
            out = out * zz + c
    return complex(out) if out.ndim == 0 else out


def circle_values(s: AnalyticSeries, r: float, n: int) -> np.ndarray:
    """Values at r * exp(2 pi i j / n) by folding coefficients into an FFT."""
    if r <= 0 or r > s.r_max * (1 + _RADIUS_SLACK):
        raise DomainError(f"radius {r} outside (0, {s.r_max}]")
    scaled = s.coeffs * r ** np.arange(s.order + 1)
    folded = np.zeros(n, dtype=np.complex128)
    np.add.at(folded, np.arange(s.order + 1) % n, scaled)
    return np.fft.ifft(folded) * n


def sample_circle(s: AnalyticSeries, r: float, n: int) -> np.ndarray:
    if n < 16:
        raise ValueError("sample_circle needs at least 16 points")
    return circle_values(s, r, n)


def compose_schwarz(s: AnalyticSeries, w: AnalyticSeries, probe_points: int = 256) -> AnalyticSeries:
    """Truncated composition s(w(z)) for a Schwarz function w."""
    if abs(w.coeffs[0]) > 1e-14:
        raise NotSchwarz(f"w(0) = {complex(w.coeffs[0])!r} is not 0")
    # a self-map of the disk fixing 0 may touch |w| = 1 on the closed boundary (w = z)
    edge = np.abs(circle_values(w, w.r_max, probe_points)).max()
    if edge > 1.0 + 1e-12:
        raise NotSchwarz(f"max |w| on |z| = {w.r_max} is {edge:.6g} > 1")
    order = max(s.order, w.order)
    w = w.padded(order)
    out = AnalyticSeries.constant(s.coeffs[-1], order, w.r_max)
    for c in s.coeffs[-2::-1]:
        out = multiply(out, w) + c
    return out.with_radius(min(s.r_max, w.r_max))


def identical(s1: AnalyticSeries, s2: AnalyticSeries) -> bool:
    """Exact coefficient equality after padding."""
    order = max(s1.order, s2.order)
    return bool(np.array_equal(s1.padded(order).coeffs, s2.padded(order).coeffs))


def max_coeff_diff(s1: AnalyticSeries, s2: AnalyticSeries) -> float:
    order = max(s1.order, s2.order)
    return float(np.max(np.abs(s1.padded(order).coeffs - s2.padded(order).coeffs)))


# --- plain-text literal format ---------------------------------------------
#
#   analytic K [r_max]        then K+1 lines "re im" for c_0..c_K
#   meromorphic K             then K lines for a_1..a_K
#   meromorphic0 K            then K+1 lines for a_0..a_K


def _fmt(c: complex) -> str:
    return f"{c.real!r} {c.imag!r}"


def format_literal(s: AnalyticSeries | MeromorphicSeries) -> str:
    if isinstance(s, MeromorphicSeries):
        if s.is_strict:
            lines = [f"meromorphic {s.order}"] + [_fmt(complex(c)) for c in s.tail]
        else:
            lines = [f"meromorphic0 {s.order}"] + [_fmt(complex(c)) for c in s.regular_part()]
    else:
        header = f"analytic {s.order}" if s.r_max == 1.0 else f"analytic {s.order} {s.r_max!r}"
        lines = [header] + [_fmt(complex(c)) for c in s.coeffs]
    return "\n".join(lines) + "\n"


def parse_literal(text: str) -> AnalyticSeries | MeromorphicSeries:
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line)
    if not rows:
        raise ParseError("empty series literal")
    head = rows[0].split()
    kind = head[0]
    try:
        order = int(head[1])
        values = []
        for row in rows[1:]:
            parts = row.split()
            if len(parts) not in (1, 2):
                raise ParseError(f"expected 're im', got {row!r}")
            im = float(parts[1]) if len(parts) == 2 else 0.0
            values.append(complex(float(parts[0]), im))
    except (IndexError, ValueError) as exc:
        raise ParseError(str(exc)) from exc
    expected = {"analytic": order + 1, "meromorphic": order, "meromorphic0": order + 1}
    if kind not in expected:
        raise ParseError(f"unknown series kind {kind!r}")
    if len(values) != expected[kind]:
        raise ParseError(f"{kind} {order} needs {expected[kind]} coefficients, got {len(values)}")
    if kind == "analytic":
        r_max = float(head[2]) if len(head) > 2 else 1.0
        return AnalyticSeries(values, r_max)
    if kind == "meromorphic":
        return MeromorphicSeries(values)
    return MeromorphicSeries(values[1:], values[0])


def read_series(path) -> AnalyticSeries | MeromorphicSeries:
    with open(path, encoding="utf-8") as fh:
        return parse_literal(fh.read())


def geometric(ratio: Number, order: int = DEFAULT_ORDER) -> AnalyticSeries:
    """1 / (1 - ratio z)."""
    return AnalyticSeries(complex(ratio) ** np.arange(order + 1))


def monomial_order_for(decay: float, radius: float = 0.95, floor: float = 1e-16, cap: int = 2048) -> int:
    """Smallest order whose geometric tail (decay * radius)^K drops below floor."""
    q = abs(decay) * radius
    if q <= 0:
        return 8
    if q >= 1:
        return cap
    return int(min(cap, max(8, math.ceil(math.log(floor) / math.log(q)))))
