"""Truncated power series, additive and multiplicative genera, and their evaluation at the point."""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction
from numbers import Number

from .acyccalc import KAClass
from .hermlin import HermComplex


class DomainError(ValueError):
    pass


def _coerce(c, exact: bool):
    if exact:
        if isinstance(c, float):
            return Fraction(c).limit_denominator(10 ** 12) if c != int(c) else Fraction(int(c))
        return Fraction(c)
    return float(c)


class TruncSeries:
    """c_0 + c_1 x + ... + c_N x^N, with exact Fraction coefficients unless ``exact=False``."""

    __slots__ = ("order", "coeffs", "exact")

    def __init__(self, coeffs, order: int | None = None, exact: bool = True):
        coeffs = list(coeffs)
        if order is None:
            order = max(len(coeffs) - 1, 0)
        if order < 0:
            raise DomainError("order must be non-negative")
        coeffs = coeffs[:order + 1] + [0] * (order + 1 - len(coeffs))
        self.order = order
        self.exact = exact
        self.coeffs = tuple(_coerce(c, exact) for c in coeffs)

    # -- constructors -------------------------------------------------------
    @classmethod
    def constant(cls, c, order: int, exact: bool = True) -> "TruncSeries":
        return cls([c], order, exact)

    @classmethod
    def x(cls, order: int, exact: bool = True) -> "TruncSeries":
        return cls([0, 1], order, exact)

    def _like(self, coeffs) -> "TruncSeries":
        return TruncSeries(coeffs, self.order, self.exact)

    def _check(self, other: "TruncSeries"):
        if not isinstance(other, TruncSeries):
            raise TypeError("expected a TruncSeries")
        if other.order != self.order:
            raise DomainError(f"orders differ: {self.order} vs {other.order}")

    def _lift(self, other):
        if isinstance(other, TruncSeries):
            self._check(other)
            return other
        if isinstance(other, Number):
            return self.constant(other, self.order, self.exact)
        return NotImplemented

    # -- ring operations --------------------------------------------------------
    def __add__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self._like([a + b for a, b in zip(self.coeffs, other.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return self._like([-a for a in self.coeffs])

    def __sub__(self, other):
        other = self._lift(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number) and not isinstance(other, TruncSeries):
            c = _coerce(other, self.exact)
            return self._like([c * a for a in self.coeffs])
        other = self._lift(other)
        if other is NotImplemented:
            return other
        n = self.order
        a, b = self.coeffs, other.coeffs
        return self._like([sum(a[k] * b[m - k] for k in range(m + 1)) for m in range(n + 1)])

    __rmul__ = __mul__

    def reciprocal(self) -> "TruncSeries":
        a = self.coeffs
        if a[0] == 0:
            raise DomainError("reciprocal needs a unit constant term")
        out = [1 / a[0] if not self.exact else Fraction(1) / a[0]]
        for m in range(1, self.order + 1):
            s = sum(a[k] * out[m - k] for k in range(1, m + 1))
            out.append(-s / a[0])
        return self._like(out)

    def __truediv__(self, other):
        if isinstance(other, Number) and not isinstance(other, TruncSeries):
            if other == 0:
                raise DomainError("division by zero")
            c = _coerce(other, self.exact)
            return self._like([a / c for a in self.coeffs])
        other = self._lift(other)
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        out = self.constant(1, self.order, self.exact)
        for _ in range(k):
            out = out * self
        return out

    def compose(self, inner: "TruncSeries") -> "TruncSeries":
        """self(inner(x)); inner must have zero constant term."""
        self._check(inner)
        if inner.coeffs[0] != 0:
            raise DomainError("inner series of a composition needs zero constant term")
        out = self.constant(0, self.order, self.exact)
        for c in reversed(self.coeffs):          # Horner
            out = out * inner + c
        return out

    def derivative(self) -> "TruncSeries":
        return self._like([k * self.coeffs[k] for k in range(1, self.order + 1)])

    def shift_down(self) -> "TruncSeries":
        """(f - f(0)) / x, one order lower."""
        return TruncSeries(self.coeffs[1:], self.order - 1, self.exact)

    def exp(self) -> "TruncSeries":
        """exp(f) for f(0) = 0, via n g_n = sum_k k f_k g_{n-k}."""
        f = self.coeffs
        if f[0] != 0:
            raise DomainError("exp needs zero constant term")
        g = [_coerce(1, self.exact)]
        for n in range(1, self.order + 1):
            g.append(sum(k * f[k] * g[n - k] for k in range(1, n + 1)) / n)
        return self._like(g)

    def log(self) -> "TruncSeries":
        """log(g) for g(0) = 1, integrating g'/g."""
        if self.coeffs[0] != 1:
            raise DomainError("log needs constant term 1")
        n = self.order
        if n == 0:
            return self._like([0])
        lower = TruncSeries(self.coeffs[:n], n - 1, self.exact)
        q = lower.reciprocal() * TruncSeries(self.derivative().coeffs, n - 1, self.exact)
        return self._like([0] + [q.coeffs[k] / (k + 1) for k in range(n)])

    def truncate(self, order: int) -> "TruncSeries":
        return TruncSeries(self.coeffs, order, self.exact)

    def to_float(self) -> "TruncSeries":
        return TruncSeries([float(c) for c in self.coeffs], self.order, exact=False)

    def __call__(self, t: float) -> float:
        return float(sum(float(c) * t ** k for k, c in enumerate(self.coeffs)))

    def __eq__(self, other):
        if not isinstance(other, TruncSeries):
            return NotImplemented
        return self.order == other.order and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.order, self.coeffs))

    def __repr__(self):
        return f"TruncSeries({[str(c) for c in self.coeffs]})"


def exp_x(order: int) -> TruncSeries:
    return TruncSeries.x(order).exp()


def todd_series(order: int) -> TruncSeries:
    """x / (1 - e^{-x})."""
    # (1 - e^{-x}) / x needs one more order before dividing by x
    q = (1 - (-TruncSeries.x(order + 1)).exp()).shift_down()
    return q.reciprocal()


def correction_factor(order: int) -> TruncSeries:
    """(e^t - 1) / t."""
    return (exp_x(order + 1) - 1).shift_down()


# -- genera -------------------------------------------------------------------------


ADDITIVE, MULTIPLICATIVE = "additive", "multiplicative"


@dataclass(frozen=True)
class GenusSpec:
    kind: str
    series: TruncSeries
    point_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in (ADDITIVE, MULTIPLICATIVE):
            raise DomainError(f"unknown genus kind {self.kind!r}")
        if self.kind == MULTIPLICATIVE and self.series.coeffs[0] != 1:
            raise DomainError("a multiplicative genus has constant term 1")


def chern_character(order: int) -> GenusSpec:
    return GenusSpec(ADDITIVE, exp_x(order))


def todd_genus(order: int) -> GenusSpec:
    return GenusSpec(MULTIPLICATIVE, todd_series(order))


def additive_from_multiplicative(psi: GenusSpec) -> GenusSpec:
    if psi.kind != MULTIPLICATIVE:
        raise DomainError("expected a multiplicative genus")
    return GenusSpec(ADDITIVE, psi.series.log(), psi.point_scale)


def multiplicative_from_additive(phi: GenusSpec) -> GenusSpec:
    if phi.kind != ADDITIVE:
        raise DomainError("expected an additive genus")
    return GenusSpec(MULTIPLICATIVE, phi.series.exp(), phi.point_scale)


def calibrated(phi: GenusSpec) -> GenusSpec:
    """Point normalization read off the linear coefficient.

    For a line bundle whose metric is rescaled by e^{-2a}, the secondary class
    of phi in degree zero is c_1 * a (up to the global normalization of the
    target cohomology), so c_1 is the natural point_scale.
    """
    c1 = phi.series.coeffs[1] if phi.series.order >= 1 else 0
    return replace(phi, point_scale=float(c1))


def genus_of_complex(phi: GenusSpec, C: HermComplex) -> float:
    """sum_i (-1)^i phi(C^i); at the point only the rank term c_0 survives."""
    if phi.kind != ADDITIVE:
        raise DomainError("genus_of_complex takes an additive genus")
    return float(phi.series.coeffs[0]) * C.euler_characteristic()


def ka_coordinate(x) -> float:
    """KA coordinate of an acyclic complex, a KA class, an isomorphism roof or a distinguished triangle."""
    from .derived import HermTriangle, Roof, class_of_iso, class_of_triangle
    from .torsion import tau
    if isinstance(x, KAClass):
        return x.value
    if isinstance(x, HermComplex):
        return tau(x)
    if isinstance(x, Roof):
        return class_of_iso(x)
    if isinstance(x, HermTriangle):
        return class_of_triangle(x)
    if isinstance(x, Number):
        return float(x)
    raise TypeError(f"cannot take a KA coordinate of {type(x).__name__}")


def bott_chern_point(phi: GenusSpec, x) -> float:
    """The secondary class of phi at the point: point_scale times the KA coordinate."""
    if phi.kind != ADDITIVE:
        raise DomainError("bott_chern_point takes an additive genus")
    return phi.point_scale * ka_coordinate(x)


def psi_m_tilde_point(psi: GenusSpec, x) -> float:
    """The multiplicative secondary class at the point.

    Its correction factor (e^t - 1)/t is evaluated at the degree-zero part of
    phi on an acyclic input, which is 0, so the factor is 1.
    """
    phi = additive_from_multiplicative(psi)
    return correction_factor(0)(0.0) * bott_chern_point(phi, x)
