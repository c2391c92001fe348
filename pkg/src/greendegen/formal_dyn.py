"""Polynomial dynamics over the Laurent-series field Q((t)).

Escape rates are exact: once an iterate lands in the region where the
leading term dominates, the Green function is
``log|z| + log|a_0|/(d-1)`` and ``g(a) = d^{-n} g(P^n(a))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .series import (
    INF,
    IndistinguishableFromZero,
    LaurentSeries,
    RootObstruction,
    format_series,
    invert_unit,
    nth_root,
)


class BudgetExceeded(RuntimeError):
    pass


class PrecisionExhausted(BudgetExceeded):
    pass


DEFAULT_START_PRECISION = 32
# Bounded orbits over Q can still grow in height doubly exponentially.
HEIGHT_BUDGET_BITS = 1 << 14


def coefficient_height(f: LaurentSeries) -> int:
    """Largest ``bits(numerator) + bits(denominator)`` among the stored coefficients."""
    return max((c.numerator.bit_length() + c.denominator.bit_length() for c in f.coefficients), default=0)


class SeriesPolynomial:
    """Degree ``d >= 2`` polynomial ``a_0 z^d + a_1 z^{d-1} + ... + a_d`` over Q((t))."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Sequence):
        coeffs = tuple(LaurentSeries.coerce(c) for c in coefficients)
        if len(coeffs) < 3:
            raise ValueError("a family needs degree d >= 2 (at least three coefficients)")
        if coeffs[0].is_zero():
            raise IndistinguishableFromZero(coeffs[0].precision, "leading coefficient a_0 is not distinguishable from zero")
        self.coefficients = coeffs

    @classmethod
    def parse(cls, texts: Sequence[str]) -> "SeriesPolynomial":
        return cls([LaurentSeries.coerce(s) for s in texts])

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def leading(self) -> LaurentSeries:
        return self.coefficients[0]

    def __call__(self, z) -> LaurentSeries:
        return evaluate(self, z)

    def __eq__(self, other):
        return isinstance(other, SeriesPolynomial) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"SeriesPolynomial({[format_series(c) for c in self.coefficients]!r})"

    def ascending(self) -> list:
        return list(reversed(self.coefficients))

    def truncate_relative(self, digits: int) -> "SeriesPolynomial":
        return SeriesPolynomial([c.truncate_relative(digits) for c in self.coefficients])

    def substitute_power(self, N: int) -> "SeriesPolynomial":
        return SeriesPolynomial([c.substitute_power(N) for c in self.coefficients])

    def derivative_ascending(self) -> list:
        """Coefficients of P' in ascending order (degree d-1)."""
        asc = self.ascending()
        return [asc[i] * i for i in range(1, len(asc))]

    def to_text(self) -> list:
        return [format_series(c) for c in self.coefficients]


@dataclass(frozen=True)
class AffineMap:
    """``phi(z) = scale * z + shift``."""

    scale: LaurentSeries
    shift: LaurentSeries = LaurentSeries.zero()

    def __post_init__(self):
        object.__setattr__(self, "scale", LaurentSeries.coerce(self.scale))
        object.__setattr__(self, "shift", LaurentSeries.coerce(self.shift))
        if self.scale.is_zero():
            raise IndistinguishableFromZero(self.scale.precision, "affine scale must be a unit")

    def __call__(self, z):
        return self.scale * z + self.shift

    def inverse(self, w, target_precision: int = None):
        return (LaurentSeries.coerce(w) - self.shift) * invert_unit(self.scale, target_precision)


@dataclass(frozen=True)
class EscapeResult:
    alpha: Fraction
    escape_iterate: int
    certified: bool = True


@dataclass(frozen=True)
class BoundedSoFar:
    """Escape not observed within the budget; not a proof of boundedness."""

    iterations: int
    max_log_norm: float
    working_precision: int
    reason: str = "iteration budget"


def evaluate(P: SeriesPolynomial, z) -> LaurentSeries:
    z = LaurentSeries.coerce(z)
    acc = P.coefficients[0]
    for c in P.coefficients[1:]:
        acc = acc * z + c
    return acc


def evaluate_ascending(coeffs: Sequence[LaurentSeries], z: LaurentSeries) -> LaurentSeries:
    acc = LaurentSeries.zero()
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def iterate(P: SeriesPolynomial, a, n: int, precision_budget: int = None,
            start_precision: int = None) -> LaurentSeries:
    """``P^n(a)``.

    Without a budget the computation is exact.  With a budget, iterates are
    kept to a relative working precision that starts at ``start_precision``
    and doubles whenever the result comes out indistinguishable from zero.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    a = LaurentSeries.coerce(a)
    if precision_budget is None:
        z = a
        for _ in range(n):
            z = evaluate(P, z)
        return z
    W = min(start_precision or DEFAULT_START_PRECISION, precision_budget)
    while True:
        Pw = P.truncate_relative(W)
        z = a.truncate_relative(W)
        for _ in range(n):
            z = evaluate(Pw, z).truncate_relative(W)
        if not z.is_zero() or z.is_exact:
            return z
        if W >= precision_budget:
            raise PrecisionExhausted(f"P^{n}(a) is zero modulo t^{z.precision} at working precision {W}")
        W = min(2 * W, precision_budget)


def escape_log_radius(P: SeriesPolynomial) -> Fraction:
    """Threshold rho with ``log|z| > rho`` implying ``log|P(z)| = d log|z| - val(a_0) > log|z|``."""
    d = P.degree
    v0 = P.leading.valuation()
    rho = max(Fraction(0), Fraction(v0, d - 1))
    for i, c in enumerate(P.coefficients[1:], start=1):
        vi = c.valuation()
        if vi == INF:
            continue
        rho = max(rho, Fraction(v0 - vi, i))
    return rho


def _escape_alpha(L: int, v0: int, d: int, n: int) -> Fraction:
    return Fraction(L * (d - 1) - v0, (d - 1) * d**n)


class _NeedPrecision(Exception):
    pass


def _green_run(P, a, W, iteration_budget, rho, d, v0, height_budget):
    Pw = P.truncate_relative(W) if W is not None else P
    z = a.truncate_relative(W) if W is not None else a
    max_log = -INF
    for n in range(iteration_budget + 1):
        if z.is_zero():
            if z.is_exact:
                L = -INF
            else:
                L = -z.precision
                if L > rho:
                    raise _NeedPrecision
        else:
            L = -z.valuation()
            if L > rho:
                return EscapeResult(_escape_alpha(L, v0, d, n), n, True)
        max_log = max(max_log, L)
        if n == iteration_budget:
            break
        if coefficient_height(z) > height_budget:
            return BoundedSoFar(n, max_log, W if W is not None else INF, "coefficient height budget")
        z = evaluate(Pw, z)
        if W is not None:
            z = z.truncate_relative(W)
    return BoundedSoFar(iteration_budget, max_log, W if W is not None else INF)


def green_exact(P: SeriesPolynomial, a, iteration_budget: int = 200, precision_budget: int = 256,
                start_precision: int = None, height_budget: int = HEIGHT_BUDGET_BITS):
    """Exact escape rate ``alpha = g_P(a)`` or :class:`BoundedSoFar`.

    Iterates until ``-val(P^n(a)) > escape_log_radius(P)`` and returns
    ``alpha = d^{-n} (-val(P^n(a)) - val(a_0)/(d-1))``.
    """
    a = LaurentSeries.coerce(a)
    d = P.degree
    v0 = P.leading.valuation()
    rho = escape_log_radius(P)
    W = min(start_precision or DEFAULT_START_PRECISION, precision_budget)
    while True:
        try:
            return _green_run(P, a, W, iteration_budget, rho, d, v0, height_budget)
        except _NeedPrecision:
            if W >= precision_budget:
                raise PrecisionExhausted(
                    f"orbit became indistinguishable from zero at working precision {W}") from None
            W = min(2 * W, precision_budget)


def compose_linear(P: SeriesPolynomial, u: LaurentSeries, v: LaurentSeries) -> list:
    """Ascending coefficients of ``P(u z + v)`` as a polynomial in ``z``."""
    u = LaurentSeries.coerce(u)
    v = LaurentSeries.coerce(v)
    result = [P.coefficients[0]]
    for c in P.coefficients[1:]:
        nxt = [r * v for r in result] + [LaurentSeries.zero()]
        for k, r in enumerate(result):
            nxt[k + 1] = nxt[k + 1] + r * u
        nxt[0] = nxt[0] + c
        result = nxt
    return result


def taylor_coefficients(P: SeriesPolynomial, center) -> list:
    """``c_0..c_d`` with ``P(z) = sum c_i (z - center)^i``."""
    return compose_linear(P, LaurentSeries.constant(1), LaurentSeries.coerce(center))


def conjugate(P: SeriesPolynomial, phi: AffineMap, target_precision: int = None) -> SeriesPolynomial:
    """``phi^{-1} o P o phi``."""
    asc = compose_linear(P, phi.scale, phi.shift)
    asc[0] = asc[0] - phi.shift
    inv = invert_unit(phi.scale, target_precision)
    return SeriesPolynomial([c * inv for c in reversed(asc)])


@dataclass(frozen=True)
class MonicForm:
    polynomial: SeriesPolynomial
    point: LaurentSeries
    base_change: int
    scale: LaurentSeries


def make_monic(P: SeriesPolynomial, a, target_precision: int = None) -> MonicForm:
    """Base change ``t -> t^{d-1}`` then conjugate by ``z -> a_0(t^{d-1})^{-1/(d-1)} z``.

    The returned pair satisfies ``green_exact(P~, a~) = (d-1) green_exact(P, a)``.
    """
    d = P.degree
    N = d - 1
    a = LaurentSeries.coerce(a)
    Ps = P.substitute_power(N)
    a_s = a.substitute_power(N)
    b0 = Ps.leading
    try:
        root = nth_root(b0, N, target_precision)
    except RootObstruction:
        raise
    except Exception as exc:  # NotASquare for d = 3
        raise RootObstruction(str(exc)) from exc
    u = invert_unit(root, target_precision)
    Pt = conjugate(Ps, AffineMap(u), target_precision)
    coeffs = list(Pt.coefficients)
    coeffs[0] = LaurentSeries.constant(1)
    return MonicForm(SeriesPolynomial(coeffs), a_s * root, N, u)


def centered(P: SeriesPolynomial, target_precision: int = None):
    """Conjugate a monic polynomial by ``z -> z - a_1/d``, killing the ``z^{d-1}`` term.

    Returns the centered polynomial and the shift used.
    """
    d = P.degree
    shift = -P.coefficients[1] * Fraction(1, d)
    Q = conjugate(P, AffineMap(LaurentSeries.constant(1), shift), target_precision)
    coeffs = list(Q.coefficients)
    coeffs[1] = LaurentSeries.zero()
    return SeriesPolynomial(coeffs), shift
