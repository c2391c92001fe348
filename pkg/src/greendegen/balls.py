"""Closed balls of Q((t)) ordered by inclusion.

A ball ``B(c, e^{-m})`` is stored by its center and the integer
``log_radius`` m; ``m = inf`` is a point.  Any point of a ball is a center.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .formal_dyn import SeriesPolynomial, taylor_coefficients
from .series import INF, IndistinguishableFromZero, LaurentSeries


def _diam(m) -> float:
    return 0.0 if m == INF else math.exp(-m)


def _val_at_least(f: LaurentSeries, m) -> bool:
    if f.is_zero():
        if f.is_exact or f.precision >= m:
            return True
        raise IndistinguishableFromZero(f.precision)
    return f.valuation() >= m


@dataclass(frozen=True, eq=False)
class Ball:
    center: LaurentSeries
    log_radius: object = INF

    def __post_init__(self):
        object.__setattr__(self, "center", LaurentSeries.coerce(self.center))
        m = self.log_radius
        if m != INF and int(m) != m:
            raise ValueError("log_radius must be an integer or inf")
        if m != INF:
            object.__setattr__(self, "log_radius", int(m))

    @classmethod
    def point(cls, z) -> "Ball":
        return cls(LaurentSeries.coerce(z), INF)

    @property
    def is_point(self) -> bool:
        return self.log_radius == INF

    @property
    def diameter(self) -> float:
        return _diam(self.log_radius)

    def canonical_center(self) -> LaurentSeries:
        """The Laurent polynomial ``center mod t^{log_radius}``, the same for every center."""
        if self.is_point:
            return self.center
        return self.center.polynomial_part(self.log_radius)

    def __eq__(self, other):
        if not isinstance(other, Ball):
            return NotImplemented
        if self.log_radius != other.log_radius:
            return False
        return _val_at_least(self.center - other.center, self.log_radius)

    def __hash__(self):
        return hash((self.log_radius, self.canonical_center()))

    def __contains__(self, z) -> bool:
        return contains(self, Ball.point(z))

    def __repr__(self):
        m = "inf" if self.is_point else self.log_radius
        return f"Ball({str(self.center)!r}, log_radius={m})"


def contains(x: Ball, y: Ball) -> bool:
    """``y`` is a subset of ``x``."""
    if x.log_radius > y.log_radius:
        return False
    return _val_at_least(x.center - y.center, x.log_radius)


def join(x: Ball, y: Ball) -> Ball:
    """Smallest closed ball containing both."""
    cap = min(x.log_radius, y.log_radius)
    diff = x.center - y.center
    if diff.is_zero() and (diff.is_exact or diff.precision >= cap):
        m = cap
    else:
        m = diff.valuation_capped(cap)
    return Ball(x.center, m)


def distance(x: Ball, y: Ball) -> float:
    """``max(|diam(x v y) - diam x|, |diam(x v y) - diam y|)``."""
    dj = join(x, y).diameter
    return max(abs(dj - x.diameter), abs(dj - y.diameter))


def image(P: SeriesPolynomial, x: Ball) -> Ball:
    """``P(B(c, r)) = B(P(c), max_i |c_i| r^i)`` with ``c_i`` the Taylor coefficients at c."""
    coeffs = taylor_coefficients(P, x.center)
    if x.is_point:
        return Ball(coeffs[0], INF)
    m = x.log_radius
    d = len(coeffs) - 1
    cap = coeffs[d].valuation() + d * m
    best = cap
    for i in range(1, d):
        best = min(best, coeffs[i].valuation_capped(best - i * m) + i * m)
    return Ball(coeffs[0], best)


def iterate_image(P: SeriesPolynomial, x: Ball, n: int) -> Ball:
    for _ in range(n):
        x = image(P, x)
    return x
