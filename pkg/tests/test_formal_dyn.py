import time
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from conftest import laurent_poly
from greendegen.formal_dyn import (
    AffineMap,
    BoundedSoFar,
    EscapeResult,
    PrecisionExhausted,
    SeriesPolynomial,
    centered,
    compose_linear,
    conjugate,
    escape_log_radius,
    green_exact,
    iterate,
    make_monic,
    taylor_coefficients,
)
from greendegen.series import INF, IndistinguishableFromZero, LaurentSeries, parse_series

t_sym, z_sym = sympy.symbols("t z")


def to_sympy(f: LaurentSeries):
    return sum(sympy.Rational(c.numerator, c.denominator) * t_sym**e for e, c in f.terms())


def sympy_iterate(coeffs, a, n):
    P = sum(to_sympy(c) * z_sym ** (len(coeffs) - 1 - i) for i, c in enumerate(coeffs))
    w = to_sympy(a)
    for _ in range(n):
        w = sympy.expand(P.subs(z_sym, w))
    return sympy.Poly(sympy.expand(w * t_sym**64), t_sym)


def test_iterate_matches_computer_algebra():
    P = SeriesPolynomial(["1", "0", "t"])
    assert iterate(P, 0, 3) == parse_series("t + t^2 + 2*t^3 + t^4")
    Q = SeriesPolynomial(["2", "t^-1", "1 - t"])
    a = parse_series("1 + t")
    ours = iterate(Q, a, 3)
    ref = sympy_iterate(Q.coefficients, a, 3)
    for (k,), c in ref.terms():
        assert ours.coefficient(k - 64) == Fraction(int(c.p), int(c.q))
    assert len(ours.terms()) == len(ref.terms())


def test_iterate_with_budget_agrees_on_known_digits():
    P = SeriesPolynomial(["1", "0", "t"])
    exact = iterate(P, 0, 6)
    approx = iterate(P, 0, 6, precision_budget=8)
    assert approx.agrees_with(exact)
    assert approx.precision != INF


def test_escape_quadratic_with_pole():
    r = green_exact(SeriesPolynomial(["1", "0", "t^-1"]), 0)
    assert isinstance(r, EscapeResult) and r.alpha == Fraction(1, 2)


def test_escape_leading_pole():
    r = green_exact(SeriesPolynomial(["t^-1", "0", "0"]), 1)
    assert r.alpha == 1


def test_valuation_recursion_oracle():
    """val(P^n(0)) = -2^(n-1) for z^2 + 1/t, independently of the escape test."""
    P = SeriesPolynomial(["1", "0", "t^-1"])
    for n in range(1, 8):
        assert iterate(P, 0, n).valuation() == -(2 ** (n - 1))


def test_non_monic_alpha_has_d_minus_one_denominator():
    # t^-1 z^3 at a = 1: P^n(1) = t^-(3^n - 1)/2, so alpha = 1/2 exactly
    P = SeriesPolynomial(["t^-1", "0", "0", "0"])
    assert green_exact(P, 1).alpha == Fraction(1, 2)
    for n in range(1, 6):
        assert iterate(P, 1, n).valuation() == -(3**n - 1) // 2


def test_bounded_orbit_reports_budget():
    r = green_exact(SeriesPolynomial(["1", "0", "t"]), 0, iteration_budget=20)
    assert isinstance(r, BoundedSoFar) and r.iterations == 20


def test_precision_exhaustion_is_raised():
    # a = 1 + O(t^2) for z^2 - 1 + ..., the orbit cancels to zero at low precision
    P = SeriesPolynomial(["t^-4", "0", "0"])
    a = parse_series("O(t^2)")
    with pytest.raises((PrecisionExhausted, IndistinguishableFromZero)):
        green_exact(P, a, precision_budget=4)


def _families(max_degree=3):
    @st.composite
    def fam(draw):
        d = draw(st.integers(2, max_degree))
        coeffs = [draw(laurent_poly(nonzero=True))] + [draw(laurent_poly()) for _ in range(d)]
        a = draw(laurent_poly())
        return SeriesPolynomial(coeffs), a
    return fam()


@settings(max_examples=60)
@given(_families())
def test_functional_equation(pa):
    P, a = pa
    r = green_exact(P, a, iteration_budget=30)
    r1 = green_exact(P, P(a), iteration_budget=30)
    if isinstance(r, EscapeResult) and isinstance(r1, EscapeResult):
        assert r1.alpha == P.degree * r.alpha
    if isinstance(r, EscapeResult):
        assert r.alpha > 0
        d = P.degree
        assert ((d - 1) * d**r.escape_iterate) % r.alpha.denominator == 0


@settings(max_examples=40)
@given(_families())
def test_escape_law_persists_along_exact_orbit(pa):
    """Past the threshold each step multiplies -val by d and subtracts val(a_0)."""
    P, a = pa
    r = green_exact(P, a, iteration_budget=12)
    if not isinstance(r, EscapeResult):
        return
    d, v0 = P.degree, P.leading.valuation()
    n = r.escape_iterate
    for k in range(3):
        z = iterate(P, a, n + k)
        assert -z.valuation() == r.alpha * d ** (n + k) + Fraction(v0, d - 1)


def test_escape_radius():
    assert escape_log_radius(SeriesPolynomial(["1", "0", "t^-1"])) == Fraction(1, 2)
    assert escape_log_radius(SeriesPolynomial(["t^-1", "0", "0"])) == 0
    assert escape_log_radius(SeriesPolynomial(["t", "0", "1"])) == 1


def test_compose_linear_and_taylor():
    P = SeriesPolynomial(["1", "0", "t"])
    asc = taylor_coefficients(P, parse_series("1"))
    assert asc == [parse_series("1 + t"), LaurentSeries.constant(2), LaurentSeries.constant(1)]
    asc = compose_linear(P, parse_series("t"), parse_series("0"))
    assert asc == [parse_series("t"), LaurentSeries.zero(), parse_series("t^2")]


def test_conjugation_is_consistent():
    P = SeriesPolynomial(["1", "1", "t"])
    phi = AffineMap(parse_series("t^-1"), parse_series("2"))
    Q = conjugate(P, phi)
    w = parse_series("3 - t")
    # phi(Q(w)) == P(phi(w))
    assert phi(Q(w)).agrees_with(P(phi(w)))


def test_make_monic_scales_alpha_by_d_minus_one():
    for coeffs, a in [(["t^-1", "0", "0"], 1), (["4*t^-2", "0", "1", "t^-1"], 0), (["1", "0", "t^-1"], 0)]:
        P = SeriesPolynomial(coeffs)
        mono = make_monic(P, a, 40)
        assert mono.polynomial.leading == LaurentSeries.constant(1)
        alpha = green_exact(P, a).alpha
        assert green_exact(mono.polynomial, mono.point).alpha == (P.degree - 1) * alpha


def test_centered_kills_subleading_term():
    P = SeriesPolynomial(["1", "2*t^-1", "t", "1"])
    Q, shift = centered(P)
    assert Q.coefficients[1].is_exact_zero()
    w = parse_series("1 + t")
    assert (Q(w) + shift).agrees_with(P(w + shift))


def test_single_run_is_fast():
    start = time.perf_counter()
    green_exact(SeriesPolynomial(["1", "0", "t^-1"]), 0)
    green_exact(SeriesPolynomial(["t^-1", "0", "0"]), 1)
    assert time.perf_counter() - start < 1.0
