"""Truncated Laurent series over Q with the t-adic valuation.

A series is stored as ``lowest_exponent`` plus a dense tuple of exact
``Fraction`` coefficients, and is known modulo ``O(t^precision)``.
``precision`` is ``math.inf`` for exact Laurent polynomials.  The norm is
``|f| = exp(-valuation(f))`` so that ``|t| = e^{-1}``.
"""

from __future__ import annotations

import math
import re
import warnings
from fractions import Fraction
from typing import Iterable, Sequence, Union

INF = math.inf

# exponents beyond this are treated as a runaway computation
MAX_EXPONENT = 2**62

Scalar = Union[int, Fraction]


class SeriesError(ArithmeticError):
    pass


class IndistinguishableFromZero(SeriesError):
    """The series vanishes to its known precision; only a lower bound on the
    valuation is available."""

    def __init__(self, lower_bound, message=None):
        self.lower_bound = lower_bound
        super().__init__(message or f"series is zero modulo t^{lower_bound}; raise the precision")


class NotASquare(SeriesError):
    pass


class RootObstruction(SeriesError):
    """An n-th root would need an algebraic extension of Q or a ramified
    base change."""


class ZeroArgumentWithPole(SeriesError):
    pass


class ExponentOverflow(OverflowError):
    pass


class TruncationWarning(UserWarning):
    pass


class SeriesParseError(ValueError):
    def __init__(self, message, text="", column=0):
        self.message = message
        self.text = text
        self.column = column
        super().__init__(f"{message} (column {column + 1})")


def _check_exponent(e):
    if e != INF and e != -INF and abs(e) > MAX_EXPONENT:
        raise ExponentOverflow(f"exponent {e} exceeds the supported range; lower the iteration budget")


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, float):
        raise TypeError("float coefficients are not allowed; use Fraction or int")
    return Fraction(c)


class LaurentSeries:
    """Immutable truncated Laurent series ``sum c_i t^(lowest_exponent + i) + O(t^precision)``."""

    __slots__ = ("_low", "_coeffs", "_prec", "_hash")

    def __init__(self, coefficients: Iterable = (), lowest_exponent: int = 0, precision=INF):
        coeffs = [_as_fraction(c) for c in coefficients]
        if precision != INF:
            if isinstance(precision, float):
                raise TypeError("precision must be an integer or math.inf")
            precision = int(precision)
            keep = precision - lowest_exponent
            if keep < len(coeffs):
                coeffs = coeffs[: max(keep, 0)]
        start = 0
        while start < len(coeffs) and coeffs[start] == 0:
            start += 1
        end = len(coeffs)
        while end > start and coeffs[end - 1] == 0:
            end -= 1
        coeffs = coeffs[start:end]
        if coeffs:
            low = lowest_exponent + start
            _check_exponent(low)
            _check_exponent(low + len(coeffs))
        else:
            low = precision if precision != INF else 0
        _check_exponent(precision)
        self._low = low
        self._coeffs = tuple(coeffs)
        self._prec = precision
        self._hash = None

    # -- constructors ---------------------------------------------------

    @classmethod
    def constant(cls, c: Scalar, precision=INF) -> "LaurentSeries":
        return cls([c], 0, precision)

    @classmethod
    def monomial(cls, c: Scalar, e: int, precision=INF) -> "LaurentSeries":
        return cls([c], e, precision)

    @classmethod
    def zero(cls, precision=INF) -> "LaurentSeries":
        return cls((), 0 if precision == INF else precision, precision)

    @classmethod
    def from_terms(cls, terms: dict, precision=INF) -> "LaurentSeries":
        """Build from a mapping ``exponent -> coefficient``."""
        terms = {e: _as_fraction(c) for e, c in terms.items() if c != 0}
        if not terms:
            return cls.zero(precision)
        lo, hi = min(terms), max(terms)
        return cls([terms.get(e, 0) for e in range(lo, hi + 1)], lo, precision)

    @classmethod
    def coerce(cls, x) -> "LaurentSeries":
        if isinstance(x, LaurentSeries):
            return x
        if isinstance(x, str):
            return parse_series(x)
        return cls.constant(_as_fraction(x))

    # -- accessors ------------------------------------------------------

    @property
    def lowest_exponent(self) -> int:
        return self._low

    @property
    def coefficients(self) -> tuple:
        return self._coeffs

    @property
    def precision(self):
        return self._prec

    @property
    def is_exact(self) -> bool:
        return self._prec == INF

    def is_zero(self) -> bool:
        """True when every known coefficient vanishes (exact zero or zero to precision)."""
        return not self._coeffs

    def is_exact_zero(self) -> bool:
        return not self._coeffs and self._prec == INF

    def valuation(self):
        if self._coeffs:
            return self._low
        if self._prec == INF:
            return INF
        raise IndistinguishableFromZero(self._prec)

    def valuation_lower_bound(self):
        """Valuation if determined, else the precision (a lower bound)."""
        return self._low if self._coeffs else self._prec

    def valuation_capped(self, cap):
        """``min(valuation, cap)``; raises only if the answer is undetermined."""
        if self._coeffs:
            return min(self._low, cap)
        if self._prec >= cap:
            return cap
        raise IndistinguishableFromZero(self._prec)

    @property
    def relative_precision(self):
        if self._prec == INF:
            return INF
        return self._prec - self.valuation_lower_bound()

    def leading_coefficient(self) -> Fraction:
        if not self._coeffs:
            raise IndistinguishableFromZero(self._prec)
        return self._coeffs[0]

    def coefficient(self, e: int) -> Fraction:
        if e >= self._prec:
            raise IndistinguishableFromZero(self._prec, f"coefficient of t^{e} lies beyond O(t^{self._prec})")
        i = e - self._low
        if 0 <= i < len(self._coeffs):
            return self._coeffs[i]
        return Fraction(0)

    def terms(self):
        """Nonzero ``(exponent, coefficient)`` pairs in increasing order."""
        return [(self._low + i, c) for i, c in enumerate(self._coeffs) if c]

    @property
    def degree(self):
        """Largest exponent with a stored nonzero coefficient."""
        if not self._coeffs:
            return -INF
        return self._low + len(self._coeffs) - 1

    # -- precision management ----------------------------------------------

    def truncate(self, precision) -> "LaurentSeries":
        if precision >= self._prec:
            return self
        return LaurentSeries(self._coeffs, self._low, precision)

    def truncate_relative(self, digits: int) -> "LaurentSeries":
        """Keep at most ``digits`` coefficients past the valuation."""
        if not self._coeffs:
            return self
        return self.truncate(self._low + digits)

    def polynomial_part(self, below: int) -> "LaurentSeries":
        """Exact Laurent polynomial made of the terms with exponent < ``below``."""
        if below > self._prec:
            raise IndistinguishableFromZero(self._prec, f"need digits below t^{below}, have O(t^{self._prec})")
        keep = max(below - self._low, 0)
        return LaurentSeries(self._coeffs[:keep], self._low, INF)

    # -- arithmetic ---------------------------------------------------------

    def __neg__(self):
        return LaurentSeries([-c for c in self._coeffs], self._low, self._prec)

    def __add__(self, other):
        try:
            other = LaurentSeries.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        prec = min(self._prec, other._prec)
        if not other._coeffs:
            return self.truncate(prec) if self._coeffs else LaurentSeries.zero(prec)
        if not self._coeffs:
            return other.truncate(prec)
        lo = min(self._low, other._low)
        hi = max(self._low + len(self._coeffs), other._low + len(other._coeffs))
        if prec != INF:
            hi = min(hi, prec)
        if hi <= lo:
            return LaurentSeries.zero(prec)
        out = [Fraction(0)] * (hi - lo)
        for src in (self, other):
            off = src._low - lo
            for i, c in enumerate(src._coeffs):
                j = off + i
                if j >= len(out):
                    break
                out[j] += c
        return LaurentSeries(out, lo, prec)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = LaurentSeries.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return LaurentSeries.coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = _as_fraction(other)
            if c == 0:
                return LaurentSeries.zero()
            return LaurentSeries([x * c for x in self._coeffs], self._low, self._prec)
        try:
            other = LaurentSeries.coerce(other)
        except (TypeError, ValueError):
            return NotImplemented
        vf = self.valuation_lower_bound()
        vg = other.valuation_lower_bound()
        prec = min(_add_ext(vf, other._prec), _add_ext(vg, self._prec))
        if not self._coeffs or not other._coeffs:
            return LaurentSeries.zero(prec)
        low = self._low + other._low
        n = len(self._coeffs) + len(other._coeffs) - 1
        if prec != INF:
            n = min(n, prec - low)
        if n <= 0:
            return LaurentSeries.zero(prec)
        conv, den = _convolve(self._coeffs, other._coeffs, n)
        return LaurentSeries([Fraction(x, den) for x in conv], low, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = LaurentSeries.constant(1)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by ``t^k``."""
        if not self._coeffs:
            return LaurentSeries.zero(_add_ext(self._prec, k))
        return LaurentSeries(self._coeffs, self._low + k, _add_ext(self._prec, k))

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * (1 / _as_fraction(other))
        other = LaurentSeries.coerce(other)
        target = self.relative_precision
        if target == INF:
            target = other.relative_precision
        if target == INF:
            target = DEFAULT_RELATIVE_PRECISION
        return self * other.invert_unit(target)

    def invert_unit(self, target_precision: int = None) -> "LaurentSeries":
        return invert_unit(self, target_precision)

    def sqrt(self, target_precision: int = None) -> "LaurentSeries":
        return sqrt(self, target_precision)

    def nth_root(self, n: int, target_precision: int = None) -> "LaurentSeries":
        return nth_root(self, n, target_precision)

    def substitute_power(self, N: int) -> "LaurentSeries":
        return substitute_power(self, N)

    def evaluate_complex(self, t0: complex, tol: float = None) -> complex:
        return evaluate_complex(self, t0, tol)

    # -- comparison / hashing -----------------------------------------------

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = LaurentSeries.constant(other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        return self._low == other._low and self._coeffs == other._coeffs and self._prec == other._prec

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self._low, self._coeffs, self._prec))
        return self._hash

    def agrees_with(self, other, precision=None) -> bool:
        """True if both series agree up to their common precision (or ``precision``)."""
        other = LaurentSeries.coerce(other)
        diff = self - other
        if precision is not None:
            diff = diff.truncate(precision)
        return diff.is_zero()

    def __repr__(self):
        return f"LaurentSeries({format_series(self)!r})"

    def __str__(self):
        return format_series(self)


DEFAULT_RELATIVE_PRECISION = 32


def _add_ext(a, b):
    if a == INF or b == INF:
        return INF
    return a + b


def _common_denominator(coeffs: Sequence[Fraction]):
    den = 1
    for c in coeffs:
        if c.denominator != 1:
            den = math.lcm(den, c.denominator)
    if den == 1:
        return [c.numerator for c in coeffs], 1
    return [c.numerator * (den // c.denominator) for c in coeffs], den


def _convolve(f: Sequence[Fraction], g: Sequence[Fraction], n: int):
    """First ``n`` coefficients of the product, as integers over a common denominator."""
    a, da = _common_denominator(f)
    b, db = _common_denominator(g)
    if len(a) > len(b):
        a, b = b, a
    out = [0] * n
    if a is b or a == b:
        # squaring: use symmetry
        m = len(a)
        for i in range(min(m, n)):
            ai = a[i]
            if not ai:
                continue
            k = 2 * i
            if k < n:
                out[k] += ai * ai
            ai2 = 2 * ai
            for j in range(i + 1, min(m, n - i)):
                out[i + j] += ai2 * a[j]
        return out, da * db
    lb = len(b)
    for i, ai in enumerate(a):
        if i >= n:
            break
        if not ai:
            continue
        for j in range(min(lb, n - i)):
            out[i + j] += ai * b[j]
    return out, da * db


def _rational_root(c: Fraction, n: int):
    """Exact real n-th root of a rational, or None."""
    if c == 0:
        return Fraction(0)
    sign = 1
    if c < 0:
        if n % 2 == 0:
            return None
        sign = -1
        c = -c
    p = _int_root(c.numerator, n)
    q = _int_root(c.denominator, n)
    if p is None or q is None:
        return None
    return sign * Fraction(p, q)


def _int_root(m: int, n: int):
    r = round(m ** (1.0 / n)) if m < 2**1000 else None
    if r is not None:
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand**n == m:
                return cand
    # integer Newton iteration for large inputs
    if m < 2:
        return m
    x = 1 << ((m.bit_length() + n - 1) // n)
    while True:
        y = ((n - 1) * x + m // x ** (n - 1)) // n
        if y >= x:
            break
        x = y
    return x if x**n == m else None


def _unit_power_series(unit: Sequence[Fraction], exponent: Fraction, length: int):
    """Coefficients of ``(1 + u)^exponent`` where ``unit = 1 + u`` starts with 1."""
    h = [Fraction(1)] + [Fraction(0)] * (length - 1)
    for k in range(1, length):
        acc = Fraction(0)
        for j in range(1, min(k, len(unit) - 1) + 1):
            fj = unit[j]
            if fj:
                acc += (exponent * j - (k - j)) * fj * h[k - j]
        h[k] = acc / k
    return h


def valuation(f: LaurentSeries):
    return f.valuation()


def invert_unit(f: LaurentSeries, target_precision: int = None) -> LaurentSeries:
    """Multiplicative inverse to relative precision ``min(target, relative precision of f)``."""
    v = f.valuation()
    if v == INF:
        raise ZeroDivisionError("inverse of exact zero")
    c0 = f._coeffs[0]
    if f.is_exact and len(f._coeffs) == 1:
        return LaurentSeries([1 / c0], -v)
    rel = f.relative_precision
    if target_precision is None:
        target_precision = DEFAULT_RELATIVE_PRECISION if rel == INF else rel
    R = min(target_precision, rel)
    unit = [c / c0 for c in f._coeffs[:R]]
    g = _unit_power_series(unit, Fraction(-1), R)
    return LaurentSeries([x / c0 for x in g], -v, -v + R)


def nth_root(f: LaurentSeries, n: int, target_precision: int = None) -> LaurentSeries:
    """Real n-th root with the positive (or real, for odd n) branch of the leading coefficient."""
    if n < 1:
        raise ValueError("root index must be positive")
    if n == 1:
        return f
    v = f.valuation()
    if v == INF:
        return LaurentSeries.zero()
    if v % n:
        raise (NotASquare if n == 2 else RootObstruction)(
            f"valuation {v} is not divisible by {n}; apply substitute_power first")
    c0 = f._coeffs[0]
    r0 = _rational_root(c0, n)
    if r0 is None:
        raise (NotASquare if n == 2 else RootObstruction)(f"leading coefficient {c0} has no rational {n}-th root")
    if f.is_exact and len(f._coeffs) == 1:
        return LaurentSeries([r0], v // n)
    rel = f.relative_precision
    if target_precision is None:
        target_precision = DEFAULT_RELATIVE_PRECISION if rel == INF else rel
    R = min(target_precision, rel)
    unit = [c / c0 for c in f._coeffs[:R]]
    h = _unit_power_series(unit, Fraction(1, n), R)
    return LaurentSeries([x * r0 for x in h], v // n, v // n + R)


def sqrt(f: LaurentSeries, target_precision: int = None) -> LaurentSeries:
    return nth_root(f, 2, target_precision)


def substitute_power(f: LaurentSeries, N: int) -> LaurentSeries:
    """The series ``f(t^N)``."""
    if N < 1:
        raise ValueError("N must be a positive integer")
    if N == 1:
        return f
    prec = f._prec * N if f._prec != INF else INF
    if not f._coeffs:
        return LaurentSeries.zero(prec)
    out = [Fraction(0)] * ((len(f._coeffs) - 1) * N + 1)
    out[::N] = f._coeffs
    return LaurentSeries(out, f._low * N, prec)


def truncation_error(f: LaurentSeries, t0: complex) -> float:
    """Rough size of the first omitted term: ``max|c| * |t0|^precision``."""
    if f.is_exact:
        return 0.0
    r = abs(t0)
    if r == 0:
        return 0.0
    scale = max((abs(float(c)) for c in f._coeffs), default=1.0)
    try:
        return scale * r ** f._prec
    except OverflowError:
        return INF


def evaluate_complex(f: LaurentSeries, t0: complex, tol: float = None) -> complex:
    """Horner evaluation of the retained terms at ``t0``."""
    t0 = complex(t0)
    if t0 == 0:
        if f._coeffs and f._low < 0:
            raise ZeroArgumentWithPole(f"series {format_series(f)} has a pole at t = 0")
        return complex(float(f.coefficient(0))) if (f._coeffs and f._low <= 0) else 0j
    if tol is not None:
        err = truncation_error(f, t0)
        if err > tol:
            warnings.warn(f"truncation error ~{err:.3g} exceeds tolerance {tol:.3g} at |t| = {abs(t0):.3g}",
                          TruncationWarning, stacklevel=2)
    acc = 0j
    for c in reversed(f._coeffs):
        acc = acc * t0 + float(c)
    return acc * t0 ** f._low if f._coeffs else 0j


# -- text form --------------------------------------------------------------


def _format_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def format_series(f: LaurentSeries) -> str:
    """Exact textual form, e.g. ``1 - 2*t - 2*t^2 + O(t^3)`` or ``1/2*t^-1``."""
    parts = []
    for e, c in f.terms():
        neg = c < 0
        a = -c if neg else c
        if e == 0:
            body = _format_coeff(a)
        else:
            mono = "t" if e == 1 else f"t^{e}"
            body = mono if a == 1 else f"{_format_coeff(a)}*{mono}"
        parts.append(("-" if neg else "+", body))
    if f.precision != INF:
        parts.append(("+", f"O(t^{f.precision})"))
    if not parts:
        return "0"
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TOKEN = re.compile(
    r"""\s*(?:
        (?P<big_o>O\(\s*t\s*(?:\^\s*(?:\(\s*(?P<oe1>[+-]?\d+)\s*\)|(?P<oe2>[+-]?\d+)))?\s*\))
      | (?P<num>\d+)
      | (?P<t>t)
      | (?P<op>[-+*/^()])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SeriesParseError(f"unexpected character {text[pos]!r}", text, pos)
        start = m.start() + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group("big_o") is not None:
            e = m.group("oe1") or m.group("oe2") or "1"
            toks.append(("O", int(e), start))
        elif m.group("num") is not None:
            toks.append(("num", int(m.group("num")), start))
        elif m.group("t") is not None:
            toks.append(("t", None, start))
        else:
            toks.append((m.group("op"), None, start))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


def parse_series(text: str) -> LaurentSeries:
    """Parse the exact textual form produced by :func:`format_series`.

    Terms are ``c*t^e`` with ``c`` an integer or ``p/q``; a trailing
    ``O(t^M)`` sets the precision.  No floats are accepted.
    """
    toks = _tokenize(text)
    i = 0
    terms: dict = {}
    precision = INF

    def peek():
        return toks[i]

    def expect_int():
        nonlocal i
        sign = 1
        kind, val, col = toks[i]
        if kind in "+-":
            sign = -1 if kind == "-" else 1
            i += 1
            kind, val, col = toks[i]
        if kind != "num":
            raise SeriesParseError("expected an integer", text, col)
        i += 1
        return sign * val

    first = True
    while True:
        kind, val, col = peek()
        sign = 1
        if kind in ("+", "-"):
            sign = -1 if kind == "-" else 1
            i += 1
        elif not first:
            if kind == "end":
                break
            raise SeriesParseError(f"expected '+' or '-' between terms, got {kind!r}", text, col)
        elif kind == "end":
            raise SeriesParseError("empty series", text, col)
        first = False
        kind, val, col = peek()
        if kind == "O":
            if precision != INF:
                raise SeriesParseError("duplicate O(t^M) term", text, col)
            if sign < 0:
                raise SeriesParseError("O-term cannot be negated", text, col)
            precision = val
            i += 1
            continue
        coeff = Fraction(1)
        exponent = 0
        if kind == "num":
            num = val
            i += 1
            den = 1
            if peek()[0] == "/":
                i += 1
                kind2, val2, col2 = peek()
                if kind2 != "num":
                    raise SeriesParseError("expected a denominator", text, col2)
                if val2 == 0:
                    raise SeriesParseError("zero denominator", text, col2)
                den = val2
                i += 1
            coeff = Fraction(num, den)
            if peek()[0] == "*":
                i += 1
                if peek()[0] != "t":
                    raise SeriesParseError("expected 't' after '*'", text, peek()[2])
            if peek()[0] == "t":
                exponent = None
        elif kind == "t":
            exponent = None
        else:
            raise SeriesParseError(f"unexpected token {kind!r}", text, col)
        if exponent is None:
            i += 1
            exponent = 1
            if peek()[0] == "^":
                i += 1
                if peek()[0] == "(":
                    i += 1
                    exponent = expect_int()
                    if peek()[0] != ")":
                        raise SeriesParseError("expected ')'", text, peek()[2])
                    i += 1
                else:
                    exponent = expect_int()
        if peek()[0] in ("num", "t", "O", "/", "^", "*"):
            raise SeriesParseError("unexpected token", text, peek()[2])
        terms[exponent] = terms.get(exponent, Fraction(0)) + sign * coeff
    if precision != INF:
        for e in terms:
            if e >= precision and terms[e] != 0:
                raise SeriesParseError(f"term t^{e} lies beyond O(t^{precision})", text, 0)
    return LaurentSeries.from_terms(terms, precision)


T = LaurentSeries.monomial(1, 1)
ONE = LaurentSeries.constant(1)
