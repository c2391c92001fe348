"""Certificate-producing classification of a marked orbit over Q((t)).

Outcomes: the orbit escapes (exact rational escape rate), enters a periodic
ball on which it accumulates, converges to an attracting cycle, or stays
within finitely many anchor truncations at a fixed t-adic depth.  Anything
else within budget is reported as :class:`Undetermined`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .balls import Ball, contains, iterate_image
from .formal_dyn import (
    AffineMap,
    EscapeResult,
    PrecisionExhausted,
    SeriesPolynomial,
    _escape_alpha,
    conjugate,
    escape_log_radius,
    evaluate,
    evaluate_ascending,
    HEIGHT_BUDGET_BITS,
    coefficient_height,
    green_exact,
)
from .series import INF, IndistinguishableFromZero, LaurentSeries, format_series, invert_unit


@dataclass(frozen=True)
class Budgets:
    iterations: int = 200
    precision: int = 256
    anchor_level: int = 32
    height_bits: int = HEIGHT_BUDGET_BITS

    def __post_init__(self):
        if self.iterations < 1 or self.precision < 1:
            raise ValueError("budgets must be positive")
        if self.anchor_level < 1:
            raise ValueError("anchor level must be >= 1")


def default_anchor_level(d: int, fitted_C: float = None) -> int:
    """``4 * ceil(C) * d``; C falls back to 8 when no fit is available."""
    C = 8 if fitted_C is None or not math.isfinite(fitted_C) else max(1, math.ceil(fitted_C))
    return 4 * C * d


@dataclass(frozen=True)
class Escape:
    alpha: Fraction
    n: int


@dataclass(frozen=True)
class PeriodicBall:
    ball: Ball
    preperiod: int
    period: int
    normalization: int = 0
    visits: tuple = ()


@dataclass(frozen=True)
class ConvergentOrbit:
    limit: LaurentSeries
    preperiod: int
    period: int = 1
    contraction_log_radius: int = 1
    multiplier_valuation: object = INF
    normalization: int = 0
    difference_valuations: tuple = ()


@dataclass(frozen=True)
class CompactAnchors:
    level: int
    anchors: tuple
    recurrence: tuple
    normalization: int = 0


@dataclass(frozen=True)
class Undetermined:
    report: dict = field(default_factory=dict)


OrbitClassification = Union[Escape, PeriodicBall, ConvergentOrbit, CompactAnchors, Undetermined]


class TheoremCase(enum.Enum):
    ThmCase1_Escape = 1
    ThmCase2_PreperiodicBall = 2
    ThmCase3_CompactClosure = 3
    Undetermined = 0


def theorem_case(c: OrbitClassification) -> TheoremCase:
    if isinstance(c, Escape):
        return TheoremCase.ThmCase1_Escape
    if isinstance(c, PeriodicBall):
        return TheoremCase.ThmCase2_PreperiodicBall
    if isinstance(c, (ConvergentOrbit, CompactAnchors)):
        return TheoremCase.ThmCase3_CompactClosure
    return TheoremCase.Undetermined


# -- helpers ----------------------------------------------------------------


def normalize_to_unit_ball(P: SeriesPolynomial, a: LaurentSeries):
    """Conjugate by ``z -> t^{-m} z`` so that a bounded orbit lies in the unit ball.

    Bounded orbits never exceed ``escape_log_radius``, so ``m = floor(rho)`` works.
    """
    m = max(0, math.floor(escape_log_radius(P)))
    if m == 0:
        return P, a, 0
    Pn = conjugate(P, AffineMap(LaurentSeries.monomial(1, -m)))
    return Pn, a.shift(m), m


def _orbit(P, a, K, W):
    Pw = SeriesPolynomial([c.truncate(W) for c in P.coefficients])
    z = a.truncate(W)
    out = [z]
    for _ in range(K):
        z = evaluate(Pw, z).truncate(W)
        out.append(z)
    return out


def _keys(orbit, level):
    return [u.polynomial_part(level) for u in orbit]


def _derivative(P: SeriesPolynomial):
    return P.derivative_ascending()


def _cycle_newton(P, z, p, W, steps=None):
    """Refine ``z`` towards a fixed point of ``P^p`` by Newton's method."""
    dP = _derivative(P)
    steps = steps or (W.bit_length() + 4)
    for _ in range(steps):
        w = z
        deriv = LaurentSeries.constant(1)
        for _ in range(p):
            deriv = (deriv * evaluate_ascending(dP, w)).truncate(W)
            w = evaluate(P, w).truncate(W)
        F = (w - z).truncate(W)
        if F.is_zero():
            return z, deriv
        Fp = deriv - 1
        if Fp.is_zero() or Fp.valuation() > 0:
            return None, None
        z = (z - F * invert_unit(Fp, W)).truncate(W)
    return None, None


def _cycle_multiplier(P, z, p, W):
    dP = _derivative(P)
    deriv = LaurentSeries.constant(1)
    w = z
    for _ in range(p):
        deriv = (deriv * evaluate_ascending(dP, w)).truncate(W)
        w = evaluate(P, w).truncate(W)
    return deriv, w


def _try_convergent(P, orbit, l, W, max_period=12):
    K = len(orbit) - 1
    keys = _keys(orbit, l + 1)
    for p in range(1, max_period + 1):
        if K < 2 * p:
            break
        if not all(keys[n] == keys[n + p] for n in range(K - 2 * p, K - p + 1)):
            continue
        limit, deriv = _cycle_newton(P, orbit[K], p, W)
        if limit is None:
            continue
        try:
            mult_val = deriv.valuation_capped(W)
        except IndistinguishableFromZero:
            continue
        if mult_val <= 0:
            return None
        s = None
        for cand in range(0, l + 1):
            try:
                img = iterate_image(P, Ball(limit, cand), p)
                if contains(Ball(limit, cand + 1), img):
                    s = cand
                    break
            except IndistinguishableFromZero:
                continue
        if s is None:
            continue
        pre = None
        for n, u in enumerate(orbit):
            try:
                if (u - limit).valuation_capped(s) >= s:
                    pre = n
                    break
            except IndistinguishableFromZero:
                continue
        if pre is None:
            continue
        diffs = []
        for n in range(pre, K - p + 1, p):
            diff = orbit[n + p] - orbit[n]
            diffs.append(int(diff.valuation_lower_bound()) if diff.valuation_lower_bound() != INF else None)
        finite = [v for v in diffs if v is not None]
        if any(b < a for a, b in zip(finite, finite[1:])):
            continue
        return ConvergentOrbit(limit, pre, p, s, mult_val, 0, tuple(diffs))
    return None


def _try_periodic_ball(P, orbit, l):
    for r in range(l, -1, -1):
        groups = {}
        order = []
        for n, u in enumerate(orbit):
            k = u.polynomial_part(r)
            if k not in groups:
                groups[k] = []
                order.append(k)
            groups[k].append(n)
        for k in order:
            visits = groups[k]
            if len(visits) < 2:
                continue
            residues = [orbit[n].coefficient(r) for n in visits]
            if len(set(residues)) != len(residues):
                continue
            x = Ball(k, r)
            for p in range(1, visits[1] - visits[0] + 1):
                try:
                    if iterate_image(P, x, p) == x:
                        return PeriodicBall(x, visits[0], p, 0, tuple(visits))
                except IndistinguishableFromZero:
                    break
    return None


def _try_anchors(orbit, l):
    keys = _keys(orbit, l + 1)
    anchors = []
    index = {}
    rec = []
    for k in keys:
        if k not in index:
            index[k] = len(anchors)
            anchors.append(k)
        rec.append(index[k])
    if len(anchors) == len(keys):
        return None
    return CompactAnchors(l, tuple(anchors), tuple(rec), 0)


def _checkpoints(K):
    pts = []
    c = 4
    while c < K:
        pts.append(c)
        c *= 2
    pts.append(K)
    return pts


def classify(P: SeriesPolynomial, a, budgets: Budgets = Budgets()) -> OrbitClassification:
    """Run the escape test, then look for ball / convergence / anchor certificates.

    The bounded-orbit certificates are sound at any orbit length, so they are
    tried at checkpoints 4, 8, 16, ... and once more if the height budget stops
    the orbit early.
    """
    a = LaurentSeries.coerce(a)
    g = green_exact(P, a, budgets.iterations, budgets.precision, height_budget=budgets.height_bits)
    if isinstance(g, EscapeResult):
        return Escape(g.alpha, g.escape_iterate)
    reason = g.reason
    l = budgets.anchor_level
    Pn, an, m = normalize_to_unit_ball(P, a)
    K = budgets.iterations
    W = min(budgets.precision, max(2 * (l + 1), 32))
    Pw = SeriesPolynomial([c.truncate(W) for c in Pn.coefficients])
    orbit = [an.truncate(W)]
    if an.precision <= l:
        raise PrecisionExhausted(f"marked point precision O(t^{an.precision}) is below anchor level {l}")
    for cp in _checkpoints(K):
        stopped = False
        while len(orbit) <= cp:
            nxt = evaluate(Pw, orbit[-1]).truncate(W)
            if coefficient_height(nxt) > budgets.height_bits:
                stopped = True
                reason = "coefficient height budget"
                break
            orbit.append(nxt)
            if nxt.precision <= l:
                if W >= budgets.precision:
                    raise PrecisionExhausted(
                        f"orbit precision fell to O(t^{nxt.precision}) below anchor level {l}")
                W = min(2 * W, budgets.precision)
                Pw = SeriesPolynomial([c.truncate(W) for c in Pn.coefficients])
                orbit = _orbit(Pn, an, len(orbit) - 1, W)
        prefix = orbit[: cp + 1]
        c = _try_convergent(Pn, prefix, l, W)
        if c is not None:
            return ConvergentOrbit(c.limit, c.preperiod, c.period, c.contraction_log_radius,
                                   c.multiplier_valuation, m, c.difference_valuations)
        c = _try_periodic_ball(Pn, prefix, l)
        if c is not None:
            return PeriodicBall(c.ball, c.preperiod, c.period, m, c.visits)
        c = _try_anchors(prefix, l)
        if c is not None:
            return CompactAnchors(c.level, c.anchors, c.recurrence, m)
        if stopped:
            break
    return Undetermined({
        "reason": reason,
        "iterations": len(orbit) - 1,
        "working_precision": W,
        "anchor_level": l,
        "normalization": m,
        "max_log_norm": _jsonable(g.max_log_norm),
        "distinct_truncations": len(set(_keys(orbit, l + 1))),
    })


# -- certificate checking -------------------------------------------------------


def verify(P: SeriesPolynomial, a, c: OrbitClassification, budgets: Budgets = Budgets()) -> bool:
    """Re-check a certificate from scratch, independently of :func:`classify`."""
    a = LaurentSeries.coerce(a)
    if isinstance(c, Escape):
        rho = escape_log_radius(P)
        z = a
        for _ in range(c.n):
            z = evaluate(P, z).truncate_relative(budgets.precision)
        L = -z.valuation()
        if L <= rho:
            return False
        # the single-step identity must hold past the threshold
        w = evaluate(P, z).truncate_relative(budgets.precision)
        if -w.valuation() != P.degree * L - P.leading.valuation():
            return False
        return c.alpha == _escape_alpha(L, P.leading.valuation(), P.degree, c.n) and c.alpha > 0
    if isinstance(c, Undetermined):
        return True
    Pn, an, m = normalize_to_unit_ball(P, a)
    if m != c.normalization:
        return False
    W = budgets.precision
    if isinstance(c, PeriodicBall):
        if iterate_image(Pn, c.ball, c.period) != c.ball:
            return False
        orbit = _orbit(Pn, an, max(c.visits) if c.visits else c.preperiod, W)
        if any(orbit[n] not in c.ball for n in c.visits or (c.preperiod,)):
            return False
        res = [orbit[n].coefficient(c.ball.log_radius) for n in c.visits]
        return len(set(res)) == len(res) and orbit[c.preperiod] in c.ball
    if isinstance(c, ConvergentOrbit):
        Wl = c.limit.precision if c.limit.precision != INF else W
        deriv, w = _cycle_multiplier(Pn, c.limit, c.period, Wl)
        s = c.contraction_log_radius
        if not (w - c.limit).truncate(Wl).is_zero():
            return False
        if deriv.valuation_capped(Wl) <= 0:
            return False
        ball = Ball(c.limit, s)
        if not contains(Ball(c.limit, s + 1), iterate_image(Pn, ball, c.period)):
            return False
        orbit = _orbit(Pn, an, c.preperiod, W)
        return orbit[c.preperiod] in ball
    if isinstance(c, CompactAnchors):
        orbit = _orbit(Pn, an, len(c.recurrence) - 1, W)
        for u, i in zip(orbit, c.recurrence):
            if not (u - c.anchors[i]).truncate(c.level + 1).is_zero():
                return False
        return True
    raise TypeError(f"unknown classification {c!r}")


# -- serialization ------------------------------------------------------------------


def _jsonable(x):
    if isinstance(x, Fraction):
        return str(x)
    if x == INF:
        return "inf"
    if x == -INF:
        return "-inf"
    return x


def to_dict(c: OrbitClassification) -> dict:
    case = theorem_case(c).name
    if isinstance(c, Escape):
        return {"variant": "Escape", "theorem_case": case, "alpha": str(c.alpha), "n": c.n}
    if isinstance(c, PeriodicBall):
        return {"variant": "PeriodicBall", "theorem_case": case,
                "ball": {"center": format_series(c.ball.canonical_center()),
                         "log_radius": _jsonable(c.ball.log_radius)},
                "preperiod": c.preperiod, "period": c.period, "normalization": c.normalization,
                "visits": list(c.visits)}
    if isinstance(c, ConvergentOrbit):
        return {"variant": "ConvergentOrbit", "theorem_case": case, "limit": format_series(c.limit),
                "preperiod": c.preperiod, "period": c.period,
                "contraction_log_radius": c.contraction_log_radius,
                "multiplier_valuation": _jsonable(c.multiplier_valuation),
                "normalization": c.normalization,
                "difference_valuations": list(c.difference_valuations)}
    if isinstance(c, CompactAnchors):
        return {"variant": "CompactAnchors", "theorem_case": case, "level": c.level,
                "anchors": [format_series(q) for q in c.anchors], "recurrence": list(c.recurrence),
                "normalization": c.normalization,
                "note": "certifies the computed truncations only, not compactness of the true orbit"}
    return {"variant": "Undetermined", "theorem_case": case, "report": dict(c.report)}
