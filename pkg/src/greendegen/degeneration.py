"""Sampling harness for ``g_{P_t}(a(t))`` near the degeneration point t = 0.

Samples live on circles ``|t| = r_j`` with ``r_j = r0^(2^j)``; the escape
rate is fitted against ``log|t|^{-1}`` and the remainder
``h(t) = g - alpha log|t|^{-1}`` is tested for continuity and for the
circle mean-value property.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .classifier import (
    Budgets,
    CompactAnchors,
    ConvergentOrbit,
    Escape,
    OrbitClassification,
    PeriodicBall,
    Undetermined,
    classify,
    normalize_to_unit_ball,
)
from .complex_dyn import family_at, green_value, lyapunov
from .formal_dyn import SeriesPolynomial, centered, make_monic
from .series import (
    IndistinguishableFromZero,
    LaurentSeries,
    SeriesError,
    TruncationWarning,
    evaluate_complex,
)


class DegenerateFit(ValueError):
    pass


class InconsistentEvidence(RuntimeError):
    pass


class PuiseuxObstruction(ArithmeticError):
    pass


@dataclass(frozen=True)
class DiagnosticSchedule:
    r0: float = 0.1
    levels: int = 4
    samples_per_circle: int = 16

    def __post_init__(self):
        if not 0 < self.r0 < 1:
            raise ValueError("r0 must lie in (0, 1)")
        if self.levels < 0 or self.samples_per_circle < 1:
            raise ValueError("invalid schedule")

    @property
    def radii(self) -> list:
        return [self.r0 ** (2**j) for j in range(self.levels + 1)]

    def parameters(self):
        """``(level, radius, angle_index, t)`` in a fixed order."""
        n = self.samples_per_circle
        for j, r in enumerate(self.radii):
            for k in range(n):
                yield j, r, k, r * cmath.exp(2j * math.pi * k / n)


@dataclass(frozen=True)
class GreenSample:
    level: int
    radius: float
    angle_index: int
    t: complex
    g: float
    g_error: float
    h: float
    alpha_used: float
    flags: tuple = ()

    @property
    def ok(self) -> bool:
        return math.isfinite(self.g) and "error" not in " ".join(self.flags)


def _as_family(family) -> SeriesPolynomial:
    if isinstance(family, SeriesPolynomial):
        return family
    return SeriesPolynomial(family)


def sample_green(family, a, schedule: DiagnosticSchedule, alpha=None, tol: float = 1e-10,
                 n_max: int = 500) -> list:
    """One :class:`GreenSample` per schedule point; failures are flagged, not raised."""
    P = _as_family(family)
    a = LaurentSeries.coerce(a)
    alpha_f = float(alpha) if alpha is not None else 0.0
    out = []
    for j, r, k, t in schedule.parameters():
        flags = []
        x = math.log(1.0 / r)
        try:
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter("always", TruncationWarning)
                Pt = family_at(P.coefficients, t, tol)
                z = evaluate_complex(a, t, tol)
            if caught:
                flags.append("truncation")
            gv = green_value(Pt, z, tol, n_max)
            flags.append(gv.status.value)
            g, err = gv.value, gv.error_bound
        except (ArithmeticError, ValueError, FloatingPointError) as exc:
            flags.append(f"error:{type(exc).__name__}")
            g, err = math.nan, math.nan
        out.append(GreenSample(j, r, k, t, g, err, g - alpha_f * x, alpha_f, tuple(flags)))
    return out


def _by_level(samples, attr):
    levels = {}
    for s in samples:
        if s.ok:
            levels.setdefault(s.level, []).append(s)
    xs, means, groups = [], [], []
    for j in sorted(levels):
        grp = levels[j]
        xs.append(math.log(1.0 / grp[0].radius))
        means.append(math.fsum(getattr(s, attr) for s in grp) / len(grp))
        groups.append(grp)
    return xs, means, groups


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    residual: float
    xs: tuple
    means: tuple


def _fit_line(xs, ys) -> LineFit:
    if len(set(xs)) < 2:
        raise DegenerateFit("need at least two distinct radii")
    slope, intercept = np.polyfit(np.asarray(xs), np.asarray(ys), 1)
    resid = max(abs(y - (slope * x + intercept)) for x, y in zip(xs, ys))
    return LineFit(float(slope), float(intercept), float(resid), tuple(xs), tuple(ys))


def fit_alpha(samples: Sequence[GreenSample]) -> LineFit:
    """Least-squares slope of circle-averaged g against ``log|t|^{-1}``."""
    xs, means, _ = _by_level(samples, "g")
    return _fit_line(xs, means)


@dataclass(frozen=True)
class ContinuityDiagnostics:
    alpha: float
    h0_estimate: float
    circle_means: tuple
    circle_oscillations: tuple
    harmonicity_defect: float
    g_sup: tuple
    sample_error: float


def rebase(samples: Sequence[GreenSample], alpha) -> list:
    """Recompute h for a different alpha."""
    a = float(alpha)
    return [GreenSample(s.level, s.radius, s.angle_index, s.t, s.g, s.g_error,
                        s.g - a * math.log(1.0 / s.radius), a, s.flags) for s in samples]


def continuity_diagnostics(samples: Sequence[GreenSample], alpha, tol: float = 0.0) -> ContinuityDiagnostics:
    """h on the smallest circle, per-circle oscillation, and the mean-value defect.

    The defect compares each larger circle's mean of h with the smallest
    circle's mean, which stands in for h at the center.
    """
    samples = rebase(samples, alpha)
    _, means, groups = _by_level(samples, "h")
    if not groups:
        raise DegenerateFit("no valid samples")
    osc = tuple(max(s.h for s in g) - min(s.h for s in g) for g in groups)
    gsup = tuple(max(s.g for s in g) for g in groups)
    h0 = means[-1]
    defect = max((abs(m - h0) for m in means[:-1]), default=0.0)
    errs = [s.g_error for s in samples if s.ok]
    sample_error = max([tol] + errs)
    return ContinuityDiagnostics(float(alpha), h0, tuple(means), osc, defect, gsup, sample_error)


@dataclass
class DegenerationReport:
    alpha_exact: Optional[Fraction]
    alpha_fit: float
    case: str
    h0_estimate: float
    harmonicity_defect: float
    lambda_exact: Optional[Fraction] = None
    lambda_fit: Optional[float] = None
    delta: Optional[int] = None
    fit_residual: float = 0.0
    sample_error: float = 0.0
    h_tolerance: float = 0.0
    classification: str = ""
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("alpha_exact", "lambda_exact"):
            d[k] = None if d[k] is None else str(d[k])
        return d


def case1_probe(P: SeriesPolynomial, a, target_precision: int = 64):
    """Return d if the monic, centered form has coefficients in Q[[t]], else None."""
    try:
        mono = make_monic(P, a, target_precision)
        Q, _ = centered(mono.polynomial, target_precision)
        for c in Q.coefficients:
            if c.valuation_capped(0) < 0:
                return None
    except (SeriesError, ZeroDivisionError):
        return None
    return P.degree


def _reduced_degree(P: SeriesPolynomial, a) -> Optional[int]:
    """deg(P mod t) in the unit-ball normalization, when the coefficients are integral."""
    Pn, _, _ = normalize_to_unit_ball(P, LaurentSeries.coerce(a))
    try:
        if any(c.valuation_capped(0) < 0 for c in Pn.coefficients):
            return None
    except IndistinguishableFromZero:
        return None
    d = Pn.degree
    for i, c in enumerate(Pn.coefficients):
        if not c.is_zero() and c.valuation() == 0:
            return d - i
    return None


def decide_case(family, a, classification: OrbitClassification, diagnostics: ContinuityDiagnostics,
                fit: LineFit, alpha_tol: float = 1e-2) -> DegenerationReport:
    """Degeneration case for (family, a), cross-checking the formal and fitted alpha."""
    P = _as_family(family)
    name = type(classification).__name__
    h_tol = 10.0 * diagnostics.sample_error
    notes = []
    if isinstance(classification, Escape):
        alpha_exact = classification.alpha
        case = "Case2_PositiveAlphaHarmonic"
        delta = None
    elif isinstance(classification, Undetermined):
        alpha_exact = None
        case = "Undetermined"
        delta = None
    else:
        alpha_exact = Fraction(0)
        delta = None
        probe = None
        if isinstance(classification, (ConvergentOrbit, PeriodicBall)):
            probe = case1_probe(P, a)
        if probe is not None:
            case = "Case1_AnalyticConjugate"
            delta = probe
        elif abs(diagnostics.h0_estimate) <= h_tol:
            case = "Case3_AlphaZero_hZero"
            delta = _reduced_degree(P, a)
        else:
            case = "Undetermined"
            notes.append(f"|h0| = {abs(diagnostics.h0_estimate):.3g} exceeds tolerance {h_tol:.3g}")
    if alpha_exact is not None:
        bound = alpha_tol + fit.residual + diagnostics.sample_error
        if abs(fit.slope - float(alpha_exact)) > bound:
            raise InconsistentEvidence(
                f"fitted alpha {fit.slope:.6g} disagrees with exact alpha {alpha_exact} beyond {bound:.3g}")
    if isinstance(classification, CompactAnchors):
        notes.append("anchor certificate covers computed truncations only")
    return DegenerationReport(alpha_exact, fit.slope, case, diagnostics.h0_estimate,
                              diagnostics.harmonicity_defect, None, None, delta, fit.residual,
                              diagnostics.sample_error, h_tol, name, notes)


# -- critical branches and the Lyapunov slope ---------------------------------------


def _lower_hull(points):
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (p[0] - x1) >= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _rational_roots(coeffs_desc):
    """Rational roots with multiplicity of a polynomial with Fraction coefficients."""
    import sympy

    y = sympy.Symbol("y")
    poly = sympy.Poly([sympy.Rational(c.numerator, c.denominator) for c in coeffs_desc], y, domain="QQ")
    return {Fraction(int(r.p), int(r.q)): m for r, m in poly.ground_roots().items()}


def critical_branches(P: SeriesPolynomial, precision: int = 32):
    """Roots of P' as Laurent series in ``s = t^{1/N}``.

    Returns ``(N, [(branch, multiplicity), ...])``.  Only branches whose
    Newton-polygon data is rational and whose residual roots are simple are
    handled; anything else raises :class:`PuiseuxObstruction`.
    """
    dP = P.derivative_ascending()
    k = 0
    while k < len(dP) and dP[k].is_exact_zero():
        k += 1
    if k < len(dP) and dP[k].is_zero():
        raise PuiseuxObstruction("a critical-point coefficient is zero only to finite precision")
    rest = dP[k:]
    branches_raw = []
    N = 1
    if len(rest) > 1:
        pts = [(i, c.valuation()) for i, c in enumerate(rest) if not c.is_exact_zero()]
        hull = _lower_hull(pts)
        edges = []
        for (i, vi), (j, vj) in zip(hull, hull[1:]):
            mu = Fraction(vi - vj, j - i)
            N = math.lcm(N, mu.denominator)
            edges.append((i, j, mu))
        for i, j, mu in edges:
            on_edge = []
            for m in range(i, j + 1):
                c = rest[m]
                if c.is_exact_zero():
                    on_edge.append(Fraction(0))
                    continue
                if c.valuation() + m * mu == rest[i].valuation() + i * mu:
                    on_edge.append(c.leading_coefficient())
                else:
                    on_edge.append(Fraction(0))
            roots = _rational_roots(list(reversed(on_edge)))
            roots = {r: m for r, m in roots.items() if r != 0}
            if sum(roots.values()) < j - i:
                raise PuiseuxObstruction(f"residual polynomial on slope {mu} has non-rational roots")
            if any(m > 1 for m in roots.values()):
                raise PuiseuxObstruction(f"repeated residual root on slope {mu}")
            for r in sorted(roots):
                branches_raw.append((r, mu))
    PN = P.substitute_power(N)
    d1 = PN.derivative_ascending()
    d2 = [d1[i] * i for i in range(1, len(d1))]
    out = []
    if k:
        out.append((LaurentSeries.zero(), k))
    from .formal_dyn import evaluate_ascending

    for r, mu in branches_raw:
        z = LaurentSeries.monomial(r, int(mu * N))
        for _ in range(precision.bit_length() + 3):
            f = evaluate_ascending(d1, z)
            if f.is_zero():
                break
            fp = evaluate_ascending(d2, z)
            z = (z - f / fp).truncate_relative(precision)
        out.append((z, 1))
    return N, out


@dataclass
class LyapunovSlope:
    lambda_fit: float
    lambda_exact: Optional[Fraction]
    fit: LineFit
    values: list
    warnings: list = field(default_factory=list)
    branch_alphas: list = field(default_factory=list)
    base_change: int = 1

    def to_dict(self) -> dict:
        return {
            "lambda_fit": self.lambda_fit,
            "lambda_exact": None if self.lambda_exact is None else str(self.lambda_exact),
            "fit_residual": self.fit.residual,
            "circle_means": list(self.fit.means),
            "log_inverse_radii": list(self.fit.xs),
            "base_change": self.base_change,
            "branch_alphas": [str(x) for x in self.branch_alphas],
            "warnings": list(self.warnings),
        }


def lambda_exact(P: SeriesPolynomial, budgets: Budgets = Budgets()):
    """``(sum of critical escape rates)/N`` along the rational Puiseux path."""
    N, branches = critical_branches(P)
    PN = P.substitute_power(N)
    total = Fraction(0)
    alphas = []
    for c, mult in branches:
        cl = classify(PN, c, budgets)
        if isinstance(cl, Escape):
            alpha = cl.alpha
        elif isinstance(cl, Undetermined):
            raise PuiseuxObstruction("a critical orbit could not be classified within budget")
        else:
            alpha = Fraction(0)
        alphas.extend([alpha] * mult)
        total += mult * alpha
    return total / N, alphas, N


def lyapunov_samples(family, schedule: DiagnosticSchedule, tol: float = 1e-10, n_max: int = 500) -> list:
    P = _as_family(family)
    out = []
    for j, r, k, t in schedule.parameters():
        try:
            Pt = family_at(P.coefficients, t)
            L = lyapunov(Pt, tol, n_max)
            out.append((j, r, k, t, L.value, L.error_bound, ()))
        except (ArithmeticError, ValueError, FloatingPointError, RuntimeError) as exc:
            out.append((j, r, k, t, math.nan, math.nan, (f"error:{type(exc).__name__}",)))
    return out


def lyapunov_slope(family, schedule: DiagnosticSchedule, tol: float = 1e-10,
                   budgets: Budgets = Budgets(), n_max: int = 500) -> LyapunovSlope:
    P = _as_family(family)
    values = lyapunov_samples(P, schedule, tol, n_max)
    levels = {}
    for j, r, k, t, L, err, flags in values:
        if math.isfinite(L):
            levels.setdefault(j, (r, []))[1].append(L)
    xs = [math.log(1.0 / levels[j][0]) for j in sorted(levels)]
    ys = [math.fsum(levels[j][1]) / len(levels[j][1]) for j in sorted(levels)]
    fit = _fit_line(xs, ys)
    warns = []
    lam = None
    alphas = []
    N = 1
    try:
        lam, alphas, N = lambda_exact(P, budgets)
    except PuiseuxObstruction as exc:
        warns.append(f"PuiseuxObstruction: {exc}")
    return LyapunovSlope(fit.slope, lam, fit, values, warns, alphas, N)


def log_growth_ratios(family, radii: Sequence[float], n_points: int = 100, seed: int = 0,
                          tol: float = 1e-10) -> list:
    """Per radius: ``sup |g_{P_t}(z) - log+|z|| / log|t|^{-1}`` over random z."""
    P = _as_family(family)
    rng = np.random.default_rng(seed)
    out = []
    for r in radii:
        theta_t = rng.uniform(0, 2 * math.pi)
        t = r * cmath.exp(1j * theta_t)
        Pt = family_at(P.coefficients, t)
        logmod = rng.uniform(-3, 3 * math.log10(1.0 / r), n_points)
        ang = rng.uniform(0, 2 * math.pi, n_points)
        worst = 0.0
        for lm, th in zip(logmod, ang):
            z = 10.0**lm * cmath.exp(1j * th)
            g = green_value(Pt, z, tol).value
            worst = max(worst, abs(g - max(0.0, math.log(abs(z)))))
        out.append(worst / math.log(1.0 / r))
    return out
