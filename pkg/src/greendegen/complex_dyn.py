"""Floating-point Green functions, critical points and Lyapunov exponents over C."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .series import LaurentSeries, ZeroArgumentWithPole, evaluate_complex, truncation_error

UNDERFLOW = 1e-300
LOG_SWITCH = 1e100


class NonFinite(FloatingPointError):
    pass


class NoConvergence(RuntimeError):
    def __init__(self, message, roots=None, residuals=None):
        super().__init__(message)
        self.roots = roots
        self.residuals = residuals


@dataclass(frozen=True)
class ComplexPoly:
    """``a_0 z^d + ... + a_d`` with complex coefficients (descending order)."""

    coefficients: tuple
    truncation_error: float = 0.0

    def __post_init__(self):
        coeffs = tuple(complex(c) for c in self.coefficients)
        if len(coeffs) < 3:
            raise ValueError("degree must be at least 2")
        if abs(coeffs[0]) <= UNDERFLOW:
            raise ValueError("leading coefficient underflows")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in self.coefficients:
            acc = acc * z + c
        return acc

    def derivative_coefficients(self) -> list:
        d = self.degree
        return [c * (d - j) for j, c in enumerate(self.coefficients[:-1])]

    def escape_radius(self) -> float:
        """Radius beyond which the leading term dominates the rest by a factor >= 2
        and ``|P(z)| >= |z|``."""
        d = self.degree
        a0 = abs(self.coefficients[0])
        R = max(1.0, (2.0 / a0) ** (1.0 / (d - 1)))
        for i, c in enumerate(self.coefficients[1:], start=1):
            if c:
                R = max(R, (2.0 * d * abs(c) / a0) ** (1.0 / i))
        return R

    def _tail_ratio(self, r: float) -> float:
        """Upper bound for ``|P(z)/(a_0 z^d) - 1|`` on ``|z| = r``."""
        a0 = abs(self.coefficients[0])
        return sum(abs(c) / a0 * r ** (-i) for i, c in enumerate(self.coefficients[1:], start=1))


class GreenStatus(enum.Enum):
    EscapeCertified = "escape"
    BoundedToBudget = "bounded"


@dataclass(frozen=True)
class GreenValue:
    value: float
    error_bound: float
    status: GreenStatus
    iterations: int = 0

    @property
    def interval(self):
        return (max(0.0, self.value - self.error_bound), self.value + self.error_bound)


def green_value(P: ComplexPoly, z: complex, tol: float = 1e-12, n_max: int = 500) -> GreenValue:
    """``g_P(z)`` with a rigorous bound on the truncation of the escape series.

    Past the escape radius ``|z_{k+1}| = |a_0| |z_k|^d (1 + e_k)`` with
    ``|e_k| <= 1/2`` non-increasing, so stopping at step K gives
    ``g = d^{-K}(log|z_K| + log|a_0|/(d-1)) + tail`` with
    ``|tail| <= 2 e_K d^{-K}/(d-1)``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    d = P.degree
    R = P.escape_radius()
    log_a0 = math.log(abs(P.coefficients[0]))
    z = complex(z)
    for n in range(n_max + 1):
        r = abs(z)
        if not math.isfinite(r):
            raise NonFinite(f"orbit overflowed at step {n}")
        if r > R:
            scale = d ** (-n)
            e = P._tail_ratio(r)
            bound = 2.0 * e * scale / (d - 1)
            if bound < tol or r > LOG_SWITCH:
                value = scale * (math.log(r) + log_a0 / (d - 1))
                return GreenValue(value, bound, GreenStatus.EscapeCertified, n)
        if n == n_max:
            break
        z = P(z)
    # g <= max over |w| = R of g(w) on the disk of radius R
    G_R = max(0.0, math.log(R) + (log_a0 + math.log(1.5)) / (d - 1))
    return GreenValue(0.0, G_R * d ** (-n_max), GreenStatus.BoundedToBudget, n_max)


@dataclass(frozen=True)
class CriticalPoint:
    value: complex
    multiplicity: int = 1


def _aberth(coeffs: Sequence[complex], tol: float, max_iter: int, seed: int = 0):
    """Aberth-Ehrlich simultaneous iteration for the roots of ``coeffs`` (descending)."""
    c = np.asarray(coeffs, dtype=complex)
    n = len(c) - 1
    if n == 1:
        return np.array([-c[1] / c[0]]), True
    dc = np.polyder(c)
    # Fujiwara-type bound for the initial circle
    mags = np.abs(c[1:] / c[0])
    radius = 2 * max(mags[k] ** (1.0 / (k + 1)) for k in range(n)) or 1.0
    rng = np.random.default_rng(seed)
    angles = 2 * np.pi * (np.arange(n) + 0.25 + 0.1 * rng.random(n)) / n
    z = 0.5 * radius * np.exp(1j * angles)
    scale = np.abs(c).max()
    converged = False
    for _ in range(max_iter):
        p = np.polyval(c, z)
        dp = np.polyval(dc, z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(dp != 0, p / dp, 0)
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, 1)
            s = (1.0 / diff).sum(axis=1) - 1.0
            w = ratio / (1 - ratio * s)
        w = np.where(np.isfinite(w), w, 0)
        z = z - w
        local = np.polyval(np.abs(c), np.abs(z)) + scale * 1e-300
        if np.all(np.abs(np.polyval(c, z)) / local < tol) or np.all(np.abs(w) <= tol * (1 + np.abs(z))):
            converged = True
            break
    return z, converged


def critical_points(P: ComplexPoly, tol: float = 1e-12, max_iter: int = 500) -> list:
    """Roots of P' as clusters with multiplicity; multiplicities sum to d - 1."""
    dc = P.derivative_coefficients()
    if abs(dc[0]) <= UNDERFLOW:
        raise ValueError("P' has underflowing leading coefficient")
    roots, ok = _aberth(dc, tol, max_iter)
    scale = max(1.0, float(np.abs(roots).max()))
    radius = math.sqrt(tol) * scale
    clusters = []
    for r in roots:
        for cl in clusters:
            if abs(cl[0] / len(cl) - r) < radius:
                cl.append(r)
                break
        else:
            clusters.append([r])
    # merge by mean of members; the mean of a multiple-root cluster is well conditioned
    out = []
    for cl in clusters:
        m = complex(np.mean(cl))
        out.append(CriticalPoint(m, len(cl)))
    out.sort(key=lambda cp: (round(cp.value.real, 9), round(cp.value.imag, 9)))
    if not ok:
        residuals = [abs(np.polyval(dc, cp.value)) for cp in out]
        raise NoConvergence("critical point iteration did not converge", out, residuals)
    return out


@dataclass(frozen=True)
class LyapunovValue:
    value: float
    error_bound: float
    critical: tuple = ()


def lyapunov(P: ComplexPoly, tol: float = 1e-12, n_max: int = 500) -> LyapunovValue:
    """``L(P) = log d + sum over critical points of g_P(c)``."""
    crit = critical_points(P, tol)
    total = math.log(P.degree)
    err = 0.0
    for cp in crit:
        g = green_value(P, cp.value, tol, n_max)
        total += cp.multiplicity * g.value
        err += cp.multiplicity * g.error_bound
    return LyapunovValue(total, err, tuple(crit))


def family_at(coeffs: Sequence[LaurentSeries], t0: complex, tol: float = None) -> ComplexPoly:
    """Evaluate every series coefficient at ``t0``."""
    vals = []
    worst = 0.0
    for c in coeffs:
        c = LaurentSeries.coerce(c)
        vals.append(evaluate_complex(c, t0, tol))
        if t0 != 0:
            worst = max(worst, truncation_error(c, t0))
    return ComplexPoly(tuple(vals), worst)


__all__ = [
    "ComplexPoly", "GreenValue", "GreenStatus", "CriticalPoint", "LyapunovValue",
    "NonFinite", "NoConvergence", "ZeroArgumentWithPole",
    "green_value", "critical_points", "lyapunov", "family_at",
]
