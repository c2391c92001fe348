"""Escape rates and Green functions of polynomial families degenerating at t = 0."""

from .balls import Ball, contains, distance, image, iterate_image, join
from .classifier import (
    Budgets,
    CompactAnchors,
    ConvergentOrbit,
    Escape,
    PeriodicBall,
    TheoremCase,
    Undetermined,
    classify,
    theorem_case,
    verify,
)
from .complex_dyn import ComplexPoly, critical_points, green_value, lyapunov
from .degeneration import (
    DegenerationReport,
    DiagnosticSchedule,
    continuity_diagnostics,
    decide_case,
    fit_alpha,
    lyapunov_slope,
    sample_green,
)
from .formal_dyn import SeriesPolynomial, green_exact, iterate, make_monic
from .series import LaurentSeries, format_series, parse_series

__all__ = [
    "Ball", "contains", "distance", "image", "iterate_image", "join",
    "Budgets", "CompactAnchors", "ConvergentOrbit", "Escape", "PeriodicBall", "TheoremCase",
    "Undetermined", "classify", "theorem_case", "verify",
    "ComplexPoly", "critical_points", "green_value", "lyapunov",
    "DegenerationReport", "DiagnosticSchedule", "continuity_diagnostics", "decide_case",
    "fit_alpha", "lyapunov_slope", "sample_green",
    "SeriesPolynomial", "green_exact", "iterate", "make_monic",
    "LaurentSeries", "format_series", "parse_series",
]
