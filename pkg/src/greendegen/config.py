"""Family definition files.

INI layout::

    [family]
    name = quadratic_escape
    degree = 2
    a0 = 1
    a1 = 0
    a2 = t^-1

    [marked_points]
    zero = 0 @critical

    [schedule]        ; optional, defaults shown
    r0 = 1/10
    levels = 4
    samples_per_circle = 16

    [budgets]
    iterations = 200
    precision = 256
    anchor_level = 32

    [tolerances]
    green = 1e-10
    alpha = 1e-2

Family coefficients and marked points take exact series text only.
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .classifier import Budgets
from .degeneration import DiagnosticSchedule
from .formal_dyn import SeriesPolynomial
from .series import LaurentSeries, SeriesParseError, format_series, parse_series


class ConfigError(ValueError):
    def __init__(self, message, line=None, column=None, path=None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
        prefix = f"{path}: " if path else ""
        super().__init__(f"{prefix}{where + ': ' if where else ''}{message}")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class MarkedPoint:
    name: str
    text: str
    value: LaurentSeries
    critical: bool = False


@dataclass(frozen=True)
class Tolerances:
    green: float = 1e-10
    alpha: float = 1e-2
    n_max: int = 500


@dataclass(frozen=True)
class FamilyConfig:
    name: str
    degree: int
    coefficients: tuple
    marked_points: tuple
    schedule: DiagnosticSchedule = DiagnosticSchedule()
    budgets: Budgets = Budgets()
    tolerances: Tolerances = Tolerances()
    coefficient_texts: tuple = field(default=(), compare=False)

    @property
    def polynomial(self) -> SeriesPolynomial:
        return SeriesPolynomial(self.coefficients)

    def settings(self) -> dict:
        """Everything that determines the output, for embedding in reports."""
        return {
            "name": self.name,
            "degree": self.degree,
            "coefficients": [format_series(c) for c in self.coefficients],
            "marked_points": {m.name: format_series(m.value) for m in self.marked_points},
            "critical": [m.name for m in self.marked_points if m.critical],
            "schedule": {"r0": self.schedule.r0, "levels": self.schedule.levels,
                         "samples_per_circle": self.schedule.samples_per_circle},
            "budgets": {"iterations": self.budgets.iterations, "precision": self.budgets.precision,
                        "anchor_level": self.budgets.anchor_level},
            "tolerances": {"green": self.tolerances.green, "alpha": self.tolerances.alpha,
                           "n_max": self.tolerances.n_max},
        }


_FLOAT_RE = re.compile(r"\d\.\d*|\.\d|\d[eE][-+]?\d")


def _locate(lines, section, key):
    """1-based (line, column of the value) for ``key`` inside ``[section]``."""
    current = None
    for no, raw in enumerate(lines, start=1):
        s = raw.strip()
        if s.startswith("[") and s.endswith("]"):
            current = s[1:-1].strip().lower()
            continue
        if current != section or not s or s[0] in "#;":
            continue
        m = re.match(r"\s*([^=:]+?)\s*[=:]\s*", raw)
        if m and m.group(1).lower() == key.lower():
            return no, m.end() + 1
    return None, None


def _series(text, lines, section, key, path):
    line, col = _locate(lines, section, key)
    bad = _FLOAT_RE.search(text)
    if bad:
        raise ConfigError(f"{key}: decimal literal {bad.group(0)!r}; use an exact fraction",
                          line, (col or 1) + bad.start(), path)
    try:
        return parse_series(text)
    except SeriesParseError as exc:
        c = None if col is None else col + exc.column
        raise ConfigError(f"{key}: {exc.message}", line, c, path) from None


def _number(text, kind, lines, section, key, path):
    line, col = _locate(lines, section, key)
    try:
        if kind is int:
            return int(text)
        if "/" in text:
            return float(Fraction(text))
        return float(text)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"{key}: expected {'an integer' if kind is int else 'a number'}, got {text!r}",
                          line, col, path) from None


def parse_config(text: str, path: str = None) -> FamilyConfig:
    lines = text.splitlines()
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=(";", "#"))
    cp.optionxform = str
    try:
        cp.read_string(text, source=path or "<config>")
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], getattr(exc, "lineno", None), None, path) from None
    sections = {s.lower(): s for s in cp.sections()}
    for s in sections:
        if s not in {"family", "marked_points", "schedule", "budgets", "tolerances"}:
            line = next((i for i, raw in enumerate(lines, 1) if raw.strip().lower() == f"[{s}]"), None)
            raise ConfigError(f"unknown section [{sections[s]}]", line, 1, path)
    if "family" not in sections:
        raise ConfigError("missing [family] section", None, None, path)
    fam = cp[sections["family"]]
    name = fam.get("name", Path(path).stem if path else "family")
    if "degree" not in fam:
        raise ConfigError("missing degree in [family]", None, None, path)
    d = _number(fam["degree"], int, lines, "family", "degree", path)
    if d < 2:
        line, col = _locate(lines, "family", "degree")
        raise ConfigError("degree must be at least 2", line, col, path)
    coeffs, texts = [], []
    for i in range(d + 1):
        key = f"a{i}"
        if key not in fam:
            raise ConfigError(f"degree {d} needs coefficients a0..a{d}; {key} missing", None, None, path)
        texts.append(fam[key])
        coeffs.append(_series(fam[key], lines, "family", key, path))
    extra = [k for k in fam if re.fullmatch(r"a\d+", k) and int(k[1:]) > d]
    if extra:
        line, col = _locate(lines, "family", extra[0])
        raise ConfigError(f"{extra[0]} exceeds degree {d}", line, col, path)
    if coeffs[0].is_zero():
        line, col = _locate(lines, "family", "a0")
        raise ConfigError("leading coefficient a0 is zero", line, col, path)
    marked = []
    if "marked_points" in sections:
        for key, raw in cp[sections["marked_points"]].items():
            body, _, tag = raw.partition("@")
            tag = tag.strip().lower()
            if tag not in ("", "critical"):
                line, col = _locate(lines, "marked_points", key)
                raise ConfigError(f"{key}: unknown tag @{tag}", line, col, path)
            marked.append(MarkedPoint(key, body.strip(), _series(body.strip(), lines, "marked_points", key, path),
                                      tag == "critical"))
    if not marked:
        raise ConfigError("no marked points", None, None, path)

    def num(section, key, kind, default):
        if section in sections and key in cp[sections[section]]:
            return _number(cp[sections[section]][key], kind, lines, section, key, path)
        return default

    try:
        schedule = DiagnosticSchedule(num("schedule", "r0", float, 0.1), num("schedule", "levels", int, 4),
                                      num("schedule", "samples_per_circle", int, 16))
    except ValueError as exc:
        raise ConfigError(str(exc), None, None, path) from None
    budgets = Budgets(num("budgets", "iterations", int, 200), num("budgets", "precision", int, 256),
                      num("budgets", "anchor_level", int, 32))
    tol = Tolerances(num("tolerances", "green", float, 1e-10), num("tolerances", "alpha", float, 1e-2),
                     num("tolerances", "n_max", int, 500))
    return FamilyConfig(name, d, tuple(coeffs), tuple(marked), schedule, budgets, tol, tuple(texts))


def load_config(path) -> FamilyConfig:
    path = str(path)
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), path)
