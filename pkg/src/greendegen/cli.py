"""Command line front end: ``greendegen classify|report|lyapunov CONFIG``.

Exit status: 0 when every marked point gets a certificate or case, 2 when
something is Undetermined, 1 on any error.  Nothing is written unless the
whole computation succeeds.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import classifier as cl
from .config import ConfigError, FamilyConfig, load_config
from .degeneration import (
    DegenerateFit,
    InconsistentEvidence,
    continuity_diagnostics,
    decide_case,
    fit_alpha,
    log_growth_ratios,
    lyapunov_slope,
    sample_green,
)
from .formal_dyn import BudgetExceeded
from .series import SeriesError

EXIT_OK, EXIT_ERROR, EXIT_UNDETERMINED = 0, 1, 2

SAMPLE_COLUMNS = ["level", "radius", "angle_index", "re_t", "im_t", "g", "g_error", "h", "L", "flags"]
LYAPUNOV_COLUMNS = ["level", "radius", "angle_index", "re_t", "im_t", "L", "L_error", "flags"]


def _num(x) -> str:
    return repr(float(x))


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def _json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def write_atomic(out_dir: Path, files: dict) -> list:
    """Write every file to a temporary sibling first, then rename them all into place."""
    out_dir.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
            with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out_dir / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, final in staged:
        os.replace(tmp, final)
    return [final for _, final in staged]


# -- commands -----------------------------------------------------------------------


def run_classify(cfg: FamilyConfig):
    P = cfg.polynomial
    results = {}
    status = EXIT_OK
    for m in cfg.marked_points:
        c = cl.classify(P, m.value, cfg.budgets)
        entry = cl.to_dict(c)
        entry["verified"] = cl.verify(P, m.value, c, cfg.budgets)
        entry["critical"] = m.critical
        results[m.name] = entry
        if isinstance(c, cl.Undetermined):
            status = EXIT_UNDETERMINED
    doc = {"command": "classify", "settings": cfg.settings(), "marked_points": results}
    lines = [f"{name}: {r['variant']}" + (f" alpha={r['alpha']}" if "alpha" in r else "")
             + f" ({r['theorem_case']})" for name, r in results.items()]
    return {f"{cfg.name}.classify.json": _json(doc)}, lines, status


def run_report(cfg: FamilyConfig, seed: int = 0):
    P = cfg.polynomial
    tol = cfg.tolerances
    lyap = lyapunov_slope(P, cfg.schedule, tol.green, cfg.budgets, tol.n_max)
    L_at = {(j, k): L for j, r, k, t, L, err, flags in lyap.values}
    files, lines, reports = {}, [], {}
    status = EXIT_OK
    for m in cfg.marked_points:
        c = cl.classify(P, m.value, cfg.budgets)
        alpha = c.alpha if isinstance(c, cl.Escape) else 0
        samples = sample_green(P, m.value, cfg.schedule, alpha, tol.green, tol.n_max)
        fit = fit_alpha(samples)
        if isinstance(c, cl.Undetermined):
            alpha = fit.slope
        diag = continuity_diagnostics(samples, alpha, tol.green)
        rep = decide_case(P, m.value, c, diag, fit, tol.alpha)
        rep.lambda_exact = lyap.lambda_exact
        rep.lambda_fit = lyap.lambda_fit
        if rep.case == "Undetermined":
            status = EXIT_UNDETERMINED
        entry = rep.to_dict()
        entry["certificate"] = cl.to_dict(c)
        entry["circle_means_h"] = list(diag.circle_means)
        entry["circle_oscillations"] = list(diag.circle_oscillations)
        entry["g_sup"] = list(diag.g_sup)
        reports[m.name] = entry
        rows = []
        for s in samples:
            rows.append([s.level, _num(s.radius), s.angle_index, _num(s.t.real), _num(s.t.imag),
                         _num(s.g), _num(s.g_error), _num(s.h), _num(L_at[(s.level, s.angle_index)]),
                         ";".join(s.flags)])
        files[f"{cfg.name}.{m.name}.samples.csv"] = _csv(SAMPLE_COLUMNS, rows)
        lines.append(f"{m.name}: {rep.case} alpha_exact={rep.alpha_exact} alpha_fit={rep.alpha_fit:.6g} "
                     f"h0={rep.h0_estimate:.3g} defect={rep.harmonicity_defect:.3g}")
    ratios = log_growth_ratios(P, cfg.schedule.radii[:3], 100, seed, tol.green)
    doc = {
        "command": "report",
        "settings": dict(cfg.settings(), seed=seed),
        "marked_points": reports,
        "lyapunov": lyap.to_dict(),
        "log_growth": {"radii": cfg.schedule.radii[:3], "ratios": ratios,
                       "fitted_C": max(ratios) if ratios else None},
    }
    files[f"{cfg.name}.report.json"] = _json(doc)
    return files, lines, status


def run_lyapunov(cfg: FamilyConfig):
    tol = cfg.tolerances
    lyap = lyapunov_slope(cfg.polynomial, cfg.schedule, tol.green, cfg.budgets, tol.n_max)
    rows = [[j, _num(r), k, _num(t.real), _num(t.imag), _num(L), _num(err), ";".join(flags)]
            for j, r, k, t, L, err, flags in lyap.values]
    doc = {"command": "lyapunov", "settings": cfg.settings(), "result": lyap.to_dict()}
    lines = [f"lambda_fit={lyap.lambda_fit:.6g} lambda_exact={lyap.lambda_exact}"]
    lines += [f"warning: {w}" for w in lyap.warnings]
    return {f"{cfg.name}.lyapunov.json": _json(doc), f"{cfg.name}.lyapunov.csv": _csv(LYAPUNOV_COLUMNS, rows)}, \
        lines, EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="greendegen", description="Escape rates of degenerating polynomial families.")
    p.add_argument("command", choices=["classify", "report", "lyapunov"])
    p.add_argument("config", type=Path)
    p.add_argument("--out", type=Path, default=Path("."), help="output directory (default: current)")
    p.add_argument("--tol", type=float, help="numerical tolerance for Green values (overrides config)")
    p.add_argument("--budget-iters", type=int, help="iteration budget (overrides config)")
    p.add_argument("--seed", type=int, default=0, help="seed for the random-z diagnostic in report")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.tol is not None:
            if not args.tol > 0:
                raise ConfigError("--tol must be positive")
            cfg = replace(cfg, tolerances=replace(cfg.tolerances, green=args.tol))
        if args.budget_iters is not None:
            cfg = replace(cfg, budgets=replace(cfg.budgets, iterations=args.budget_iters))
        if args.command == "classify":
            files, lines, status = run_classify(cfg)
        elif args.command == "report":
            files, lines, status = run_report(cfg, args.seed)
        else:
            files, lines, status = run_lyapunov(cfg)
        written = write_atomic(args.out, files)
    except (ConfigError, SeriesError, BudgetExceeded, InconsistentEvidence, DegenerateFit,
            ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    for line in lines:
        print(line)
    for path in written:
        print(f"wrote {path}")
    return status


if __name__ == "__main__":
    sys.exit(main())
