"""Acceptance criteria 1-10.

Each test records one ``[PASS]``/``[FAIL]`` line; pytest prints them in the
terminal summary, and ``python tests/test_acceptance.py`` prints them directly.
"""

import json
import math
import random
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import ACCEPTANCE_LINES, CONFIGS  # noqa: E402
from greendegen.balls import Ball, contains, distance, image, join  # noqa: E402
from greendegen.classifier import (  # noqa: E402
    ConvergentOrbit,
    Escape,
    PeriodicBall,
    TheoremCase,
    Budgets,
    classify,
    theorem_case,
    verify,
)
from greendegen.cli import main, run_report  # noqa: E402
from greendegen.complex_dyn import family_at, lyapunov  # noqa: E402
from greendegen.config import load_config  # noqa: E402
from greendegen.degeneration import (  # noqa: E402
    DiagnosticSchedule,
    log_growth_ratios,
    continuity_diagnostics,
    decide_case,
    fit_alpha,
    lyapunov_slope,
    sample_green,
)
from greendegen.formal_dyn import SeriesPolynomial, green_exact, iterate, make_monic  # noqa: E402
from greendegen.series import INF, LaurentSeries, parse_series  # noqa: E402

SCHEDULE = DiagnosticSchedule(r0=0.1, levels=4)
QUAD_ESCAPE = (["1", "0", "t^-1"], 0)
LEADING_POLE = (["t^-1", "0", "0"], 1)


def record(n, title, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {n:>2}: {title} | {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)
    assert ok, line


# 1 ---------------------------------------------------------------------------------


def test_criterion_01_exact_alpha():
    results, ok = [], True
    for (coeffs, a), expected, val_oracle in [
        (QUAD_ESCAPE, Fraction(1, 2), lambda n: -(2 ** (n - 1))),
        (LEADING_POLE, Fraction(1), lambda n: -(2**n - 1)),
    ]:
        P = SeriesPolynomial(coeffs)
        start = time.perf_counter()
        r = green_exact(P, a)
        elapsed = time.perf_counter() - start
        oracle_ok = all(iterate(P, a, n).valuation() == val_oracle(n) for n in range(1, 9))
        ok &= r.alpha == expected and elapsed < 1.0 and oracle_ok
        results.append(f"alpha={r.alpha} in {elapsed * 1e3:.1f} ms, valuation recursion {'ok' if oracle_ok else 'BROKEN'}")
    record(1, "exact alpha", ok, "; ".join(results))


# 2 ---------------------------------------------------------------------------------


def test_criterion_02_formal_numeric_cross_check():
    start = time.perf_counter()
    parts, ok = [], True
    for coeffs, a in (QUAD_ESCAPE, LEADING_POLE):
        P = SeriesPolynomial(coeffs)
        alpha = green_exact(P, a).alpha
        fit = fit_alpha(sample_green(P, a, SCHEDULE, alpha))
        ok &= abs(fit.slope - float(alpha)) <= 1e-2
        parts.append(f"fit {fit.slope:.6f} vs {alpha}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30
    record(2, "fitted alpha within 1e-2", ok, "; ".join(parts) + f"; {elapsed:.2f} s")


# 3 ---------------------------------------------------------------------------------


def _random_family(rng):
    d = rng.choice([2, 3])

    def poly(nonzero=False):
        low = rng.randint(-2, 2)
        coeffs = [rng.randint(-5, 5) for _ in range(rng.randint(1, 3))]
        if nonzero and coeffs[0] == 0:
            coeffs[0] = rng.choice([-2, -1, 1, 2, 3])
        return LaurentSeries(coeffs, low)

    return SeriesPolynomial([poly(True)] + [poly() for _ in range(d)]), poly()


def test_criterion_03_rationality_invariant():
    rng = random.Random(20240603)
    escapes = bad_den = bad_weak = bad_feq = 0
    example = None
    for _ in range(100):
        P, a = _random_family(rng)
        c = classify(P, a, Budgets(iterations=60))
        if not isinstance(c, Escape):
            continue
        escapes += 1
        d = P.degree
        if (d**c.n) % c.alpha.denominator:
            bad_den += 1
            example = example or f"{P.to_text()} at a={a}: alpha={c.alpha}, n={c.n}"
        if ((d - 1) * d**c.n) % c.alpha.denominator:
            bad_weak += 1
        g1 = green_exact(P, P(a), 60)
        if g1.alpha != d * c.alpha:
            bad_feq += 1
    ok = bad_den == 0 and bad_feq == 0 and escapes > 0
    detail = (f"{escapes} escape certificates; denominator does not divide d^n in {bad_den}"
              f" (divides (d-1)d^n in all but {bad_weak}); g(P(a)) = d g(a) failed in {bad_feq}")
    if example:
        detail += f"; e.g. {example}"
    record(3, "rational alpha, denominator | d^n, functional equation", ok, detail)


# 4 ---------------------------------------------------------------------------------


def test_criterion_04_trichotomy_fixtures():
    checks = []
    P = SeriesPolynomial(["1", "0", "t"])
    c = classify(P, 0)
    checks.append(("z^2+t, a=0", isinstance(c, ConvergentOrbit)
                   and theorem_case(c) is TheoremCase.ThmCase3_CompactClosure and verify(P, 0, c)))
    P = SeriesPolynomial(["1", "0", "0"])
    a = parse_series("1 + t")
    c = classify(P, a)
    checks.append(("z^2, a=1+t", isinstance(c, PeriodicBall) and c.ball == Ball(1, 1) and c.period == 1
                   and theorem_case(c) is TheoremCase.ThmCase2_PreperiodicBall and verify(P, a, c)))
    P = SeriesPolynomial(QUAD_ESCAPE[0])
    c = classify(P, 0)
    checks.append(("z^2+1/t, a=0", isinstance(c, Escape) and c.alpha == Fraction(1, 2)
                   and theorem_case(c) is TheoremCase.ThmCase1_Escape and verify(P, 0, c)))
    record(4, "trichotomy fixtures re-verify", all(ok for _, ok in checks),
           ", ".join(f"{name}: {'ok' if ok else 'WRONG'}" for name, ok in checks))


# 5 ---------------------------------------------------------------------------------


def _random_ball(rng):
    low = rng.randint(-2, 2)
    center = LaurentSeries([rng.randint(-3, 3) for _ in range(rng.randint(0, 5))], low)
    return Ball(center, rng.randint(-2, 5))


def test_criterion_05_ball_tree_properties():
    rng = random.Random(5)
    trials = 1000
    ultra_bad = 0
    counterexample = None
    for _ in range(trials):
        x, y, z = (_random_ball(rng) for _ in range(3))
        dxz, dxy, dyz = distance(x, z), distance(x, y), distance(y, z)
        if dxz > max(dxy, dyz) + 1e-15:
            ultra_bad += 1
            counterexample = counterexample or (x, y, z, dxz, dxy, dyz)
    lub_bad = 0
    for _ in range(trials):
        x, y = _random_ball(rng), _random_ball(rng)
        j = join(x, y)
        if not (contains(j, x) and contains(j, y)):
            lub_bad += 1
            continue
        for m in range(-3, 7):
            cand = Ball(x.center, m)
            if contains(cand, x) and contains(cand, y) and not contains(cand, j):
                lub_bad += 1
                break
    outside = attained = 0
    # image trials: 100 points per ball, perturbing the center at depth >= log_radius
    for _ in range(trials):
        d = rng.choice([2, 3])
        P = SeriesPolynomial([LaurentSeries([rng.choice([-2, -1, 1, 2])], rng.randint(-1, 1))]
                             + [LaurentSeries([rng.randint(-4, 4) for _ in range(2)], rng.randint(-1, 1))
                                for _ in range(d)])
        B = _random_ball(rng)
        img = image(P, B)
        best = INF
        for _ in range(100):
            u = LaurentSeries([rng.randint(-100, 100) for _ in range(3)], rng.randint(0, 2))
            w = P(B.center + u.shift(B.log_radius))
            if w not in img:
                outside += 1
            diff = w - img.center
            best = min(best, diff.valuation() if not diff.is_exact_zero() else INF)
        attained += best == img.log_radius
    rate = attained / trials
    ok = ultra_bad == 0 and lub_bad == 0 and outside == 0 and rate >= 0.95
    detail = (f"ultrametric inequality violated in {ultra_bad}/{trials} triples; "
              f"join LUB failures {lub_bad}/{trials}; image: {outside} sampled points outside, "
              f"radius attained in {rate:.1%}")
    if counterexample:
        x, y, z, dxz, dxy, dyz = counterexample
        detail += (f"; e.g. log-radii {x.log_radius}, {y.log_radius}, {z.log_radius}:"
                   f" d(x,z)={dxz:.4f} > max({dxy:.4f}, {dyz:.4f})")
    record(5, "ball-tree properties", ok, detail)


# 6 ---------------------------------------------------------------------------------


def _report(name):
    files, _, status = run_report(load_config(CONFIGS / f"{name}.cfg"))
    doc = json.loads(files[f"{name}.report.json"])
    (rep,) = doc["marked_points"].values()
    return rep, status


def test_criterion_06_degeneration_cases():
    good, _ = _report("good_reduction")
    esc, _ = _report("quadratic_escape")
    fix, _ = _report("fixedpoint")
    checks = [
        ("good_reduction", good["case"] == "Case1_AnalyticConjugate" and good["delta"] == 2,
         f"{good['case']} delta={good['delta']}"),
        ("quadratic_escape", esc["case"] == "Case2_PositiveAlphaHarmonic"
         and esc["harmonicity_defect"] < 10 * esc["sample_error"],
         f"{esc['case']} defect={esc['harmonicity_defect']:.2e} < {10 * esc['sample_error']:.0e}"),
        ("fixedpoint", fix["case"] == "Case3_AlphaZero_hZero"
         and abs(fix["h0_estimate"]) <= 10 * fix["sample_error"],
         f"{fix['case']} |h0|={abs(fix['h0_estimate']):.2e}"),
    ]
    record(6, "degeneration case decisions", all(ok for _, ok, _ in checks),
           "; ".join(f"{n}: {msg}" for n, _, msg in checks))


# 7 ---------------------------------------------------------------------------------


def test_criterion_07_lyapunov_slope():
    res = lyapunov_slope(SeriesPolynomial(QUAD_ESCAPE[0]), SCHEDULE)
    ok = res.lambda_exact == Fraction(1, 2) and abs(res.lambda_fit - 0.5) <= 1e-2
    worst = 0.0
    for d in (2, 3, 4, 5):
        coeffs = [LaurentSeries.constant(1)] + [LaurentSeries.zero()] * d
        for _, _, _, t in SCHEDULE.parameters():
            worst = max(worst, abs(lyapunov(family_at(coeffs, t)).value - math.log(d)))
    ok &= worst <= 1e-9
    record(7, "Lyapunov slope", ok,
           f"lambda_exact={res.lambda_exact}, lambda_fit={res.lambda_fit:.6f}; z^d max |L - log d| = {worst:.1e}")


# 8 ---------------------------------------------------------------------------------


def _decision(P, a, budgets=Budgets()):
    c = classify(P, a, budgets)
    alpha = c.alpha if isinstance(c, Escape) else 0
    samples = sample_green(P, a, SCHEDULE, alpha)
    fit = fit_alpha(samples)
    return c, decide_case(P, a, c, continuity_diagnostics(samples, alpha, 1e-10), fit).case


def test_criterion_08_base_change_covariance():
    fixtures = []
    for name in ("quadratic_escape", "good_reduction", "fixedpoint", "cubic_irrational"):
        cfg = load_config(CONFIGS / f"{name}.cfg")
        for m in cfg.marked_points:
            fixtures.append((name, cfg.polynomial, m.value, cfg.budgets))
    fixtures += [
        ("t^-1 z^2, a=1", SeriesPolynomial(LEADING_POLE[0]), LaurentSeries.constant(1), Budgets()),
        ("t^-1 z^3, a=1", SeriesPolynomial(["t^-1", "0", "0", "0"]), LaurentSeries.constant(1), Budgets()),
        ("z^3 + 1/t, a=0", SeriesPolynomial(["1", "0", "0", "t^-1"]), LaurentSeries.zero(), Budgets()),
        ("z^3 + t, a=0", SeriesPolynomial(["1", "0", "0", "t"]), LaurentSeries.zero(), Budgets()),
    ]
    bad = []
    for name, P, a, budgets in fixtures:
        N = P.degree - 1
        c0, case0 = _decision(P, a, budgets)
        Ps, as_ = P.substitute_power(N), a.substitute_power(N)
        c1, case1 = _decision(Ps, as_, Budgets(budgets.iterations, budgets.precision, budgets.anchor_level * N))
        a0 = c0.alpha if isinstance(c0, Escape) else 0
        a1 = c1.alpha if isinstance(c1, Escape) else 0
        mono = make_monic(P, a, 64)
        g = green_exact(mono.polynomial, mono.point)
        a2 = g.alpha if hasattr(g, "alpha") else 0
        if a1 != N * a0 or a2 != N * a0 or case0 != case1:
            bad.append(f"{name}: alpha {a0} -> {a1}/{a2}, case {case0} -> {case1}")
    record(8, "base change t -> t^(d-1)", not bad,
           f"{len(fixtures)} fixtures, alpha scaled by d-1 and case unchanged" if not bad else "; ".join(bad))


# 9 ---------------------------------------------------------------------------------


def test_criterion_09_log_growth_bound():
    ratios = log_growth_ratios(SeriesPolynomial(QUAD_ESCAPE[0]), [1e-1, 1e-2, 1e-3], 100, seed=9)
    C = max(ratios)
    ok = all(math.isfinite(r) for r in ratios) and math.isfinite(C) and max(ratios) <= 2 * min(ratios)
    record(9, "log-growth bound has a single constant", ok,
           "ratios " + ", ".join(f"{r:.5f}" for r in ratios) + f"; fitted C = {C:.5f}")


# 10 --------------------------------------------------------------------------------


def test_criterion_10_cli_determinism():
    mismatches, runs = [], 0
    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "a", Path(tmp) / "b"
        for cfg in sorted(CONFIGS.glob("*.cfg")):
            for cmd in ("classify", "report", "lyapunov"):
                for out in (first, second):
                    main([cmd, str(cfg), "--out", str(out), "--seed", "7"])
                runs += 1
        names = sorted(p.name for p in first.iterdir())
        if names != sorted(p.name for p in second.iterdir()):
            mismatches.append("file sets differ")
        for n in names:
            if (first / n).read_bytes() != (second / n).read_bytes():
                mismatches.append(n)
    record(10, "CLI determinism", not mismatches and names != [],
           f"{runs} commands, {len(names)} files byte-identical" if not mismatches else ", ".join(mismatches))


if __name__ == "__main__":
    failures = 0
    for fn_name, fn in sorted(globals().items()):
        if fn_name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    sys.exit(1 if failures else 0)
