from fractions import Fraction
from pathlib import Path

from hypothesis import settings, strategies as st

from greendegen.series import INF, LaurentSeries

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

ROOT = Path(__file__).resolve().parent.parent
CONFIGS = ROOT / "configs"

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=6)
small_ints = st.integers(-9, 9)


@st.composite
def laurent(draw, exact=None, nonzero=False, min_low=-4, max_low=4, max_len=6):
    low = draw(st.integers(min_low, max_low))
    coeffs = draw(st.lists(fractions, min_size=1 if nonzero else 0, max_size=max_len))
    if nonzero:
        coeffs[0] = coeffs[0] or Fraction(1)
    is_exact = draw(st.booleans()) if exact is None else exact
    prec = INF if is_exact else low + len(coeffs) + draw(st.integers(0, 4))
    return LaurentSeries(coeffs, low, prec)


@st.composite
def laurent_poly(draw, min_low=-2, max_low=2, max_len=4, nonzero=False):
    low = draw(st.integers(min_low, max_low))
    coeffs = draw(st.lists(small_ints, min_size=1 if nonzero else 0, max_size=max_len))
    if nonzero:
        coeffs[0] = coeffs[0] or 1
    return LaurentSeries(coeffs, low)


ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
