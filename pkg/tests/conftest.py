import time
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from ringarb.amm import UNISWAP_V2, FeeParams, Market, Pool
from ringarb.cycles import Cycle

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile("default", max_examples=200, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

reserves = st.fractions(min_value=Fraction(1, 1000), max_value=Fraction(10**9), max_denominator=10**6)
amounts = st.fractions(min_value=Fraction(1, 10**6), max_value=Fraction(10**8), max_denominator=10**6)
fee_rates = st.fractions(min_value=Fraction(9, 10), max_value=Fraction(1), max_denominator=10**6)


@st.composite
def fee_params(draw):
    return FeeParams(draw(fee_rates), draw(fee_rates))


def triangle(z_to_x=120, fees=UNISWAP_V2) -> Market:
    """X/Y (100, 200), Y/Z (200, 100), Z/X (100, z_to_x): index of X->Y->Z->X is z_to_x/100."""
    return Market.from_pools(
        [
            Pool("XY", "X", "Y", Fraction(100), Fraction(200), fees),
            Pool("YZ", "Y", "Z", Fraction(200), Fraction(100), fees),
            Pool("ZX", "Z", "X", Fraction(100), Fraction(z_to_x), fees),
        ]
    )


FORWARD = Cycle.of(("XY", "X"), ("YZ", "Y"), ("ZX", "Z"))


@pytest.fixture
def i65_market() -> Market:
    return triangle(120)


@pytest.fixture
def balanced_market() -> Market:
    return triangle(100)


# -- acceptance reporting ---------------------------------------------------

ACCEPTANCE: dict[int, str] = {}


def record_criterion(number: int, name: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {name}" + (f"  ({detail})" if detail else "")
    ACCEPTANCE[number] = line
    print(line)


def pytest_sessionstart(session):
    session.config._ringarb_start = time.perf_counter()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - config._ringarb_start
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[number])
    terminalreporter.write_line(f"session wall time {elapsed:.1f} s ({'PASS' if elapsed < 300 else 'FAIL'} < 300 s)")
