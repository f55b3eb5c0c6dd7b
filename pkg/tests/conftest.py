import random

import pytest
from hypothesis import strategies as st

from agestand.core import AgeBand, CountsTable, StratumKey

ALL = StratumKey()
_ACCEPTANCE: list = []


def make_table(spec, stratum=ALL):
    """``spec`` maps year -> {age: (deaths, population)}."""
    return CountsTable.from_cells({(y, a, stratum): dp for y, ages in spec.items()
                                   for a, dp in ages.items()})


def random_table(rng: random.Random, max_ages=5, max_years=5, equal_pop=False,
                 strata=(ALL,), max_pop=10_000):
    lo = rng.randint(0, 90)
    band = AgeBand(lo, lo + rng.randint(0, max_ages - 1))
    y0 = rng.randint(1950, 2020)
    years = range(y0, y0 + rng.randint(1, max_years))
    cells = {}
    for s in strata:
        for y in years:
            shared = rng.randint(1, max_pop)
            for a in band.ages:
                p = shared if equal_pop else rng.randint(1, max_pop)
                cells[(y, a, s)] = (rng.randint(0, p), p)
    return CountsTable.from_cells(cells)


@st.composite
def tables(draw, max_ages=5, max_years=5, equal_pop=False, max_pop=10_000):
    lo = draw(st.integers(0, 100))
    band = AgeBand(lo, lo + draw(st.integers(0, max_ages - 1)))
    y0 = draw(st.integers(1900, 2030))
    years = range(y0, y0 + draw(st.integers(1, max_years)))
    cells = {}
    for y in years:
        shared = draw(st.integers(1, max_pop))
        for a in band.ages:
            p = shared if equal_pop else draw(st.integers(1, max_pop))
            d = draw(st.integers(0, p))
            cells[(y, a, ALL)] = (d, p)
    return CountsTable.from_cells(cells)


@pytest.fixture
def three_age():
    """Three ages, two years; ages 45-47 rates 0.005, 0.02, 0.03 in 2000."""
    return make_table({
        1999: {45: (4, 160), 46: (1, 100), 47: (9, 300)},
        2000: {45: (1, 200), 46: (2, 100), 47: (3, 100)},
    })


def record_acceptance(number, name, passed, detail=""):
    _ACCEPTANCE.append((number, name, passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE, key=lambda r: str(r[0])):
        status = "PASS" if passed else ("SKIP" if passed is None else "FAIL")
        terminalreporter.write_line(f"[{status}] {number}. {name}" + (f" ({detail})" if detail else ""))
