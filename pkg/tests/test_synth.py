from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from agestand.core import AgeBand, Sex, StratumKey, crude_series, mean_age_series, standard_from_year
from agestand.core import adjusted_series
from agestand.decompose import decompose_change
from agestand.synth import (
    RateSchedule,
    Scenario,
    baby_boom_scenario,
    dumps_scenario,
    exact_scale,
    loads_scenario,
    single_pulse_scenario,
    synth_table,
)

from conftest import ALL

BAND = AgeBand(45, 49)
RATES = (0.002, 0.003, 0.004, 0.005, 0.006)


def flat_births(first, last, band=BAND, n=1000):
    return {c: n for c in range(first - band.hi, last - band.lo + 1)}


def test_stationary_crude_constant():
    sc = Scenario(BAND, (2000, 2010), flat_births(2000, 2010), RateSchedule.constant(RATES))
    crude = crude_series(synth_table(sc))
    assert len(set(crude.points.values())) == 1


def test_single_pulse_raises_mean_age_while_crossing():
    sc = single_pulse_scenario(cohort=1955)
    ages = mean_age_series(synth_table(sc))
    # cohort 1955 is 45 in 2000 and 54 in 2009
    for y in range(2000, 2009):
        assert ages[y + 1] > ages[y]


def test_pulse_crude_rises_then_falls_closed_form():
    band = AgeBand(45, 54)
    births = flat_births(1990, 2020, band)
    for c in range(1950, 1955):
        births[c] = 3000
    rates = [round(0.002 + 0.0005 * i, 4) for i in range(10)]
    sc = Scenario(band, (1990, 2020), births, RateSchedule.constant(rates), deaths="exact")
    crude = crude_series(synth_table(sc))

    def closed_form(t):
        pops = [Fraction(births[t - a]) for a in band.ages]
        r = [Fraction(repr(x)) for x in rates]
        return sum(p * q for p, q in zip(pops, r)) / sum(pops)

    for t in range(1990, 2021):
        assert crude[t] == pytest.approx(float(closed_form(t)), abs=1e-15)
    peak = max(crude.points, key=crude.points.get)
    assert 1990 < peak < 2020
    assert crude[1990] < crude[peak] > crude[2020]


def test_cohort_conservation():
    t = synth_table(baby_boom_scenario(drift=0.00002, sex_split=0.49))
    for (y, a, s), (_, p) in t.cells.items():
        if (y + 1, a + 1, s) in t.cells:
            assert t.cells[(y + 1, a + 1, s)][1] == p


def test_rounding_half_even():
    band = AgeBand(0, 1)
    sc = Scenario(band, (2000, 2000), {1999: 500, 2000: 500},
                  RateSchedule.constant((0.001, 0.003)))
    t = synth_table(sc)
    assert t.cells[(2000, 0, ALL)] == (0, 500)   # 0.5 -> 0
    assert t.cells[(2000, 1, ALL)] == (2, 500)   # 1.5 -> 2


def test_exact_mode_scales_to_integers():
    band = AgeBand(0, 1)
    sc = Scenario(band, (2000, 2000), {1999: 7, 2000: 3},
                  RateSchedule.constant((0.0125, 0.1)), sex_split=0.5, deaths="exact")
    k = exact_scale(sc)
    t = synth_table(sc)
    assert k == 160
    assert t.cells[(2000, 0, StratumKey(Sex.FEMALE))] == (3, 240)
    assert t.cells[(2000, 1, StratumKey(Sex.MALE))] == (56, 560)


def test_sex_split_strata():
    t = synth_table(baby_boom_scenario(sex_split=0.5))
    assert t.strata == [StratumKey(Sex.FEMALE), StratumKey(Sex.MALE)]


def test_scenario_validation():
    with pytest.raises(ValueError, match="births undefined"):
        Scenario(BAND, (2000, 2001), {1950: 1}, RateSchedule.constant(RATES))
    with pytest.raises(ValueError, match="outside"):
        Scenario(BAND, (2000, 2010), flat_births(2000, 2010),
                 RateSchedule.linear_drift(RATES, -0.001))
    with pytest.raises(ValueError):
        Scenario(BAND, (2000, 2001), flat_births(2000, 2001), RateSchedule.constant(RATES[:2]))


def test_baby_boom_preset():
    sc = baby_boom_scenario()
    assert sc.band == AgeBand(45, 54) and sc.years == (1999, 2013)
    assert sc.births[1950] == 1.5 * sc.births[1945]
    t = synth_table(sc)
    ages = mean_age_series(t)
    assert ages[1999] < ages[2013]
    adj = adjusted_series(t)
    assert max(adj.points.values()) - min(adj.points.values()) <= 1e-12
    d = decompose_change(t, t0=1999, t1=2013)
    assert d.share == pytest.approx(1.0, abs=1e-9)


def test_baby_boom_rounding_is_inert():
    rounded = synth_table(baby_boom_scenario())
    exact = synth_table(baby_boom_scenario(deaths="exact"))
    assert rounded == exact


@given(st.lists(st.integers(0, 1000), min_size=5, max_size=5), st.integers(1, 10_000),
       st.sampled_from(["round", "exact"]))
def test_constant_schedule_gives_flat_standardized_series(milli_rates, base, mode):
    rates = [m / 1000 for m in milli_rates]
    births = {c: base + (c * 7919) % 1000 for c in range(2000 - BAND.hi, 2006 - BAND.lo + 1)}
    t = synth_table(Scenario(BAND, (2000, 2006), births, RateSchedule.constant(rates), deaths=mode))
    tol = 1e-12 if mode == "exact" else 1e-9 + 1 / base
    for std in (None, standard_from_year(t, 2000)):
        s = adjusted_series(t, std=std)
        assert max(s.points.values()) - min(s.points.values()) <= tol


def test_config_round_trip():
    for sc in (baby_boom_scenario(), baby_boom_scenario(drift=0.00002, sex_split=0.51, region="south"),
               single_pulse_scenario()):
        assert loads_scenario(dumps_scenario(sc)) == sc


def test_config_ranges_and_default():
    text = """
    # two-age toy
    band = 0-1
    years = 2000-2002
    births.default = 100
    births.2000-2001 = 300   # pulse
    schedule = linear-drift
    rates = 0.01, 0.02
    drift = 0.001
    deaths = exact
    """
    sc = loads_scenario(text)
    assert sc.births == {1999: 100, 2000: 300, 2001: 300, 2002: 100}
    assert sc.rate(1, 2002) == Fraction(22, 1000)
    with pytest.raises(ValueError, match="line 2"):
        loads_scenario("band = 0-1\nnonsense\n")
    with pytest.raises(ValueError, match="unknown key"):
        loads_scenario("colour = red\n")
