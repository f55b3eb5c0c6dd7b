"""Synthetic cohort populations with known rate schedules.

Population at (age, year) is the size of the birth cohort ``year - age``;
no attrition or migration is applied, so cohorts translate unchanged
through the age band.  Deaths are the expected count under the rate
schedule.  In the default ``round`` mode they are rounded half-to-even.  In
``exact`` mode every population and death count is multiplied by the
smallest integer that makes all of them whole.  That integer is the lcm of
the denominators of the exact rational cell values, taking each rate at its
shortest decimal representation.  Rates then come out exactly as
scheduled.

Scenario config format, one ``key = value`` per line, ``#`` comments::

    band = 45-54
    years = 1999-2013
    births.default = 1000000        # optional fallback for every cohort
    births.1946-1964 = 1500000      # a range, or births.1950 for one year
    schedule = constant             # or linear-drift
    rates = 0.003, 0.0033, ...      # one per age, youngest first
    drift = 0.00002                 # linear-drift only; scalar or per age
    sex_split = 0.5                 # optional fraction female
    sex = all                       # stratum sex when sex_split is absent
    region = south                  # optional region label
    deaths = round                  # or exact

Later ``births.*`` lines override earlier ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence, TextIO, Union

from .core import AgeBand, CountsTable, Sex, StratumKey

BOOM_COHORTS = (1946, 1964)


def _exact(x: Union[float, int, str, Fraction]) -> Fraction:
    # shortest repr of a float is what the user typed; avoid binary expansions
    if isinstance(x, Fraction):
        return x
    return Fraction(repr(x) if isinstance(x, float) else str(x))


@dataclass(frozen=True)
class RateSchedule:
    """``constant`` or ``linear-drift`` rate schedule over a band.

    For linear drift the rate at age ``a`` in year ``t`` is
    ``base[a] + drift[a] * (t - first_year)``.
    """

    kind: str
    base: tuple
    drift: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "linear-drift"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        object.__setattr__(self, "base", tuple(float(r) for r in self.base))
        drift = self.drift
        if isinstance(drift, (int, float)):
            drift = (float(drift),) * len(self.base)
        drift = tuple(float(d) for d in drift)
        if self.kind == "constant":
            if any(drift):
                raise ValueError("constant schedule takes no drift")
            drift = ()
        elif len(drift) == 1:
            drift = drift * len(self.base)
        elif len(drift) != len(self.base):
            raise ValueError("drift must be a scalar or one value per age")
        object.__setattr__(self, "drift", drift)

    @classmethod
    def constant(cls, rates: Sequence[float]) -> "RateSchedule":
        return cls("constant", tuple(rates))

    @classmethod
    def linear_drift(cls, base: Sequence[float], drift: Union[float, Sequence[float]]) -> "RateSchedule":
        return cls("linear-drift", tuple(base), drift if isinstance(drift, (int, float)) else tuple(drift))

    def rate(self, index: int, elapsed: int) -> Fraction:
        r = _exact(self.base[index])
        if self.drift:
            r += _exact(self.drift[index]) * elapsed
        return r


@dataclass(frozen=True)
class Scenario:
    band: AgeBand
    years: tuple
    births: Mapping[int, int] = field(repr=False)
    schedule: RateSchedule
    sex_split: Optional[float] = None
    sex: Sex = Sex.ALL
    region: Optional[str] = None
    deaths: str = "round"

    def __post_init__(self):
        first, last = self.years
        if first > last:
            raise ValueError(f"years {first}-{last} are reversed")
        object.__setattr__(self, "births", dict(sorted(self.births.items())))
        object.__setattr__(self, "sex", Sex.parse(str(getattr(self.sex, "value", self.sex))))
        needed = range(first - self.band.hi, last - self.band.lo + 1)
        missing = [c for c in needed if c not in self.births]
        if missing:
            raise ValueError(f"births undefined for cohort years {missing[0]}..{missing[-1]}")
        for c, n in self.births.items():
            if int(n) != n or n <= 0:
                raise ValueError(f"cohort {c} size must be a positive integer, got {n}")
        if len(self.schedule.base) != self.band.width:
            raise ValueError(f"schedule has {len(self.schedule.base)} rates for "
                             f"a band of width {self.band.width}")
        if self.sex_split is not None and not 0.0 <= self.sex_split <= 1.0:
            raise ValueError("sex_split must lie in [0, 1]")
        if self.deaths not in ("round", "exact"):
            raise ValueError(f"deaths mode must be 'round' or 'exact', got {self.deaths!r}")
        for i, age in enumerate(self.band.ages):
            for t in range(first, last + 1):
                r = self.schedule.rate(i, t - first)
                if not 0 <= r <= 1:
                    raise ValueError(f"scheduled rate {float(r)} at age {age}, year {t} "
                                     "is outside [0, 1]")

    def rate(self, age: int, year: int) -> Fraction:
        return self.schedule.rate(age - self.band.lo, year - self.years[0])


def _cell_fractions(scenario: Scenario) -> dict:
    first, last = scenario.years
    if scenario.sex_split is None:
        shares = [(scenario.sex, Fraction(1))]
    else:
        f = _exact(scenario.sex_split)
        shares = [(Sex.FEMALE, f), (Sex.MALE, 1 - f)]
    cells = {}
    for sex, share in shares:
        if share == 0:
            continue
        key = StratumKey(sex, scenario.region)
        for year in range(first, last + 1):
            for age in scenario.band.ages:
                cells[(year, age, key)] = (scenario.rate(age, year),
                                           Fraction(scenario.births[year - age]) * share)
    return cells


def exact_scale(scenario: Scenario) -> int:
    """Integer multiplier that makes every exact cell count whole."""
    dens = [1]
    for rate, pop in _cell_fractions(scenario).values():
        dens += [pop.denominator, (pop * rate).denominator]
    return math.lcm(*dens)


def synth_table(scenario: Scenario) -> CountsTable:
    fracs = _cell_fractions(scenario)
    cells = {}
    if scenario.deaths == "exact":
        k = exact_scale(scenario)
        for key, (rate, pop) in fracs.items():
            cells[key] = (int(pop * rate * k), int(pop * k))
    else:
        # split populations: female rounded half-to-even, male takes the remainder
        for (year, age, stratum), (rate, pop) in fracs.items():
            births = scenario.births[year - age]
            if stratum.sex is Sex.FEMALE:
                n = round(pop)
            elif stratum.sex is Sex.MALE and scenario.sex_split is not None:
                n = births - round(Fraction(births) * _exact(scenario.sex_split))
            else:
                n = int(pop)
            if n <= 0:
                raise ValueError(f"sex split leaves no {stratum.sex.value} population "
                                 f"in cohort {year - age}")
            cells[(year, age, stratum)] = (round(n * rate), n)
    return CountsTable.from_cells(cells)


# --------------------------------------------------------------------------
# presets

#: rates rising 0.0003 per year of age from 0.0030 at 45; products with the
#: preset cohort sizes are whole numbers, so rounding never perturbs them
BOOM_RATES = tuple(round(0.0030 + 0.0003 * i, 4) for i in range(10))
BOOM_BASELINE = 1_000_000
MILD_DRIFT = 0.00002


def baby_boom_scenario(pulse: float = 1.5, drift: Optional[float] = None,
                       sex_split: Optional[float] = None, region: Optional[str] = None,
                       deaths: str = "round") -> Scenario:
    """Canonical fixture: 45-54 year olds, 1999-2013, boom cohorts 1946-1964.

    Cohorts born 1946-1964 are ``pulse`` times the flat baseline.  Rates are
    constant and increase with age unless ``drift`` adds a per-year trend.
    """
    band = AgeBand(45, 54)
    years = (1999, 2013)
    births = {}
    for c in range(years[0] - band.hi, years[1] - band.lo + 1):
        boom = BOOM_COHORTS[0] <= c <= BOOM_COHORTS[1]
        births[c] = int(round(BOOM_BASELINE * pulse)) if boom else BOOM_BASELINE
    schedule = (RateSchedule.constant(BOOM_RATES) if not drift
                else RateSchedule.linear_drift(BOOM_RATES, drift))
    return Scenario(band, years, births, schedule, sex_split=sex_split,
                    region=region, deaths=deaths)


def single_pulse_scenario(cohort: int = 1955, size: int = 3, baseline: int = 1000,
                          band: AgeBand = AgeBand(45, 54), years: tuple = (1999, 2013),
                          rates: Optional[Sequence[float]] = None) -> Scenario:
    """One oversized cohort against a flat baseline."""
    births = {c: baseline * (size if c == cohort else 1)
              for c in range(years[0] - band.hi, years[1] - band.lo + 1)}
    if rates is None:
        rates = [round(0.002 + 0.001 * i, 3) for i in range(band.width)]
    return Scenario(band, years, births, RateSchedule.constant(rates))


PRESETS = {"baby-boom": baby_boom_scenario,
           "baby-boom-drift": lambda: baby_boom_scenario(drift=MILD_DRIFT)}


# --------------------------------------------------------------------------
# config files


def dumps_scenario(scenario: Scenario) -> str:
    lines = [
        f"band = {scenario.band}",
        f"years = {scenario.years[0]}-{scenario.years[1]}",
    ]
    lines += [f"births.{c} = {n}" for c, n in scenario.births.items()]
    lines.append(f"schedule = {scenario.schedule.kind}")
    lines.append("rates = " + ", ".join(repr(r) for r in scenario.schedule.base))
    if scenario.schedule.drift:
        lines.append("drift = " + ", ".join(repr(d) for d in scenario.schedule.drift))
    if scenario.sex_split is not None:
        lines.append(f"sex_split = {scenario.sex_split!r}")
    lines.append(f"sex = {scenario.sex.value}")
    if scenario.region is not None:
        lines.append(f"region = {scenario.region}")
    lines.append(f"deaths = {scenario.deaths}")
    return "\n".join(lines) + "\n"


def _years(text: str) -> tuple:
    lo, _, hi = text.partition("-")
    return (int(lo), int(hi or lo))


def _floats(text: str) -> list:
    return [float(x) for x in text.split(",") if x.strip()]


def loads_scenario(text: str) -> Scenario:
    values: dict = {}
    births_default = None
    births_rules: list = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = key.strip().lower(), value.strip()
        try:
            if key == "births.default":
                births_default = int(value)
            elif key.startswith("births."):
                births_rules.append((_years(key[len("births."):]), int(value)))
            elif key in ("band", "years", "schedule", "rates", "drift",
                         "sex_split", "sex", "region", "deaths"):
                values[key] = value
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
    for required in ("band", "years", "rates"):
        if required not in values:
            raise ValueError(f"scenario is missing required key {required!r}")
    band = AgeBand.parse(values["band"])
    years = _years(values["years"])
    births = {}
    if births_default is not None:
        births = {c: births_default for c in range(years[0] - band.hi, years[1] - band.lo + 1)}
    for (lo, hi), n in births_rules:
        births.update({c: n for c in range(lo, hi + 1)})
    kind = values.get("schedule", "constant")
    rates = _floats(values["rates"])
    if kind == "linear-drift":
        schedule = RateSchedule.linear_drift(rates, _floats(values.get("drift", "0")))
    else:
        schedule = RateSchedule(kind, tuple(rates))
    split = values.get("sex_split")
    return Scenario(band, years, births, schedule,
                    sex_split=float(split) if split else None,
                    sex=Sex.parse(values.get("sex", "all")),
                    region=values.get("region") or None,
                    deaths=values.get("deaths", "round"))


def load_scenario(fp: TextIO) -> Scenario:
    return loads_scenario(fp.read())
