"""Domain types and rate arithmetic.

Rates are dimensionless fractions (deaths per person-year) everywhere in
this module.  Conversion to deaths per 100,000 happens only when output is
formatted, see :func:`per100k`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Optional

PER_100K = 100_000


class AgestandError(Exception):
    """Base class for domain errors raised by this package."""


class MissingCellError(AgestandError, LookupError):
    def __init__(self, year: int, age: int, stratum: "StratumKey", msg: str = ""):
        self.year, self.age, self.stratum = year, age, stratum
        super().__init__(msg or f"no cell for year={year}, age={age}, stratum={stratum.label}")


class RectangularityError(MissingCellError):
    """A (year, band, stratum) slice is incomplete."""


class UnknownYearError(AgestandError, KeyError):
    def __init__(self, year: int):
        self.year = year
        super().__init__(year)

    def __str__(self) -> str:
        return f"year {self.year} is not present in the table"


class ShapeError(AgestandError, ValueError):
    """Two age-indexed objects do not share the same band."""


class InvalidTableError(AgestandError, ValueError):
    pass


class Sex(str, enum.Enum):
    FEMALE = "female"
    MALE = "male"
    ALL = "all"

    @classmethod
    def parse(cls, text: str) -> "Sex":
        t = text.strip().lower()
        aliases = {"f": "female", "m": "male", "women": "female", "men": "male",
                   "both": "all", "total": "all", "": "all"}
        t = aliases.get(t, t)
        try:
            return cls(t)
        except ValueError:
            raise ValueError(f"unrecognised sex value {text!r}") from None

    @property
    def order(self) -> int:
        return _SEX_ORDER[self]


_SEX_ORDER = {Sex.FEMALE: 0, Sex.MALE: 1, Sex.ALL: 2}


@dataclass(frozen=True)
class AgeBand:
    lo: int = 45
    hi: int = 54

    def __post_init__(self):
        if not (0 <= self.lo <= self.hi):
            raise ValueError(f"invalid age band [{self.lo}, {self.hi}]")

    @classmethod
    def parse(cls, text: str) -> "AgeBand":
        """Parse ``"45-54"`` or a single age ``"50"``."""
        parts = text.strip().split("-")
        if len(parts) == 1:
            return cls(int(parts[0]), int(parts[0]))
        if len(parts) == 2:
            return cls(int(parts[0]), int(parts[1]))
        raise ValueError(f"cannot parse age band {text!r}")

    @property
    def width(self) -> int:
        return self.hi - self.lo + 1

    @property
    def ages(self) -> range:
        return range(self.lo, self.hi + 1)

    def __contains__(self, age: object) -> bool:
        return isinstance(age, int) and self.lo <= age <= self.hi

    def within(self, other: "AgeBand") -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def __str__(self) -> str:
        return f"{self.lo}-{self.hi}"


@dataclass(frozen=True)
class StratumKey:
    sex: Sex = Sex.ALL
    region: Optional[str] = None
    extra: tuple = ()

    def __post_init__(self):
        if not isinstance(self.sex, Sex):
            object.__setattr__(self, "sex", Sex.parse(str(self.sex)))
        if self.region is not None:
            region = self.region.strip()
            if not region:
                raise ValueError("region label must be nonempty")
            object.__setattr__(self, "region", region)
        if isinstance(self.extra, Mapping):
            object.__setattr__(self, "extra", tuple(sorted(self.extra.items())))

    @property
    def label(self) -> str:
        parts = [self.region] if self.region else []
        parts.append(self.sex.value)
        parts.extend(f"{k}={v}" for k, v in self.extra)
        return "/".join(parts)

    def sort_key(self) -> tuple:
        return (self.region is not None, self.region or "", self.sex.order, self.extra)

    def __lt__(self, other: "StratumKey") -> bool:
        return self.sort_key() < other.sort_key()


Cell = tuple  # (deaths, population)
CellKey = tuple  # (year, age, StratumKey)


def iter_cell_problems(cells: Mapping[CellKey, Cell], years: Iterable[int],
                       band: AgeBand) -> Iterator[tuple]:
    """Yield ``(cell key, rule, message)`` for every violated table invariant."""
    years = set(years)
    for key, (deaths, pop) in cells.items():
        year, age, _ = key
        if deaths < 0:
            yield key, "nonnegative-deaths", f"deaths must be >= 0, got {deaths}"
        if pop <= 0:
            yield key, "positive-population", f"population must be > 0, got {pop}"
        elif deaths > pop:
            yield key, "deaths-le-population", f"deaths {deaths} exceed population {pop}"
        if age not in band:
            yield key, "age-in-band", f"age {age} outside band {band}"
        if year not in years:
            yield key, "year-in-range", f"year {year} outside the expected years"
    for stratum in sorted({k[2] for k in cells}):
        for year in sorted(years):
            for age in band.ages:
                if (year, age, stratum) not in cells:
                    yield ((year, age, stratum), "rectangular",
                           f"missing cell (year={year}, age={age}) for stratum {stratum.label}")


def describe_key(key: CellKey) -> str:
    year, age, stratum = key
    return f"year={year} age={age} stratum={stratum.label}"


@dataclass(frozen=True, eq=True)
class CountsTable:
    """Deaths and population by (year, single year of age, stratum).

    Build with :meth:`from_cells`, which infers ``years`` and ``band`` from
    the keys.  Construction fails unless the table is rectangular, every
    population is positive and no cell has more deaths than people.
    """

    years: tuple
    band: AgeBand
    cells: Mapping[CellKey, Cell] = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "years", tuple(sorted(set(self.years))))
        cells = {(int(y), int(a), s): (int(d), int(p)) for (y, a, s), (d, p) in self.cells.items()}
        object.__setattr__(self, "cells", MappingProxyType(cells))
        for key, rule, msg in iter_cell_problems(cells, self.years, self.band):
            raise InvalidTableError(f"{rule}: {msg} ({describe_key(key)})")
        if not cells:
            raise InvalidTableError("table has no cells")

    @classmethod
    def from_cells(cls, cells: Mapping[CellKey, Cell]) -> "CountsTable":
        if not cells:
            raise InvalidTableError("table has no cells")
        years = {k[0] for k in cells}
        ages = [k[1] for k in cells]
        return cls(years=tuple(years), band=AgeBand(min(ages), max(ages)), cells=cells)

    @property
    def strata(self) -> list:
        return sorted({k[2] for k in self.cells})

    def cell(self, year: int, age: int, stratum: "StratumKey") -> Cell:
        try:
            return self.cells[(year, age, stratum)]
        except KeyError:
            raise MissingCellError(year, age, stratum) from None

    def default_stratum(self) -> StratumKey:
        strata = self.strata
        if len(strata) != 1:
            raise AgestandError(
                f"table has {len(strata)} strata; pass one of "
                + ", ".join(s.label for s in strata))
        return strata[0]

    def select(self, stratum: StratumKey) -> "CountsTable":
        """Sub-table holding only ``stratum``'s cells."""
        return CountsTable(self.years, self.band,
                           {k: v for k, v in self.cells.items() if k[2] == stratum})

    def __eq__(self, other):
        if not isinstance(other, CountsTable):
            return NotImplemented
        return (self.years, self.band, dict(self.cells)) == (other.years, other.band, dict(other.cells))

    __hash__ = None


def combine_tables(*tables: CountsTable) -> CountsTable:
    """Union of tables holding disjoint strata over the same years and band."""
    cells: dict = {}
    for t in tables:
        overlap = cells.keys() & t.cells.keys()
        if overlap:
            y, a, s = min(overlap, key=lambda k: (k[0], k[1], k[2].sort_key()))
            raise InvalidTableError(f"duplicate cell year={y} age={a} stratum={s.label}")
        cells.update(t.cells)
    return CountsTable.from_cells(cells)


@dataclass(frozen=True)
class AgeSpecificRates:
    band: AgeBand
    rate: Mapping[int, float]

    def __post_init__(self):
        object.__setattr__(self, "rate", MappingProxyType(dict(self.rate)))
        if set(self.rate) != set(self.band.ages):
            raise ShapeError(f"rates must cover exactly ages {self.band}")
        for age, r in self.rate.items():
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"rate at age {age} is {r}, outside [0, 1]")


@dataclass(frozen=True)
class StandardPopulation:
    """Age weights for direct standardization.

    Weights are kept as given (e.g. raw head counts of a reference year)
    and normalised only when a rate is standardized.
    """

    band: AgeBand
    weight: Mapping[int, float]
    descriptor: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "weight", MappingProxyType(dict(self.weight)))
        if set(self.weight) != set(self.band.ages):
            raise ShapeError(f"weights must cover exactly ages {self.band}")
        if any(w < 0 or math.isnan(w) for w in self.weight.values()):
            raise ValueError("standard weights must be nonnegative")
        if not sum(self.weight.values()) > 0:
            raise ValueError("standard weights must not all be zero")

    def normalized(self) -> dict:
        total = math.fsum(self.weight.values())
        return {a: w / total for a, w in self.weight.items()}


class AdjustmentKind(str, enum.Enum):
    CRUDE = "crude"
    STANDARDIZED = "standardized"
    COUNTERFACTUAL = "counterfactual"


@dataclass(frozen=True)
class Adjustment:
    kind: AdjustmentKind
    descriptor: Optional[str] = None
    ref_year: Optional[int] = None

    @property
    def label(self) -> str:
        if self.kind is AdjustmentKind.STANDARDIZED:
            return self.descriptor or "standardized"
        if self.kind is AdjustmentKind.COUNTERFACTUAL:
            return f"counterfactual:{self.ref_year}"
        return "crude"


CRUDE = Adjustment(AdjustmentKind.CRUDE)


@dataclass(frozen=True)
class RateSeries:
    points: Mapping[int, float]
    adjustment: Adjustment = CRUDE
    stratum: StratumKey = StratumKey()

    def __post_init__(self):
        pts = dict(sorted(self.points.items()))
        for year, r in pts.items():
            if not 0.0 <= r <= 1.0:
                raise ValueError(f"rate for {year} is {r}, outside [0, 1]")
        object.__setattr__(self, "points", MappingProxyType(pts))

    @property
    def years(self) -> list:
        return list(self.points)

    def __getitem__(self, year: int) -> float:
        return self.points[year]


def per100k(rate: float) -> float:
    return rate * PER_100K


# --------------------------------------------------------------------------
# operations


def _resolve(table: CountsTable, band: Optional[AgeBand], stratum: Optional[StratumKey]):
    return (band or table.band), (stratum if stratum is not None else table.default_stratum())


def _slice(table: CountsTable, year: int, band: AgeBand, stratum: StratumKey) -> list:
    out = []
    for age in band.ages:
        try:
            out.append((age,) + tuple(table.cells[(year, age, stratum)]))
        except KeyError:
            raise RectangularityError(
                year, age, stratum,
                f"incomplete band {band} for year={year}, stratum={stratum.label}: "
                f"missing age {age}") from None
    return out


def age_specific_rate(table: CountsTable, year: int, age: int,
                      stratum: Optional[StratumKey] = None) -> float:
    _, stratum = _resolve(table, None, stratum)
    deaths, pop = table.cell(year, age, stratum)
    return deaths / pop


def crude_rate(table: CountsTable, year: int, band: Optional[AgeBand] = None,
               stratum: Optional[StratumKey] = None) -> float:
    """Total deaths over total population in the band; no age adjustment."""
    band, stratum = _resolve(table, band, stratum)
    rows = _slice(table, year, band, stratum)
    return sum(d for _, d, _ in rows) / sum(p for _, _, p in rows)


def mean_age(table: CountsTable, year: int, band: Optional[AgeBand] = None,
             stratum: Optional[StratumKey] = None) -> float:
    band, stratum = _resolve(table, band, stratum)
    rows = _slice(table, year, band, stratum)
    return sum(a * p for a, _, p in rows) / sum(p for _, _, p in rows)


def rates_for_year(table: CountsTable, year: int, band: Optional[AgeBand] = None,
                   stratum: Optional[StratumKey] = None) -> AgeSpecificRates:
    band, stratum = _resolve(table, band, stratum)
    return AgeSpecificRates(band, {a: d / p for a, d, p in _slice(table, year, band, stratum)})


def uniform_standard(band: AgeBand = AgeBand()) -> StandardPopulation:
    return StandardPopulation(band, {a: 1.0 for a in band.ages}, "uniform")


def standard_from_year(table: CountsTable, ref_year: int, band: Optional[AgeBand] = None,
                       stratum: Optional[StratumKey] = None) -> StandardPopulation:
    """The observed age distribution of ``ref_year`` used as a standard."""
    band, stratum = _resolve(table, band, stratum)
    if ref_year not in table.years:
        raise UnknownYearError(ref_year)
    rows = _slice(table, ref_year, band, stratum)
    return StandardPopulation(band, {a: float(p) for a, _, p in rows}, f"year:{ref_year}")


def standardized_rate(rates: AgeSpecificRates, std: StandardPopulation) -> float:
    if rates.band != std.band:
        raise ShapeError(f"rates cover {rates.band} but standard covers {std.band}")
    total = math.fsum(std.weight.values())
    value = math.fsum(std.weight[a] * rates.rate[a] for a in rates.band.ages) / total
    # fsum keeps this inside [min, max] in practice; guard the last ulp anyway
    lo, hi = min(rates.rate.values()), max(rates.rate.values())
    return min(max(value, lo), hi)


def crude_series(table: CountsTable, band: Optional[AgeBand] = None,
                 stratum: Optional[StratumKey] = None) -> RateSeries:
    band, stratum = _resolve(table, band, stratum)
    return RateSeries({y: crude_rate(table, y, band, stratum) for y in table.years},
                      CRUDE, stratum)


def mean_age_series(table: CountsTable, band: Optional[AgeBand] = None,
                    stratum: Optional[StratumKey] = None) -> dict:
    band, stratum = _resolve(table, band, stratum)
    return {y: mean_age(table, y, band, stratum) for y in table.years}


def adjusted_series(table: CountsTable, band: Optional[AgeBand] = None,
                    stratum: Optional[StratumKey] = None,
                    std: Optional[StandardPopulation] = None) -> RateSeries:
    band, stratum = _resolve(table, band, stratum)
    if std is None:
        std = uniform_standard(band)
    points = {y: standardized_rate(rates_for_year(table, y, band, stratum), std)
              for y in table.years}
    return RateSeries(points, Adjustment(AdjustmentKind.STANDARDIZED, std.descriptor), stratum)
