"""Composition-only counterfactuals and trend attribution."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    AgeBand,
    AgestandError,
    Adjustment,
    AdjustmentKind,
    CountsTable,
    RateSeries,
    StandardPopulation,
    StratumKey,
    UnknownYearError,
    _resolve,
    adjusted_series,
    crude_rate,
    rates_for_year,
    standard_from_year,
    standardized_rate,
)

DEFAULT_EPSILON = 1e-15


class UndefinedPercentError(AgestandError, ZeroDivisionError):
    """Percent change requested against a zero baseline."""


@dataclass(frozen=True)
class DecompositionResult:
    t0: int
    t1: int
    ref_year: int
    crude_change: float
    composition_change: float
    share: Optional[float]
    stratum: StratumKey = StratumKey()

    @property
    def interval(self) -> tuple:
        return (self.t0, self.t1)

    @property
    def share_defined(self) -> bool:
        return self.share is not None


@dataclass(frozen=True)
class BiasReport:
    t0: int
    t1: int
    crude_trend_pct: float
    adjusted_trend_pct: float
    standard: str = "uniform"
    stratum: StratumKey = StratumKey()

    @property
    def interval(self) -> tuple:
        return (self.t0, self.t1)

    @property
    def bias_pct_points(self) -> float:
        return self.crude_trend_pct - self.adjusted_trend_pct


def _check_year(table: CountsTable, year: int) -> None:
    if year not in table.years:
        raise UnknownYearError(year)


def counterfactual_series(table: CountsTable, band: Optional[AgeBand] = None,
                          stratum: Optional[StratumKey] = None,
                          ref_year: Optional[int] = None) -> RateSeries:
    """Rates held at ``ref_year``, age composition taken from each year.

    ``ref_year`` defaults to the table's last year.
    """
    band, stratum = _resolve(table, band, stratum)
    if ref_year is None:
        ref_year = table.years[-1]
    _check_year(table, ref_year)
    frozen = rates_for_year(table, ref_year, band, stratum)
    points = {}
    for year in table.years:
        if year == ref_year:
            # weights and rates from the same year: identical to the crude rate
            points[year] = crude_rate(table, year, band, stratum)
        else:
            points[year] = standardized_rate(frozen, standard_from_year(table, year, band, stratum))
    return RateSeries(points, Adjustment(AdjustmentKind.COUNTERFACTUAL, ref_year=ref_year), stratum)


def decompose_change(table: CountsTable, band: Optional[AgeBand] = None,
                     stratum: Optional[StratumKey] = None, t0: Optional[int] = None,
                     t1: Optional[int] = None, ref_year: Optional[int] = None,
                     epsilon: float = DEFAULT_EPSILON) -> DecompositionResult:
    """Split the crude change between ``t0`` and ``t1`` into its composition part.

    ``share`` is the counterfactual change over the crude change, or None
    when ``|crude_change| <= epsilon``.  Swapping ``t0`` and ``t1`` negates
    both deltas and leaves the share alone.
    """
    band, stratum = _resolve(table, band, stratum)
    t0 = table.years[0] if t0 is None else t0
    t1 = table.years[-1] if t1 is None else t1
    ref_year = table.years[-1] if ref_year is None else ref_year
    for y in (t0, t1, ref_year):
        _check_year(table, y)
    if t0 == t1:
        raise ValueError(f"interval endpoints must differ, got {t0} twice")
    crude_change = crude_rate(table, t1, band, stratum) - crude_rate(table, t0, band, stratum)
    cf = counterfactual_series(table, band, stratum, ref_year)
    composition_change = cf[t1] - cf[t0]
    share = composition_change / crude_change if abs(crude_change) > epsilon else None
    return DecompositionResult(t0, t1, ref_year, crude_change, composition_change, share, stratum)


def percent_change(start: float, end: float) -> float:
    if start <= 0:
        raise UndefinedPercentError(f"percent change undefined for baseline {start!r}")
    return 100.0 * (end - start) / start


def bias_report(table: CountsTable, band: Optional[AgeBand] = None,
                stratum: Optional[StratumKey] = None,
                std: Optional[StandardPopulation] = None,
                t0: Optional[int] = None, t1: Optional[int] = None) -> BiasReport:
    band, stratum = _resolve(table, band, stratum)
    t0 = table.years[0] if t0 is None else t0
    t1 = table.years[-1] if t1 is None else t1
    for y in (t0, t1):
        _check_year(table, y)
    adjusted = adjusted_series(table, band, stratum, std)
    crude_pct = percent_change(crude_rate(table, t0, band, stratum),
                               crude_rate(table, t1, band, stratum))
    adjusted_pct = percent_change(adjusted[t0], adjusted[t1])
    return BiasReport(t0, t1, crude_pct, adjusted_pct, adjusted.adjustment.label, stratum)
