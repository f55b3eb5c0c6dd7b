"""Per-stratum analysis pipeline (sex and region breakdowns)."""
from __future__ import annotations

import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .core import (
    AgeBand,
    AgestandError,
    CountsTable,
    RateSeries,
    Sex,
    StandardPopulation,
    StratumKey,
    UnknownYearError,
    adjusted_series,
    crude_series,
    mean_age_series,
    standard_from_year,
    uniform_standard,
)
from .decompose import BiasReport, DecompositionResult, bias_report, counterfactual_series, decompose_change

GROUP_DIMS = ("sex", "region")
_STANDARD_TOKEN = re.compile(r"^(?:year:)?(first|last|\d{4})$")


class NoRegionError(AgestandError):
    """Region grouping requested on a table without region labels."""


class PipelineError(AgestandError):
    def __init__(self, stratum: StratumKey, cause: Exception):
        self.stratum = stratum
        self.cause = cause
        super().__init__(f"stratum {stratum.label}: {cause}")


def parse_standard_token(token: str) -> str:
    """Normalise ``uniform``, ``first``, ``last``, ``year:YYYY`` and friends.

    Returns ``"uniform"`` or ``"year:<first|last|YYYY>"``; raises ValueError
    for anything else.
    """
    t = token.strip().lower()
    if t == "uniform":
        return t
    m = _STANDARD_TOKEN.match(t)
    if not m:
        raise ValueError(f"invalid standard {token!r}; expected uniform, first, last "
                         "or year:YYYY")
    return f"year:{m.group(1)}"


def resolve_year(token, table: CountsTable) -> int:
    if token in (None, "last"):
        return table.years[-1]
    if token == "first":
        return table.years[0]
    year = int(token)
    if year not in table.years:
        raise UnknownYearError(year)
    return year


@dataclass(frozen=True)
class PipelineConfig:
    band: Optional[AgeBand] = None
    standards: tuple = ("uniform",)
    ref_year: object = "last"
    intervals: tuple = ()
    group_by: frozenset = frozenset()
    sex_standard: str = "own"

    def __post_init__(self):
        object.__setattr__(self, "standards", tuple(parse_standard_token(s) for s in self.standards))
        object.__setattr__(self, "group_by", frozenset(self.group_by))
        object.__setattr__(self, "intervals", tuple(tuple(i) for i in self.intervals))
        if not self.standards:
            raise ValueError("at least one standard is required")
        bad = self.group_by - set(GROUP_DIMS)
        if bad:
            raise ValueError(f"cannot group by {', '.join(sorted(bad))}")
        if self.sex_standard not in ("own", "pooled"):
            raise ValueError("sex_standard must be 'own' or 'pooled'")

    def check(self, table: CountsTable) -> None:
        """Raise if any year reference falls outside ``table``."""
        for s in self.standards:
            if s != "uniform":
                resolve_year(s.split(":", 1)[1], table)
        resolve_year(self.ref_year, table)
        for t0, t1 in self.intervals:
            a, b = resolve_year(t0, table), resolve_year(t1, table)
            if not a < b:
                raise ValueError(f"interval {a}-{b} must run forwards")
        band = self.band or table.band
        if not band.within(table.band):
            raise ValueError(f"band {band} exceeds the table's ages {table.band}")


@dataclass
class StratumResult:
    crude: RateSeries
    mean_age: dict
    adjusted: dict
    counterfactual: RateSeries
    decompositions: list = field(default_factory=list)
    bias: list = field(default_factory=list)


# --------------------------------------------------------------------------
# projection onto grouping dimensions


def _project(key: StratumKey, group_by: frozenset) -> StratumKey:
    return StratumKey(key.sex if "sex" in group_by else Sex.ALL,
                      key.region if "region" in group_by else None)


def collapse(table: CountsTable, group_by: Iterable[str]) -> CountsTable:
    """Aggregate ``table`` onto the ``group_by`` dimensions.

    A dimension not grouped on is summed over, unless the table already
    carries its total: ``all``-sex rows are used instead of adding female and
    male, and region-less rows instead of adding regions.  Totals and parts
    are never added together.
    """
    group_by = frozenset(group_by)
    if "region" in group_by and not any(s.region for s in table.strata):
        raise NoRegionError("region grouping requested but the table has no region labels")
    strata = table.strata
    sources = []
    for s in strata:
        if "sex" not in group_by:
            has_total = any(o.sex is Sex.ALL and o.region == s.region for o in strata)
            if has_total and s.sex is not Sex.ALL:
                continue
        if "region" not in group_by:
            has_total = any(o.region is None for o in strata)
            if has_total and s.region is not None:
                continue
        sources.append(s)
    if set(sources) == set(strata) and all(_project(s, group_by) == s for s in strata):
        return table
    cells: dict = {}
    for (year, age, s), (d, p) in table.cells.items():
        if s not in sources:
            continue
        key = (year, age, _project(s, group_by))
        d0, p0 = cells.get(key, (0, 0))
        cells[key] = (d0 + d, p0 + p)
    return CountsTable(table.years, table.band, cells)


def strata(table: CountsTable, group_by: Iterable[str] = ()) -> list:
    """Stratum keys of ``table`` projected on ``group_by``, in display order."""
    group_by = frozenset(group_by)
    bad = group_by - set(GROUP_DIMS)
    if bad:
        raise ValueError(f"cannot group by {', '.join(sorted(bad))}")
    return collapse(table, group_by).strata


# --------------------------------------------------------------------------


def _standard(token: str, table: CountsTable, band: AgeBand, stratum: StratumKey,
              pooled: Optional[CountsTable]) -> StandardPopulation:
    if token == "uniform":
        return uniform_standard(band)
    year = resolve_year(token.split(":", 1)[1], table)
    if pooled is not None:
        key = _project(stratum, frozenset({"region"} if stratum.region else ()))
        std = standard_from_year(pooled, year, band, key)
        return StandardPopulation(std.band, std.weight, f"year:{year}/pooled")
    return standard_from_year(table, year, band, stratum)


def _run_stratum(table: CountsTable, config: PipelineConfig, stratum: StratumKey,
                 pooled: Optional[CountsTable]) -> StratumResult:
    band = config.band or table.band
    ref_year = resolve_year(config.ref_year, table)
    adjusted = {}
    stds = {}
    for token in config.standards:
        std = _standard(token, table, band, stratum, pooled)
        stds[token] = std
        adjusted[std.descriptor] = adjusted_series(table, band, stratum, std)
    result = StratumResult(
        crude=crude_series(table, band, stratum),
        mean_age=mean_age_series(table, band, stratum),
        adjusted=adjusted,
        counterfactual=counterfactual_series(table, band, stratum, ref_year),
    )
    for t0, t1 in config.intervals:
        t0, t1 = resolve_year(t0, table), resolve_year(t1, table)
        result.decompositions.append(decompose_change(table, band, stratum, t0, t1, ref_year))
        for std in stds.values():
            result.bias.append(bias_report(table, band, stratum, std, t0, t1))
    return result


def run_pipeline(table: CountsTable, config: PipelineConfig, workers: int = 1) -> dict:
    """Run every analysis for every stratum; returns ``{StratumKey: StratumResult}``.

    Keys come back in display order whatever ``workers`` is.
    """
    config.check(table)
    grouped = collapse(table, config.group_by)
    pooled = None
    if config.sex_standard == "pooled" and "sex" in config.group_by:
        pooled = collapse(table, config.group_by - {"sex"})
    keys = grouped.strata

    def one(key):
        try:
            return _run_stratum(grouped, config, key, pooled)
        except (AgestandError, ValueError) as exc:
            raise PipelineError(key, exc) from exc

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, keys))
    else:
        results = [one(k) for k in keys]
    return dict(zip(keys, results))


__all__ = [
    "BiasReport", "DecompositionResult", "NoRegionError", "PipelineConfig", "PipelineError",
    "StratumResult", "collapse", "parse_standard_token", "resolve_year", "run_pipeline", "strata",
]
