"""Trend-shape comparisons and the checks run against real export data."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

from .core import CountsTable, RateSeries, Sex, StratumKey, adjusted_series, uniform_standard
from .decompose import bias_report, decompose_change
from .stratify import collapse


def step_signs(series, tol: float = 1e-12) -> list:
    pts = series.points if isinstance(series, RateSeries) else series
    values = [v for _, v in sorted(pts.items())]
    out = []
    for a, b in zip(values, values[1:]):
        d = b - a
        out.append(0 if abs(d) <= tol else (1 if d > 0 else -1))
    return out


def sign_agreement(a, b, tol: float = 1e-12) -> float:
    """Fraction of year-over-year steps on which two series move the same way."""
    sa, sb = step_signs(a, tol), step_signs(b, tol)
    if len(sa) != len(sb):
        raise ValueError("series cover different years")
    if not sa:
        return 1.0
    return sum(x == y for x, y in zip(sa, sb)) / len(sa)


def min_pairwise_agreement(series: Sequence, tol: float = 1e-12) -> float:
    return min((sign_agreement(a, b, tol) for a, b in combinations(series, 2)), default=1.0)


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str


def _flat_after_rise(s: Mapping[int, float], start: int, mid: int, end: int) -> tuple:
    rise = s[mid] - s[start]
    later = s[end] - s[mid]
    return rise > 0 and abs(later) < 0.25 * rise, rise, later


def export_checks(table: CountsTable, start: int = 1999, mid: int = 2005, end: int = 2013) -> list:
    """Compare a real 45-54 export with the published trend claims.

    Checks: adjusted series rises then flattens; composition share about
    one half; crude-vs-adjusted bias about 5 points; women rising, men's
    early rise mostly undone.
    """
    band = table.band
    std = uniform_standard(band)
    pooled = collapse(table, ())
    key = StratumKey()
    adj = adjusted_series(pooled, band, key, std).points
    checks = []

    ok, rise, later = _flat_after_rise(adj, start, mid, end)
    checks.append(Check("adjusted rises then flat", ok,
                        f"rise {rise * 1e5:.1f}, later change {later * 1e5:.1f} per 100k"))

    d = decompose_change(pooled, band, key, start, end, ref_year=end)
    share_ok = d.share is not None and abs(d.share - 0.5) <= 0.15
    checks.append(Check("composition share about half", share_ok, f"share {d.share}"))

    b = bias_report(pooled, band, key, std, start, end)
    checks.append(Check("trend bias about 5 points", abs(b.bias_pct_points - 5) <= 3,
                        f"bias {b.bias_pct_points:.2f} pct points"))

    by_sex = collapse(table, {"sex"})
    f_key, m_key = StratumKey(Sex.FEMALE), StratumKey(Sex.MALE)
    if {f_key, m_key} <= set(by_sex.strata):
        f = adjusted_series(by_sex, band, f_key, std).points
        m = adjusted_series(by_sex, band, m_key, std).points
        m_rise, m_fall = m[mid] - m[start], m[mid] - m[end]
        ok = f[end] > f[start] and m_rise > 0 and m_fall >= 0.5 * m_rise
        detail = (f"women {f[start] * 1e5:.1f}->{f[end] * 1e5:.1f}; men rise {m_rise * 1e5:.1f}, "
                  f"then fall {m_fall * 1e5:.1f} per 100k")
        checks.append(Check("women up, men reversed", ok, detail))
    else:
        checks.append(Check("women up, men reversed", False, "export has no female/male rows"))
    return checks
