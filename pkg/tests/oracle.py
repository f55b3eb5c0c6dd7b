"""Brute-force reference computations in exact rational arithmetic.

Everything here reads raw (deaths, population) cells straight from the
table's mapping and sums them with Fractions.  Nothing from
agestand.core's arithmetic is reused.
"""
from fractions import Fraction


def cells(table, year, stratum, band=None):
    band = band or table.band
    return [(a, *table.cells[(year, a, stratum)]) for a in range(band.lo, band.hi + 1)]


def crude(table, year, stratum, band=None):
    rows = cells(table, year, stratum, band)
    return Fraction(sum(d for _, d, _ in rows), sum(p for _, _, p in rows))


def mean_age(table, year, stratum, band=None):
    rows = cells(table, year, stratum, band)
    return Fraction(sum(a * p for a, _, p in rows), sum(p for _, _, p in rows))


def rates(table, year, stratum, band=None):
    return {a: Fraction(d, p) for a, d, p in cells(table, year, stratum, band)}


def weighted(rate_map, weights):
    w = {a: Fraction(x) for a, x in weights.items()}
    return sum(w[a] * rate_map[a] for a in rate_map) / sum(w.values())


def uniform(table, year, stratum, band=None):
    r = rates(table, year, stratum, band)
    return sum(r.values()) / len(r)


def year_standardized(table, year, std_year, stratum, band=None):
    pops = {a: p for a, _, p in cells(table, std_year, stratum, band)}
    return weighted(rates(table, year, stratum, band), pops)


def counterfactual(table, year, ref_year, stratum, band=None):
    frozen = rates(table, ref_year, stratum, band)
    pops = {a: p for a, _, p in cells(table, year, stratum, band)}
    return weighted(frozen, pops)


def share(table, t0, t1, ref_year, stratum, band=None):
    dc = crude(table, t1, stratum, band) - crude(table, t0, stratum, band)
    dk = (counterfactual(table, t1, ref_year, stratum, band)
          - counterfactual(table, t0, ref_year, stratum, band))
    return dc, dk, (dk / dc if dc else None)
