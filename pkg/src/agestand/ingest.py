"""Reading and validating count data.

Two input formats are understood:

* the native CSV schema, header ``year,age,sex,region,deaths,population``;
* tab-delimited exports from the public mortality query system, where
  columns are found by header name and a trailing notes block is ignored.

Both parsers return ``(table, report)``.  ``table`` is None whenever
``report.errors`` is nonempty.
"""
from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field
from typing import IO, Iterable, Optional, Sequence, Union

from .core import AgeBand, CountsTable, Sex, StratumKey, describe_key, iter_cell_problems

NATIVE_HEADER = ("year", "age", "sex", "region", "deaths", "population")
DEFAULT_SENTINELS = ("Suppressed", "Not Applicable")

_INT = re.compile(r"[0-9]+\Z")

Source = Union[bytes, str, IO]


@dataclass(frozen=True)
class Issue:
    location: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: [{self.rule}] {self.message}"


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    row_count: int = 0
    strata_found: list = field(default_factory=list)
    year_range: Optional[tuple] = None
    ages_found: set = field(default_factory=set)

    @property
    def ok(self) -> bool:
        return not self.errors

    def error(self, location: str, rule: str, message: str) -> None:
        self.errors.append(Issue(location, rule, message))

    def warn(self, location: str, rule: str, message: str) -> None:
        self.warnings.append(Issue(location, rule, message))

    def summary(self) -> str:
        yr = f"{self.year_range[0]}-{self.year_range[1]}" if self.year_range else "none"
        ages = f"{min(self.ages_found)}-{max(self.ages_found)}" if self.ages_found else "none"
        return (f"{len(self.errors)} errors, {len(self.warnings)} warnings; "
                f"{self.row_count} rows, years {yr}, ages {ages}, "
                f"strata: {', '.join(s.label for s in self.strata_found) or 'none'}")


@dataclass(frozen=True)
class Row:
    """One tokenized input row, before table assembly."""

    location: str
    year: int
    age: int
    stratum: StratumKey
    deaths: int
    population: int


def _text(source: Source) -> str:
    if isinstance(source, bytes):
        data = source
    elif isinstance(source, str):
        return source
    else:
        data = source.read()
        if isinstance(data, str):
            return data
    return data.decode("utf-8-sig")


def _count(value: str) -> Optional[int]:
    value = value.strip()
    return int(value) if _INT.match(value) else None


def validate(rows: Sequence[Row], band: Optional[AgeBand] = None,
             year_range: Optional[tuple] = None,
             report: Optional[ValidationReport] = None) -> ValidationReport:
    """Check candidate rows against every table invariant.

    ``band`` and ``year_range`` default to the span of the rows; when given,
    full coverage of them is required.  Running twice on the same rows adds
    nothing new.
    """
    report = report if report is not None else ValidationReport()
    seen_keys = {(i.location, i.rule, i.message) for i in report.errors}

    def err(loc, rule, msg):
        if (loc, rule, msg) not in seen_keys:
            seen_keys.add((loc, rule, msg))
            report.error(loc, rule, msg)

    report.row_count = max(report.row_count, len(rows))
    if not rows:
        err("input", "nonempty", "no data rows")
        return report
    years = sorted({r.year for r in rows})
    ages = {r.age for r in rows}
    report.ages_found = set(report.ages_found) | ages
    report.strata_found = sorted({r.stratum for r in rows})
    report.year_range = (years[0], years[-1])
    if band is None:
        band = AgeBand(min(ages), max(ages))
    if year_range is not None:
        years = list(range(year_range[0], year_range[1] + 1))

    cells: dict = {}
    first_seen: dict = {}
    for r in rows:
        key = (r.year, r.age, r.stratum)
        if key in first_seen:
            err(r.location, "duplicate-key",
                f"duplicate row for ({r.year}, {r.age}, {r.stratum.label}); "
                f"first seen at {first_seen[key]}")
            continue
        first_seen[key] = r.location
        cells[key] = (r.deaths, r.population)
    for key, rule, msg in iter_cell_problems(cells, years, band):
        err(first_seen.get(key, describe_key(key)), rule, msg)
    return report


def _assemble(rows: list, report: ValidationReport, band=None, year_range=None):
    validate(rows, band, year_range, report)
    if report.errors:
        return None, report
    cells = {(r.year, r.age, r.stratum): (r.deaths, r.population) for r in rows}
    table = CountsTable.from_cells(cells)
    return table, report


def parse_counts_csv(source: Source, allow_extra_columns: bool = False,
                     band: Optional[AgeBand] = None,
                     year_range: Optional[tuple] = None):
    """Parse the native CSV schema into ``(CountsTable | None, ValidationReport)``."""
    report = ValidationReport()
    try:
        text = _text(source)
    except UnicodeDecodeError as exc:
        report.error("input", "utf-8", f"input is not valid UTF-8: {exc}")
        return None, report
    reader = csv.reader(io.StringIO(text, newline=""), strict=True)
    rows: list = []
    try:
        header = next(reader, None)
        if header is None:
            report.error("line 1", "header", "empty input")
            return None, report
        names = [h.strip().lower() for h in header]
        missing = [c for c in NATIVE_HEADER if c not in names]
        if missing:
            report.error("line 1", "header", f"missing columns: {', '.join(missing)}")
            return None, report
        extra = [h for h in names if h not in NATIVE_HEADER]
        if extra:
            if allow_extra_columns:
                report.warn("line 1", "extra-columns", f"ignoring columns: {', '.join(extra)}")
            else:
                report.error("line 1", "extra-columns", f"unexpected columns: {', '.join(extra)}")
                return None, report
        idx = {c: names.index(c) for c in NATIVE_HEADER}
        for fields in reader:
            loc = f"line {reader.line_num}"
            if not fields or fields == [""]:
                continue
            if len(fields) != len(names):
                report.error(loc, "field-count",
                             f"expected {len(names)} fields, got {len(fields)}")
                continue
            row = _native_row(loc, {c: fields[i] for c, i in idx.items()}, report)
            if row is not None:
                rows.append(row)
    except csv.Error as exc:
        report.error(f"line {reader.line_num}", "csv-syntax", str(exc))
        return None, report
    return _assemble(rows, report, band, year_range)


def _native_row(loc: str, f: dict, report: ValidationReport) -> Optional[Row]:
    ok = True
    nums = {}
    for col in ("year", "age", "deaths", "population"):
        v = _count(f[col])
        if v is None:
            rule = "single-year-age" if col == "age" else "integer"
            report.error(loc, rule, f"{col} must be a plain nonnegative integer, got {f[col]!r}")
            ok = False
        nums[col] = v
    try:
        sex = Sex.parse(f["sex"])
    except ValueError as exc:
        report.error(loc, "sex", str(exc))
        ok = False
    region = f["region"].strip() or None
    if not ok:
        return None
    return Row(loc, nums["year"], nums["age"], StratumKey(sex, region),
               nums["deaths"], nums["population"])


# --------------------------------------------------------------------------
# export adapter

_EXPORT_COLUMNS = {
    # column: candidate header names, best match first
    "year": ("year", "year code"),
    "age": ("single-year ages code", "single-year age code", "age code", "age"),
    "sex": ("gender", "sex", "gender code", "sex code"),
    "region": ("census region", "region", "census region code"),
    "deaths": ("deaths",),
    "population": ("population",),
}


def match_columns(header: Sequence[str]) -> dict:
    """Map native column names to indices in an export header.

    Matching is case-insensitive on stripped names; ``sex`` and ``region``
    may be absent.  Raises KeyError naming the first required column not
    found.
    """
    names = [h.strip().strip('"').lower() for h in header]
    found = {}
    for col, candidates in _EXPORT_COLUMNS.items():
        for cand in candidates:
            if cand in names:
                found[col] = names.index(cand)
                break
        else:
            if col not in ("sex", "region"):
                raise KeyError(col)
    return found


_REGION_PREFIX = re.compile(r"^census region \d+\s*:\s*", re.I)


def normalize_region(value: str) -> Optional[str]:
    value = _REGION_PREFIX.sub("", value.strip()).strip().lower()
    return value or None


def _is_notes_start(fields: list) -> bool:
    first = fields[0].strip() if fields else ""
    lone = sum(1 for f in fields if f.strip()) == 1
    return first.startswith("---") or (lone and first.rstrip(":").lower() == "notes")


def parse_wonder_export(source: Source, sentinels: Iterable[str] = DEFAULT_SENTINELS,
                        band: Optional[AgeBand] = None, year_range: Optional[tuple] = None):
    """Parse a tab-delimited query export into ``(CountsTable | None, report)``.

    Rows whose deaths or population equal a sentinel token are dropped with
    a warning, so suppression that punches a hole in the band surfaces as a
    rectangularity error rather than a silent zero.  Subtotal rows (a
    ``Total`` marker in the notes column) are skipped.
    """
    sentinels = {s.strip().lower() for s in sentinels}
    report = ValidationReport()
    try:
        text = _text(source)
    except UnicodeDecodeError as exc:
        report.error("input", "utf-8", f"input is not valid UTF-8: {exc}")
        return None, report
    reader = csv.reader(io.StringIO(text, newline=""), delimiter="\t")
    header = None
    rows: list = []
    for fields in reader:
        loc = f"line {reader.line_num}"
        if not any(f.strip() for f in fields):
            continue
        if header is None:
            header = fields
            try:
                cols = match_columns(header)
            except KeyError as exc:
                report.error(loc, "header", f"no column found for {exc.args[0]!r}")
                return None, report
            names = [h.strip().lower() for h in header]
            notes_idx = names.index("notes") if "notes" in names else None
            continue
        if _is_notes_start(fields):
            break
        if notes_idx is not None and notes_idx < len(fields) and \
                fields[notes_idx].strip().lower() == "total":
            continue
        if len(fields) < len(header):
            report.error(loc, "field-count",
                         f"expected {len(header)} fields, got {len(fields)}")
            continue
        get = {c: fields[i].strip() for c, i in cols.items()}
        suppressed = [c for c in ("deaths", "population") if get[c].lower() in sentinels]
        if suppressed:
            report.warn(loc, "suppressed",
                        f"{' and '.join(suppressed)} suppressed ({get[suppressed[0]]}); row dropped")
            continue
        if _count(get["age"]) is None:
            report.error(loc, "age-code", f"age code {get['age']!r} is not an integer")
            continue
        native = {
            "year": get["year"], "age": get["age"],
            "sex": get.get("sex", "all"), "region": normalize_region(get.get("region", "")) or "",
            "deaths": get["deaths"], "population": get["population"],
        }
        row = _native_row(loc, native, report)
        if row is not None:
            rows.append(row)
    if header is None:
        report.error("line 1", "header", "empty input")
        return None, report
    return _assemble(rows, report, band, year_range)


def sniff_format(data: bytes) -> str:
    first = data.lstrip().split(b"\n", 1)[0]
    return "wonder" if b"\t" in first else "csv"


# --------------------------------------------------------------------------
# output


def write_counts_csv(table: CountsTable, out: IO[str]) -> None:
    """Write ``table`` in the native schema, LF line endings, sorted rows."""
    w = csv.writer(out, lineterminator="\n")
    w.writerow(NATIVE_HEADER)
    for (year, age, s), (d, p) in sorted(table.cells.items(),
                                         key=lambda kv: (kv[0][2].sort_key(), kv[0][0], kv[0][1])):
        w.writerow([year, age, s.sex.value, s.region or "", d, p])


def dumps_counts_csv(table: CountsTable) -> str:
    buf = io.StringIO()
    write_counts_csv(table, buf)
    return buf.getvalue()
