"""``agestand`` command line.

Exit codes: 0 success, 1 validation or domain error, 2 I/O or usage error.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import os
import sys
from typing import Optional, Sequence

from . import ingest, synth
from .core import AgeBand, AgestandError, CountsTable, per100k
from .stratify import PipelineConfig, parse_standard_token, run_pipeline
from .svg import ChartSpec, render_svg

EXIT_OK, EXIT_DOMAIN, EXIT_IO = 0, 1, 2


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_DOMAIN):
        super().__init__(message)
        self.code = code


def fmt_per100k(rate: float) -> str:
    return f"{per100k(rate):.1f}"


def fmt_fraction(rate: float) -> str:
    return format(rate, ".8g")


def _colour(text: str, code: str, stream) -> str:
    if os.environ.get("AGESTAND_NO_COLOR") or not getattr(stream, "isatty", lambda: False)():
        return text
    return f"\x1b[{code}m{text}\x1b[0m"


# --------------------------------------------------------------------------
# I/O helpers


def _read_bytes(path: str) -> bytes:
    try:
        if path == "-":
            return sys.stdin.buffer.read()
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror or exc}", EXIT_IO) from None


def _write_text(path: str, text: str) -> None:
    try:
        if path == "-":
            sys.stdout.write(text)
            sys.stdout.flush()
            return
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc.strerror or exc}", EXIT_IO) from None


def _parse_input(args) -> tuple:
    data = _read_bytes(args.input)
    fmt = args.format if args.format != "auto" else ingest.sniff_format(data)
    if fmt == "wonder":
        sentinels = args.sentinel or ingest.DEFAULT_SENTINELS
        return ingest.parse_wonder_export(data, sentinels=sentinels)
    return ingest.parse_counts_csv(data, allow_extra_columns=args.allow_extra_columns)


def _load_table(args) -> CountsTable:
    table, report = _parse_input(args)
    if table is None:
        lines = [f"{args.input}: {report.summary()}"] + [f"error: {e}" for e in report.errors]
        raise CliError("\n".join(lines))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    return table


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _group_by(text: Optional[str]) -> frozenset:
    if not text:
        return frozenset()
    return frozenset(p.strip().lower() for p in text.split(",") if p.strip())


def _band(args, table: CountsTable) -> AgeBand:
    return AgeBand.parse(args.band) if args.band else table.band


def _config(args, table: CountsTable, **kw) -> PipelineConfig:
    try:
        return PipelineConfig(band=_band(args, table), group_by=_group_by(args.group_by), **kw)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _plot(args, title: str, series: list, unit: str) -> None:
    if args.plot:
        if args.fraction and unit == "per100k":
            unit = "fraction"
        _write_text(args.plot, render_svg(ChartSpec(title, series, unit)))


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args) -> int:
    _, report = _parse_input(args)
    out = sys.stdout
    lines = [report.summary()]
    lines += [f"{_colour('error', '31', out)}: {e}" for e in report.errors]
    lines += [f"{_colour('warning', '33', out)}: {w}" for w in report.warnings]
    out.write("\n".join(lines) + "\n")
    return EXIT_OK if report.ok else EXIT_DOMAIN


def cmd_crude(args) -> int:
    table = _load_table(args)
    results = run_pipeline(table, _config(args, table))
    rows, series = [], []
    for key, res in results.items():
        for year, r in res.crude.points.items():
            rows.append([key.label, year, fmt_per100k(r), fmt_fraction(r)])
        series.append((key.label, res.crude))
    _write_text(args.out, _csv_text(["stratum", "year", "rate_per100k", "rate_fraction"], rows))
    _plot(args, "Crude death rate", series, "per100k")
    return EXIT_OK


def cmd_meanage(args) -> int:
    table = _load_table(args)
    results = run_pipeline(table, _config(args, table))
    rows, series = [], []
    for key, res in results.items():
        for year, a in res.mean_age.items():
            rows.append([key.label, year, f"{a:.4f}"])
        series.append((key.label, res.mean_age))
    _write_text(args.out, _csv_text(["stratum", "year", "mean_age"], rows))
    _plot(args, "Mean age", series, "years")
    return EXIT_OK


def _standards(tokens: Optional[list]) -> tuple:
    try:
        return tuple(parse_standard_token(t) for t in (tokens or ["uniform"]))
    except ValueError as exc:
        raise CliError(f"{exc}\nusage hint: --standard uniform | first | last | year:YYYY "
                       "(repeatable)") from None


def cmd_adjust(args) -> int:
    table = _load_table(args)
    config = _config(args, table, standards=_standards(args.standard),
                     sex_standard=args.sex_standard)
    results = run_pipeline(table, config)
    rows, series = [], []
    for key, res in results.items():
        for desc, s in res.adjusted.items():
            for year, r in s.points.items():
                rows.append([key.label, desc, year, fmt_per100k(r), fmt_fraction(r)])
            series.append((f"{key.label} {desc}", s))
    _write_text(args.out, _csv_text(
        ["stratum", "standard", "year", "rate_per100k", "rate_fraction"], rows))
    _plot(args, "Age-adjusted death rate", series, "per100k")
    return EXIT_OK


def cmd_counterfactual(args) -> int:
    table = _load_table(args)
    results = run_pipeline(table, _config(args, table, ref_year=args.ref_year))
    rows, series = [], []
    for key, res in results.items():
        cf = res.counterfactual
        ref = cf.adjustment.ref_year
        for year in res.crude.years:
            c, k = res.crude[year], cf[year]
            rows.append([key.label, ref, year, fmt_per100k(c), fmt_per100k(k),
                         fmt_fraction(c), fmt_fraction(k)])
        series.append((f"{key.label} crude", res.crude))
        series.append((f"{key.label} rates fixed at {ref}", cf))
    _write_text(args.out, _csv_text(
        ["stratum", "ref_year", "year", "crude_per100k", "counterfactual_per100k",
         "crude_fraction", "counterfactual_fraction"], rows))
    _plot(args, "Crude rate and composition-only counterfactual", series, "per100k")
    return EXIT_OK


def cmd_decompose(args) -> int:
    table = _load_table(args)
    config = _config(args, table, standards=_standards(args.standard), ref_year=args.ref_year,
                     intervals=[(args.t0, args.t1)], sex_standard=args.sex_standard)
    results = run_pipeline(table, config)
    unit = "fraction" if args.fraction else "per100k"
    delta = fmt_fraction if args.fraction else (lambda x: f"{per100k(x):.4f}")
    rows = []
    for key, res in results.items():
        for d in res.decompositions:
            share = "undefined" if d.share is None else format(d.share, ".12g")
            for b in res.bias:
                if b.interval != d.interval:
                    continue
                rows.append([key.label, d.t0, d.t1, d.ref_year, delta(d.crude_change),
                             delta(d.composition_change), share, b.standard,
                             f"{b.crude_trend_pct:.6f}", f"{b.adjusted_trend_pct:.6f}",
                             f"{b.bias_pct_points:.6f}"])
    _write_text(args.out, _csv_text(
        ["stratum", "t0", "t1", "ref_year", f"crude_change_{unit}",
         f"composition_change_{unit}", "share", "standard", "crude_trend_pct",
         "adjusted_trend_pct", "bias_pct_points"], rows))
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.scenario:
        raw = _read_bytes(args.scenario)
        try:
            scenario = synth.loads_scenario(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise CliError(f"{args.scenario}: {exc}") from None
    else:
        scenario = synth.PRESETS[args.preset]()
    if args.exact:
        scenario = dataclasses.replace(scenario, deaths="exact")
    _write_text(args.out, ingest.dumps_counts_csv(synth.synth_table(scenario)))
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="agestand",
                                description="Crude and age-standardized mortality trends.")
    sub = p.add_subparsers(dest="command", required=True)

    inp = argparse.ArgumentParser(add_help=False)
    inp.add_argument("input", nargs="?", default="-", help="counts file, '-' for stdin")
    inp.add_argument("--format", choices=("auto", "csv", "wonder"), default="auto")
    inp.add_argument("--sentinel", action="append",
                     help="token marking a suppressed count in exports (repeatable)")
    inp.add_argument("--allow-extra-columns", action="store_true")

    ana = argparse.ArgumentParser(add_help=False)
    ana.add_argument("--band", help="age band lo-hi (default: all ages in the input)")
    ana.add_argument("--group-by", default="", help="comma list drawn from sex,region")
    ana.add_argument("--out", default="-", help="CSV output path, '-' for stdout")
    ana.add_argument("--fraction", action="store_true",
                     help="report deltas and plot in fractions instead of per 100,000")

    plot = argparse.ArgumentParser(add_help=False)
    plot.add_argument("--plot", help="write an SVG chart here")

    std = argparse.ArgumentParser(add_help=False)
    std.add_argument("--standard", action="append",
                     help="uniform | first | last | year:YYYY (repeatable)")
    std.add_argument("--sex-standard", choices=("own", "pooled"), default="own",
                     help="year-based standards from each sex's own or the pooled population")

    s = sub.add_parser("validate", parents=[inp], help="check an input file")
    s.set_defaults(func=cmd_validate)
    s = sub.add_parser("crude", parents=[inp, ana, plot], help="crude rate series")
    s.set_defaults(func=cmd_crude)
    s = sub.add_parser("meanage", parents=[inp, ana, plot], help="mean age series")
    s.set_defaults(func=cmd_meanage)
    s = sub.add_parser("adjust", parents=[inp, ana, plot, std], help="age-standardized series")
    s.set_defaults(func=cmd_adjust)
    s = sub.add_parser("counterfactual", parents=[inp, ana, plot],
                       help="crude series beside rates frozen at a reference year")
    s.add_argument("--ref-year", default="last")
    s.set_defaults(func=cmd_counterfactual)
    s = sub.add_parser("decompose", parents=[inp, ana, std],
                       help="composition share of the crude change and trend bias")
    s.add_argument("--from", dest="t0", default="first")
    s.add_argument("--to", dest="t1", default="last")
    s.add_argument("--ref-year", default="last")
    s.set_defaults(func=cmd_decompose)
    s = sub.add_parser("synth", help="write a synthetic counts table")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--scenario", help="scenario config file")
    src.add_argument("--preset", choices=sorted(synth.PRESETS))
    s.add_argument("--exact", action="store_true", help="scale counts instead of rounding deaths")
    s.add_argument("--out", default="-")
    s.set_defaults(func=cmd_synth)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"agestand: {exc}", file=sys.stderr)
        return exc.code
    except (AgestandError, ValueError) as exc:
        print(f"agestand: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
