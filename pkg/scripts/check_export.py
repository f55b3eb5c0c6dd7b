"""Run the published-trend checks against a real 45-54 export.

Usage: python scripts/check_export.py EXPORT.txt
Exit status is 0 only if every check passes.
"""
import sys
from pathlib import Path

from agestand.diagnostics import export_checks
from agestand.ingest import parse_counts_csv, parse_wonder_export, sniff_format


def main(path):
    data = Path(path).read_bytes()
    parse = parse_wonder_export if sniff_format(data) == "wonder" else parse_counts_csv
    table, report = parse(data)
    if table is None:
        for e in report.errors:
            print(f"error: {e}", file=sys.stderr)
        return 1
    checks = export_checks(table)
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    return 0 if all(c.passed for c in checks) else 1


if __name__ == "__main__":
    if len(sys.argv) != 2:
        sys.exit(__doc__)
    sys.exit(main(sys.argv[1]))
