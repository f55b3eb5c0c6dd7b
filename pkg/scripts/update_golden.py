"""Regenerate tests/golden/*.svg after an intentional rendering change."""
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "tests"))

from chart_fixtures import golden_specs  # noqa: E402

from agestand.svg import render_svg  # noqa: E402

for name, spec in golden_specs().items():
    path = ROOT / "tests" / "golden" / name
    path.write_bytes(render_svg(spec).encode("utf-8"))
    print(f"wrote {path.relative_to(ROOT)}")
