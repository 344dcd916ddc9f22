"""Regenerate the canonical fixture documents under tests/fixtures/.

Run from the repository root: python scripts/build_fixtures.py
"""
from __future__ import annotations

import pathlib
import sys

ROOT = pathlib.Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tests"))

from concernkit import parse_theory, serialize_theory  # noqa: E402
from fixture_defs import ALL_FIXTURES  # noqa: E402


def main() -> None:
    out_dir = ROOT / "tests" / "fixtures"
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, build in ALL_FIXTURES.items():
        text = serialize_theory(build())
        parse_theory(text)  # refuse to write a fixture that does not validate
        path = out_dir / f"{name}.cpst.json"
        path.write_text(text, encoding="utf-8")
        print(f"wrote {path.relative_to(ROOT)} ({len(text)} bytes)")


if __name__ == "__main__":
    main()
