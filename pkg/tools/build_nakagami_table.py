"""Regenerate src/rigidcrlb/data/nakagami_oracle.json.

Usage: python tools/build_nakagami_table.py
"""
import json
from pathlib import Path

import numpy as np

from rigidcrlb.intensity import NAKAGAMI_TABLE, build_nakagami_table

OUT = Path(__file__).resolve().parents[1] / "src" / "rigidcrlb" / "data" / NAKAGAMI_TABLE


def main():
    grid = np.arange(0.5, 20.0 + 1e-9, 0.25)
    table = build_nakagami_table(grid)
    OUT.write_text(json.dumps(table, indent=1) + "\n")
    print(f"wrote {len(grid)} grid points to {OUT}")


if __name__ == "__main__":
    main()
