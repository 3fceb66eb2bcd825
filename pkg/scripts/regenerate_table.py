"""Recompute the figure-of-merit comparison table from the bundled records.

Prints computed against tabulated values and writes table.csv next to the
given output directory (default: out/table).
"""

import sys
from pathlib import Path

from omx.cli import run

if __name__ == "__main__":
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/table")
    run("table", Path(__file__).resolve().parents[1] / "configs" / "table.json", out)
