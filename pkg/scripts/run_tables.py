#!/usr/bin/env python3
"""Run both manufactured-solution refinement studies and print the tables."""

import sys
from pathlib import Path

from nlgs.cli import main

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/tables")

for case in ("dirichlet1", "neumann1"):
    code = main(["converge", "--case", case, "--levels", "5",
                 "--out", str(OUT / case)])
    if code != 0:
        sys.exit(code)
    print(f"== {case}")
    print((OUT / case / "convergence.csv").read_text())
