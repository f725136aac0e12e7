#!/usr/bin/env python3
"""Cross-validate the finite-element path against the trigonometric
Galerkin solver on the Dirichlet manufactured case."""

import sys
from pathlib import Path

from nlgs.cli import main

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/oracle")

code = main(["oracle", "--case", "dirichlet1", "--levels", "3",
             "--out", str(OUT)])
if code != 0:
    sys.exit(code)
print((OUT / "oracle.csv").read_text())
