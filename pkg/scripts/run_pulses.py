#!/usr/bin/env python3
"""Steady pulse suite: dispersal rates {3, 5, 7, 9} plus the classical
reference, then the wide-domain rerun of the double-peak case.

Writes per-run profiles and traces plus a manifest with the nodal peak
classification of each steady profile.
"""

import sys
from pathlib import Path

from nlgs.cli import main

OUT = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("out/pulses")

code = main(["pulse", "--out", str(OUT / "base")])
if code != 0:
    sys.exit(code)

# the a = 3 profile develops flanks two cells wide at the base mesh; the
# wide-domain comparison runs both domains once refined
for label, omega in (("a3_refined", None), ("a3_wide", ("-50", "50"))):
    args = ["pulse", "--a", "3", "--h", "0.025", "--no-local",
            "--out", str(OUT / label)]
    if omega:
        args += ["--omega", *omega]
    code = main(args)
    if code != 0:
        sys.exit(code)

for manifest in sorted(OUT.glob("*/manifest.ini")):
    print(f"== {manifest.parent.name}")
    in_results = False
    for line in manifest.read_text().splitlines():
        if line.startswith("[results]"):
            in_results = True
        elif line.startswith("[") and in_results:
            break
        elif in_results and line.strip():
            print("  " + line)
