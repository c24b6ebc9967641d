#!/usr/bin/env python3
"""Run the built-in fixtures against their known maximal correlations.

Writes bench.csv next to the current directory and echoes the table. The
classical values: uniform disc 1/3, |x|^p + |y|^p < 1 ball 1/(p+1),
four-point lattice 1, single-coefficient uniform model |rho_1|.
"""

import sys

from lancaster_lab.cli import main as cli_main


def main() -> int:
    out = "bench.csv"
    code = cli_main(["bench", "--out", out])
    if code != 0:
        return code
    with open(out, "r", encoding="utf-8") as handle:
        sys.stdout.write(handle.read())
    print(f"\nwrote {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
