#!/usr/bin/env python3
"""Run the four bundled presets and collect trajectories plus reports.

Outputs land under out/<preset>/ as trajectory.csv, allocation.txt and
verification.txt.  The oscillation demo is expected to fail its
convergence monitor (that is its point), so its exit status is not
treated as an error here.

Usage: python scripts/reproduce_case_studies.py [--out DIR]
"""

import argparse
import sys
import time

from flowreg import cli
from flowreg.scenario import preset_names

EXPECTED_FAILING_MONITORS = {"oscillation_demo"}


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="out")
    args = ap.parse_args()

    bad = []
    for name in preset_names():
        t0 = time.time()
        code = cli.main(["run", name, "--out", f"{args.out}/{name}"])
        took = time.time() - t0
        verdict = "ok" if code == 0 else f"exit {code}"
        if code != 0 and name in EXPECTED_FAILING_MONITORS:
            verdict += " (expected: sustained oscillation)"
        elif code != 0:
            bad.append(name)
        print(f"--- {name}: {verdict} in {took:.1f}s")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
