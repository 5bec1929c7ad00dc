"""Run every acceptance check and print one line per criterion; optionally write a CSV."""

import argparse
import csv
import time

from hons import checks as C

CRITERIA = [
    (1, C.linear_unitarity),
    (2, C.resonance_identity),
    (3, C.plane_wave_reproduction),
    (4, C.integrator_order),
    (5, C.i1_conservation),
    (6, C.energy_conservation),
    (6, C.displayed_i2_conservation),
    (7, C.derivative_identities),
    (8, C.reduction_consistency),
    (9, C.rl_equivalence),
    (10, C.picard_contraction),
    (11, C.lipschitz_dependence),
    (12, C.g_equivalence),
    (13, C.estimate_experiments),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--csv", default=None, help="write criterion,name,value,threshold,passed,seconds")
    args = ap.parse_args()
    rows = []
    for number, fn in CRITERIA:
        t0 = time.perf_counter()
        res = fn()
        dt = time.perf_counter() - t0
        print(f"criterion {number:2d}: {res.line()}  ({dt:.1f}s)", flush=True)
        rows.append((number, res.name, "%.17g" % res.value, "%.17g" % res.threshold, res.passed, f"{dt:.2f}"))
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["criterion", "name", "value", "threshold", "passed", "seconds"])
            wr.writerows(rows)


if __name__ == "__main__":
    main()
