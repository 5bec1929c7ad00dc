"""Max estimate ratios over seeded ensembles as the resolution doubles."""

import argparse
import os

from hons import bourgain as B
from hons.checks import RESTRICTED


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ensemble-size", type=int, default=200)
    ap.add_argument("--seed", type=int, default=13)
    ap.add_argument("--trilinear-n", type=int, nargs="+", default=[32, 64])
    ap.add_argument("--linear-n", type=int, nargs="+", default=[32, 64, 128])
    args = ap.parse_args()
    cfg = B.EstimateConfig(ensemble_size=args.ensemble_size, seed=args.seed)
    workers = int(os.environ.get("HONS_THREADS", "1"))
    lin = B.linear_bound_experiment(cfg, RESTRICTED, tuple(args.linear_n))
    print("experiment,N,max_ratio,median_ratio")
    for n in lin.n_values:
        print(f"linear,{n},{lin.max_ratio(n):.6g},{lin.median_ratio(n):.6g}")
    tri = B.trilinear_ratio_experiment(cfg, RESTRICTED, tuple(args.trilinear_n), workers=workers)
    for n in tri.n_values:
        print(f"trilinear_l1,{n},{tri.max_ratio(n, 'l1'):.6g},")
        print(f"trilinear_l2,{n},{tri.max_ratio(n, 'l2'):.6g},")
    print(f"# growth: linear {lin.growth():.4f}, trilinear l1 {tri.growth('l1'):.4f}, l2 {tri.growth('l2'):.4f}")
    print(f"# scale deviation {tri.scale_deviation:.2e}")


if __name__ == "__main__":
    main()
