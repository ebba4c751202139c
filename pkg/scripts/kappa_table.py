"""Print kappa_max and kappa_min at the tabulated lift coefficients next to the reference values."""

import argparse
import math
import time

from cavitybounds.bounds import bound_points

C_L = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 2 / math.e]
REFERENCE_MAX = [224.88, 99.1015, 57.0649, 35.9197, 23.0608, 14.1997, 7.0821, math.pi]
REFERENCE_MIN = [0.107495, 0.219695, 0.342541, 0.48536, 0.666406, 0.933793, 1.53824, math.pi]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workers", type=int, default=1)
    args = parser.parse_args()

    t0 = time.perf_counter()
    points = bound_points(C_L, workers=args.workers)
    print(f"{'C_L':>8} {'kappa_max':>12} {'reference':>10} {'rel err':>9} {'kappa_min':>12} {'reference':>10} {'rel err':>9}")
    print(f"{0:>8g} {'inf':>12} {'inf':>10} {'':>9} {0:>12g} {0:>10g}")
    for p, kmax, kmin in zip(points, REFERENCE_MAX, REFERENCE_MIN):
        print(
            f"{p.c_l:>8.4g} {p.kappa_max:>12.7g} {kmax:>10.6g} {abs(p.kappa_max / kmax - 1):>9.1e}"
            f" {p.kappa_min:>12.7g} {kmin:>10.6g} {abs(p.kappa_min / kmin - 1):>9.1e}"
        )
    print(f"elapsed {time.perf_counter() - t0:.2f} s")


if __name__ == "__main__":
    main()
