"""Write the C_Dmin / C_Dmax curves and the Rayleigh flat-plate curve as CSV.

Outputs ``bounds.csv`` and ``flat_plate.csv`` in the chosen directory, plus a
count of flat-plate points lying between the bounds.
"""

import argparse
from pathlib import Path

from cavitybounds.bounds import (
    Band,
    bound_curve,
    bounds_csv_text,
    classify_point,
    flat_plate_csv_text,
    flat_plate_curve,
)


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--n", type=int, default=100, help="points on the bound curves")
    parser.add_argument("--n-plate", type=int, default=50, help="incidence angles on the flat-plate curve")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--outdir", type=Path, default=Path("results"))
    args = parser.parse_args()

    args.outdir.mkdir(parents=True, exist_ok=True)
    bounds = bound_curve(args.n, workers=args.workers)
    plate = flat_plate_curve(args.n_plate)
    (args.outdir / "bounds.csv").write_text(bounds_csv_text(bounds), newline="\n")
    (args.outdir / "flat_plate.csv").write_text(flat_plate_csv_text(plate), newline="\n")
    inside = sum(classify_point(p.c_l, p.c_d) is Band.BETWEEN for p in plate)
    print(f"wrote {args.outdir / 'bounds.csv'} ({len(bounds)} rows) and {args.outdir / 'flat_plate.csv'}")
    print(f"flat plate: {inside}/{len(plate)} points between C_Dmin and C_Dmax")


if __name__ == "__main__":
    main()
