"""Tour of the two solution kernels Z and Y in one dimension.

Builds both kernels for a few fractional orders, checks their masses,
fits the L_p decay slopes and compares the Mittag-Leffler route with the
subordination route. Writes the kernel slices to kernels_tour.csv.
"""

import argparse
import csv

import numpy as np

from fracosgood.grid import Grid
from fracosgood.kernels import (
    KernelSet,
    kernel_Y,
    kernel_Z,
    mass,
    validate_lp_laws,
    y_mass_target,
)
from fracosgood.symbol import SpectralMeasure, Symbol


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--out", default="kernels_tour.csv")
    args = ap.parse_args()

    sym = Symbol(args.beta, SpectralMeasure.symmetric())
    grid = Grid(1, 1 << 16, 4000.0)
    x = grid.x
    keep = np.abs(x) <= 5.0
    columns = {"x": x[keep]}

    print(f"beta = {args.beta}, t = {args.t}")
    for alpha in (0.3, 0.5, 0.8):
        ks = KernelSet(alpha, sym, grid)
        Z = kernel_Z(ks, args.t)
        Y = kernel_Y(ks, args.t)
        Zsub = kernel_Z(ks, args.t, route="subordination")
        gap = np.max(np.abs(Z.values - Zsub.values)) / Z.values.max()
        print(f"alpha={alpha}: mass Z - 1 = {mass(Z) - 1:+.1e}, "
              f"mass Y / g_alpha - 1 = {mass(Y) / y_mass_target(alpha, args.t) - 1:+.1e}, "
              f"route gap = {gap:.1e}")

        # slopes of log ||K(t)||_2 against log t; this grid is coarse, the acceptance suite uses 2^19 points
        for kernel in ("Z", "Y"):
            rep = validate_lp_laws(ks, 2.0, np.geomspace(1e-2, 1.0, 5), kernel)
            print(f"    ||{kernel}(t)||_2 slope {rep.slope:+.4f} (predicted {rep.predicted:+.4f})")
        columns[f"Z_{alpha}"] = Z.values[keep]
        columns[f"Y_{alpha}"] = Y.values[keep]

    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(zip(*columns.values()))
    print(f"kernel slices written to {args.out}")


if __name__ == "__main__":
    main()
