"""Omega_+ and Omega_- of the limiting profile across grid resolutions and truncation radii."""

import argparse

from asymvortex.field_core import make_grid
from asymvortex.winfty import compute_w_infty


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--nr", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--rmax", type=float, nargs="+", default=[12.0, 16.0, 24.0])
    args = parser.parse_args()
    print(f"{'r_max':>6} {'n_r':>5} {'Omega_plus':>14} {'Omega_minus':>14} {'residual':>10}")
    for r_max in args.rmax:
        for n_r in args.nr:
            profile, _ = compute_w_infty(make_grid(r_max=r_max, n_r=n_r))
            print(f"{r_max:6.1f} {n_r:5d} {profile.Omega_plus:14.10f} {profile.Omega_minus:14.10f} "
                  f"{profile.residual:10.2e}")


if __name__ == "__main__":
    main()
