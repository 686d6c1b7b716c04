"""Distance ||w_alpha - w_inf||_Y for a geometric sequence of circulations.

Successive ratios approach 4 (the 1/alpha rate) only once alpha is in the thousands.
"""

import argparse

import numpy as np

from asymvortex.field_core import SpectralConfig, make_grid, norm_Y
from asymvortex.vortex import compute_w_alpha
from asymvortex.winfty import compute_w_infty


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alpha0", type=float, default=20.0)
    parser.add_argument("--factor", type=float, default=4.0)
    parser.add_argument("--count", type=int, default=6)
    parser.add_argument("--nr", type=int, default=128)
    parser.add_argument("--nmodes", type=int, default=12)
    args = parser.parse_args()
    cfg = SpectralConfig(n_r=args.nr, n_modes=args.nmodes)
    w_inf = compute_w_infty(make_grid(cfg), cfg.n_modes)[1]
    print(f"||w_inf||_Y = {norm_Y(w_inf):.4f}")
    alphas = args.alpha0 * args.factor ** np.arange(args.count)
    prev = None
    for alpha in alphas:
        d = norm_Y(compute_w_alpha(alpha, cfg) - w_inf)
        ratio = "" if prev is None else f"{prev / d:8.3f}"
        print(f"alpha={alpha:10.1f}  distance={d:12.5e}  {ratio}")
        prev = d


if __name__ == "__main__":
    main()
