"""Measured Picard contraction ratio as a function of lambda, including the uncertified range."""

import argparse

from asymvortex.errors import ConvergenceError
from asymvortex.field_core import SpectralConfig
from asymvortex.vortex import picard_solve


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alphas", type=float, nargs="+", default=[1.0, 10.0, 100.0])
    parser.add_argument("--lambdas", type=float, nargs="+", default=[0.05, 0.1, 0.2, 0.3, 0.5, 0.75])
    args = parser.parse_args()
    cfg = SpectralConfig(n_modes=24, picard_max_iter=400)
    for alpha in args.alphas:
        for lam in args.lambdas:
            try:
                sol = picard_solve(alpha, lam, cfg)
                rate = sol.summary()["contraction_max"]
                print(f"alpha={alpha:7.1f} lambda={lam:5.2f} iterations={sol.iterations:4d} "
                      f"contraction={rate:.3f} certified={sol.certified}")
            except ConvergenceError as exc:
                print(f"alpha={alpha:7.1f} lambda={lam:5.2f} no convergence (last step {exc.history[-1]:.2e})")


if __name__ == "__main__":
    main()
