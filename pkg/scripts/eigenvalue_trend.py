"""Rightmost eigenvalues of the linearized operator as the circulation grows (reported, not asserted)."""

import argparse

from asymvortex.field_core import SpectralConfig
from asymvortex.stability import leading_eigenvalue
from asymvortex.vortex import picard_solve


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--alphas", type=float, nargs="+", default=[0.0, 1.0, 10.0, 100.0])
    parser.add_argument("--lam", type=float, default=0.05)
    parser.add_argument("--k", type=int, default=6)
    args = parser.parse_args()
    cfg = SpectralConfig()
    for alpha in args.alphas:
        vals = leading_eigenvalue(picard_solve(alpha, args.lam, cfg), k=args.k)
        text = "  ".join(f"{z.real:+.4f}{z.imag:+.4f}i" for z in vals)
        print(f"alpha={alpha:7.1f}: {text}")


if __name__ == "__main__":
    main()
