"""Tail norms of T_sigma over <xi> >= R for symbols of order 0 and -s."""
import argparse

from ncsg.group import GroupDescriptor, enumerate_dual, quadrature_grid
from ncsg.spectral import compactness_diagnostic
from ncsg.symbol import SymbolSpec, build_symbol

CASES = {
    "torus": ((256,), 64.0, [4.0, 8.0, 16.0, 32.0]),
    "su2": ((24, 12, 46), None, [2.0, 4.0, 6.0, 8.0]),
}


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--orders", type=float, nargs="+", default=[0.0, -0.5, -1.0, -2.0])
    args = p.parse_args()
    for kind, (sizes, lam, R_list) in CASES.items():
        grid = quadrature_grid(GroupDescriptor(kind, sizes, 1))
        lam = lam or grid.group.irrep(grid.exact_level).weight
        dual = enumerate_dual(grid.group, lam)
        print(f"{kind}  R = {R_list}")
        for s in args.orders:
            rep = compactness_diagnostic(build_symbol(SymbolSpec("multiplier_power", s=s), grid, dual), R_list)
            tails = " ".join(f"{t:.4f}" for t in rep["tail_norms"])
            slope = "n/a" if rep["slope"] is None else f"{rep['slope']:+.3f}"
            print(f"  s={s:+.1f}  tails=[{tails}]  slope={slope}  {rep['verdict']}")


if __name__ == "__main__":
    main()
