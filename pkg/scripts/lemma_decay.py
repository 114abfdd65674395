"""Decay of ||u_xi sigma(., xi) - T u_xi|| along a frequency sequence."""
import argparse

from ncsg.group import GroupDescriptor, enumerate_dual, quadrature_grid
from ncsg.spectral import WitnessSpec, lemma_decay_check
from ncsg.symbol import SymbolSpec, build_symbol


def run(kind, spec, sizes, top, levels, radius):
    grid = quadrature_grid(GroupDescriptor(kind, sizes, 1))
    g = grid.group
    lam = g.irrep(top).weight if kind == "su2" else (1 + top ** 2) ** 0.5
    s = build_symbol(spec, grid, enumerate_dual(g, lam))
    xis = [g.irrep(L if kind == "su2" else (L,)) for L in levels]
    rep = lemma_decay_check(s, xis, WitnessSpec(radius=radius))
    print(f"{kind}: {spec.family} {spec.multiplier or ''} s={spec.s}")
    for r in rep["rows"]:
        print(f"  label={r['label']!s:8} weight={r['weight']:8.3f} difference={r['difference']:.3e}")
    print(f"  slope={rep['slope']:.3f} monotone={rep['monotone_decreasing']}")


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--radius", type=float, default=None, help="half-maximum radius of the bump")
    args = p.parse_args()
    run("torus", SymbolSpec("multiplier", multiplier="k1/w"), (256,), 64, [8, 12, 16, 24, 32], args.radius)
    run("su2", SymbolSpec("multiplier_power", s=-1.0), (24, 12, 46), 22, range(2, 13, 2), args.radius)


if __name__ == "__main__":
    main()
