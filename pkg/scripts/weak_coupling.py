"""Size of the A ^ A correction and of the torsion energy density as the torsion amplitude shrinks."""
import argparse

import numpy as np

from clifftorsion import dynamics as dyn
from clifftorsion import geometry as geo
from clifftorsion import torsion as tor
from clifftorsion.clifford import Signature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    ch = geo.build_chart("flat", (args.L,) * 4, 0.5, Signature(4, 0))
    base = tor.random_potential(ch, np.random.default_rng(args.seed)).data
    print(f"{'amplitude':>10} {'<|F|^2/4>':>12} {'|A^A|/|dA|':>12}")
    for a in (1.0, 0.3, 0.1, 0.03, 0.01):
        r = dyn.weak_coupling_report(a * base, None, ch)
        print(f"{r.amplitude:10.4f} {r.energy_density_mean:12.4e} {r.commutator_ratio:12.4e}")


if __name__ == "__main__":
    main()
