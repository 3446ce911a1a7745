"""Static torsion equation with a constant spinor source, swept over the coupling g."""
import argparse
import time

import numpy as np

from clifftorsion import action as act
from clifftorsion import dynamics as dyn
from clifftorsion import geometry as geo
from clifftorsion import torsion as tor
from clifftorsion.clifford import Signature
from clifftorsion.spinor import build_gamma


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=2, help="lattice extent per axis (n = 4)")
    ap.add_argument("--g", type=float, nargs="+", default=[0.01, 0.03, 0.1, 0.3])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    sig = Signature(4, 0)
    ch = geo.build_chart("flat", (args.L,) * 4, 0.5, sig)
    gamma = build_gamma(sig)
    rng = np.random.default_rng(args.seed)
    site = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    psi = np.broadcast_to(0.5 * site, ch.dims + (4, 4)).copy()
    raw = 0.3 * rng.normal(size=(4, 4, 4))
    A0 = np.broadcast_to(0.5 * (raw - np.swapaxes(raw, -1, -2)), ch.dims + (4, 4, 4)).copy()

    print(f"{'g':>6} {'iters':>6} {'residual':>11} {'max|A|':>9} {'|F|^2/4':>11} {'seconds':>8}")
    for g in args.g:
        t0 = time.perf_counter()
        res = dyn.solve_static(A0, psi, ch, gamma, g)
        F = tor.field_strength_components(ch, res.A)
        e = float(np.mean(act.weak_field_energy_density(ch, F)))
        print(f"{g:6.3f} {len(res.history) - 1:6d} {res.residual:11.3e} {np.max(np.abs(res.A)):9.4f} {e:11.4e} "
              f"{time.perf_counter() - t0:8.1f}" + ("" if res.converged else "  (not converged)"))


if __name__ == "__main__":
    main()
