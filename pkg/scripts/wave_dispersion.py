"""Measured plane-wave frequencies of the leapfrog torsion wave against the discrete dispersion relation."""
import argparse

import numpy as np

from clifftorsion import dynamics as dyn
from clifftorsion import geometry as geo
from clifftorsion.clifford import Signature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--L", type=int, default=16, help="extent along the propagation axis")
    ap.add_argument("--h", type=float, default=0.5)
    ap.add_argument("--dt", type=float, default=0.1)
    ap.add_argument("--steps", type=int, default=2000)
    args = ap.parse_args()

    ch = geo.build_chart("flat", (args.L, 2, 2, 2), args.h, Signature(4, 0))
    print(f"{'mode':>4} {'k':>8} {'omega theory':>14} {'omega measured':>15} {'rel err':>10} {'energy drift':>13}")
    for mode in range(1, args.L // 2):
        st = dyn.init_wave(dyn.plane_wave(ch, 0.01, mode), None, ch, args.dt)
        E0 = st.energy()
        q = [st.A[0, 0, 0, 0, 1, 0, 1]]
        for _ in range(args.steps):
            st.step()
            q.append(st.A[0, 0, 0, 0, 1, 0, 1])
        k = dyn.plane_wave_k(ch, mode)
        w_th = dyn.discrete_frequency(ch, k, args.dt)
        w = dyn.measured_frequency(np.array(q), args.dt)
        print(f"{mode:4d} {k[0]:8.4f} {w_th:14.10f} {w:15.10f} {abs(w - w_th) / w_th:10.2e} "
              f"{abs(st.energy() - E0) / E0:13.2e}")


if __name__ == "__main__":
    main()
