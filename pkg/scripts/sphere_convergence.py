"""Scalar curvature of the stereographic sphere chart against 2/r^2 under refinement."""
import argparse

import numpy as np

from clifftorsion import geometry as geo
from clifftorsion.clifford import Signature


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--radius", type=float, default=1.0)
    ap.add_argument("--fd-order", type=int, choices=(2, 4), default=2)
    ap.add_argument("--h", type=float, nargs="+", default=[0.04, 0.02, 0.01])
    args = ap.parse_args()

    prev = None
    print(f"{'h':>8} {'sites':>8} {'max error':>12} {'order':>7}")
    for h in args.h:
        L = int(round(1.0 / h)) + 1
        ch = geo.build_chart("sphere2", (L, L), h, Signature(2, 0), radius=args.radius, fd_order=args.fd_order)
        err = float(np.max(np.abs(geo.scalar_curvature(ch)[ch.interior] - 2.0 / args.radius**2)))
        order = "" if prev is None else f"{np.log(prev[1] / err) / np.log(prev[0] / h):7.3f}"
        print(f"{h:8.4f} {L * L:8d} {err:12.4e} {order:>7}")
        prev = (h, err)


if __name__ == "__main__":
    main()
