"""Fitted blow-up exponents as the fitting window slides toward T.

The exponent reads about 1/2 while the boundary layer is resolved and
drifts toward 1 once it shrinks below the mesh width; this script prints
alpha over successive decades of T - t so the crossover is visible.
"""
import argparse

import numpy as np

from blowup_lab.analysis import estimate_blowup_time
from blowup_lab.grid import RadialGrid
from blowup_lab.model import ProblemSpec, build_compatible_initial_data
from blowup_lab.solver import StepControls, integrate


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("--base-u", type=float, default=-1.0)
    p.add_argument("--base-v", type=float, default=-1.5)
    p.add_argument("--J", type=int, nargs="+", default=[64, 128, 256])
    args = p.parse_args()

    u0, v0 = build_compatible_initial_data(args.n, 1.0, args.base_u, args.base_v)
    spec = ProblemSpec(args.n, 1.0, args.lam, args.lam, u0, v0)
    for J in args.J:
        trace = integrate(spec, RadialGrid(1.0, J), StepControls(snapshot_every=10**6))
        T = estimate_blowup_time(trace).T
        tau = T - trace.t
        print(f"J={J}  T={T:.8f}  h={1.0 / J:.4g}")
        for hi in range(0, -6, -1):
            sel = (tau > 0) & (tau <= 10.0**hi) & (tau > 10.0 ** (hi - 1))
            if sel.sum() < 20:
                continue
            slope = np.polyfit(-np.log(tau[sel]), trace.uR[sel], 1)[0]
            print(f"   T-t in (1e{hi - 1}, 1e{hi}]: alpha_u = {slope:.4f}  ({sel.sum()} steps)")


if __name__ == "__main__":
    main()
