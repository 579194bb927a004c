"""Boundary-only blow-up across λ: small-λ condition, barrier and interior sups.

Runs equal-λ problems from the same initial data and tabulates whether the
small-λ condition holds, whether the barrier dominates, and how far the
interior values stay below the bound log(1/(λ (R²-r²)²)).
"""
import argparse

from blowup_lab.analysis import estimate_blowup_set, estimate_blowup_time, upper_rate_constant
from blowup_lab.barriers import (BarrierParams, check_barrier_dominates, max_B_admissible,
                                 min_B_for_supersolution)
from blowup_lab.grid import RadialGrid
from blowup_lab.model import ProblemSpec, build_compatible_initial_data, check_small_lambda_condition
from blowup_lab.solver import StepControls, integrate


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--lam", type=float, nargs="+", default=[0.005, 0.01, 0.02, 0.05])
    p.add_argument("--base-u", type=float, default=-1.0)
    p.add_argument("--base-v", type=float, default=-1.5)
    p.add_argument("--J", type=int, default=128)
    args = p.parse_args()

    u0, v0 = build_compatible_initial_data(1, 1.0, args.base_u, args.base_v)
    grid = RadialGrid(1.0, args.J)
    print(f"{'lambda':>8} {'T':>10} {'C':>8} {'cond':>5} {'min z-u':>9} {'headroom':>9}")
    for lam in args.lam:
        spec = ProblemSpec(1, 1.0, lam, lam, u0, v0)
        trace = integrate(spec, grid, StepControls(snapshot_every=5000))
        T = estimate_blowup_time(trace).T
        C = upper_rate_constant(trace, T)
        cond = check_small_lambda_condition(spec, C, T)
        B_lo = min_B_for_supersolution(lam, 1.0, 1)
        B_hi = max_B_admissible(C, T, 1, 1.0, u0.sup_norm(), v0.sup_norm())
        dom = "n/a"
        if B_lo <= B_hi:
            check = check_barrier_dominates(trace, BarrierParams(lam, 0.5 * (B_lo + B_hi), T, 1, 1.0),
                                            grid)
            dom = f"{check.min_value:.3g}"
        est = estimate_blowup_set(trace, lam, [0.25, 0.5, 0.75])
        headroom = min(b - max(a, c) for a, c, b in zip(est.sup_u, est.sup_v, est.bound))
        print(f"{lam:8.4g} {T:10.6f} {C:8.4f} {'yes' if cond.satisfied else 'no':>5} "
              f"{dom:>9} {headroom:9.3f}")


if __name__ == "__main__":
    main()
