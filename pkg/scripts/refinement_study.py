"""Grid-refinement study: u(R, t*) for J, 2J, 4J, ... and the error ratio per doubling."""
import argparse

from blowup_lab.grid import RadialGrid
from blowup_lab.model import ProblemSpec, build_compatible_initial_data
from blowup_lab.solver import StepControls, integrate


def boundary_value(spec, J, t_star):
    trace = integrate(spec, RadialGrid(spec.R, J), StepControls(t_max=t_star, snapshot_every=10**7))
    if trace.stop_reason != "horizon":
        raise SystemExit(f"J={J}: stopped with {trace.stop_reason} before t*={t_star}")
    return trace.snapshots[-1].u[-1]


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--lam", type=float, default=0.01)
    p.add_argument("--base-u", type=float, default=-2.0)
    p.add_argument("--base-v", type=float, default=-2.0)
    p.add_argument("--t-star", type=float, default=1.0)
    p.add_argument("--J", type=int, nargs="+", default=[32, 64, 128, 256])
    args = p.parse_args()

    u0, v0 = build_compatible_initial_data(args.n, 1.0, args.base_u, args.base_v)
    spec = ProblemSpec(args.n, 1.0, args.lam, args.lam, u0, v0)
    values = [boundary_value(spec, J, args.t_star) for J in args.J]
    print(f"{'J':>6} {'u(R,t*)':>22} {'|diff|':>12} {'ratio':>8}")
    prev_diff = None
    for k, (J, u) in enumerate(zip(args.J, values)):
        diff = abs(values[k - 1] - u) if k else None
        ratio = prev_diff / diff if prev_diff and diff else None
        print(f"{J:6d} {u:22.15f} {'' if diff is None else format(diff, '12.3e'):>12} "
              f"{'' if ratio is None else format(ratio, '8.4f'):>8}")
        prev_diff = diff


if __name__ == "__main__":
    main()
