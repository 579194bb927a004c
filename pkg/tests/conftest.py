import numpy as np
import pytest

from blowup_lab.grid import RadialGrid
from blowup_lab.model import ProblemSpec, RadialProfile, TermToggles, build_compatible_initial_data
from blowup_lab.solver import SolutionTrace, State, StepControls, integrate

ODE_TOGGLES = TermToggles(diffusion=False, reaction=True, flux=False)
HEAT_TOGGLES = TermToggles(diffusion=True, reaction=False, flux=False)


def full_spec(n=1, lam1=0.01, lam2=None, base_u=-1.0, base_v=-1.0, R=1.0):
    u0, v0 = build_compatible_initial_data(n, R, base_u, base_v)
    return ProblemSpec(n, R, lam1, lam1 if lam2 is None else lam2, u0, v0)


def ode_spec(u0=0.0, v0=0.0, lam=1.0):
    return ProblemSpec(1, 1.0, lam, lam, RadialProfile.constant(u0, 1.0),
                       RadialProfile.constant(v0, 1.0), ODE_TOGGLES)


def synthetic_trace(t, uR, vR=None, grid=None, snapshots=None, stop_reason="threshold"):
    """Trace built from prescribed boundary series, for testing the analysis layer."""
    t = np.asarray(t, dtype=float)
    uR = np.asarray(uR, dtype=float)
    vR = uR.copy() if vR is None else np.asarray(vR, dtype=float)
    grid = grid or RadialGrid(1.0, 8)
    zeros = np.zeros_like(t)
    if snapshots is None:
        snapshots = [State(float(tk), np.full(grid.size, a), np.full(grid.size, b))
                     for tk, a, b in ((t[0], uR[0], vR[0]), (t[-1], uR[-1], vR[-1]))]
    return SolutionTrace(grid=grid, t=t, dt=np.r_[0.0, np.diff(t)], uR=uR, vR=vR,
                         umax=uR, vmax=vR, min_grad=zeros, min_incr=zeros,
                         scale=np.maximum(np.abs(uR), np.abs(vR)), snapshots=snapshots,
                         stop_reason=stop_reason)


@pytest.fixture(scope="session")
def ode_trace():
    return integrate(ode_spec(), RadialGrid(1.0, 8), StepControls(u_stop=18.0, snapshot_every=50))


@pytest.fixture(scope="session")
def small_run():
    """Full model at J=64, asymmetric data, small λ; reused by many tests."""
    spec = full_spec(n=1, lam1=0.01, base_u=-1.0, base_v=-1.5)
    grid = RadialGrid(1.0, 64)
    return spec, grid, integrate(spec, grid, StepControls(snapshot_every=2000))


ACCEPTANCE_LINES = {}


def record_criterion(number, title, ok, detail):
    """Log one acceptance verdict; the summary prints them in order."""
    line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
