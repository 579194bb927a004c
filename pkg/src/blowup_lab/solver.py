"""Method-of-lines integration of the coupled system up to blow-up.

Space is discretized with :mod:`blowup_lab.grid`; time with the explicit
midpoint rule under an adaptive step that respects the diffusion stability
limit, the reaction growth rate and the growth driven by the boundary flux.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .grid import RadialGrid, RadialField, laplacian_values
from .model import ProblemSpec, TermToggles, validate_compatibility

log = logging.getLogger(__name__)

EXP_LIMIT = 700.0


class StateOverflowError(FloatingPointError):
    """Solution left the range where ``exp`` is representable."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class State:
    t: float
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        if not (self.t >= 0 and np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.v))):
            raise ValueError("state must be finite with t >= 0")

    @classmethod
    def initial(cls, spec: ProblemSpec, grid: RadialGrid) -> "State":
        return cls(0.0, spec.u0.sample(grid), spec.v0.sample(grid))

    def fields(self, grid: RadialGrid):
        return RadialField(self.u, grid), RadialField(self.v, grid)

    def dump(self) -> dict:
        return {"t": self.t, "u": self.u.tolist(), "v": self.v.tolist()}


@dataclass(frozen=True)
class StepControls:
    cfl_safety: float = 0.5
    reaction_safety: float = 0.1
    u_stop: float = 18.0
    t_max: float = 100.0
    snapshot_every: int = 1000
    dt_min: float = 1e-14

    def __post_init__(self):
        if not (0 < self.cfl_safety < 1 and 0 < self.reaction_safety < 1):
            raise ValueError("safety factors must lie in (0, 1)")
        if not self.dt_min > 0:
            raise ValueError("dt_min must be positive")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            raise ValueError("snapshot_every must be a positive integer")
        if self.u_stop >= EXP_LIMIT:
            raise ValueError(f"u_stop must stay below {EXP_LIMIT}")


@dataclass
class SolutionTrace:
    """Per-step boundary scalars plus periodic full snapshots.

    ``min_grad`` and ``min_incr`` hold, per accepted step, the smallest
    discrete radial gradient and the smallest nodal increment over both
    components; ``scale`` is the largest magnitude of the state.
    """

    grid: RadialGrid
    t: np.ndarray
    dt: np.ndarray
    uR: np.ndarray
    vR: np.ndarray
    umax: np.ndarray
    vmax: np.ndarray
    min_grad: np.ndarray
    min_incr: np.ndarray
    scale: np.ndarray
    snapshots: list = field(default_factory=list)
    stop_reason: str = "horizon"

    @property
    def final(self) -> State:
        return self.snapshots[-1]

    @property
    def steps(self) -> int:
        return len(self.t) - 1

    def series(self, which: str) -> np.ndarray:
        if which not in ("u", "v"):
            raise ValueError(f"which must be 'u' or 'v', got {which!r}")
        return self.uR if which == "u" else self.vR


class _RHS:
    """Right-hand side bound to one problem and grid."""

    def __init__(self, spec: ProblemSpec, grid: RadialGrid):
        self.spec, self.grid = spec, grid
        self.h, self.r, self.n = grid.h, grid.r, spec.n

    def __call__(self, u, v):
        tog = self.spec.toggles
        top = max(u.max(), v.max())
        if top > EXP_LIMIT:
            raise StateOverflowError(
                f"state beyond representable range (max {top:.6g} > {EXP_LIMIT}); "
                "u_stop is set too high")
        eu, ev = np.exp(u), np.exp(v)
        if tog.diffusion:
            gu = ev[-1] if tog.flux else 0.0
            gv = eu[-1] if tog.flux else 0.0
            du = laplacian_values(u, self.h, self.r, self.n, gu)
            dv = laplacian_values(v, self.h, self.r, self.n, gv)
        else:
            du, dv = np.zeros_like(u), np.zeros_like(v)
        if tog.reaction:
            du += self.spec.lambda1 * ev
            dv += self.spec.lambda2 * eu
        return du, dv


def rhs(state: State, spec: ProblemSpec, grid: RadialGrid):
    """``(Δu + λ1 e^v, Δv + λ2 e^u)`` with fluxes ``e^{v(R)}``, ``e^{u(R)}``."""
    du, dv = _RHS(spec, grid)(state.u, state.v)
    return RadialField(du, grid), RadialField(dv, grid)


def adaptive_dt(state: State, spec: ProblemSpec, grid: RadialGrid,
                controls: StepControls) -> float:
    """Step size from diffusion, reaction and boundary-flux limits.

    The flux limit ``reaction_safety h / (2 (e^{u(R)} + e^{v(R)}))`` bounds
    the growth of the boundary nodes, whose ghost-node update carries
    ``(2/h) e^{v(R)}``.
    """
    tog = spec.toggles
    limits = []
    if tog.diffusion:
        limits.append(controls.cfl_safety * grid.h**2 / (2.0 * spec.n))
        if tog.flux:
            limits.append(controls.reaction_safety * grid.h
                          / (2.0 * (math.exp(state.u[-1]) + math.exp(state.v[-1]))))
    if tog.reaction:
        eu, ev = math.exp(state.u.max()), math.exp(state.v.max())
        limits.append(controls.reaction_safety
                      / (spec.lambda1 * ev + spec.lambda2 * eu + eu + ev))
    return min(limits) if limits else controls.t_max


def _midpoint(f, u, v, dt):
    k1u, k1v = f(u, v)
    k2u, k2v = f(u + 0.5 * dt * k1u, v + 0.5 * dt * k1v)
    return u + dt * k2u, v + dt * k2v


def step(state: State, spec: ProblemSpec, grid: RadialGrid, dt: float) -> State:
    """One explicit midpoint step."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    u, v = _midpoint(_RHS(spec, grid), state.u, state.v, dt)
    return State(state.t + dt, u, v)


STOP_REASONS = {_kernel.THRESHOLD: "threshold", _kernel.HORIZON: "horizon",
                _kernel.DT_UNDERFLOW: "dt_underflow"}


def integrate(spec: ProblemSpec, grid: RadialGrid, controls: StepControls,
              observer=None, check_data: bool = True) -> SolutionTrace:
    """Integrate from the initial profiles until threshold, horizon or dt underflow.

    Snapshots are taken at t = 0, every ``snapshot_every`` accepted steps and
    at the final time. ``observer``, if given, receives ``on_step(row)`` with
    ``(t, dt, uR, vR, umax, vmax)`` for every recorded time and
    ``on_snapshot(index, State)`` for every snapshot, so partial runs can be
    streamed to disk.
    """
    if check_data and spec.toggles == TermToggles():
        report = validate_compatibility(spec.u0, spec.v0, spec, grid)
        if not report.satisfied:
            log.warning("initial data fail compatibility checks: %s", report.failed_ids())

    u, v = spec.u0.sample(grid), spec.v0.sample(grid)
    if max(u.max(), v.max()) >= controls.u_stop:
        raise ValueError("u_stop must exceed the initial maximum")
    tog = spec.toggles
    chunk = int(controls.snapshot_every)
    rows = np.empty((chunk, len(_kernel.ROW_FIELDS)))
    h = grid.h
    first = (0.0, 0.0, u[-1], v[-1], u.max(), v.max(),
             min((u[2:] - u[:-2]).min(), (v[2:] - v[:-2]).min()) / (2.0 * h),
             0.0, max(abs(u).max(), abs(v).max()))
    blocks = [np.asarray([first], dtype=float)]
    snapshots = []

    def snapshot(t):
        snap = State(t, u.copy(), v.copy())
        snapshots.append(snap)
        if observer is not None:
            observer.on_snapshot(len(snapshots) - 1, snap)

    if observer is not None:
        observer.on_step(first[:6])
    snapshot(0.0)
    t = 0.0
    code = _kernel.CONTINUE
    while code == _kernel.CONTINUE:
        start_u, start_v, start_t = u.copy(), v.copy(), t
        steps, t, code = _kernel.advance(
            u, v, t, h, grid.r, spec.n, spec.lambda1, spec.lambda2,
            tog.diffusion, tog.reaction, tog.flux,
            controls.cfl_safety, controls.reaction_safety, controls.u_stop,
            controls.t_max, controls.dt_min, chunk, rows)
        block = rows[:steps].copy()
        blocks.append(block)
        if observer is not None:
            for row in block:
                observer.on_step(tuple(row[:6]))
        if code == _kernel.OVERFLOW:
            state = State(t, u.copy(), v.copy()) if steps else State(start_t, start_u, start_v)
            raise StateOverflowError(
                f"state beyond representable range near t={t:.17g} before reaching "
                f"u_stop={controls.u_stop}", state)
        if code == _kernel.CONTINUE or steps:
            if snapshots[-1].t != t:
                snapshot(t)

    table = np.concatenate(blocks)
    stop = STOP_REASONS[code]
    log.info("integration stopped (%s) at t=%.17g after %d steps", stop, t, len(table) - 1)
    cols = {name: table[:, k].copy() for k, name in enumerate(_kernel.ROW_FIELDS)}
    return SolutionTrace(grid=grid, snapshots=snapshots, stop_reason=stop, **cols)
