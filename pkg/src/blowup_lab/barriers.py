"""Explicit comparison functions and their admissible constants.

Three families are evaluated against computed solutions:

* ``M e^u - e^v`` and ``M e^v - e^u`` (ratio bound between the components),
* ``u_r - (r/R) e^v`` and ``v_r - (r/R) e^u`` (gradient functionals behind the
  lower blow-up rate),
* the supersolution ``z = -log(A (R^2 - r^2)^2 + B (T - t))`` that bounds both
  components away from the boundary.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .grid import RadialGrid, RadialField, gradient_values, laplacian_values

CLOSED_FORM_TOL = 1e-9


def min_B_for_supersolution(A: float, R: float, n: int) -> float:
    """Smallest B for which ``z`` is a supersolution: ``A [4R^2(n+1) + 1]``."""
    return A * (4.0 * R**2 * (n + 1) + 1.0)


def max_B_admissible(C: float, T: float, n: int, R: float,
                     u0_norm: float, v0_norm: float) -> float:
    """Largest B keeping ``z`` above the data at t = 0 and at r = R."""
    if not (C > 0 and T > 0 and R > 0):
        raise ValueError("C, T and R must be positive")
    if u0_norm < 0 or v0_norm < 0:
        raise ValueError("sup norms must be nonnegative")
    shape = 4.0 * (n + 1) / (R**2 + 4.0 * (n + 1) * T)
    return min(1.0 / C, shape * math.exp(-u0_norm), shape * math.exp(-v0_norm))


@dataclass(frozen=True)
class BarrierParams:
    A: float
    B: float
    T: float
    n: int
    R: float

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0 and self.T > 0 and self.R > 0):
            raise ValueError(f"barrier constants must be positive: {self}")
        if self.n < 1:
            raise ValueError("n must be >= 1")

    def weight(self, r) -> np.ndarray:
        return (self.R**2 - np.asarray(r, dtype=float) ** 2) ** 2

    def denominator(self, r, t: float) -> np.ndarray:
        if t >= self.T:
            raise ValueError(f"barrier is defined for t < T={self.T}, got t={t}")
        return self.A * self.weight(r) + self.B * (self.T - t)


@dataclass(frozen=True)
class BarrierCheck:
    name: str
    min_value: float
    r: float
    t: float
    satisfied: bool
    tol: float
    note: str = ""
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "min": self.min_value, "r": self.r, "t": self.t,
                "satisfied": self.satisfied, "tol": self.tol, "note": self.note,
                **self.extra}


def evaluate_barrier_z(params: BarrierParams, grid: RadialGrid, t: float) -> RadialField:
    return RadialField(-np.log(params.denominator(grid.r, t)), grid)


def _residual_analytic(params: BarrierParams, r: np.ndarray, t: float) -> np.ndarray:
    A, B, R, n = params.A, params.B, params.R, params.n
    w = params.denominator(r, t)
    lap_v = -4.0 * n * R**2 + (4.0 * n + 8.0) * r**2
    grad_v_sq = 16.0 * r**2 * (R**2 - r**2) ** 2
    return (B + A * lap_v - A**2 * grad_v_sq / w - A) / w


def supersolution_residual(params: BarrierParams, grid: RadialGrid, t: float,
                           method: str = "analytic") -> RadialField:
    """``z_t - Δz - A e^z`` on the grid nodes.

    ``method="analytic"`` differentiates ``z`` in closed form;
    ``method="discrete"`` replaces Δz by the grid Laplacian of the sampled
    barrier (the boundary flux of ``z`` is zero) and serves as a cross-check.
    """
    if method == "analytic":
        return RadialField(_residual_analytic(params, grid.r, t), grid)
    if method != "discrete":
        raise ValueError(f"unknown method {method!r}")
    w = params.denominator(grid.r, t)
    z = -np.log(w)
    lap = laplacian_values(z, grid.h, grid.r, params.n, 0.0)
    return RadialField(params.B / w - lap - params.A * np.exp(z), grid)


def check_supersolution(params: BarrierParams, grid: RadialGrid, times,
                        tol: float = CLOSED_FORM_TOL) -> BarrierCheck:
    """Minimum closed-form residual over ``grid`` nodes and ``times``."""
    best = (math.inf, math.nan, math.nan)
    for t in times:
        res = _residual_analytic(params, grid.r, t)
        j = int(np.argmin(res))
        if res[j] < best[0]:
            best = (float(res[j]), float(grid.r[j]), float(t))
    m, r, t = best
    return BarrierCheck("supersolution-residual", m, r, t, m >= -tol, tol,
                        extra={"A": params.A, "B": params.B, "T": params.T})


def smallest_sufficient_B(A: float, R: float, n: int, T: float, J: int = 512,
                          rel_tol: float = 1e-10) -> float:
    """Bisection for the least B with nonnegative closed-form residual.

    Residuals are sampled on a fine grid at ``T - t`` spanning ten decades;
    the result is a diagnostic, not a proof.
    """
    grid = RadialGrid(R, J)
    times = [T - T * 10.0**-k for k in range(11)]

    def ok(B):
        p = BarrierParams(A, B, T, n, R)
        return min(float(_residual_analytic(p, grid.r, t).min()) for t in times) >= 0.0

    hi = min_B_for_supersolution(A, R, n)
    while not ok(hi):
        hi *= 2.0
    lo = 0.0
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if mid > 0 and ok(mid):
            hi = mid
        else:
            lo = mid
    return hi


def _snapshot_times(trace):
    return [s.t for s in trace.snapshots]


def check_barrier_dominates(trace, params: BarrierParams, grid: RadialGrid,
                            tol: float = 1e-6) -> BarrierCheck:
    """Minimum of ``z - u`` and ``z - v`` over all snapshots and nodes."""
    times = _snapshot_times(trace)
    if not times:
        return BarrierCheck("barrier-dominates", math.nan, math.nan, math.nan, False, tol,
                            "no snapshots")
    if params.T <= max(times):
        return BarrierCheck("barrier-dominates", math.nan, math.nan, math.nan, False, tol,
                            f"precondition violated: barrier T={params.T} does not exceed "
                            f"last snapshot time {max(times)}")
    best = (math.inf, math.nan, math.nan, "")
    for snap in trace.snapshots:
        z = -np.log(params.denominator(grid.r, snap.t))
        for comp, w in (("u", snap.u), ("v", snap.v)):
            gap = z - w
            j = int(np.argmin(gap))
            if gap[j] < best[0]:
                best = (float(gap[j]), float(grid.r[j]), snap.t, comp)
    m, r, t, comp = best
    return BarrierCheck("barrier-dominates", m, r, t, m >= -tol, tol,
                        extra={"component": comp, "A": params.A, "B": params.B, "T": params.T})


def evaluate_J_ratio(trace, M: float, grid: RadialGrid, rel_tol: float = CLOSED_FORM_TOL) -> BarrierCheck:
    """Minimum of ``M e^u - e^v`` and ``M e^v - e^u``.

    The tolerance is relative to the largest exponential involved.
    """
    if not M > 0:
        raise ValueError("M must be positive")
    best = (math.inf, math.nan, math.nan)
    scale = 0.0
    for snap in trace.snapshots:
        eu, ev = np.exp(snap.u), np.exp(snap.v)
        scale = max(scale, float(eu.max()), float(ev.max()))
        for gap in (M * eu - ev, M * ev - eu):
            j = int(np.argmin(gap))
            if gap[j] < best[0]:
                best = (float(gap[j]), float(grid.r[j]), snap.t)
    tol = rel_tol * max(M * scale, 1.0)
    m, r, t = best
    return BarrierCheck("ratio-functional", m, r, t, m >= -tol, tol, extra={"M": M})


def evaluate_J1_J2(trace, grid: RadialGrid, tol_factor: float = 5.0):
    """Minima of ``u_r - (r/R) e^v`` and ``v_r - (r/R) e^u`` off the boundary node.

    Gradients are discrete, so the tolerance is ``tol_factor h^2`` times the
    size of the exponential term. Values at ``r = R`` are reported separately
    in ``extra``; there the continuum functional vanishes.
    """
    ratio = grid.r / grid.R
    results = []
    for name, pick in (("J1", lambda s: (s.u, s.v)), ("J2", lambda s: (s.v, s.u))):
        best = (math.inf, math.nan, math.nan)
        boundary_min, boundary_max = math.inf, -math.inf
        scale = 1.0
        for snap in trace.snapshots:
            w, other = pick(snap)
            e = np.exp(other)
            J = gradient_values(w, grid.h) - ratio * e
            scale = max(scale, float(e[:-1].max()))
            j = int(np.argmin(J[:-1]))
            if J[j] < best[0]:
                best = (float(J[j]), float(grid.r[j]), snap.t)
            boundary_min = min(boundary_min, float(J[-1]))
            boundary_max = max(boundary_max, float(J[-1]))
        tol = tol_factor * grid.h**2 * scale
        m, r, t = best
        results.append(BarrierCheck(name, m, r, t, m >= -tol, tol,
                                    extra={"boundary_min": boundary_min,
                                           "boundary_max": boundary_max}))
    return tuple(results)
