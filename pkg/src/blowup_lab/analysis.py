"""Post-processing of solution traces.

Blow-up time is extrapolated from the linear decay of ``exp(-beta u(R,t))``;
rate exponents come from least squares of ``u(R,t)`` against
``-log(T - t)`` over the trailing decades of ``T - t``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ValidationEntry, ValidationReport

MIN_POINTS = 20
MIN_DECADES = 1.5
MAX_DECADES = 3.0
SKIP_LAST = 5
ALPHA_WINDOW = (0.5, 1.0)
ALPHA_SLACK = 0.1
MONO_REL_TOL = 1e-6


class NoBlowupError(RuntimeError):
    pass


class WindowTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class TEstimate:
    T: float
    method: str
    residual: float
    window: tuple
    points: int

    def to_dict(self) -> dict:
        return {"T": self.T, "method": self.method, "residual": self.residual,
                "window": list(self.window), "points": self.points}


@dataclass(frozen=True)
class RateFit:
    alpha: float
    kappa: float
    residual: float
    decades: float
    points: int

    @property
    def in_window(self) -> bool:
        lo, hi = ALPHA_WINDOW
        return lo - ALPHA_SLACK <= self.alpha <= hi + ALPHA_SLACK

    def to_dict(self) -> dict:
        return {"alpha": self.alpha, "kappa": self.kappa, "residual": self.residual,
                "decades": self.decades, "points": self.points,
                "in_window": self.in_window}


def _usable(trace):
    """Drop the final steps, which carry the largest time-discretization error."""
    n = len(trace.t)
    keep = n - SKIP_LAST if n - SKIP_LAST >= MIN_POINTS else n
    return slice(0, keep)


def estimate_blowup_time(trace, beta: float = 1.0) -> TEstimate:
    """Extrapolated blow-up time from a threshold-stopped trace.

    ``y = exp(-beta u(R,t))`` is linear in ``t`` when ``u(R,t)`` grows like
    ``-log(T-t)/beta``. The fit uses the trailing run of strictly decreasing
    ``y`` spanning at most three decades of ``y``, regresses ``t`` on ``y``
    and returns the intercept at ``y = 0``.
    """
    if trace.stop_reason != "threshold":
        raise NoBlowupError(f"no blow-up detected (stopped by {trace.stop_reason})")
    if not beta > 0:
        raise ValueError("beta must be positive")
    sl = _usable(trace)
    t = trace.t[sl]
    y = np.exp(-beta * trace.uR[sl])
    end = len(y) - 1
    start = end
    limit = y[end] * 10.0**MAX_DECADES
    while start > 0 and y[start - 1] > y[start] and y[start - 1] <= limit:
        start -= 1
    if end - start + 1 < MIN_POINTS:
        raise WindowTooShortError(
            f"window too short: {end - start + 1} monotone points, need {MIN_POINTS}")
    tw, yw = t[start:end + 1], y[start:end + 1]
    # centred regression of t on y; the intercept is the blow-up time
    ym, tm = yw.mean(), tw.mean()
    dy, dtt = yw - ym, tw - tm
    slope = float(np.dot(dy, dtt) / np.dot(dy, dy))
    T = float(tm - slope * ym)
    pred_y = (tw - T) / slope
    residual = float(np.sqrt(np.mean((yw - pred_y) ** 2)))
    if not T > trace.t[-1]:
        T = float(np.nextafter(trace.t[-1], np.inf))
    return TEstimate(T, "exp-extrapolation", residual, (float(tw[0]), float(tw[-1])),
                     end - start + 1)


def fit_rate_exponent(trace, T: float, which: str = "u") -> RateFit:
    """Least squares ``w(R,t) = kappa + alpha (-log(T-t))`` near blow-up."""
    w_all = trace.series(which)
    if not T > trace.t[-1]:
        raise ValueError(f"T={T} must exceed the last trace time {trace.t[-1]}")
    sl = _usable(trace)
    tau = T - trace.t[sl]
    w = w_all[sl]
    tau_end = tau[-1]
    mask = tau <= tau_end * 10.0**MAX_DECADES
    x = -np.log(tau[mask])
    w = w[mask]
    decades = float(np.log10(tau[mask].max() / tau_end))
    if mask.sum() < MIN_POINTS or decades < MIN_DECADES:
        raise WindowTooShortError(
            f"window too short: {int(mask.sum())} points over {decades:.2f} decades "
            f"(need {MIN_POINTS} over {MIN_DECADES})")
    xm, wm = x.mean(), w.mean()
    dx = x - xm
    alpha = float(np.dot(dx, w - wm) / np.dot(dx, dx))
    kappa = float(wm - alpha * xm)
    residual = float(np.sqrt(np.mean((w - kappa - alpha * x) ** 2)))
    return RateFit(alpha, kappa, residual, decades, int(mask.sum()))


def upper_rate_constant(trace, T: float) -> float:
    """Empirical ``sup (T - t) exp(max(u(R,t), v(R,t)))`` over the trace."""
    tau = T - trace.t
    if np.any(tau <= 0):
        raise ValueError("T must exceed every trace time")
    top = np.maximum(trace.uR, trace.vR)
    return float(np.max(tau * np.exp(top)))


def _entry(id, margins, where, tol, description):
    j = int(np.argmin(margins)) if len(margins) else 0
    m = float(margins[j]) if len(margins) else math.inf
    return ValidationEntry(id, m >= -tol[j] if np.ndim(tol) else m >= -tol, m,
                           float(where[j]) if len(margins) else math.nan, True, description)


def check_monotonicity(trace) -> ValidationReport:
    """Discrete radial and temporal monotonicity of both components.

    Tolerances are ``1e-6`` times the current magnitude of the state
    (at least 1). Locations are radii for gradient entries, times otherwise.
    """
    snaps = trace.snapshots
    if len(snaps) < 2:
        raise ValueError("need at least two snapshots")
    grid = trace.grid
    h = grid.h
    grad_m, grad_at = [], []
    for s in snaps:
        g = np.minimum(s.u[2:] - s.u[:-2], s.v[2:] - s.v[:-2]) / (2.0 * h)
        tol = MONO_REL_TOL * max(1.0, np.abs(s.u).max(), np.abs(s.v).max())
        j = int(np.argmin(g))
        grad_m.append(g[j] + tol)
        grad_at.append(grid.r[j + 1])
    snap_m, snap_at = [], []
    for a, b in zip(snaps[:-1], snaps[1:]):
        d = np.minimum(b.u - a.u, b.v - a.v)
        tol = MONO_REL_TOL * max(1.0, np.abs(b.u).max(), np.abs(b.v).max())
        snap_m.append(d.min() + tol)
        snap_at.append(b.t)
    step_tol = MONO_REL_TOL * np.maximum(1.0, trace.scale)
    bnd = np.minimum(np.diff(trace.uR), np.diff(trace.vR)) + step_tol[1:]
    entries = (
        _entry("snapshot-gradient", np.asarray(grad_m), np.asarray(grad_at), 0.0,
               "u_r, v_r >= 0 at every snapshot"),
        _entry("snapshot-increment", np.asarray(snap_m), np.asarray(snap_at), 0.0,
               "u, v nondecreasing between snapshots"),
        _entry("boundary-increment", bnd, trace.t[1:], 0.0,
               "u(R,t), v(R,t) nondecreasing"),
        _entry("step-gradient", trace.min_grad + MONO_REL_TOL * np.maximum(1.0, trace.scale),
               trace.t, 0.0, "discrete u_r, v_r >= 0 at every step"),
        _entry("step-increment", trace.min_incr[1:] + step_tol[1:], trace.t[1:], 0.0,
               "nodal increments >= 0 at every step"),
    )
    return ValidationReport("monotonicity", entries, MONO_REL_TOL)


@dataclass(frozen=True)
class RatioReport:
    M_used: float
    max_v_minus_u: float
    max_u_minus_v: float
    satisfied: bool

    def to_dict(self) -> dict:
        return {"M_used": self.M_used, "max_exp_v_minus_u": self.max_v_minus_u,
                "max_exp_u_minus_v": self.max_u_minus_v, "satisfied": self.satisfied}


def ratio_constant(spec, grid, delta: float = 1e-6) -> float:
    u0, v0 = spec.u0.sample(grid), spec.v0.sample(grid)
    return (1.0 + delta) * max(spec.lambda2 / spec.lambda1, spec.lambda1 / spec.lambda2,
                               float(np.exp(v0 - u0).max()), float(np.exp(u0 - v0).max()))


def check_ratio_bound(trace, spec, delta: float = 1e-6) -> RatioReport:
    """Largest ``e^{v-u}`` and ``e^{u-v}`` over the snapshots against M."""
    if not trace.snapshots:
        raise ValueError("trace has no snapshots")
    M = ratio_constant(spec, trace.grid, delta)
    d = max(float((s.v - s.u).max()) for s in trace.snapshots)
    e = max(float((s.u - s.v).max()) for s in trace.snapshots)
    mvu, muv = math.exp(d), math.exp(e)
    ok = mvu <= M * (1 + 1e-8) and muv <= M * (1 + 1e-8)
    return RatioReport(M, mvu, muv, ok)


@dataclass(frozen=True)
class BlowupSetEstimate:
    radii: tuple
    sup_u: tuple
    sup_v: tuple
    bound: tuple
    A: float

    @property
    def interior_bounded(self) -> bool:
        return all(max(a, b) <= c for a, b, c in zip(self.sup_u, self.sup_v, self.bound))

    def to_dict(self) -> dict:
        return {"A": self.A, "interior_bounded": self.interior_bounded,
                "table": [{"r": r, "sup_u": a, "sup_v": b, "bound": c}
                          for r, a, b, c in zip(self.radii, self.sup_u, self.sup_v, self.bound)]}


def interior_bound(A: float, R: float, r) -> np.ndarray:
    """``log(1 / (A (R^2 - r^2)^2))``."""
    r = np.asarray(r, dtype=float)
    return -np.log(A * (R**2 - r**2) ** 2)


def estimate_blowup_set(trace, A: float, sample_radii) -> BlowupSetEstimate:
    """Sup over snapshots of u, v at interior radii (linear interpolation)."""
    if not A > 0:
        raise ValueError("A must be positive")
    grid = trace.grid
    radii = [float(r) for r in sample_radii]
    for r in radii:
        if not 0 <= r < grid.R:
            raise ValueError(f"sample radius {r} must lie in [0, R={grid.R})")
    su = [max(float(np.interp(r, grid.r, s.u)) for s in trace.snapshots) for r in radii]
    sv = [max(float(np.interp(r, grid.r, s.v)) for s in trace.snapshots) for r in radii]
    bound = [float(b) for b in interior_bound(A, grid.R, radii)]
    return BlowupSetEstimate(tuple(radii), tuple(su), tuple(sv), tuple(bound), A)
