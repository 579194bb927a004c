"""Compiled time-stepping loop.

Mirrors :func:`blowup_lab.solver.rhs`, :func:`~blowup_lab.solver.adaptive_dt`
and :func:`~blowup_lab.solver.step` node by node; the numpy versions there
stay the reference and the test-suite checks agreement.
"""
import math

import numpy as np
from numba import njit

CONTINUE, THRESHOLD, HORIZON, DT_UNDERFLOW, OVERFLOW = 0, 1, 2, 3, 4
ROW_FIELDS = ("t", "dt", "uR", "vR", "umax", "vmax", "min_grad", "min_incr", "scale")
EXP_LIMIT = 700.0


@njit(cache=True)
def _laplacian(f, h, r, n, g, out):
    m = f.shape[0]
    inv_h2 = 1.0 / (h * h)
    for j in range(1, m - 1):
        out[j] = (f[j + 1] - 2.0 * f[j] + f[j - 1]) * inv_h2
        if n != 1:
            out[j] += (n - 1) * (f[j + 1] - f[j - 1]) / (2.0 * h * r[j])
    out[0] = 2.0 * n * (f[1] - f[0]) * inv_h2
    out[m - 1] = 2.0 * (f[m - 2] - f[m - 1]) * inv_h2 + 2.0 * g / h
    if n != 1:
        out[m - 1] += (n - 1) * g / r[m - 1]


@njit(cache=True)
def _rhs(u, v, h, r, n, lam1, lam2, diffusion, reaction, flux, du, dv, eu, ev):
    m = u.shape[0]
    top = -np.inf
    for j in range(m):
        top = max(top, u[j], v[j])
    if top > EXP_LIMIT:
        return False
    for j in range(m):
        eu[j] = math.exp(u[j])
        ev[j] = math.exp(v[j])
    if diffusion:
        gu = ev[m - 1] if flux else 0.0
        gv = eu[m - 1] if flux else 0.0
        _laplacian(u, h, r, n, gu, du)
        _laplacian(v, h, r, n, gv, dv)
    else:
        du[:] = 0.0
        dv[:] = 0.0
    if reaction:
        for j in range(m):
            du[j] += lam1 * ev[j]
            dv[j] += lam2 * eu[j]
    return True


@njit(cache=True)
def step_dt(u, v, h, n, lam1, lam2, diffusion, reaction, flux, cfl, rsafe, fallback):
    dt = np.inf
    if diffusion:
        dt = min(dt, cfl * h * h / (2.0 * n))
        if flux:
            dt = min(dt, rsafe * h / (2.0 * (math.exp(u[-1]) + math.exp(v[-1]))))
    if reaction:
        eu = math.exp(u.max())
        ev = math.exp(v.max())
        dt = min(dt, rsafe / (lam1 * ev + lam2 * eu + eu + ev))
    if dt == np.inf:
        dt = fallback
    return dt


@njit(cache=True)
def advance(u, v, t, h, r, n, lam1, lam2, diffusion, reaction, flux,
            cfl, rsafe, u_stop, t_max, dt_min, max_steps, rows):
    """Take up to ``max_steps`` midpoint steps in place; returns (steps, t, code)."""
    m = u.shape[0]
    k1u = np.empty(m); k1v = np.empty(m)
    k2u = np.empty(m); k2v = np.empty(m)
    mu = np.empty(m); mv = np.empty(m)
    eu = np.empty(m); ev = np.empty(m)
    for s in range(max_steps):
        dt = step_dt(u, v, h, n, lam1, lam2, diffusion, reaction, flux, cfl, rsafe, t_max)
        if dt < dt_min:
            return s, t, DT_UNDERFLOW
        last = t + dt >= t_max
        if last:
            dt = t_max - t
        if not _rhs(u, v, h, r, n, lam1, lam2, diffusion, reaction, flux, k1u, k1v, eu, ev):
            return s, t, OVERFLOW
        for j in range(m):
            mu[j] = u[j] + 0.5 * dt * k1u[j]
            mv[j] = v[j] + 0.5 * dt * k1v[j]
        if not _rhs(mu, mv, h, r, n, lam1, lam2, diffusion, reaction, flux, k2u, k2v, eu, ev):
            return s, t, OVERFLOW
        incr = np.inf
        for j in range(m):
            du = dt * k2u[j]
            dv = dt * k2v[j]
            incr = min(incr, du, dv)
            mu[j] = u[j] + du
            mv[j] = v[j] + dv
        finite = True
        for j in range(m):
            if not (math.isfinite(mu[j]) and math.isfinite(mv[j])):
                finite = False
        if not finite:
            return s, t, OVERFLOW
        u[:] = mu
        v[:] = mv
        t = t_max if last else t + dt

        grad = np.inf
        umax = -np.inf
        vmax = -np.inf
        scale = 0.0
        for j in range(m):
            if 0 < j < m - 1:
                grad = min(grad, (u[j + 1] - u[j - 1]) / (2.0 * h),
                           (v[j + 1] - v[j - 1]) / (2.0 * h))
            umax = max(umax, u[j])
            vmax = max(vmax, v[j])
            scale = max(scale, abs(u[j]), abs(v[j]))
        rows[s, 0] = t
        rows[s, 1] = dt
        rows[s, 2] = u[m - 1]
        rows[s, 3] = v[m - 1]
        rows[s, 4] = umax
        rows[s, 5] = vmax
        rows[s, 6] = grad
        rows[s, 7] = incr
        rows[s, 8] = scale
        if max(umax, vmax) >= u_stop:
            return s + 1, t, THRESHOLD
        if last:
            return s + 1, t, HORIZON
    return max_steps, t, CONTINUE
