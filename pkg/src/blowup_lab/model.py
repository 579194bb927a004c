"""Problem instances, admissible initial data and hypothesis checks.

The system is

    u_t = Δu + λ1 e^v,   v_t = Δv + λ2 e^u     in B_R,
    ∂u/∂η = e^v,         ∂v/∂η = e^u          on ∂B_R,

for radial data. Initial profiles come from the quadratic family
``a + F r^2 / (2R)``, whose flux at ``r = R`` is exactly ``F``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .barriers import max_B_admissible, min_B_for_supersolution
from .grid import RadialGrid, gradient_values, laplacian_values

VALIDATION_TOL = 1e-10


class NoCompatibleProfileError(RuntimeError):
    """The flux fixed point has no solution reachable by damped iteration."""


@dataclass(frozen=True)
class RadialProfile:
    """Initial radial profile, either quadratic ``a + F r^2/(2R)`` or tabulated."""

    kind: str
    R: float
    a: float = 0.0
    F: float = 0.0
    table_r: tuple | None = None
    table_values: tuple | None = None

    def __post_init__(self):
        if self.kind not in ("quadratic-compatible", "tabulated"):
            raise ValueError(f"unknown profile kind {self.kind!r}")
        if self.kind == "tabulated":
            if self.table_r is None or self.table_values is None:
                raise ValueError("tabulated profile needs node radii and values")
            r = np.asarray(self.table_r, dtype=float)
            vals = np.asarray(self.table_values, dtype=float)
            if r.ndim != 1 or r.shape != vals.shape or r.size < 3:
                raise ValueError("tabulated profile needs matching 1-d tables of >= 3 nodes")
            if np.any(np.diff(r) <= 0) or r[0] != 0.0 or not math.isclose(r[-1], self.R):
                raise ValueError("tabulated radii must increase strictly from 0 to R")
            if not np.all(np.isfinite(vals)):
                raise ValueError("tabulated values must be finite")
            object.__setattr__(self, "table_r", tuple(r.tolist()))
            object.__setattr__(self, "table_values", tuple(vals.tolist()))
        elif not (math.isfinite(self.a) and math.isfinite(self.F)):
            raise ValueError("quadratic profile coefficients must be finite")

    @classmethod
    def quadratic(cls, a: float, F: float, R: float) -> "RadialProfile":
        return cls("quadratic-compatible", R, a=float(a), F=float(F))

    @classmethod
    def constant(cls, c: float, R: float) -> "RadialProfile":
        return cls.quadratic(c, 0.0, R)

    @classmethod
    def tabulated(cls, r, values, R: float | None = None) -> "RadialProfile":
        r = np.asarray(r, dtype=float)
        return cls("tabulated", float(r[-1] if R is None else R),
                   table_r=tuple(r.tolist()), table_values=tuple(np.asarray(values, float).tolist()))

    @property
    def is_quadratic(self) -> bool:
        return self.kind == "quadratic-compatible"

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        if self.is_quadratic:
            return self.a + (self.F / (2.0 * self.R)) * r**2
        return np.interp(r, self.table_r, self.table_values)

    def sample(self, grid: RadialGrid) -> np.ndarray:
        self._check_grid(grid)
        return np.asarray(self(grid.r), dtype=float)

    def derivative(self, grid: RadialGrid) -> np.ndarray:
        if self.is_quadratic:
            return (self.F / self.R) * grid.r
        return gradient_values(self.sample(grid), grid.h)

    def boundary_flux(self, grid: RadialGrid) -> float:
        return float(self.F) if self.is_quadratic else float(self.derivative(grid)[-1])

    def laplacian(self, grid: RadialGrid, n: int) -> np.ndarray:
        if self.is_quadratic:
            return np.full(grid.size, n * self.F / self.R)
        return laplacian_values(self.sample(grid), grid.h, grid.r, n, self.boundary_flux(grid))

    def sup_norm(self) -> float:
        if self.is_quadratic:
            return max(abs(self.a), abs(self.a + self.F * self.R / 2.0))
        return float(np.max(np.abs(self.table_values)))

    def _check_grid(self, grid: RadialGrid):
        if not math.isclose(grid.R, self.R, rel_tol=1e-12):
            raise ValueError(f"profile defined on [0, {self.R}], grid on [0, {grid.R}]")


@dataclass(frozen=True)
class TermToggles:
    diffusion: bool = True
    reaction: bool = True
    flux: bool = True


@dataclass(frozen=True)
class ProblemSpec:
    n: int
    R: float
    lambda1: float
    lambda2: float
    u0: RadialProfile
    v0: RadialProfile
    toggles: TermToggles = field(default_factory=TermToggles)

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be an integer >= 1, got {self.n}")
        if not self.R > 0:
            raise ValueError(f"R must be positive, got {self.R}")
        for name in ("lambda1", "lambda2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        for name in ("u0", "v0"):
            if not math.isclose(getattr(self, name).R, self.R, rel_tol=1e-12):
                raise ValueError(f"{name} is not defined on [0, R]")

    @property
    def lam(self) -> float:
        return max(self.lambda1, self.lambda2)


def build_compatible_initial_data(n: int, R: float, base_u: float, base_v: float,
                                  tol: float = 1e-12, max_iter: int = 200,
                                  damping: float = 0.5):
    """Quadratic profiles with ``u0'(R) = e^{v0(R)}`` and ``v0'(R) = e^{u0(R)}``.

    Solves ``F_u = exp(base_v + F_v R/2)``, ``F_v = exp(base_u + F_u R/2)`` by
    damped fixed-point iteration from ``F = 0``. Raises
    :class:`NoCompatibleProfileError` when the iteration does not settle, which
    happens once the base values are too large for a fixed point to exist.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    Fu = Fv = 0.0
    residual = math.inf
    for _ in range(max_iter):
        arg_u, arg_v = base_v + Fv * R / 2.0, base_u + Fu * R / 2.0
        if max(arg_u, arg_v) > 700.0:
            residual = math.inf
            break
        Fu, Fv = ((1 - damping) * Fu + damping * math.exp(arg_u),
                  (1 - damping) * Fv + damping * math.exp(arg_v))
        arg_u, arg_v = base_v + Fv * R / 2.0, base_u + Fu * R / 2.0
        if max(arg_u, arg_v) > 700.0:
            residual = math.inf
            break
        residual = max(abs(Fu - math.exp(arg_u)), abs(Fv - math.exp(arg_v)))
        if residual <= tol:
            break
    if not residual <= tol:
        raise NoCompatibleProfileError(
            f"no compatible profile for base values ({base_u}, {base_v}) on R={R}: "
            f"flux fixed point residual {residual:.3g} after {max_iter} iterations")
    u0 = RadialProfile.quadratic(base_u, Fu, R)
    v0 = RadialProfile.quadratic(base_v, Fv, R)

    probe = ProblemSpec(n, R, 1.0, 1.0, u0, v0)
    grid = RadialGrid(R, 64)
    for report in (validate_compatibility(u0, v0, probe, grid),
                   validate_lower_bound_condition(u0, v0, probe, grid)):
        if not report.satisfied:
            raise NoCompatibleProfileError(
                "built profiles fail validation: " + ", ".join(report.failed_ids()))
    return u0, v0


@dataclass(frozen=True)
class ValidationEntry:
    id: str
    satisfied: bool
    margin: float
    location: float
    critical: bool = True
    description: str = ""


@dataclass(frozen=True)
class ValidationReport:
    name: str
    entries: tuple
    tolerance: float

    @property
    def satisfied(self) -> bool:
        return all(e.satisfied for e in self.entries if e.critical)

    def entry(self, id: str) -> ValidationEntry:
        for e in self.entries:
            if e.id == id:
                return e
        raise KeyError(id)

    def failed_ids(self) -> list:
        return [e.id for e in self.entries if e.critical and not e.satisfied]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "satisfied": self.satisfied,
            "tolerance": self.tolerance,
            "entries": [
                {"id": e.id, "satisfied": e.satisfied, "margin": e.margin,
                 "location": e.location, "critical": e.critical,
                 "description": e.description}
                for e in self.entries
            ],
        }


def _min_entry(id, values, r, tol, critical=True, description=""):
    j = int(np.argmin(values))
    margin = float(values[j])
    return ValidationEntry(id, margin >= -tol, margin, float(r[j]), critical, description)


def _equality_entry(id, lhs, rhs, location, tol, description=""):
    margin = -abs(lhs - rhs)
    return ValidationEntry(id, margin >= -tol, margin, location, True, description)


def validate_compatibility(u0: RadialProfile, v0: RadialProfile, spec: ProblemSpec,
                           grid: RadialGrid, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Compatibility of the initial data with the boundary coupling.

    Failures are report entries, never exceptions. The Laplacian condition is
    reported both without the reaction coefficients and with them; only the
    former is marked critical.
    """
    r, n = grid.r, spec.n
    U, V = u0.sample(grid), v0.sample(grid)
    eU, eV = np.exp(U), np.exp(V)
    lapU, lapV = u0.laplacian(grid, n), v0.laplacian(grid, n)
    entries = (
        _equality_entry("flux-u", u0.boundary_flux(grid), float(eV[-1]), grid.R, tol,
                        "u0'(R) = exp(v0(R))"),
        _equality_entry("flux-v", v0.boundary_flux(grid), float(eU[-1]), grid.R, tol,
                        "v0'(R) = exp(u0(R))"),
        _min_entry("laplacian-u", lapU + eV, r, tol, description="Δu0 + exp(v0) >= 0"),
        _min_entry("laplacian-v", lapV + eU, r, tol, description="Δv0 + exp(u0) >= 0"),
        _min_entry("laplacian-u-lambda", lapU + spec.lambda1 * eV, r, tol, critical=False,
                   description="Δu0 + λ1 exp(v0) >= 0"),
        _min_entry("laplacian-v-lambda", lapV + spec.lambda2 * eU, r, tol, critical=False,
                   description="Δv0 + λ2 exp(u0) >= 0"),
        _min_entry("monotone-u", u0.derivative(grid), r, tol, description="u0_r >= 0"),
        _min_entry("monotone-v", v0.derivative(grid), r, tol, description="v0_r >= 0"),
        _min_entry("nonnegative-u", U, r, tol, critical=False, description="u0 >= 0"),
        _min_entry("nonnegative-v", V, r, tol, critical=False, description="v0 >= 0"),
    )
    return ValidationReport("compatibility", entries, tol)


def validate_lower_bound_condition(u0: RadialProfile, v0: RadialProfile, spec: ProblemSpec,
                                   grid: RadialGrid, tol: float = VALIDATION_TOL) -> ValidationReport:
    """Gradient condition ``u0_r >= (r/R) e^{v0}`` (and symmetric) plus ``λ1 = λ2``."""
    r = grid.r
    U, V = u0.sample(grid), v0.sample(grid)
    ratio = r / grid.R
    entries = (
        _min_entry("lower-rate-u", u0.derivative(grid) - ratio * np.exp(V), r, tol,
                   description="u0_r - (r/R) exp(v0) >= 0"),
        _min_entry("lower-rate-v", v0.derivative(grid) - ratio * np.exp(U), r, tol,
                   description="v0_r - (r/R) exp(u0) >= 0"),
        ValidationEntry("equal-lambdas", spec.lambda1 == spec.lambda2,
                        -abs(spec.lambda1 - spec.lambda2), math.nan, True, "λ1 = λ2"),
    )
    return ValidationReport("lower-rate-condition", entries, tol)


@dataclass(frozen=True)
class FFResult:
    """Outcome of the small-λ condition that confines blow-up to the boundary."""

    lhs: float
    rhs: float
    satisfied: bool
    lambda_max_admissible: float

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "satisfied": self.satisfied,
                "lambda_max_admissible": self.lambda_max_admissible}


def check_small_lambda_condition(spec: ProblemSpec, C_est: float, T_est: float) -> FFResult:
    """``λ [4R^2(n+1)+1] <= min{1/C, 4(n+1) e^{-|u0|}/(R^2+4(n+1)T), same for v0}``.

    ``C_est`` and ``T_est`` stand for the upper-rate constant and blow-up time,
    which are only known a posteriori.
    """
    if not (C_est > 0 and T_est > 0):
        raise ValueError(f"C_est and T_est must be positive, got {C_est}, {T_est}")
    factor = min_B_for_supersolution(1.0, spec.R, spec.n)
    rhs = max_B_admissible(C_est, T_est, spec.n, spec.R, spec.u0.sup_norm(), spec.v0.sup_norm())
    lhs = spec.lam * factor
    return FFResult(lhs, rhs, lhs <= rhs, rhs / factor)
