"""Run configuration files (YAML) with strict key checking.

A config has the sections ``problem``, ``grid``, ``controls``, ``analysis``,
and optionally ``barrier``, ``small_lambda`` and ``output``. Unknown keys are
errors: a silently ignored typo in a coefficient would invalidate every check
made on the run.
"""
from __future__ import annotations

import copy
import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import yaml

from .grid import RadialGrid
from .model import ProblemSpec, RadialProfile, TermToggles, build_compatible_initial_data
from .solver import StepControls

DEFAULT_PROFILE = {"kind": "quadratic-compatible", "base": -1.0}


class ConfigError(ValueError):
    """Malformed configuration; ``field`` names the offending dotted key."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass
class AnalysisOptions:
    beta: float = 1.0
    sample_radii: list | None = None


@dataclass
class BarrierOptions:
    A: float | str = "auto"
    B: float | str = "auto"


@dataclass
class RunConfig:
    problem: dict
    J: int = 256
    controls: StepControls = field(default_factory=StepControls)
    analysis: AnalysisOptions = field(default_factory=AnalysisOptions)
    barrier: BarrierOptions | None = None
    C_est: float | None = None
    T_est: float | None = None
    output_dir: str | None = None

    def grid(self) -> RadialGrid:
        return RadialGrid(float(self.problem["R"]), self.J)

    def spec(self) -> ProblemSpec:
        return build_spec(self.problem)

    def sample_radii(self) -> list:
        R = float(self.problem["R"])
        radii = self.analysis.sample_radii
        return [f * R for f in (0.25, 0.5, 0.75)] if radii is None else list(radii)

    def to_dict(self) -> dict:
        out = {
            "problem": copy.deepcopy(self.problem),
            "grid": {"J": self.J},
            "controls": asdict(self.controls),
            "analysis": asdict(self.analysis),
        }
        if self.barrier is not None:
            out["barrier"] = asdict(self.barrier)
        if self.C_est is not None or self.T_est is not None:
            out["small_lambda"] = {"C_est": self.C_est, "T_est": self.T_est}
        if self.output_dir is not None:
            out["output"] = {"dir": self.output_dir}
        return out

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def _check_keys(section: dict, allowed, where: str):
    if not isinstance(section, dict):
        raise ConfigError(where, f"expected a mapping, got {type(section).__name__}")
    for key in section:
        if key not in allowed:
            raise ConfigError(f"{where}.{key}" if where else key, "unknown key")


def _number(section, key, where, *, positive=False, integer=False, default=None, required=False):
    if key not in section or section[key] is None:
        if required:
            raise ConfigError(f"{where}.{key}", "missing required value")
        return default
    value = section[key]
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise ConfigError(f"{where}.{key}", f"expected a number, got {value!r}")
    try:
        value = float(value)
    except ValueError:
        raise ConfigError(f"{where}.{key}", f"expected a number, got {section[key]!r}") from None
    if not math.isfinite(value):
        raise ConfigError(f"{where}.{key}", "must be finite")
    if positive and value <= 0:
        raise ConfigError(f"{where}.{key}", f"must be positive, got {section[key]!r}")
    if integer:
        if value != int(value):
            raise ConfigError(f"{where}.{key}", f"must be an integer, got {section[key]!r}")
        return int(value)
    return value


PROFILE_KEYS = {
    "quadratic-compatible": {"kind", "base", "F"},
    "constant": {"kind", "value"},
    "tabulated": {"kind", "r", "values"},
}


def _check_profile(p, where):
    if not isinstance(p, dict) or "kind" not in p:
        raise ConfigError(where, "profile needs a 'kind'")
    kind = p["kind"]
    if kind not in PROFILE_KEYS:
        raise ConfigError(f"{where}.kind", f"unknown profile kind {kind!r}")
    _check_keys(p, PROFILE_KEYS[kind], where)
    if kind == "quadratic-compatible":
        _number(p, "base", where, required=True)
        _number(p, "F", where)
    elif kind == "constant":
        _number(p, "value", where, required=True)
    else:
        for key in ("r", "values"):
            if not isinstance(p.get(key), list) or len(p[key]) < 3:
                raise ConfigError(f"{where}.{key}", "expected a list of >= 3 numbers")


def _check_problem(p):
    _check_keys(p, {"n", "R", "lambda1", "lambda2", "u0", "v0", "toggles"}, "problem")
    _number(p, "n", "problem", positive=True, integer=True, required=True)
    _number(p, "R", "problem", positive=True, required=True)
    _number(p, "lambda1", "problem", positive=True, required=True)
    _number(p, "lambda2", "problem", positive=True, required=True)
    for name in ("u0", "v0"):
        _check_profile(p.get(name, DEFAULT_PROFILE), f"problem.{name}")
    toggles = p.get("toggles", {})
    _check_keys(toggles, {"diffusion", "reaction", "flux"}, "problem.toggles")
    for key, value in toggles.items():
        if not isinstance(value, bool):
            raise ConfigError(f"problem.toggles.{key}", f"expected true/false, got {value!r}")


def _profile(p, R, F=None):
    if p["kind"] == "constant":
        return RadialProfile.constant(float(p["value"]), R)
    if p["kind"] == "tabulated":
        return RadialProfile.tabulated(p["r"], p["values"], R)
    return RadialProfile.quadratic(float(p["base"]), float(p["F"] if F is None else F), R)


def build_spec(problem: dict) -> ProblemSpec:
    """ProblemSpec from a checked ``problem`` section.

    Quadratic profiles without an explicit ``F`` get their fluxes from the
    joint compatibility fixed point; this requires both profiles to be
    quadratic.
    """
    n, R = int(problem["n"]), float(problem["R"])
    pu = problem.get("u0", DEFAULT_PROFILE)
    pv = problem.get("v0", DEFAULT_PROFILE)
    solve_u = pu["kind"] == "quadratic-compatible" and pu.get("F") is None
    solve_v = pv["kind"] == "quadratic-compatible" and pv.get("F") is None
    if solve_u or solve_v:
        if not (pu["kind"] == pv["kind"] == "quadratic-compatible"):
            raise ConfigError("problem.u0" if solve_u else "problem.v0",
                              "solving for F needs both profiles quadratic-compatible")
        u0, v0 = build_compatible_initial_data(n, R, float(pu["base"]), float(pv["base"]))
        if not solve_u:
            u0 = _profile(pu, R)
        if not solve_v:
            v0 = _profile(pv, R)
    else:
        u0, v0 = _profile(pu, R), _profile(pv, R)
    toggles = TermToggles(**problem.get("toggles", {}))
    return ProblemSpec(n, R, float(problem["lambda1"]), float(problem["lambda2"]), u0, v0, toggles)


TOP_KEYS = {"problem", "grid", "controls", "analysis", "barrier", "small_lambda", "output"}


def parse_config(raw: dict) -> RunConfig:
    """Validate a raw mapping and return a :class:`RunConfig`."""
    _check_keys(raw, TOP_KEYS, "")
    if "problem" not in raw:
        raise ConfigError("problem", "missing required section")
    problem = copy.deepcopy(raw["problem"])
    _check_problem(problem)
    problem["n"] = int(float(problem["n"]))

    grid = raw.get("grid") or {}
    _check_keys(grid, {"J"}, "grid")
    J = _number(grid, "J", "grid", positive=True, integer=True, default=256)
    if J < 8:
        raise ConfigError("grid.J", "must be >= 8")

    c = raw.get("controls") or {}
    names = ("cfl_safety", "reaction_safety", "u_stop", "t_max", "snapshot_every", "dt_min")
    _check_keys(c, set(names), "controls")
    defaults = StepControls()
    kwargs = {}
    for name in names:
        value = _number(c, name, "controls", integer=(name == "snapshot_every"),
                        default=getattr(defaults, name))
        kwargs[name] = value
    try:
        controls = StepControls(**kwargs)
    except ValueError as exc:
        raise ConfigError("controls", str(exc)) from None

    a = raw.get("analysis") or {}
    _check_keys(a, {"beta", "sample_radii"}, "analysis")
    beta = _number(a, "beta", "analysis", positive=True, default=1.0)
    radii = a.get("sample_radii")
    if radii is not None:
        if not isinstance(radii, list) or not radii:
            raise ConfigError("analysis.sample_radii", "expected a nonempty list")
        for k, r in enumerate(radii):
            _number({"r": r}, "r", f"analysis.sample_radii[{k}]")
            if not 0 <= float(r) < float(problem["R"]):
                raise ConfigError(f"analysis.sample_radii[{k}]", "must lie in [0, R)")
        radii = [float(r) for r in radii]

    barrier = None
    if raw.get("barrier") is not None:
        b = raw["barrier"]
        _check_keys(b, {"A", "B"}, "barrier")
        vals = {}
        for key in ("A", "B"):
            value = b.get(key, "auto")
            vals[key] = value if value == "auto" else _number(b, key, "barrier", positive=True)
        barrier = BarrierOptions(**vals)

    sl = raw.get("small_lambda") or {}
    _check_keys(sl, {"C_est", "T_est"}, "small_lambda")
    C_est = _number(sl, "C_est", "small_lambda", positive=True)
    T_est = _number(sl, "T_est", "small_lambda", positive=True)

    out = raw.get("output") or {}
    _check_keys(out, {"dir"}, "output")
    output_dir = out.get("dir")
    if output_dir is not None and not isinstance(output_dir, str):
        raise ConfigError("output.dir", "expected a path string")

    cfg = RunConfig(problem, J, controls, AnalysisOptions(beta, radii), barrier,
                    C_est, T_est, output_dir)
    try:
        cfg.spec()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError("problem", str(exc)) from None
    return cfg


def load_yaml(path) -> dict:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        raise ConfigError(where, f"cannot parse {path}: {getattr(exc, 'problem', exc)}") from None
    if not isinstance(raw, dict):
        raise ConfigError("", f"{path} does not contain a mapping")
    return raw


def load_config(path) -> RunConfig:
    return parse_config(load_yaml(path))


def dump_config(cfg: RunConfig, path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=False))


def apply_override(raw: dict, dotted: str, value) -> dict:
    """Copy of ``raw`` with ``value`` set at each comma-separated dotted path."""
    out = copy.deepcopy(raw)
    for path in dotted.split(","):
        keys = path.strip().split(".")
        node = out
        for key in keys[:-1]:
            node = node.setdefault(key, {})
            if not isinstance(node, dict):
                raise ConfigError(path, "override path crosses a non-mapping value")
        node[keys[-1]] = value
    return out
