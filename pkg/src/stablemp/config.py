"""Scenario configuration: schema validation, canonical form and object builders."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from . import functions as fn
from .errors import ConfigError, StableMPError
from .functions import SampledFunction
from .geometry import Domain, Interval, domain_from_dict
from .operator import StableOperator
from .quadrature import QuadratureConfig
from .spectral import measure_from_dict
from .verifier import ClassicalConfig, VerifierConfig

DEFAULT_LADDER = (0.1, 0.05, 0.025, 0.0125)


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("stablemp").joinpath("config.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def _pointer(path) -> str:
    return "/" + "/".join(str(p) for p in path) if path else "/"


def validate(raw: Any) -> None:
    """Raise ConfigError with the JSON pointer of the most relevant violation."""
    err = best_match(Draft202012Validator(schema()).iter_errors(raw))
    if err is not None:
        raise ConfigError(err.message, _pointer(err.absolute_path))


def _freeze(v: Any) -> Any:
    if isinstance(v, list):
        return tuple(_freeze(x) for x in v)
    if isinstance(v, dict):
        return {k: _freeze(x) for k, x in sorted(v.items())}
    return v


def _thaw(v: Any) -> Any:
    if isinstance(v, tuple):
        return [_thaw(x) for x in v]
    if isinstance(v, dict):
        return {k: _thaw(x) for k, x in sorted(v.items())}
    return v


@dataclass(frozen=True)
class ScenarioConfig:
    name: str = "custom"
    mode: str = "stable"
    operator: dict | None = None
    domain: dict | None = None
    function: dict | None = None
    psi: dict | None = None
    points: tuple | None = None
    ladder: tuple = DEFAULT_LADDER
    delta: float = 0.0
    t: tuple | None = None
    mesh: dict = field(default_factory=dict)
    family: tuple = ()
    tolerances: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    base_dir: str = field(default=".", compare=False)

    @classmethod
    def from_dict(cls, raw: dict, base_dir: str | Path = ".") -> "ScenarioConfig":
        validate(raw)
        kw = {k: _freeze(v) for k, v in raw.items()}
        if "ladder" in kw:
            kw["ladder"] = tuple(float(e) for e in kw["ladder"])
        cfg = cls(**kw, base_dir=str(base_dir))
        cfg._check_files()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "ScenarioConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError as exc:
            raise ConfigError(f"config file {path} not found", "") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", "") from exc
        return cls.from_dict(raw, path.parent)

    def to_dict(self) -> dict:
        """Canonical serialization: defaults dropped, keys sorted."""
        out = {}
        for f in fields(self):
            if f.name == "base_dir":
                continue
            v = getattr(self, f.name)
            if v is None or v == () or v == {} or (f.name == "ladder" and v == DEFAULT_LADDER):
                continue
            if f.name in ("name", "mode", "delta") and v == f.default:
                continue
            out[f.name] = _thaw(v)
        return dict(sorted(out.items()))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def _check_files(self) -> None:
        for key in ("function", "psi"):
            spec = getattr(self, key)
            if spec and "grid" in spec:
                p = Path(self.base_dir) / spec["grid"]["file"]
                if not p.exists():
                    raise ConfigError(f"grid file {p} does not exist", f"/{key}/grid/file")

    def require(self, *keys: str) -> None:
        for k in keys:
            if getattr(self, k) is None:
                raise ConfigError(f"'{k}' is required for this command", "/")


# {{{ builders


def build_operator(cfg: ScenarioConfig) -> StableOperator:
    cfg.require("operator")
    spec = _thaw(cfg.operator)
    dim = cfg.domain and _domain_dim(_thaw(cfg.domain))
    try:
        mu = measure_from_dict(spec["measure"], dim)
        quad = QuadratureConfig(**spec.get("quadrature", {}))
    except (StableMPError, ValueError) as exc:
        raise ConfigError(str(exc), "/operator") from exc
    if dim is not None and mu.dim != dim:
        raise ConfigError(f"measure lives in d={mu.dim} but the domain in d={dim}", "/operator/measure")
    return StableOperator(float(spec["s"]), mu, quad)


def _domain_dim(spec: dict) -> int:
    if spec["kind"] == "interval":
        return 1
    if spec["kind"] == "ball":
        return len(spec["center"])
    return 2


def build_domain(cfg: ScenarioConfig) -> Domain:
    cfg.require("domain")
    try:
        return domain_from_dict(_thaw(cfg.domain))
    except (StableMPError, ValueError) as exc:
        raise ConfigError(str(exc), "/domain") from exc


def build_function(
    cfg: ScenarioConfig, key: str = "function", op: StableOperator | None = None, domain: Domain | None = None
) -> SampledFunction:
    spec = getattr(cfg, key) if isinstance(key, str) else key
    if spec is None:
        raise ConfigError(f"'{key}' is required for this command", "/")
    return _function_from_spec(_thaw(spec), cfg, f"/{key}", op, domain)


def _function_from_spec(spec: dict, cfg: ScenarioConfig, ptr: str, op, domain) -> SampledFunction:
    if "grid" in spec:
        return _grid_function(spec["grid"], cfg, ptr)
    name = spec.get("builtin") or spec.get("expression")
    params = dict(spec.get("params", {}))
    s = params.pop("s", op.s if op is not None else None)
    dim = params.pop("dim", domain.dim if domain is not None else 1)
    try:
        if name == "constant":
            return fn.constant(float(params.get("c", -1.0)), dim, float(params.get("radius", 1.0)))
        if name == "bump":
            center = params.get("center", 0.0 if dim == 1 else [0.0] * dim)
            return fn.bump(center, float(params.get("width", 0.5)), float(params.get("height", 1.0)), dim=dim)
        if name == "power_profile":
            return fn.power_profile(float(params.get("p", s)), dim)
        if name == "counterexample":
            return fn.counterexample(_need(s, ptr), float(params.get("perturbation", 0.0)), dim)
        if name == "distance_power":
            return fn.distance_power(_need(domain, ptr, "a domain"), float(params.get("p", s)))
        if name == "sign_changing_subsolution":
            return fn.sign_changing_subsolution(_need(s, ptr))
        if name == "wedge_function":
            return fn.wedge_function()
        if name == "quadratic_form":
            return fn.quadratic_form(float(params.get("a", 1.0)), float(params.get("b", 1.0)), float(params.get("c", 0.0)))
        if name == "solved_dirichlet":
            return _solved(params, cfg, ptr, _need(op, ptr, "an operator"), _need(domain, ptr, "a domain"))
    except (StableMPError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc), ptr) from exc
    raise ConfigError(f"unknown builtin {name!r}", ptr)


def _need(v, ptr: str, what: str = "s"):
    if v is None:
        raise ConfigError(f"this function needs {what}", ptr)
    return v


def _solved(params: dict, cfg: ScenarioConfig, ptr: str, op: StableOperator, domain: Domain) -> SampledFunction:
    from .solver import solve_dirichlet

    if not isinstance(domain, Interval):
        raise ConfigError("solved_dirichlet needs an interval domain", ptr)
    psi_spec = params.get("psi", {"builtin": "constant", "params": {"c": 1.0}})
    psi = _function_from_spec(psi_spec, cfg, ptr + "/params/psi", op, domain)
    sol = solve_dirichlet(op, domain, psi, n_nodes=int(params.get("n_nodes", 129)))
    return sol.as_function(float(params.get("sign", -1.0)), name="solved Dirichlet")


def _grid_function(spec: dict, cfg: ScenarioConfig, ptr: str) -> SampledFunction:
    path = Path(cfg.base_dir) / spec["file"]
    interp = spec.get("interpolation", "cubic")
    try:
        if path.suffix == ".npz":
            data = np.load(path)
            return fn.from_grid((data["xs"], data["ys"]), data["values"], interp, name=path.stem)
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return fn.from_grid(table[:, 0], table[:, 1], interp, name=path.stem)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read grid {path}: {exc}", ptr + "/grid/file") from exc


def build_family(cfg: ScenarioConfig, dim: int) -> list[SampledFunction] | None:
    if not cfg.family:
        return None
    return [
        fn.bump(_thaw(b["center"]), float(b["width"]), float(b.get("height", 1.0)), dim=dim) for b in cfg.family
    ]


def verifier_config(cfg: ScenarioConfig, threads: int = 1) -> VerifierConfig:
    return VerifierConfig(ladder=tuple(cfg.ladder), delta=float(cfg.delta), threads=threads, **_thaw(cfg.tolerances))


def classical_config(cfg: ScenarioConfig) -> ClassicalConfig:
    tol = _thaw(cfg.tolerances)
    kw = {"ladder": tuple(cfg.ladder)}
    if "conclusion_rel_tol" in tol:
        kw["rel_tol"] = tol["conclusion_rel_tol"]
    for k in ("decay_factor", "ladder_rel_tol"):
        if k in tol:
            kw[k] = tol[k]
    return ClassicalConfig(**kw)


def points_array(cfg: ScenarioConfig, domain: Domain | None, default: int = 9) -> np.ndarray:
    """Configured evaluation points in (n, d) layout, or an interior default set."""
    if cfg.points is not None:
        pts = [np.atleast_1d(np.asarray(_thaw(p), dtype=float)) for p in cfg.points]
        dims = {len(p) for p in pts}
        if len(dims) != 1:
            raise ConfigError("points must share one dimension", "/points")
        return np.vstack(pts)
    if domain is None:
        raise ConfigError("'points' or a domain is required", "/points")
    from .verifier import interior_grid

    return interior_grid(domain, default)


# }}}
