"""Named scenarios bundled with the package.

Every scenario is a plain configuration mapping (validated against the
shipped schema) plus the verdict pattern it is expected to produce.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .config import (
    ScenarioConfig,
    build_domain,
    build_family,
    build_function,
    build_operator,
    classical_config,
    verifier_config,
)
from .errors import ConfigError
from .verifier import HypothesisReport, classical_mp_check, verify_max_principle

_LINE = {"kind": "interval", "a": -1.0, "b": 1.0}
_UNIFORM_1D = {"s": 0.5, "measure": {"kind": "uniform", "dim": 1, "mass": 2.0}}


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    config: dict
    expected: dict = field(default_factory=dict)

    def load(self) -> ScenarioConfig:
        return ScenarioConfig.from_dict({"name": self.name, **self.config})


def _stable(function: dict, **extra) -> dict:
    return {"mode": "stable", "operator": _UNIFORM_1D, "domain": _LINE, "function": function, **extra}


_ALL = [
    Scenario(
        "counterexample",
        "(1-x^2)_+^{s-1}: A_s-harmonic in (-1,1) and zero outside, yet positive inside",
        _stable({"builtin": "counterexample"}),
        {"ultrasubharmonic": "pass", "exterior_sign": "pass", "boundary_functional": "fail", "conclusion": "fail"},
    ),
    Scenario(
        "negative-constant",
        "u = -1 on the whole line",
        _stable({"builtin": "constant", "params": {"c": -1.0}}),
        {"ultrasubharmonic": "pass", "exterior_sign": "pass", "boundary_functional": "pass", "conclusion": "pass"},
    ),
    Scenario(
        "solved-dirichlet",
        "minus the Galerkin solution of A_s phi = 1 in (-1,1), phi = 0 outside",
        _stable({"builtin": "solved_dirichlet", "params": {"n_nodes": 65, "sign": -1.0}}),
        {"ultrasubharmonic": "pass", "exterior_sign": "pass", "boundary_functional": "pass", "conclusion": "pass"},
    ),
    Scenario(
        "sign-changing-subsolution",
        "(1-x^2)_+^{s-1}(2x^2-1): negative core, positive collar, A_s u < 0 inside",
        _stable({"builtin": "sign_changing_subsolution"}),
        {"ultrasubharmonic": "pass", "exterior_sign": "pass", "boundary_functional": "fail", "conclusion": "fail"},
    ),
    Scenario(
        "positive-bump",
        "a smooth positive bump centred in the interval",
        _stable({"builtin": "bump", "params": {"center": 0.0, "width": 0.5}}),
        {"ultrasubharmonic": "fail", "exterior_sign": "pass", "boundary_functional": "pass", "conclusion": "fail"},
    ),
    Scenario(
        "superharmonic-profile",
        "(1-x^2)_+^s, which A_s maps to a positive constant",
        _stable({"builtin": "power_profile"}),
        {"ultrasubharmonic": "fail", "exterior_sign": "pass", "conclusion": "fail"},
    ),
    Scenario(
        "wedge-appendix-b",
        "Laplacian mode on the wedge {0<x,y<1, x<2y<3x} with the subharmonic x^2+y^2-2",
        {
            "mode": "laplacian",
            "domain": {"kind": "polygon", "vertices": [[0.0, 0.0], [1.0, 0.5], [1.0, 1.0], [2.0 / 3.0, 1.0]]},
            "function": {"builtin": "quadratic_form", "params": {"a": 1.0, "b": 1.0, "c": -2.0}},
        },
        {"ultrasubharmonic": "pass", "boundary_functional": "pass", "conclusion": "pass"},
    ),
    Scenario(
        "classical-laplacian-demo",
        "Laplacian mode on the unit disc with the harmonic x^2-y^2, positive on parts of the boundary",
        {
            "mode": "laplacian",
            "domain": {"kind": "ball", "center": [0.0, 0.0], "r": 1.0},
            "function": {"builtin": "quadratic_form", "params": {"a": 1.0, "b": -1.0, "c": 0.0}},
        },
        {"ultrasubharmonic": "pass", "boundary_functional": "fail", "conclusion": "fail"},
    ),
]

SCENARIOS: dict[str, Scenario] = {sc.name: sc for sc in _ALL}


def get_scenario(name: str) -> Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise ConfigError(f"unknown scenario {name!r}; choose from {sorted(SCENARIOS)}", "/name") from None


def run_report(cfg: ScenarioConfig, threads: int = 1) -> HypothesisReport:
    """Verifier report for a configuration, in the mode it declares."""
    domain = build_domain(cfg)
    if cfg.mode == "laplacian":
        u = build_function(cfg, "function", None, domain)
        return classical_mp_check(u, domain, classical_config(cfg))
    op = build_operator(cfg)
    u = build_function(cfg, "function", op, domain)
    return verify_max_principle(u, op, domain, verifier_config(cfg, threads), build_family(cfg, domain.dim))
