"""Command-line front end.

Exit status: 0 on success or when every verdict passes, 2 when a hypothesis
or conclusion check fails (a result, not a crash), 1 on errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .config import (
    ScenarioConfig,
    build_domain,
    build_function,
    build_operator,
    points_array,
)
from .errors import ConfigError, StableMPError
from .operator import apply_pointwise_with_error
from .scenarios import SCENARIOS, get_scenario, run_report
from .spectral import LevyMeasure, SpectralMeasure, TailWeight, levy_scaling_identity, nondegeneracy_constant, tail_norm
from .solver import boundary_decay_fit, solve_dirichlet
from .verifier import PASS, pipeline_replay

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 1, 2
THREADS_ENV = "STABLEMP_THREADS"

log = logging.getLogger("stablemp")


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; 2 is reserved for failed verdicts here."""

    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _fmt(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _write_csv(path: str | None, header: list[str], rows: list[list[Any]]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    if path in (None, "-"):
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue(), encoding="utf-8")


def _write_json(path: str | None, payload: dict) -> None:
    if path is None:
        return
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _json_default(o: Any) -> Any:
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _point_columns(dim: int) -> list[str]:
    return ["x", "y", "z"][:dim]


# {{{ config resolution


def _load(args: argparse.Namespace) -> ScenarioConfig:
    if args.config and args.scenario:
        raise ConfigError("use either --config or --scenario", "/")
    if args.config:
        return ScenarioConfig.load(args.config)
    if args.scenario:
        return get_scenario(args.scenario).load()
    return ScenarioConfig()


def _outputs(args: argparse.Namespace, cfg: ScenarioConfig) -> tuple[str | None, str | None]:
    out = cfg.output or {}
    return args.csv or out.get("csv"), args.json or out.get("json")


def _override_operator(cfg: ScenarioConfig, args: argparse.Namespace) -> ScenarioConfig:
    """Apply --s / --mass / --dim flags on top of the configured operator."""
    s_flag, mass = getattr(args, "s", None), getattr(args, "mass", None)
    if s_flag is None and mass is None and cfg.operator is not None:
        return cfg
    raw = cfg.to_dict()
    dim = getattr(args, "dim", None) or (1 if not cfg.domain else build_domain(cfg).dim)
    op = raw.get("operator") or {"s": 0.5, "measure": {"kind": "uniform", "dim": dim}}
    if s_flag:
        op["s"] = float(s_flag[0] if isinstance(s_flag, list) else s_flag)
    if mass is not None:
        op["measure"] = {"kind": "uniform", "dim": dim, "mass": float(mass)}
    raw["operator"] = op
    return ScenarioConfig.from_dict(raw, cfg.base_dir)


# }}}


# {{{ commands


def cmd_eval_op(args, cfg: ScenarioConfig) -> int:
    cfg = _override_operator(cfg, args)
    op = build_operator(cfg)
    domain = build_domain(cfg) if cfg.domain else None
    u = build_function(cfg, "function", op, domain)
    pts = points_array(cfg, domain)
    evals = apply_pointwise_with_error(op, u, pts if op.dim > 1 else pts[:, 0], threads=args.threads)
    rows = [list(p) + [e.value, e.error] for p, e in zip(pts, evals)]
    path_csv, path_json = _outputs(args, cfg)
    _write_csv(path_csv, _point_columns(op.dim) + ["value", "error"], rows)
    _write_json(path_json, {"command": "eval-op", "config": cfg.to_dict(), "values": [r[-2] for r in rows]})
    return EXIT_OK


def cmd_tail_weight(args, cfg: ScenarioConfig) -> int:
    cfg = _override_operator(cfg, args)
    op = build_operator(cfg)
    domain = build_domain(cfg)
    tw = TailWeight(op.levy, domain)
    pts = points_array(cfg, domain)
    vals = tw(pts if op.dim > 1 else pts[:, 0])
    rows = [list(p) + [v] for p, v in zip(pts, np.atleast_1d(vals))]
    payload: dict = {"command": "tail-weight", "config": cfg.to_dict()}
    if cfg.function is not None:
        u = build_function(cfg, "function", op, domain)
        tn = tail_norm(u, tw)
        payload["tail_norm"] = {"value": tn.value, "tail_estimate": tn.tail_estimate, "radius": tn.radius}
    path_csv, path_json = _outputs(args, cfg)
    _write_csv(path_csv, _point_columns(op.dim) + ["nu_star"], rows)
    _write_json(path_json, payload)
    return EXIT_OK


def cmd_nondegeneracy(args, cfg: ScenarioConfig) -> int:
    cfg = _override_operator(cfg, args)
    op = build_operator(cfg)
    s_values = args.s if args.s else [op.s]
    rows = [[float(s), nondegeneracy_constant(op.mu, float(s))] for s in s_values]
    path_csv, path_json = _outputs(args, cfg)
    _write_csv(path_csv, ["s", "constant"], rows)
    _write_json(path_json, {"command": "nondegeneracy", "measure": op.mu.to_dict(), "rows": rows})
    return EXIT_OK


def cmd_scaling_identity(args, cfg: ScenarioConfig) -> int:
    if cfg.operator is not None and not args.s and args.mass is None:
        op = build_operator(cfg)
        mu, s_values = op.mu, [op.s]
    else:
        mu = SpectralMeasure.uniform(args.dim or 1, args.mass)
        s_values = args.s or [0.5]
    t_values = args.t or list(cfg.t or (1.0,))
    rows = []
    for s in s_values:
        for t in t_values:
            r = levy_scaling_identity(LevyMeasure(mu, float(s)), float(t))
            rows.append([float(s), float(t), r.lhs, r.rhs, r.rel_gap])
    path_csv, path_json = _outputs(args, cfg)
    _write_csv(path_csv, ["s", "t", "lhs", "rhs", "rel_gap"], rows)
    _write_json(path_json, {"command": "scaling-identity", "measure": mu.to_dict(), "rows": rows})
    return EXIT_OK


def cmd_solve(args, cfg: ScenarioConfig) -> int:
    cfg = _override_operator(cfg, args)
    op = build_operator(cfg)
    domain = build_domain(cfg)
    psi = build_function(cfg, "psi", op, domain) if cfg.psi else build_function(
        ScenarioConfig(psi={"builtin": "constant", "params": {"c": 1.0}}), "psi", op, domain
    )
    mesh = dict(cfg.mesh or {})
    n_nodes = args.n_nodes or int(mesh.get("n_nodes", 257))
    sol = solve_dirichlet(op, domain, psi, n_nodes=n_nodes, grading=float(mesh.get("grading", 2.0)))
    rows = [[x, v] for x, v in zip(sol.mesh.nodes, sol.nodal_values)]
    report: dict = {"command": "solve", "energy": sol.energy, "residual": sol.residual, "n_nodes": n_nodes}
    try:
        fit = boundary_decay_fit(sol)
        report["decay_fit"] = {"beta": fit.beta, "residual": fit.residual, "n_points": fit.n_points}
    except StableMPError as exc:
        report["decay_fit"] = {"error": str(exc)}
    path_csv, path_json = _outputs(args, cfg)
    _write_csv(path_csv, ["x", "phi"], rows)
    _write_json(path_json, report)
    return EXIT_OK


def _report_exit(report) -> int:
    if not report.consistent:
        log.error("internal inconsistency: all hypotheses pass but the conclusion fails")
        return EXIT_ERROR
    return EXIT_OK if all(v == PASS for v in report.verdicts.values()) else EXIT_FAIL


def cmd_verify_mp(args, cfg: ScenarioConfig) -> int:
    report = run_report(cfg, args.threads)
    lad = report.boundary_functional
    path_csv, path_json = _outputs(args, cfg)
    _write_csv(path_csv, ["eps", "value"], [[e, v] for e, v in zip(lad.eps, lad.values)])
    _write_json(path_json, {"command": args.command, "scenario": cfg.name, **report.to_dict()})
    summary = ", ".join(f"{k}={v}" for k, v in report.verdicts.items())
    print(f"{cfg.name}: {summary}", file=sys.stderr)
    return _report_exit(report)


def cmd_classical_mp(args, cfg: ScenarioConfig) -> int:
    if cfg.mode != "laplacian":
        raw = cfg.to_dict()
        raw["mode"] = "laplacian"
        cfg = ScenarioConfig.from_dict(raw, cfg.base_dir)
    return cmd_verify_mp(args, cfg)


def cmd_replay(args, cfg: ScenarioConfig) -> int:
    op = build_operator(cfg)
    domain = build_domain(cfg)
    u = build_function(cfg, "function", op, domain)
    psi = build_function(cfg, "psi", op, domain) if cfg.psi else None
    n_nodes = args.n_nodes or int((cfg.mesh or {}).get("n_nodes", 129))
    trace = pipeline_replay(op, domain, u, psi, tuple(cfg.ladder), n_nodes=n_nodes)
    rows = [[st.eps, st.integral_v_psi, st.band_integral, st.remainder_bound] for st in trace.steps]
    path_csv, path_json = _outputs(args, cfg)
    _write_csv(path_csv, ["eps", "integral_v_psi", "band_integral", "remainder_bound"], rows)
    _write_json(path_json, {"command": "replay", "scenario": cfg.name, **trace.to_dict()})
    ok = trace.remainder_decays() and trace.limit_nonpositive()
    print(f"{cfg.name}: remainder_decays={trace.remainder_decays()} limit_nonpositive={trace.limit_nonpositive()}", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS: dict[str, tuple[Callable, str]] = {
    "eval-op": (cmd_eval_op, "evaluate A_s u at points"),
    "tail-weight": (cmd_tail_weight, "tail weight at points (and the weighted norm of a function)"),
    "nondegeneracy": (cmd_nondegeneracy, "nondegeneracy constant of the spectral measure"),
    "scaling-identity": (cmd_scaling_identity, "quadrature check of the Levy scaling identity"),
    "solve": (cmd_solve, "Galerkin solve of A_s phi = psi on an interval"),
    "verify-mp": (cmd_verify_mp, "check the maximum principle hypotheses and conclusion"),
    "replay": (cmd_replay, "replay the Green function approximation on an exhaustion"),
    "classical-mp": (cmd_classical_mp, "maximum principle checks for the Laplacian"),
}


# }}}


def _default_threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise SystemExit(f"stablemp: error: {THREADS_ENV}={raw!r} is not an integer")
    return max(n, 1)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="scenario JSON file (schema in docs/config.schema.json)")
    common.add_argument("--scenario", choices=sorted(SCENARIOS), help="built-in named scenario")
    common.add_argument("--csv", help="CSV output path (default: stdout)")
    common.add_argument("--json", help="JSON report path ('-' for stdout)")
    common.add_argument(
        "--threads", type=int, default=None, help=f"worker threads (default: ${THREADS_ENV} or 1)"
    )
    common.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")

    parser = _Parser(prog="stablemp", description="Toolkit for symmetric stable operators and maximum principles.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        if name in ("eval-op", "tail-weight", "solve"):
            p.add_argument("--s", type=float, help="stability index in (0, 1)")
            p.add_argument("--mass", type=float, help="use the uniform measure with this mass")
            p.add_argument("--dim", type=int, help="dimension for --mass")
        if name in ("nondegeneracy", "scaling-identity"):
            p.add_argument("--s", type=float, action="append", help="stability index (repeatable)")
            p.add_argument("--mass", type=float, help="use the uniform measure with this mass")
            p.add_argument("--dim", type=int, help="dimension for --mass")
        if name == "scaling-identity":
            p.add_argument("--t", type=float, action="append", help="radius t > 0 (repeatable)")
        if name in ("solve", "replay"):
            p.add_argument("--n-nodes", type=int, help="mesh nodes")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    args.threads = args.threads or _default_threads()
    if args.threads < 1:
        print("stablemp: error: --threads must be positive", file=sys.stderr)
        return EXIT_ERROR
    v = getattr(args, "s", None)
    for x in v if isinstance(v, list) else ([v] if v is not None else []):
        if not 0 < x < 1:
            print(f"stablemp: error: --s must lie in (0, 1), got {x}", file=sys.stderr)
            return EXIT_ERROR
    handler, _ = COMMANDS[args.command]
    cfg = None
    try:
        cfg = _load(args)
        return handler(args, cfg)
    except ConfigError as exc:
        print(f"stablemp {args.command}: config error at {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (StableMPError, ValueError, NotImplementedError, ArithmeticError) as exc:
        where = f" [{cfg.name}]" if cfg is not None else ""
        print(f"stablemp {args.command}{where}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
