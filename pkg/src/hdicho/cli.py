"""Command line front end: ``hdicho <command> --config <file> [...]``.

Commands dispatch the analysis modules on a config-described system and
emit a JSON run report (plus optional CSV grid dumps for plotting).

Exit codes
----------
0   every checked property holds
1   a checked property is violated (e.g. no dichotomy); witness included
2   input/config error (including a violated generalized-Floquet identity)
3   numerical failure (integration breakdown, ambiguous rank or gap)
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from .config import AnalysisConfig, load_config
from .dichotomy import (
    AuditSettings,
    analysis_directions,
    bounded_subspace,
    combine_projectors,
    constant_projector,
    equivalence_audit,
    estimate_constants,
    expansive_check,
    full_line_decide,
    noncritical_check,
    verify_dichotomy,
    window_triples,
)
from .errors import (
    ConfigError,
    EstimationError,
    GfsViolationError,
    GrowthDomainError,
    GroupOverflowError,
    InconclusiveError,
    IntegrationError,
    RankAmbiguityError,
    SubspaceSplitError,
)
from .floquet import (
    FloquetContext,
    floquet_constants,
    hyperbolicity_decide,
    monodromy,
    periodicity_residuals,
    stability_audit,
)
from .growth import identity_element
from .integrate import backend_name
from .mathtools import opnorm, orth_projector
from .reports import SCHEMA_VERSION, grid_csv, write_csv_atomic, write_json_atomic
from .selfcheck import group_selftest

EXIT_OK = 0
EXIT_VIOLATED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = (
    "group-selftest",
    "transition",
    "dichotomy-verify",
    "dichotomy-estimate",
    "noncritical",
    "expansive",
    "fullline",
    "floquet",
    "audit",
)


def _subsample(grid: np.ndarray, count: int) -> np.ndarray:
    idx = np.unique(np.linspace(0, grid.size - 1, max(2, count)).astype(int))
    return grid[idx]


def _require_block(cfg: AnalysisConfig, name: str, keys) -> dict:
    block = cfg.block(name)
    missing = [k for k in keys if block.get(k) is None]
    if missing:
        raise ConfigError([f"{name}: missing required key(s) {', '.join(missing)}"])
    return block


def _csv_directions(n: int) -> np.ndarray:
    return np.eye(n)


# ---------------------------------------------------------------------------
# Command handlers: each returns (results dict, ok flag, csv payload or None)
# ---------------------------------------------------------------------------


def cmd_group_selftest(cfg: AnalysisConfig, seed: int):
    res = group_selftest(cfg.growth, seed=seed)
    return res, res["ok"], None


def cmd_transition(cfg: AnalysisConfig, seed: int):
    ev = cfg.make_evaluator()
    grid = cfg.grid()
    rng = np.random.default_rng(seed)
    triples = rng.choice(grid, size=(50, 3))
    worst_cocycle = 0.0
    for t, s, r in triples:
        lhs = ev.transition(t, s) @ ev.transition(s, r)
        ref = ev.transition(t, r)
        worst_cocycle = max(
            worst_cocycle, opnorm(lhs - ref) / (100.0 * ev.rel_tol * (1.0 + opnorm(ref)))
        )
    results = {
        "backend": backend_name(),
        "grid_size": int(grid.size),
        "cocycle_worst_over_bound": worst_cocycle,
        "evaluator_stats": dict(ev.stats),
    }
    ok = worst_cocycle <= 1.0
    cf = ev.system.closed_form_fundamental
    if cf is not None:
        sub = _subsample(grid, 12)
        worst_oracle = 0.0
        for t in sub:
            for s in sub:
                ref = np.asarray(cf(t)) @ np.linalg.inv(np.asarray(cf(s)))
                err = opnorm(ev.transition(t, s) - ref) / (1.0 + opnorm(ref))
                worst_oracle = max(worst_oracle, err)
        results["oracle_worst_relative"] = worst_oracle
        results["oracle_tolerance"] = 1e-6
        ok = ok and worst_oracle <= 1e-6
    return results, ok, (ev, grid)


def cmd_dichotomy_verify(cfg: AnalysisConfig, seed: int):
    block = _require_block(cfg, "dichotomy", ["projector", "K", "alpha"])
    ev = cfg.make_evaluator()
    P = cfg.projector_from(block)
    report = verify_dichotomy(
        ev, P, cfg.grid(), float(block["K"]), float(block["alpha"]),
        slack_tol=cfg.tolerances["slack_tol"],
    )
    return {"dichotomy": report.to_dict()}, report.holds, (ev, report.grid)


def cmd_dichotomy_estimate(cfg: AnalysisConfig, seed: int):
    block = _require_block(cfg, "dichotomy", ["projector"])
    ev = cfg.make_evaluator()
    P = cfg.projector_from(block)
    grid = cfg.grid()
    try:
        K, alpha = estimate_constants(ev, P, grid)
    except EstimationError as exc:
        results = {"estimate": {"failure": str(exc)}}
        return results, False, (ev, grid)
    report = verify_dichotomy(ev, P, grid, K, alpha, cfg.tolerances["slack_tol"])
    results = {"estimate": {"K": K, "alpha": alpha}, "self_check": report.to_dict()}
    return results, report.holds, (ev, grid)


def cmd_noncritical(cfg: AnalysisConfig, seed: int):
    block = _require_block(cfg, "noncritical", ["T"])
    ev = cfg.make_evaluator()
    grid = cfg.grid()
    t_grid = _subsample(grid, int(block.get("samples", 40)))
    directions = analysis_directions(
        ev, grid, count=cfg.block("directions").get("count"), seed=seed
    )
    report = noncritical_check(
        ev,
        float(block["T"]),
        t_grid,
        directions=directions,
        window_points=int(block.get("window_points", 21)),
        floor_h=cfg.tolerances["floor_h"],
    )
    if report.verdict == "inconclusive":
        raise InconclusiveError(
            "noncriticality inconclusive: windows clipped at the domain floor",
            results={"noncritical": report.to_dict()},
        )
    return {"noncritical": report.to_dict()}, report.verdict == "noncritical", (ev, grid)


def cmd_expansive(cfg: AnalysisConfig, seed: int):
    block = _require_block(cfg, "expansive", ["L", "beta"])
    ev = cfg.make_evaluator()
    grid = cfg.grid()
    directions = analysis_directions(
        ev, grid, count=cfg.block("directions").get("count"), seed=seed
    )
    report = expansive_check(
        ev,
        float(block["L"]),
        float(block["beta"]),
        window_triples(grid),
        directions=directions,
        slack_factor=cfg.tolerances["slack_tol"],
    )
    return {"expansive": report.to_dict()}, report.verdict == "expansive", (ev, grid)


def _half_line_setup(cfg: AnalysisConfig, ev, block):
    """Projectors and constants for the two half-lines around the identity."""
    g = cfg.growth
    e_star = identity_element(g)
    grid = np.unique(np.append(cfg.grid(), e_star))
    if not (grid[0] < e_star < grid[-1]):
        raise ConfigError(
            ["interval: full-line analysis needs the interval to straddle h = 1"]
        )
    minus_grid = grid[grid <= e_star]
    plus_grid = grid[grid >= e_star]
    n = ev.dim
    P_plus = cfg.projector_from(block, "P_plus")
    P_minus = cfg.projector_from(block, "P_minus")
    if P_plus is None:
        fwd = bounded_subspace(ev, e_star, float(grid[-1]), "forward")
        P_plus = constant_projector(orth_projector(fwd.basis, n))
    if P_minus is None:
        back = bounded_subspace(ev, e_star, float(grid[0]), "backward")
        P_minus = constant_projector(np.eye(n) - orth_projector(back.basis, n))
    if block.get("K") is not None and block.get("alpha") is not None:
        K_p = K_m = float(block["K"])
        a_p = a_m = float(block["alpha"])
    else:
        K_p, a_p = estimate_constants(ev, P_plus, plus_grid)
        K_m, a_m = estimate_constants(ev, P_minus, minus_grid)
    return grid, minus_grid, plus_grid, P_plus, P_minus, max(K_p, K_m), min(a_p, a_m)


def cmd_fullline(cfg: AnalysisConfig, seed: int):
    ev = cfg.make_evaluator()
    block = cfg.block("fullline")
    try:
        grid, minus_grid, plus_grid, P_plus, P_minus, K, alpha = _half_line_setup(
            cfg, ev, block
        )
    except EstimationError as exc:
        return (
            {"fullline": {"failure": f"half-line constants: {exc}"}},
            False,
            (ev, cfg.grid()),
        )
    slack = cfg.tolerances["slack_tol"]
    plus_report = verify_dichotomy(ev, P_plus, plus_grid, K, alpha, slack)
    minus_report = verify_dichotomy(ev, P_minus, minus_grid, K, alpha, slack)
    results = {
        "constants": {"K": K, "alpha": alpha},
        "plus_half": plus_report.to_dict(),
        "minus_half": minus_report.to_dict(),
    }
    if not (plus_report.holds and minus_report.holds):
        results["fullline"] = {
            "verdict": "violated",
            "failed_conditions": [
                side
                for side, rep in (("half_line_plus", plus_report), ("half_line_minus", minus_report))
                if not rep.holds
            ],
        }
        return results, False, (ev, grid)
    directions = analysis_directions(
        ev, grid, count=cfg.block("directions").get("count"), seed=seed
    )
    decision = full_line_decide(
        ev,
        plus_report,
        minus_report,
        combine_projectors(P_plus, P_minus),
        grid=grid,
        directions=directions,
        seed=seed,
        slack_tol=slack,
    )
    results["fullline"] = decision.to_dict()
    if decision.verdict == "inconclusive":
        raise InconclusiveError("full-line splicing inconclusive", results=results)
    return results, decision.verdict == "holds", (ev, grid)


def cmd_floquet(cfg: AnalysisConfig, seed: int):
    block = _require_block(cfg, "floquet", ["T"])
    ev = cfg.make_evaluator()
    ctx = FloquetContext(cfg.growth, float(block["T"]), ev)
    report = monodromy(
        ctx,
        gfs_threshold=cfg.tolerances["gfs_threshold"],
        circle_tol=cfg.tolerances["circle_tol"],
    )
    decision = hyperbolicity_decide(report, cfg.tolerances["circle_tol"])
    results = {"monodromy": report.to_dict(), "decision": decision.to_dict()}
    grid = cfg.grid() if cfg.h_lo is not None else None
    ok = decision.verdict == "dichotomy"
    if report.hyperbolic:
        constants = floquet_constants(ctx, report, N=int(block.get("N", 20)))
        results["constants"] = constants.to_dict()
        if grid is not None:
            derived = verify_dichotomy(
                ev,
                report.spectral_projector,
                grid,
                constants.K,
                constants.alpha_tilde,
                cfg.tolerances["slack_tol"],
            )
            results["derived_verification"] = derived.to_dict()
            ok = ok and derived.holds
            residuals = periodicity_residuals(
                ctx, _subsample(grid, 10), n_max=int(block.get("n_max", 3))
            )
            results["periodicity_residuals"] = residuals.to_dict()
            moduli = np.abs(report.multipliers)
            if np.all(moduli < 1.0) or np.all(moduli > 1.0):
                audit = stability_audit(
                    ctx, report, constants, _subsample(grid, 20), seed=seed,
                    slack_tol=cfg.tolerances["slack_tol"],
                )
                results["stability"] = audit.to_dict()
                ok = ok and audit.passed
            else:
                results["stability"] = {"mode": "inapplicable"}
    csv_payload = (ev, grid) if grid is not None else None
    return results, ok, csv_payload


def cmd_audit(cfg: AnalysisConfig, seed: int):
    if cfg.h_lo is None:
        raise ConfigError(["audit needs an 'interval' section"])
    block = cfg.block("audit")
    ev = cfg.make_evaluator()
    settings = AuditSettings(
        h_lo=cfg.h_lo,
        h_hi=cfg.h_hi,
        points_per_decade=cfg.points_per_decade,
        K=None if block.get("K") is None else float(block["K"]),
        alpha=None if block.get("alpha") is None else float(block["alpha"]),
        P_plus=cfg.projector_from(block, "P_plus"),
        P_minus=cfg.projector_from(block, "P_minus"),
        T=None if block.get("T") is None else float(block["T"]),
        window_points=int(block.get("window_points", 21)),
        direction_count=cfg.block("directions").get("count"),
        seed=seed,
        slack_tol=cfg.tolerances["slack_tol"],
        floor_h=cfg.tolerances["floor_h"],
    )
    report = equivalence_audit(ev, settings)
    imp = report.implications
    ok = (
        imp["consistent"]
        and imp["dichotomy"]
        and imp["expansive"]
        and imp["noncritical"]
    )
    return {"audit": report.to_dict()}, ok, (ev, np.unique(np.append(cfg.grid(), identity_element(cfg.growth))))


_HANDLERS = {
    "group-selftest": cmd_group_selftest,
    "transition": cmd_transition,
    "dichotomy-verify": cmd_dichotomy_verify,
    "dichotomy-estimate": cmd_dichotomy_estimate,
    "noncritical": cmd_noncritical,
    "expansive": cmd_expansive,
    "fullline": cmd_fullline,
    "floquet": cmd_floquet,
    "audit": cmd_audit,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hdicho",
        description="Numerical h-dichotomy analysis of x' = A(t) x",
    )
    parser.add_argument("--version", action="version", version=f"hdicho {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} analysis")
        p.add_argument("--config", required=True, help="path to the JSON config file")
        p.add_argument("--out", default=".", help="output directory (default: .)")
        p.add_argument(
            "--format",
            choices=("json", "csv", "both"),
            default="json",
            help="emit the JSON report, CSV grid dump, or both",
        )
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="seed for the direction sampler (overrides the config seed)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = datetime.now(timezone.utc).isoformat()
    t0 = time.perf_counter()
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        for line in exc.errors:
            print(f"config error: {line}", file=sys.stderr)
        return EXIT_CONFIG
    for warning in cfg.warnings:
        print(f"config warning: {warning}", file=sys.stderr)
    seed = cfg.seed if args.seed is None else args.seed

    error = None
    results, ok, csv_payload = {}, False, None
    try:
        results, ok, csv_payload = _HANDLERS[args.command](cfg, seed)
        exit_code = EXIT_OK if ok else EXIT_VIOLATED
    except (ConfigError, GfsViolationError, GrowthDomainError, GroupOverflowError) as exc:
        error = exc
        exit_code = EXIT_CONFIG
    except (
        IntegrationError,
        RankAmbiguityError,
        SubspaceSplitError,
        InconclusiveError,
    ) as exc:
        error = exc
        exit_code = EXIT_NUMERICAL
        results = getattr(exc, "results", None) or results

    report = {
        "schema_version": SCHEMA_VERSION,
        "artifact": {"name": "hdicho", "version": __version__},
        "command": args.command,
        "backend": backend_name(),
        "seed": seed,
        "config": cfg.raw,
        "config_warnings": list(cfg.warnings),
        "results": results,
        "verdict_summary": {"ok": ok, "exit_code": exit_code},
        "timestamp": {
            "started_utc": started,
            "wall_time_s": time.perf_counter() - t0,
        },
    }
    if error is not None:
        report["error"] = {"type": type(error).__name__, "message": str(error)}
        print(f"{type(error).__name__}: {error}", file=sys.stderr)

    os.makedirs(args.out, exist_ok=True)
    if args.format in ("json", "both"):
        write_json_atomic(os.path.join(args.out, "report.json"), report)
    if args.format in ("csv", "both") and csv_payload is not None and error is None:
        ev, grid = csv_payload
        header, rows = grid_csv(ev, grid, _csv_directions(ev.dim))
        write_csv_atomic(os.path.join(args.out, "grid.csv"), header, rows)
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
