"""Analysis configuration: JSON file loading and full validation.

Validation collects every error before failing, so a broken config is
reported in one pass; unknown keys are kept as warnings on the returned
config object rather than rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dichotomy import ConstantProjector, constant_projector
from .errors import ConfigError
from .evaluator import TransitionEvaluator
from .growth import GrowthRate, growth_rate, identity_element
from .mathtools import GRID_FLOOR_H, geometric_grid
from .systems import BUILTIN_SYSTEMS, LinearSystem, expression_system, make_builtin

__all__ = ["AnalysisConfig", "load_config"]

_TOP_KEYS = {
    "growth_rate",
    "system",
    "interval",
    "grid",
    "tolerances",
    "dichotomy",
    "noncritical",
    "expansive",
    "fullline",
    "floquet",
    "audit",
    "directions",
    "seed",
}

_TOLERANCE_DEFAULTS = {
    "rel_tol": 1e-10,
    "abs_tol": 1e-12,
    "max_step": math.inf,
    "rank_tol": 1e-8,
    "circle_tol": 1e-6,
    "slack_tol": 1e-8,
    "gfs_threshold": 1e-6,
    "floor_h": GRID_FLOOR_H,
}


@dataclass
class AnalysisConfig:
    """Validated configuration with constructed growth rate and system."""

    raw: dict
    growth: GrowthRate
    system: LinearSystem
    h_lo: Optional[float]
    h_hi: Optional[float]
    points_per_decade: float
    tolerances: dict
    seed: int
    warnings: list = field(default_factory=list)

    def make_evaluator(self) -> TransitionEvaluator:
        if self.system is None:
            raise ConfigError(["system: required for this command"])
        return TransitionEvaluator(
            self.system,
            self.growth,
            rel_tol=self.tolerances["rel_tol"],
            abs_tol=self.tolerances["abs_tol"],
            max_step=self.tolerances["max_step"],
        )

    def grid(self) -> np.ndarray:
        if self.h_lo is None:
            raise ConfigError(["this command needs an 'interval' section"])
        return geometric_grid(
            self.growth,
            self.h_lo,
            self.h_hi,
            self.points_per_decade,
            floor_h=self.tolerances["floor_h"],
        )

    def block(self, name: str) -> dict:
        value = self.raw.get(name, {})
        return dict(value) if isinstance(value, dict) else {}

    def projector_from(self, block: dict, key: str = "projector") -> Optional[ConstantProjector]:
        entries = block.get(key)
        if entries is None:
            return None
        return constant_projector(np.asarray(entries, dtype=float))


def _validate_interval(raw, g: GrowthRate, errors) -> tuple:
    section = raw.get("interval")
    if section is None:
        return None, None
    if not isinstance(section, dict):
        errors.append("interval: must be an object")
        return None, None
    if "h_lo" in section or "h_hi" in section:
        try:
            h_lo, h_hi = float(section["h_lo"]), float(section["h_hi"])
        except (KeyError, TypeError, ValueError):
            errors.append("interval: h_lo and h_hi must both be numbers")
            return None, None
        if not 0.0 < h_lo < h_hi:
            errors.append(f"interval: need 0 < h_lo < h_hi, got ({h_lo}, {h_hi})")
            return None, None
        return h_lo, h_hi
    try:
        lo, hi = float(section["lo"]), float(section["hi"])
    except (KeyError, TypeError, ValueError):
        errors.append("interval: give either (h_lo, h_hi) or (lo, hi) in t-coordinates")
        return None, None
    if not lo < hi:
        errors.append(f"interval: need lo < hi, got ({lo}, {hi})")
        return None, None
    a0 = g.lower_endpoint
    if lo <= a0:
        errors.append(
            f"interval: lower bound {lo} escapes J = (a0, +inf) with a0 = {a0}"
        )
        return None, None
    return float(g.forward(lo)), float(g.forward(hi))


def _validate_T(block_name: str, block, g: GrowthRate, errors, required=False):
    if not isinstance(block, dict) or "T" not in block:
        if required:
            errors.append(f"{block_name}: T is required")
        return
    try:
        T = float(block["T"])
    except (TypeError, ValueError):
        errors.append(f"{block_name}: T must be a number")
        return
    if not g.contains(T) or T <= identity_element(g):
        errors.append(
            f"{block_name}: T must exceed the identity element "
            f"{identity_element(g)!r} of the group, got {T}"
        )


def load_config(path: str) -> AnalysisConfig:
    """Load and validate a JSON config file.

    Raises ConfigError with the complete list of validation problems;
    JSON syntax errors carry line and column.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config file {path!r}: {exc}"]) from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            [f"config parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]
        ) from exc
    if not isinstance(raw, dict):
        raise ConfigError(["config root must be a JSON object"])

    errors: list[str] = []
    warnings: list[str] = []
    for key in raw:
        if key not in _TOP_KEYS:
            warnings.append(f"unknown config key {key!r} ignored")

    # growth rate
    g = None
    gr = raw.get("growth_rate")
    if not isinstance(gr, dict) or "name" not in gr:
        errors.append("growth_rate: required object with a 'name' field")
    else:
        try:
            g = growth_rate(str(gr["name"]))
        except ValueError as exc:
            errors.append(f"growth_rate: {exc}")

    # system (optional: group-selftest runs on the growth rate alone)
    system = None
    sy = raw.get("system")
    if sy is not None and not isinstance(sy, dict):
        errors.append("system: must be an object with 'builtin' or 'expression'")
    elif isinstance(sy, dict) and g is not None:
        if "builtin" in sy:
            try:
                system = make_builtin(str(sy["builtin"]), g, sy.get("params", {}))
            except (ValueError, TypeError) as exc:
                errors.append(f"system: {exc}")
        elif "expression" in sy:
            try:
                system = expression_system(
                    sy["expression"],
                    float(sy.get("lower_endpoint", g.lower_endpoint)),
                    name=str(sy.get("name", "expression")),
                )
            except (ValueError, TypeError) as exc:
                errors.append(f"system: {exc}")
        else:
            errors.append(
                f"system: give 'builtin' (one of {', '.join(BUILTIN_SYSTEMS)}) "
                "or an 'expression' matrix"
            )

    h_lo = h_hi = None
    if g is not None:
        h_lo, h_hi = _validate_interval(raw, g, errors)

    grid_section = raw.get("grid", {})
    ppd = 200.0
    if isinstance(grid_section, dict):
        try:
            ppd = float(grid_section.get("points_per_decade", 200.0))
        except (TypeError, ValueError):
            errors.append("grid: points_per_decade must be a number")
        if ppd <= 0:
            errors.append("grid: points_per_decade must be positive")

    tolerances = dict(_TOLERANCE_DEFAULTS)
    tol_section = raw.get("tolerances", {})
    if isinstance(tol_section, dict):
        for key, value in tol_section.items():
            if key not in _TOLERANCE_DEFAULTS:
                warnings.append(f"tolerances: unknown key {key!r} ignored")
                continue
            try:
                value = float(value)
            except (TypeError, ValueError):
                errors.append(f"tolerances: {key} must be a number")
                continue
            if value <= 0:
                errors.append(f"tolerances: {key} must be positive, got {value}")
            else:
                tolerances[key] = value

    if g is not None:
        for name in ("noncritical", "floquet", "audit"):
            _validate_T(name, raw.get(name), g, errors)
        exp_block = raw.get("expansive")
        if isinstance(exp_block, dict):
            for key in ("L", "beta"):
                if key in exp_block:
                    try:
                        if float(exp_block[key]) <= 0:
                            errors.append(f"expansive: {key} must be positive")
                    except (TypeError, ValueError):
                        errors.append(f"expansive: {key} must be a number")
        for name in ("dichotomy", "audit", "fullline"):
            block = raw.get(name)
            if isinstance(block, dict):
                if "K" in block and block["K"] is not None:
                    try:
                        if float(block["K"]) < 1.0:
                            errors.append(f"{name}: K must be >= 1")
                    except (TypeError, ValueError):
                        errors.append(f"{name}: K must be a number")
                if "alpha" in block and block["alpha"] is not None:
                    try:
                        if float(block["alpha"]) <= 0.0:
                            errors.append(f"{name}: alpha must be > 0")
                    except (TypeError, ValueError):
                        errors.append(f"{name}: alpha must be a number")

    seed = raw.get("seed", 0)
    try:
        seed = int(seed)
    except (TypeError, ValueError):
        errors.append("seed: must be an integer")
        seed = 0

    if errors:
        raise ConfigError(errors)
    return AnalysisConfig(
        raw=raw,
        growth=g,
        system=system,
        h_lo=h_lo,
        h_hi=h_hi,
        points_per_decade=ppd,
        tolerances=tolerances,
        seed=seed,
        warnings=warnings,
    )
