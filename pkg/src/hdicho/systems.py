"""Linear systems x' = A(t) x on J = (a0, +inf), with built-in test systems.

Three built-ins ship with closed-form fundamental matrices so every
downstream analysis has an exact reference:

* ``h_diagonal`` -- diag(-a h'/h, a h'/h), fundamental diag(h^-a, h^a);
  the canonical system with a dichotomy at constants K = 1, alpha = a.
* ``counterexample`` -- scalar a(t) equal to 1/t near 0 and -1/t at
  infinity, bridged continuously on [1-l, 1+l]; every solution is
  bounded, so half-line dichotomies exist but no full-line one does.
* ``floquet_demo`` -- diag(-a/t, a/t) on (0, +inf), the worked example
  of the generalized Floquet criterion (fundamental diag(t^-a, t^a)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .expressions import parse_expression
from .growth import GrowthRate

__all__ = ["LinearSystem", "make_builtin", "expression_system", "BUILTIN_SYSTEMS"]

BUILTIN_SYSTEMS = ("h_diagonal", "counterexample", "floquet_demo")


@dataclass(frozen=True)
class LinearSystem:
    """Coefficient map of x' = A(t) x together with optional exact data.

    ``breakpoints`` lists interior kinks of A; the transition engine
    aligns integration step points with them, which is all the classic
    theory needs (continuity of A is enough for well-posedness).
    ``closed_form_fundamental`` is any exact fundamental matrix, not
    necessarily normalized at the group identity.
    """

    name: str
    dim: int
    coefficient: Callable[[float], np.ndarray]
    lower_endpoint: float = -math.inf
    closed_form_fundamental: Optional[Callable[[float], np.ndarray]] = None
    breakpoints: tuple = ()

    def contains(self, t: float) -> bool:
        t = float(t)
        return math.isfinite(t) and t > self.lower_endpoint


def _h_diagonal(g: GrowthRate, alpha: float) -> LinearSystem:
    if g.derivative is None:
        raise ValueError("h_diagonal needs a differentiable growth rate")
    if not alpha > 0.0:
        raise ValueError(f"h_diagonal needs alpha > 0, got {alpha!r}")

    def coefficient(t: float) -> np.ndarray:
        r = alpha * float(g.derivative(t)) / float(g.forward(t))
        return np.array([[-r, 0.0], [0.0, r]])

    def fundamental(t: float) -> np.ndarray:
        h = float(g.forward(t))
        return np.array([[h**-alpha, 0.0], [0.0, h**alpha]])

    return LinearSystem(
        name=f"h_diagonal(alpha={alpha:g}, h={g.name})",
        dim=2,
        coefficient=coefficient,
        lower_endpoint=g.lower_endpoint,
        closed_form_fundamental=fundamental,
    )


def _counterexample(g: GrowthRate, ell: float) -> LinearSystem:
    if g.name != "identity":
        raise ValueError("counterexample is defined for the identity growth rate on (0, +inf)")
    if not 0.0 < ell < 1.0:
        raise ValueError(f"counterexample needs ell in (0, 1), got {ell!r}")
    lo = 1.0 - ell
    hi = 1.0 + ell
    # Continuous bridge between 1/t and -1/t: only the endpoint values are
    # forced; the linear interpolant is the simplest continuous choice and
    # none of the conclusions depend on it.
    phi_lo = 1.0 / lo
    phi_hi = -1.0 / hi
    slope = (phi_hi - phi_lo) / (hi - lo)

    def coefficient(t: float) -> np.ndarray:
        t = float(t)
        if t <= lo:
            a = 1.0 / t
        elif t >= hi:
            a = -1.0 / t
        else:
            a = phi_lo + slope * (t - lo)
        return np.array([[a]])

    def bridge_integral(t: float) -> float:
        # integral of the bridge from lo to t, for t in [lo, hi]
        dt = t - lo
        return phi_lo * dt + 0.5 * slope * dt * dt

    c1 = bridge_integral(1.0)  # integral of a over [lo, 1]

    def log_fundamental(t: float) -> float:
        # F(t) = integral of a over [1, t]; fundamental is exp(F), F(1) = 0
        t = float(t)
        if t <= lo:
            return math.log(t / lo) - c1
        if t >= hi:
            return bridge_integral(hi) - c1 + math.log(hi / t)
        return bridge_integral(t) - c1

    def fundamental(t: float) -> np.ndarray:
        return np.array([[math.exp(log_fundamental(t))]])

    return LinearSystem(
        name=f"counterexample(ell={ell:g})",
        dim=1,
        coefficient=coefficient,
        lower_endpoint=0.0,
        closed_form_fundamental=fundamental,
        breakpoints=(lo, hi),
    )


def _floquet_demo(g: GrowthRate, alpha: float) -> LinearSystem:
    if g.derivative is None:
        raise ValueError("floquet_demo needs a differentiable growth rate")
    if g.lower_endpoint != 0.0:
        raise ValueError("floquet_demo lives on J = (0, +inf)")
    if not alpha > 0.0:
        raise ValueError(f"floquet_demo needs alpha > 0, got {alpha!r}")

    def coefficient(t: float) -> np.ndarray:
        t = float(t)
        return np.array([[-alpha / t, 0.0], [0.0, alpha / t]])

    def fundamental(t: float) -> np.ndarray:
        t = float(t)
        return np.array([[t**-alpha, 0.0], [0.0, t**alpha]])

    return LinearSystem(
        name=f"floquet_demo(alpha={alpha:g})",
        dim=2,
        coefficient=coefficient,
        lower_endpoint=0.0,
        closed_form_fundamental=fundamental,
    )


def make_builtin(kind: str, g: GrowthRate, params: dict) -> LinearSystem:
    """Instantiate a built-in system by name with its parameter map."""
    params = dict(params or {})
    if kind == "h_diagonal":
        return _h_diagonal(g, float(params.pop("alpha", 1.0)))
    if kind == "counterexample":
        return _counterexample(g, float(params.pop("ell", 0.5)))
    if kind == "floquet_demo":
        return _floquet_demo(g, float(params.pop("alpha", 1.0)))
    raise ValueError(f"unknown builtin system {kind!r}; available: {BUILTIN_SYSTEMS}")


def expression_system(
    entries, lower_endpoint: float, name: str = "expression"
) -> LinearSystem:
    """Build a system from a matrix of expression strings in t.

    ``entries`` is an n x n nested list; each entry is parsed with the
    config expression grammar.
    """
    rows = [list(r) for r in entries]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError("expression matrix must be square and nonempty")
    compiled = [[parse_expression(str(e)) for e in row] for row in rows]

    def coefficient(t: float) -> np.ndarray:
        t = float(t)
        return np.array([[fn(t) for fn in row] for row in compiled])

    return LinearSystem(
        name=name,
        dim=n,
        coefficient=coefficient,
        lower_endpoint=float(lower_endpoint),
    )
