"""Growth rates and the ordered abelian group they induce on time.

A growth rate is a strictly increasing homeomorphism h from an interval
J = (a0, +inf) onto (0, +inf).  Pulling the multiplicative structure of
(0, +inf) back through h turns J into a totally ordered abelian group

    t * s = h^{-1}(h(t) h(s)),

with identity e = h^{-1}(1), inverses, integer powers, an absolute value
and a distance.  With h = exp this degenerates to (R, +); other rates
give nonuniform time scales.  All operations here route through
h-coordinates: compute in (0, +inf), map back exactly once, so no
tolerance is lost to repeated inversion round-trips.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import GrowthDomainError, GroupOverflowError

__all__ = [
    "GrowthRate",
    "PartitionSpec",
    "growth_rate",
    "builtin_growth_names",
    "identity_element",
    "star",
    "star_inverse",
    "star_power",
    "abs_star",
    "dist",
    "in_ball",
    "partition",
]


@dataclass(frozen=True)
class GrowthRate:
    """A strictly increasing homeomorphism h: (a0, +inf) -> (0, +inf).

    ``forward`` and ``inverse`` must be exact closed forms (no numerical
    root finding); ``derivative`` is optional and only needed by the
    generalized Floquet machinery and the built-in diagonal systems.
    All three callables must accept scalars and numpy arrays.
    """

    name: str
    forward: Callable
    inverse: Callable
    derivative: Optional[Callable] = None
    lower_endpoint: float = -math.inf

    def contains(self, t) -> bool:
        t = float(t)
        return math.isfinite(t) and t > self.lower_endpoint

    def require(self, t) -> float:
        """Validate a time point against J, returning it as a float."""
        t = float(t)
        if not self.contains(t):
            raise GrowthDomainError(
                f"point {t!r} outside J = ({self.lower_endpoint}, +inf) "
                f"of growth rate {self.name!r}"
            )
        return t


def _from_h(g: GrowthRate, value: float) -> float:
    """Map an h-coordinate back to J, rejecting over/underflow."""
    if value == 0.0 or math.isinf(value) or math.isnan(value):
        raise GroupOverflowError(
            f"h-coordinate {value!r} left (0, +inf); group result not "
            f"representable for growth rate {g.name!r}"
        )
    return float(g.inverse(value))


def identity_element(g: GrowthRate) -> float:
    """The group identity e = h^{-1}(1)."""
    return float(g.inverse(1.0))


def star(g: GrowthRate, t: float, s: float) -> float:
    """Group operation t * s = h^{-1}(h(t) h(s))."""
    t = g.require(t)
    s = g.require(s)
    return _from_h(g, float(g.forward(t)) * float(g.forward(s)))


def star_inverse(g: GrowthRate, t: float) -> float:
    """Group inverse h^{-1}(1 / h(t))."""
    t = g.require(t)
    return _from_h(g, 1.0 / float(g.forward(t)))


def star_power(g: GrowthRate, t: float, k: int) -> float:
    """Integer group power, h(t^{*k}) = h(t)^k.

    Overflow and underflow of h(t)^k are reported, never saturated:
    partition endpoints are built from powers, and a silently clamped
    endpoint corrupts every grid downstream.
    """
    t = g.require(t)
    k = int(k)
    if k == 0:
        return identity_element(g)
    h = float(g.forward(t))
    try:
        hk = math.pow(h, k)
    except OverflowError as exc:
        raise GroupOverflowError(
            f"h(t)^k = {h!r}**{k} overflows the floating range"
        ) from exc
    return _from_h(g, hk)


def abs_star(g: GrowthRate, t: float) -> float:
    """Group absolute value: t itself if t >= e, its inverse otherwise."""
    t = g.require(t)
    if t >= identity_element(g):
        return t
    return star_inverse(g, t)


def dist(g: GrowthRate, t: float, s: float) -> float:
    """Group distance d(t, s) = |t * s^{-1}|, valued in [e, +inf)."""
    t = g.require(t)
    s = g.require(s)
    ratio = float(g.forward(t)) / float(g.forward(s))
    if ratio < 1.0:
        ratio = 1.0 / ratio
    return _from_h(g, ratio)


def in_ball(g: GrowthRate, t: float, s: float, L: float) -> bool:
    """Whether d(t, s) <= L, i.e. 1/h(L) <= h(t)/h(s) <= h(L).

    ``L`` must exceed the identity element so the ball is nondegenerate.
    """
    t = g.require(t)
    s = g.require(s)
    L = g.require(L)
    if L <= identity_element(g):
        raise ValueError(f"ball radius L = {L!r} must exceed the identity element")
    hL = float(g.forward(L))
    ratio = float(g.forward(t)) / float(g.forward(s))
    return 1.0 / hL <= ratio <= hL


@dataclass(frozen=True)
class PartitionSpec:
    """Uniform partition data: anchor point, mesh T > e, power range."""

    anchor: float
    mesh: float
    k_min: int
    k_max: int


def partition(g: GrowthRate, spec: PartitionSpec) -> list[float]:
    """Points anchor * T^{*k} for k = k_min .. k_max, ascending.

    Consecutive points are at group distance exactly T, so the cells they
    bound form a uniform partition in the group metric.
    """
    s = g.require(spec.anchor)
    T = g.require(spec.mesh)
    if T <= identity_element(g):
        raise ValueError(f"partition mesh T = {T!r} must exceed the identity element")
    if spec.k_min > spec.k_max:
        raise ValueError("empty power range")
    hs = float(g.forward(s))
    hT = float(g.forward(T))
    points = []
    for k in range(spec.k_min, spec.k_max + 1):
        try:
            hk = hs * math.pow(hT, k)
        except OverflowError as exc:
            raise GroupOverflowError(
                f"partition point escapes the floating range at k={k}"
            ) from exc
        points.append(_from_h(g, hk))
    return points


# ---------------------------------------------------------------------------
# Built-in growth rates, addressable by name from configs and the CLI.
# ---------------------------------------------------------------------------


def _make_exp() -> GrowthRate:
    return GrowthRate("exp", np.exp, np.log, np.exp, lower_endpoint=-math.inf)


def _make_identity() -> GrowthRate:
    return GrowthRate(
        "identity",
        lambda t: 1.0 * t,
        lambda u: 1.0 * u,
        lambda t: 0.0 * t + 1.0,
        lower_endpoint=0.0,
    )


def _make_power(p: float) -> GrowthRate:
    if not p > 0.0:
        raise ValueError(f"power growth rate needs exponent p > 0, got {p!r}")
    return GrowthRate(
        f"power:{p:g}",
        lambda t: t**p,
        lambda u: u ** (1.0 / p),
        lambda t: p * t ** (p - 1.0),
        lower_endpoint=0.0,
    )


def _make_expm1() -> GrowthRate:
    return GrowthRate("expm1", np.expm1, np.log1p, np.exp, lower_endpoint=0.0)


def builtin_growth_names() -> list[str]:
    return ["exp", "identity", "power:<p>", "expm1"]


def growth_rate(name: str) -> GrowthRate:
    """Look up a built-in growth rate by name (e.g. "exp", "power:3")."""
    if name == "exp":
        return _make_exp()
    if name == "identity":
        return _make_identity()
    if name == "expm1":
        return _make_expm1()
    if name.startswith("power:"):
        try:
            p = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise ValueError(f"malformed power growth rate name {name!r}") from exc
        return _make_power(p)
    raise ValueError(
        f"unknown growth rate {name!r}; built-ins: {', '.join(builtin_growth_names())}"
    )
