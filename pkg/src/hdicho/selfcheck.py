"""Randomized self-test of the group algebra for a configured growth rate.

Backs the ``group-selftest`` CLI command: samples points uniformly in
ln h, exercises every group identity and reports the worst relative
deviation per law (relative in h-coordinates, where the identities are
exact).
"""

from __future__ import annotations

import numpy as np

from .growth import (
    GrowthRate,
    PartitionSpec,
    abs_star,
    dist,
    identity_element,
    partition,
    star,
    star_inverse,
    star_power,
)

REL_TOL = 1e-10


def _rel(err: float, scale: float) -> float:
    return err / max(scale, 1e-300)


def group_selftest(g: GrowthRate, seed: int = 0, samples: int = 1000) -> dict:
    """Run the group-law property suite; returns per-law worst deviations."""
    rng = np.random.default_rng(seed)
    h_vals = 10.0 ** rng.uniform(-3.0, 3.0, size=(samples, 3))
    pts = np.asarray(g.inverse(h_vals), dtype=float)
    e_star = identity_element(g)
    worst = {
        "round_trip": 0.0,
        "group_law": 0.0,
        "commutativity": 0.0,
        "associativity": 0.0,
        "inverse": 0.0,
        "power_law": 0.0,
        "group3": 0.0,
        "triangle": 0.0,
        "distance_symmetry": 0.0,
        "partition_spacing": 0.0,
    }
    order_ok = True
    for t, s, r in pts:
        ht, hs = float(g.forward(t)), float(g.forward(s))
        worst["round_trip"] = max(
            worst["round_trip"],
            abs(float(g.inverse(ht)) - t) / (1.0 + abs(t)),
        )
        ts = star(g, t, s)
        worst["group_law"] = max(
            worst["group_law"], _rel(abs(float(g.forward(ts)) - ht * hs), ht * hs)
        )
        worst["commutativity"] = max(
            worst["commutativity"],
            _rel(abs(float(g.forward(star(g, s, t))) - float(g.forward(ts))), ht * hs),
        )
        lhs = float(g.forward(star(g, ts, r)))
        rhs = float(g.forward(star(g, t, star(g, s, r))))
        worst["associativity"] = max(worst["associativity"], _rel(abs(lhs - rhs), abs(rhs)))
        worst["inverse"] = max(
            worst["inverse"], abs(float(g.forward(star(g, t, star_inverse(g, t)))) - 1.0)
        )
        k = int(rng.integers(-5, 6))
        worst["power_law"] = max(
            worst["power_law"],
            _rel(abs(float(g.forward(star_power(g, t, k))) - ht**k), abs(ht**k)),
        )
        order_ok = order_ok and ((t <= s) == (ht <= hs))
        left = float(g.forward(star_inverse(g, star(g, t, star_inverse(g, s)))))
        right = float(g.forward(star(g, s, star_inverse(g, t))))
        worst["group3"] = max(worst["group3"], _rel(abs(left - right), abs(right)))
        tri = float(g.forward(abs_star(g, ts)))
        bound = float(g.forward(abs_star(g, t))) * float(g.forward(abs_star(g, s)))
        worst["triangle"] = max(worst["triangle"], _rel(max(0.0, tri - bound), bound))
        worst["distance_symmetry"] = max(
            worst["distance_symmetry"],
            _rel(
                abs(float(g.forward(dist(g, t, s))) - float(g.forward(dist(g, s, t)))),
                float(g.forward(dist(g, s, t))),
            ),
        )
    T = float(g.inverse(2.0))
    points = partition(g, PartitionSpec(anchor=e_star, mesh=T, k_min=-3, k_max=3))
    for a, b in zip(points[:-1], points[1:]):
        worst["partition_spacing"] = max(
            worst["partition_spacing"],
            _rel(abs(float(g.forward(dist(g, b, a))) - 2.0), 2.0),
        )
    ok = order_ok and all(v <= REL_TOL for v in worst.values())
    return {
        "growth_rate": g.name,
        "samples": samples,
        "seed": seed,
        "worst_relative_deviation": worst,
        "order_compatible": order_ok,
        "tolerance": REL_TOL,
        "ok": ok,
    }
