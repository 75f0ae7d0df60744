"""Transition-matrix engine: adaptive integration of X' = A(t) X.

Produces transition matrices Phi(t, s) (the solution with Phi(s, s) = I)
by integrating the matrix initial value problem from s to t in either
direction, splitting the path at the system's declared kinks so step
points align with them.

Every requested pair is integrated fresh from its own initial time; the
cache is keyed on exact (t, s) pairs and never interpolates, so results
are identical with or without it and independent of evaluation order.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .errors import IntegrationError
from .growth import GrowthRate, identity_element
from .integrate import integrate_matrix
from .mathtools import worker_count
from .systems import LinearSystem

__all__ = ["TransitionEvaluator"]


class TransitionEvaluator:
    """Evaluates Phi(t, s), fundamental matrices and solutions.

    Parameters
    ----------
    system : LinearSystem
    growth : GrowthRate
        Supplies the interval J and the anchor default.
    rel_tol, abs_tol : float
        Local error control of the embedded RK pair.  Dichotomy constants
        come out of log-ratios of norms, which amplify integration error,
        hence the tight defaults.
    max_step : float
    anchor : float, optional
        Normalization point of ``fundamental``; defaults to the group
        identity of ``growth``.
    """

    def __init__(
        self,
        system: LinearSystem,
        growth: GrowthRate,
        rel_tol: float = 1e-10,
        abs_tol: float = 1e-12,
        max_step: float = math.inf,
        anchor: float | None = None,
    ):
        if not (rel_tol > 0.0 and abs_tol > 0.0 and max_step > 0.0):
            raise ValueError("tolerances and max_step must be positive")
        self.system = system
        self.growth = growth
        self.rel_tol = float(rel_tol)
        self.abs_tol = float(abs_tol)
        self.max_step = float(max_step)
        self.anchor = identity_element(growth) if anchor is None else growth.require(anchor)
        self._cache: dict = {}
        self._lock = threading.Lock()
        self.stats = {"integrations": 0, "steps": 0, "cache_hits": 0}

    @property
    def dim(self) -> int:
        return self.system.dim

    def _require(self, t: float) -> float:
        t = self.growth.require(t)
        if not self.system.contains(t):
            raise IntegrationError(
                f"point {t!r} outside the system domain "
                f"({self.system.lower_endpoint}, +inf)",
                t_from=t,
                t_to=t,
            )
        return t

    def _segments(self, s: float, t: float):
        """Integration waypoints from s to t, aligned with coefficient kinks."""
        cuts = [b for b in self.system.breakpoints if min(s, t) < b < max(s, t)]
        cuts.sort(reverse=s > t)
        return [s] + cuts + [t]

    def transition(self, t: float, s: float) -> np.ndarray:
        """Phi(t, s): the state-transition matrix from time s to time t."""
        t = self._require(t)
        s = self._require(s)
        n = self.system.dim
        if t == s:
            return np.eye(n)
        key = (t, s)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            self.stats["cache_hits"] += 1
            return hit.copy()
        waypoints = self._segments(s, t)
        Y = np.eye(n)
        for lo, hi in zip(waypoints[:-1], waypoints[1:]):
            try:
                Y, info = integrate_matrix(
                    self.system.coefficient,
                    lo,
                    hi,
                    Y,
                    self.rel_tol,
                    self.abs_tol,
                    self.max_step,
                )
            except RuntimeError as exc:
                raise IntegrationError(
                    f"integrating {self.system.name} over [{lo}, {hi}]: {exc}",
                    t_from=lo,
                    t_to=hi,
                ) from exc
            self.stats["integrations"] += 1
            self.stats["steps"] += info["steps"]
        Y.setflags(write=False)
        with self._lock:
            self._cache[key] = Y
        return Y.copy()

    def fundamental(self, t: float) -> np.ndarray:
        """Phi(t) = Phi(t, anchor); the identity at the anchor itself."""
        return self.transition(t, self.anchor)

    def fundamental_grid(self, points) -> np.ndarray:
        """Fundamental matrices at many points, stacked as (m, n, n).

        Points are integrated independently (HDICHO_THREADS caps a worker
        pool), so the stack does not depend on evaluation order.
        """
        pts = [float(p) for p in np.atleast_1d(points)]
        workers = worker_count()
        if workers > 1 and len(pts) > 4:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                mats = list(pool.map(self.fundamental, pts))
        else:
            mats = [self.fundamental(p) for p in pts]
        return np.stack(mats)

    def solve(self, t: float, t0: float, x0) -> np.ndarray:
        """Solution x(t, t0, x0) = Phi(t, t0) x0."""
        x0 = np.asarray(x0, dtype=float)
        return self.transition(t, t0) @ x0

    def clone(self) -> "TransitionEvaluator":
        """Fresh evaluator with the same configuration and an empty cache."""
        return TransitionEvaluator(
            self.system,
            self.growth,
            rel_tol=self.rel_tol,
            abs_tol=self.abs_tol,
            max_step=self.max_step,
            anchor=self.anchor,
        )
