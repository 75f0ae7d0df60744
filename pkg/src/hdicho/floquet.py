"""Generalized Floquet machinery: monodromy, multipliers, hyperbolicity.

A system is generalized Floquet with respect to the group translation
f(t) = t * T when its coefficient satisfies

    (h'(t) h(T) / h'(t*T)) A(t*T) = A(t)   for all t,

the h-analogue of T-periodicity (with h = exp it reads A(t+T) = A(t)).
For such systems the fundamental matrix normalized at the identity obeys
Phi(t*T) = Phi(t) V with the monodromy matrix V = Phi(T); the eigenvalue
positions of V relative to the unit circle decide the uniform
h-dichotomy on all of J, with explicit constants built from a discrete
dichotomy of the power iteration x_{n+1} = V x_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .dichotomy import ConstantProjector, constant_projector
from .errors import GfsViolationError, SpectrumError
from .evaluator import TransitionEvaluator
from .growth import GrowthRate, identity_element, star
from .mathtools import geometric_grid, opnorm, opnorm_many, unit_directions
from .systems import LinearSystem

__all__ = [
    "FloquetContext",
    "MonodromyReport",
    "FloquetConstants",
    "HyperbolicityDecision",
    "PeriodicityResiduals",
    "StabilityAudit",
    "gfs_residual",
    "monodromy",
    "periodicity_residuals",
    "hyperbolicity_decide",
    "spectral_projector",
    "floquet_constants",
    "stability_audit",
]


@dataclass
class FloquetContext:
    """Growth rate, translation length T > e and an evaluator anchored at e."""

    growth: GrowthRate
    T: float
    ev: TransitionEvaluator

    def __post_init__(self):
        if self.growth.derivative is None:
            raise ValueError("generalized Floquet analysis needs a differentiable growth rate")
        self.T = self.growth.require(self.T)
        e_star = identity_element(self.growth)
        if not self.T > e_star:
            raise ValueError(f"T = {self.T!r} must exceed the identity element {e_star!r}")
        if self.ev.anchor != e_star:
            raise ValueError(
                "evaluator must be anchored at the identity element so that "
                "the fundamental matrix satisfies Phi(e) = I"
            )

    def translate(self, t: float) -> float:
        return star(self.growth, t, self.T)


def gfs_residual(system: LinearSystem, g: GrowthRate, T: float, grid) -> float:
    """Sup over the grid of the normalized generalized-Floquet defect.

    Residual at t: ||(h'(t) h(T) / h'(t*T)) A(t*T) - A(t)|| / (1 + ||A(t)||).
    """
    if g.derivative is None:
        raise ValueError("gfs_residual needs a differentiable growth rate")
    T = g.require(T)
    hT = float(g.forward(T))
    worst = 0.0
    for t in np.atleast_1d(grid):
        t = g.require(t)
        tT = star(g, t, T)
        factor = float(g.derivative(t)) * hT / float(g.derivative(tT))
        A_t = np.asarray(system.coefficient(t), dtype=float)
        A_tT = np.asarray(system.coefficient(tT), dtype=float)
        defect = opnorm(factor * A_tT - A_t) / (1.0 + opnorm(A_t))
        worst = max(worst, defect)
    return worst


@dataclass
class MonodromyReport:
    """Monodromy matrix V = Phi(T), its multipliers and the circle gap."""

    V: np.ndarray
    multipliers: np.ndarray  # complex eigenvalues
    circle_gap: float
    hyperbolic: bool
    stable_dim: int
    spectral_projector: Optional[ConstantProjector]
    gfs_residual: float
    circle_tol: float
    T: float

    def to_dict(self) -> dict:
        return {
            "V": self.V.tolist(),
            "multipliers": [
                {"re": float(m.real), "im": float(m.imag), "modulus": float(abs(m))}
                for m in self.multipliers
            ],
            "circle_gap": self.circle_gap,
            "hyperbolic": self.hyperbolic,
            "stable_dim": self.stable_dim,
            "spectral_projector": (
                self.spectral_projector.to_dict() if self.spectral_projector else None
            ),
            "gfs_residual": self.gfs_residual,
            "circle_tol": self.circle_tol,
            "T": self.T,
        }


def _default_gfs_grid(ctx: FloquetContext, points: int = 101) -> np.ndarray:
    hT = float(ctx.growth.forward(ctx.T))
    return geometric_grid(
        ctx.growth, hT**-2, hT**2, points_per_decade=1.0, min_points=points
    )


def monodromy(
    ctx: FloquetContext,
    gfs_grid=None,
    gfs_threshold: float = 1e-6,
    circle_tol: float = 1e-6,
) -> MonodromyReport:
    """Compute V = Phi(T) after enforcing the generalized Floquet identity.

    V is only a monodromy matrix when the identity holds, so a residual
    above ``gfs_threshold`` raises instead of returning a meaningless V.
    """
    if gfs_grid is None:
        gfs_grid = _default_gfs_grid(ctx)
    residual = gfs_residual(ctx.ev.system, ctx.growth, ctx.T, gfs_grid)
    if residual > gfs_threshold:
        raise GfsViolationError(residual, gfs_threshold)
    V = ctx.ev.fundamental(ctx.T)
    multipliers = np.linalg.eigvals(V)
    moduli = np.abs(multipliers)
    circle_gap = float(np.min(np.abs(moduli - 1.0)))
    hyperbolic = circle_gap > circle_tol
    stable_dim = int(np.sum(moduli < 1.0))
    projector = spectral_projector(V, circle_tol) if hyperbolic else None
    return MonodromyReport(
        V=V,
        multipliers=multipliers,
        circle_gap=circle_gap,
        hyperbolic=hyperbolic,
        stable_dim=stable_dim,
        spectral_projector=projector,
        gfs_residual=residual,
        circle_tol=circle_tol,
        T=ctx.T,
    )


def spectral_projector(V, tol: float = 1e-6) -> ConstantProjector:
    """Spectral projector of V onto the invariant subspace with |rho| < 1.

    Real ordered Schur form with the interior block leading; the
    off-diagonal coupling is removed with a Sylvester solve, which yields
    the genuine (oblique) spectral projector, so it commutes with V even
    for non-normal V.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    moduli = np.abs(np.linalg.eigvals(V))
    if np.min(np.abs(moduli - 1.0)) <= tol:
        raise SpectrumError(
            "spectral projector undefined: a multiplier sits on the unit circle "
            f"at tolerance {tol:g}"
        )
    try:
        T_schur, Z, sdim = scipy.linalg.schur(V, output="real", sort="iuc")
    except scipy.linalg.LinAlgError as exc:
        raise SpectrumError(f"Schur reordering failed: {exc}") from exc
    if sdim == 0:
        return constant_projector(np.zeros((n, n)), idem_tol=1e-8)
    if sdim == n:
        return constant_projector(np.eye(n), idem_tol=1e-8)
    T11 = T_schur[:sdim, :sdim]
    T12 = T_schur[:sdim, sdim:]
    T22 = T_schur[sdim:, sdim:]
    Y = scipy.linalg.solve_sylvester(T11, -T22, T12)
    P_hat = np.zeros((n, n))
    P_hat[:sdim, :sdim] = np.eye(sdim)
    P_hat[:sdim, sdim:] = Y
    return constant_projector(Z @ P_hat @ Z.T, idem_tol=1e-8)


@dataclass
class PeriodicityResiduals:
    """Sup-norm residuals of the translation identities of the flow."""

    biperiodicity: float
    power_identity: float
    multiplier_solution: float

    def to_dict(self) -> dict:
        return {
            "biperiodicity": self.biperiodicity,
            "power_identity": self.power_identity,
            "multiplier_solution": self.multiplier_solution,
        }


def periodicity_residuals(
    ctx: FloquetContext, grid, n_max: int = 3, pair_points: int = 8
) -> PeriodicityResiduals:
    """Residuals of Phi(t*T, s*T) = Phi(t, s), Phi(t*T^n) = Phi(t) V^n and
    x(t*T) = rho x(t) along multiplier eigensolutions."""
    g = ctx.growth
    ev = ctx.ev
    pts = np.asarray([g.require(p) for p in np.atleast_1d(grid)], dtype=float)
    V = ev.fundamental(ctx.T)

    sub = pts[:: max(1, pts.size // pair_points)]
    biper = 0.0
    for i, t in enumerate(sub):
        for s in sub[: i + 1]:
            lhs = ev.transition(ctx.translate(t), ctx.translate(s))
            biper = max(biper, opnorm(lhs - ev.transition(t, s)))

    power = 0.0
    for t in sub:
        Vn = np.eye(ev.dim)
        shifted = t
        for _ in range(int(n_max) + 1):
            power = max(power, opnorm(ev.fundamental(shifted) - ev.fundamental(t) @ Vn))
            Vn = Vn @ V
            shifted = ctx.translate(shifted)

    mult = 0.0
    eigvals, eigvecs = np.linalg.eig(V)
    for rho, xi in zip(eigvals, eigvecs.T):
        xi = xi / np.linalg.norm(xi)
        for t in pts:
            x_t = ev.fundamental(t) @ xi
            x_tT = ev.fundamental(ctx.translate(t)) @ xi
            mult = max(mult, float(np.linalg.norm(x_tT - rho * x_t)))
    return PeriodicityResiduals(biper, power, mult)


@dataclass
class HyperbolicityDecision:
    verdict: str  # dichotomy | no_dichotomy | marginal
    circle_gap: float
    tol: float
    witness_multiplier: Optional[complex] = None
    witness_direction: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "circle_gap": self.circle_gap,
            "tol": self.tol,
            "witness_multiplier": (
                None
                if self.witness_multiplier is None
                else {
                    "re": float(self.witness_multiplier.real),
                    "im": float(self.witness_multiplier.imag),
                    "modulus": float(abs(self.witness_multiplier)),
                }
            ),
            "witness_direction": (
                None
                if self.witness_direction is None
                else [
                    {"re": float(v.real), "im": float(v.imag)}
                    for v in self.witness_direction
                ]
            ),
        }


def hyperbolicity_decide(report: MonodromyReport, tol: float = 1e-6) -> HyperbolicityDecision:
    """Decide the uniform h-dichotomy from the multiplier moduli.

    A multiplier within ``tol`` of the circle means no dichotomy; the
    eigendirection is returned as the bounded-solution witness (its
    solution satisfies x(t*T) = rho x(t) with |rho| ~ 1).  Gaps within a
    factor 10 of ``tol`` are flagged marginal rather than certified.
    """
    moduli = np.abs(report.multipliers)
    gap = float(np.min(np.abs(moduli - 1.0)))
    if gap <= tol:
        k = int(np.argmin(np.abs(moduli - 1.0)))
        eigvals, eigvecs = np.linalg.eig(report.V)
        j = int(np.argmin(np.abs(eigvals - report.multipliers[k])))
        xi = eigvecs[:, j]
        return HyperbolicityDecision(
            verdict="no_dichotomy",
            circle_gap=gap,
            tol=tol,
            witness_multiplier=complex(report.multipliers[k]),
            witness_direction=xi / np.linalg.norm(xi),
        )
    if gap <= 10.0 * tol:
        return HyperbolicityDecision(verdict="marginal", circle_gap=gap, tol=tol)
    return HyperbolicityDecision(verdict="dichotomy", circle_gap=gap, tol=tol)


@dataclass
class FloquetConstants:
    """Discrete dichotomy constants of V and the continuous pair they induce.

    The discrete exponent is named ``a`` to keep it apart from the
    continuous dichotomy exponent alpha_tilde = a / ln h(T).
    """

    K0: float
    a: float
    K1: float
    K2: float
    K: float
    alpha_tilde: float

    def to_dict(self) -> dict:
        return {
            "K0": self.K0,
            "a": self.a,
            "K1": self.K1,
            "K2": self.K2,
            "K": self.K,
            "alpha_tilde": self.alpha_tilde,
        }


def floquet_constants(
    ctx: FloquetContext,
    report: MonodromyReport,
    N: int = 20,
    u_grid=None,
) -> FloquetConstants:
    """Fit the discrete constants of x_{n+1} = V x_n and convert them.

    (K0, a) are the tightest grid constants with ||V^n P V^{-k}|| bounded
    by K0 e^{-a(n-k)} over |n|, |k| <= N (P commutes with V, so only the
    difference m = n - k matters); K1, K2 are grid maxima of ||Phi(u)||
    and ||Phi(u)^{-1}|| on [e, T].  The continuous pair is
    K = K0 K1 K2 e^a and alpha_tilde = a / ln h(T).
    """
    if not report.hyperbolic or report.spectral_projector is None:
        raise SpectrumError("floquet_constants needs a hyperbolic monodromy report")
    if N < 5:
        raise ValueError("N must be at least 5")
    V = report.V
    P = report.spectral_projector.matrix
    n = V.shape[0]
    Q = np.eye(n) - P
    Vinv = np.linalg.inv(V)

    m_max = 2 * int(N)
    r_P = np.empty(m_max + 1)
    r_Q = np.empty(m_max + 1)
    W = np.eye(n)
    Winv = np.eye(n)
    for m in range(m_max + 1):
        r_P[m] = opnorm(W @ P)
        r_Q[m] = opnorm(Winv @ Q)
        W = V @ W
        Winv = Vinv @ Winv

    slopes = []
    ms = np.arange(1, m_max + 1)
    for r in (r_P, r_Q):
        vals = r[1:]
        mask = vals > 0.0
        if np.any(mask):
            slopes.append(np.min(-np.log(vals[mask]) / ms[mask]))
    a = float(min(slopes)) if slopes else -math.inf
    if a <= 0.0:
        # transient growth can hide the decay at small m; refit on the tail
        slopes = []
        tail = ms >= N
        for r in (r_P, r_Q):
            vals = r[1:]
            mask = tail & (vals > 0.0)
            if np.any(mask):
                slopes.append(np.min(-np.log(vals[mask]) / ms[mask]))
        a = float(min(slopes)) if slopes else -math.inf
        if a <= 0.0:
            raise SpectrumError("no discrete decay detected; V is not hyperbolic enough")
    grow = np.exp(a * np.arange(m_max + 1))
    K0 = max(1.0, float(np.max(r_P * grow)), float(np.max(r_Q * grow)))

    g = ctx.growth
    if u_grid is None:
        u_grid = geometric_grid(
            g, 1.0, float(g.forward(ctx.T)), points_per_decade=1.0, min_points=1000
        )
    Phi = ctx.ev.fundamental_grid(u_grid)
    K1 = float(np.max(opnorm_many(Phi)))
    K2 = float(np.max(opnorm_many(np.linalg.inv(Phi))))
    K = K0 * K1 * K2 * math.exp(a)
    alpha_tilde = a / math.log(float(g.forward(ctx.T)))
    return FloquetConstants(K0=K0, a=a, K1=K1, K2=K2, K=K, alpha_tilde=alpha_tilde)


@dataclass
class StabilityAudit:
    mode: str  # stable | unstable
    passed: bool
    worst_margin: float
    witness: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "passed": self.passed,
            "worst_margin": self.worst_margin,
            "witness": self.witness,
        }


def stability_audit(
    ctx: FloquetContext,
    report: MonodromyReport,
    constants: FloquetConstants,
    grid,
    directions: Optional[np.ndarray] = None,
    seed: int = 0,
    slack_tol: float = 1e-8,
) -> StabilityAudit:
    """Audit uniform h-stability or h-instability of the origin.

    Applicable only when all multipliers sit strictly inside (stable) or
    strictly outside (unstable) the unit circle; checks the contraction
    bound |x(t)| <= K ratio^{-alpha} |x0| (or its expansion mirror) over
    all ordered grid pairs and sampled initial directions.
    """
    moduli = np.abs(report.multipliers)
    if np.all(moduli < 1.0):
        mode = "stable"
    elif np.all(moduli > 1.0):
        mode = "unstable"
    else:
        raise SpectrumError(
            "stability audit inapplicable: multipliers straddle the unit circle"
        )
    ev = ctx.ev
    g = ctx.growth
    pts = np.asarray([g.require(p) for p in np.atleast_1d(grid)], dtype=float)
    if directions is None:
        directions = unit_directions(ev.dim, seed=seed)
    lh = np.log(np.asarray(g.forward(pts), dtype=float))
    Phi = ev.fundamental_grid(pts)
    vals = np.einsum("pij,dj->pdi", Phi, directions)
    norms = np.linalg.norm(vals, axis=2)  # |Phi(t) xi|
    lnK = math.log(constants.K)
    at = constants.alpha_tilde

    worst = math.inf
    witness = None
    with np.errstate(divide="ignore"):
        lnorms = np.log(norms)
    for j in range(pts.size):  # t0 index
        for i in range(j, pts.size):  # t >= t0
            lr = lh[i] - lh[j]
            # |x(t)| / |x0| with x0 = Phi(t0) xi: log ratio of the two rows
            lratio = lnorms[i] - lnorms[j]
            if mode == "stable":
                margins = lnK - at * lr - lratio
            else:
                margins = lratio - (at * lr - lnK)
            d = int(np.argmin(margins))
            if margins[d] < worst:
                worst = float(margins[d])
                witness = {
                    "t": float(pts[i]),
                    "t0": float(pts[j]),
                    "direction": directions[d].tolist(),
                    "margin": float(margins[d]),
                }
    return StabilityAudit(
        mode=mode,
        passed=worst >= -slack_tol,
        worst_margin=worst,
        witness=witness if worst < -slack_tol else None,
    )
