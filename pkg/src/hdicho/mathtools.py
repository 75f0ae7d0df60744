"""Shared numerical helpers: operator norms, ranks, subspaces, grids.

Matrix norms are the operator norm induced by the Euclidean vector norm
throughout the toolkit.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .errors import RankAmbiguityError
from .growth import GrowthRate

__all__ = [
    "opnorm",
    "opnorm_many",
    "pair_norms",
    "numerical_rank",
    "orth_basis",
    "orth_projector",
    "containment_sin",
    "unit_directions",
    "geometric_grid",
    "worker_count",
]

GRID_FLOOR_H = 1e-6  # default clamp in h-coordinates near the endpoint a0


def opnorm(M) -> float:
    """Spectral norm of a single matrix."""
    M = np.asarray(M, dtype=float)
    if M.size == 1:
        return abs(float(M.reshape(())))
    return float(np.linalg.norm(M, 2))


def opnorm_many(stack: np.ndarray) -> np.ndarray:
    """Spectral norms over the last two axes of a stacked array."""
    stack = np.asarray(stack, dtype=float)
    if stack.shape[-1] == 1 and stack.shape[-2] == 1:
        return np.abs(stack[..., 0, 0])
    return np.linalg.svd(stack, compute_uv=False)[..., 0]


def pair_norms(left: np.ndarray, right: np.ndarray, chunk: int = 128) -> np.ndarray:
    """Norms ||left[i] @ right[j]|| for all pairs, as an (m, m) array.

    Chunked over i to bound the (chunk, m, n, n) intermediate.
    """
    m = left.shape[0]
    out = np.empty((m, right.shape[0]))
    for start in range(0, m, chunk):
        stop = min(start + chunk, m)
        prod = np.einsum("ipq,jqr->ijpr", left[start:stop], right)
        out[start:stop] = opnorm_many(prod)
    return out


def numerical_rank(M, tol: float = 1e-8, ambiguity_factor: float = 10.0) -> int:
    """Rank by singular-value threshold, flagging near-threshold values.

    A singular value within ``ambiguity_factor`` of ``tol`` on either side
    makes the count unreliable and raises instead of guessing.
    """
    sigmas = np.linalg.svd(np.atleast_2d(np.asarray(M, dtype=float)), compute_uv=False)
    near = (sigmas > tol / ambiguity_factor) & (sigmas < tol * ambiguity_factor)
    if np.any(near):
        raise RankAmbiguityError(
            f"singular value {sigmas[near][0]:.3e} too close to rank threshold {tol:.1e}"
        )
    return int(np.sum(sigmas >= tol))


def orth_basis(vectors: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) of the span of the given columns."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vectors.shape[1] == 0:
        return vectors
    q, r = np.linalg.qr(vectors)
    keep = np.abs(np.diag(r)) > 1e-12 * max(1.0, float(np.abs(r).max()))
    return q[:, keep]


def orth_projector(basis: np.ndarray, n: int) -> np.ndarray:
    """Orthogonal projector onto the column span of ``basis``."""
    if basis.size == 0:
        return np.zeros((n, n))
    b = orth_basis(basis)
    return b @ b.T


def containment_sin(inner: np.ndarray, outer: np.ndarray, n: int) -> float:
    """Sine of the largest principal angle of span(inner) out of span(outer).

    Zero iff span(inner) is contained in span(outer); 0 by convention for
    an empty inner subspace.
    """
    if inner.size == 0:
        return 0.0
    b = orth_basis(inner)
    proj = orth_projector(outer, n)
    return opnorm((np.eye(n) - proj) @ b)


def unit_directions(n: int, count: int | None = None, seed: int = 0) -> np.ndarray:
    """Deterministic unit-direction sample, shaped (d, n).

    n = 1 uses the two signs, n = 2 an angular grid (720 points by
    default), n >= 3 a scrambled-Sobol sphere sample (2000 points by
    default) fixed by ``seed``.  The seed only affects the n >= 3 case.
    """
    if n == 1:
        return np.array([[1.0], [-1.0]])
    if n == 2:
        count = 720 if count is None else int(count)
        angles = np.arange(count) * (2.0 * math.pi / count)
        return np.column_stack([np.cos(angles), np.sin(angles)])
    count = 2000 if count is None else int(count)
    from scipy.stats import qmc

    sampler = qmc.Sobol(d=n, scramble=True, seed=int(seed))
    u = sampler.random_base2(max(1, math.ceil(math.log2(count))))[:count]
    # map to the sphere through the Gaussian inverse CDF
    from scipy.special import ndtri

    z = ndtri(np.clip(u, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(z, axis=1)
    norms[norms == 0.0] = 1.0
    return z / norms[:, None]


def geometric_grid(
    g: GrowthRate,
    h_lo: float,
    h_hi: float,
    points_per_decade: float = 200.0,
    min_points: int = 2,
    floor_h: float = GRID_FLOOR_H,
) -> np.ndarray:
    """Grid of J-points uniform in ln h, the group's natural spacing.

    The lower end is clamped at ``floor_h`` in h-coordinates to stay away
    from the singular endpoint a0.
    """
    h_lo = max(float(h_lo), floor_h)
    h_hi = float(h_hi)
    if not h_hi > h_lo > 0.0:
        raise ValueError(f"need 0 < h_lo < h_hi after flooring, got ({h_lo}, {h_hi})")
    decades = math.log10(h_hi / h_lo)
    npts = max(min_points, int(math.ceil(decades * points_per_decade)) + 1)
    lh = np.linspace(math.log(h_lo), math.log(h_hi), npts)
    return np.asarray(g.inverse(np.exp(lh)), dtype=float)


def worker_count() -> int:
    """Worker cap from HDICHO_THREADS (default 1, i.e. serial)."""
    raw = os.environ.get("HDICHO_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1
