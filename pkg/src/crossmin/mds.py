"""Weighted stress, its majorizing quadratic and the SMACOF iteration."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .model import GraphInstance, WeightMatrix, as_layout


def pairwise_distances(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def stress(layout, g: GraphInstance, w: WeightMatrix) -> float:
    """sum_{i<j} w_ij (|X_i - X_j| - d_ij)^2"""
    X = np.asarray(layout, dtype=float)
    r = pairwise_distances(X) - g.distances
    iu = np.triu_indices(g.node_count, 1)
    return float(np.sum(w.w[iu] * r[iu] ** 2))


@dataclass(frozen=True)
class MajorizationContext:
    Lw: np.ndarray
    LZ: np.ndarray
    Z: np.ndarray
    const_term: float
    LZZ: Optional[np.ndarray] = None  # cached LZ @ Z

    def __post_init__(self):
        if self.LZZ is None:
            object.__setattr__(self, "LZZ", self.LZ @ self.Z)


def laplacian(off):
    """Laplacian with the given (already negated) off-diagonal entries."""
    L = off.copy()
    np.fill_diagonal(L, 0.0)
    np.fill_diagonal(L, -L.sum(axis=1))
    return L


def build_majorization(g: GraphInstance, w: WeightMatrix, Z) -> MajorizationContext:
    Z = as_layout(Z, g.node_count)
    D = pairwise_distances(Z)
    inv = np.zeros_like(D)
    nz = D > 0.0
    inv[nz] = 1.0 / D[nz]
    Lw = laplacian(-w.w)
    LZ = laplacian(-w.w * g.distances * inv)
    iu = np.triu_indices(g.node_count, 1)
    const = float(np.sum(w.w[iu] * g.distances[iu] ** 2))
    return MajorizationContext(Lw, LZ, Z, const)


def fstress(layout, ctx: MajorizationContext) -> float:
    """const + Tr(X' Lw X) - 2 Tr(X' LZ Z)"""
    X = np.asarray(layout, dtype=float)
    return float(ctx.const_term + np.sum(X * (ctx.Lw @ X)) - 2.0 * np.sum(X * ctx.LZZ))


def fstress_grad(layout, ctx: MajorizationContext):
    X = np.asarray(layout, dtype=float)
    LwX = ctx.Lw @ X
    val = ctx.const_term + np.sum(X * (LwX - 2.0 * ctx.LZZ))
    return float(val), 2.0 * (LwX - ctx.LZZ)


def lw_pseudo_inverse(Lw):
    """Moore-Penrose inverse of a Laplacian whose kernel is the constant vector.

    Requires a connected weight graph, which holds for w = d^-alpha with
    positive distances.
    """
    n = Lw.shape[0]
    J = np.full((n, n), 1.0 / n)
    return np.linalg.inv(Lw + J) - J


def random_layout(n, seed=0):
    return np.random.default_rng(seed).uniform(0.0, 1.0, size=(n, 2))


def smacof_embed(g: GraphInstance, w: WeightMatrix, init=None, max_iters=500, tol=1e-6, seed=0):
    """Guttman-transform iteration from ``init`` (seeded uniform [0,1]^2 when absent).

    Returns ``(layout, trace)`` where ``trace[t]`` is the stress of iterate t
    (``trace[0]`` the start). Stops when the relative decrease drops below
    ``tol`` or after ``max_iters`` updates. Layouts are kept centred.
    """
    n = g.node_count
    X = random_layout(n, seed) if init is None else as_layout(init, n)
    if n <= 1:
        return np.zeros((n, 2)), [0.0]
    X = X - X.mean(axis=0)
    trace = [stress(X, g, w)]
    if not np.any(X != X[0]):
        # fully collapsed start is a fixed point of the transform; spread it out
        X = 1e-3 * np.median(g.distances) * np.random.default_rng(seed).standard_normal(X.shape)
        X -= X.mean(axis=0)
    cur = trace[0]
    Lw_pinv = lw_pseudo_inverse(laplacian(-w.w))
    wd = w.w * g.distances
    for _ in range(max_iters):
        D = pairwise_distances(X)
        inv = np.zeros_like(D)
        nz = D > 0.0
        inv[nz] = 1.0 / D[nz]
        Xn = Lw_pinv @ (laplacian(-wd * inv) @ X)
        Xn -= Xn.mean(axis=0)
        new = stress(Xn, g, w)
        X = Xn
        trace.append(new)
        if cur - new <= tol * max(cur, 1e-300):
            break
        cur = new
    return X, trace
