"""Soft-margin hyperplane separation of two convex point sets.

Two convex hulls are disjoint exactly when some ``(u, gamma)`` satisfies
``A u - gamma >= 1`` and ``B u - gamma <= -1``. The squared-hinge relaxation

    f(u, gamma) = |(-A u + (gamma + 1))_+|^2 + |(B u - (gamma - 1))_+|^2

therefore has minimum 0 for disjoint hulls. When the hulls share a point the
minimum is at least 2: writing the common point with convex weights on both
sides forces the weighted hinge sums to add up to 2.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from . import kernels
from .optim import minimize

TAU_SEP = 1e-6
MARGIN_TOL = 1e-6


@dataclass(frozen=True)
class SeparationResult:
    u: np.ndarray
    gamma: float
    violation: float
    separated: bool
    converged: bool = True


def _points(P):
    P = np.asarray(P, dtype=float)
    if P.ndim == 1:
        P = P.reshape(1, -1)
    if P.ndim != 2 or P.shape[1] != 2 or P.shape[0] < 1:
        raise ValueError(f"expected a (v, 2) array of extreme points, got shape {P.shape}")
    if not np.all(np.isfinite(P)):
        raise ValueError("extreme points must be finite")
    return P


def separation_objective(A, B, u, gamma) -> float:
    A, B = _points(A), _points(B)
    u = np.asarray(u, dtype=float)
    ha = np.maximum(-A @ u + gamma + 1.0, 0.0)
    hb = np.maximum(B @ u - gamma + 1.0, 0.0)
    return float(ha @ ha + hb @ hb)


def separation_gradient(A, B, u, gamma):
    """Value and gradient of the objective w.r.t. the stacked ``(u0, u1, gamma)``."""
    A, B = _points(A), _points(B)
    u = np.asarray(u, dtype=float)
    ha = np.maximum(-A @ u + gamma + 1.0, 0.0)
    hb = np.maximum(B @ u - gamma + 1.0, 0.0)
    g = np.empty(3)
    g[:2] = 2.0 * (B.T @ hb - A.T @ ha)
    g[2] = 2.0 * (ha.sum() - hb.sum())
    return float(ha @ ha + hb @ hb), g


def cold_start(A, B):
    """Centroid direction, midpoint offset, scaled so the worst margin has unit size."""
    A, B = _points(A), _points(B)
    ca, cb = A.mean(axis=0), B.mean(axis=0)
    v = ca - cb
    norm = np.hypot(*v)
    if norm == 0.0:
        return np.array([1.0, 0.0, 0.0])
    v = v / norm
    gamma = v @ (0.5 * (ca + cb))
    worst = min(np.min(A @ v - gamma), np.min(gamma - B @ v))
    scale = 1.0 / abs(worst) if abs(worst) > 1e-300 else 1.0
    return np.array([v[0] * scale, v[1] * scale, gamma * scale])


def cold_start_batch(P, Q):
    """Vectorized :func:`cold_start` over stacked point sets ``(K, v, 2)``."""
    ca, cb = P.mean(axis=1), Q.mean(axis=1)
    v = ca - cb
    norm = np.hypot(v[:, 0], v[:, 1])
    out = np.zeros((len(P), 3))
    out[:, 0] = 1.0
    ok = norm > 0.0
    if ok.any():
        vv = v[ok] / norm[ok, None]
        gam = np.einsum("kc,kc->k", vv, 0.5 * (ca[ok] + cb[ok]))
        ma = np.einsum("kac,kc->ka", P[ok], vv).min(axis=1) - gam
        mb = gam - np.einsum("kbc,kc->kb", Q[ok], vv).max(axis=1)
        worst = np.abs(np.minimum(ma, mb))
        scale = np.where(worst > 1e-300, 1.0 / np.where(worst > 1e-300, worst, 1.0), 1.0)
        out[ok, 0] = vv[:, 0] * scale
        out[ok, 1] = vv[:, 1] * scale
        out[ok, 2] = gam * scale
    return out


def solve_separation(A, B, warm=None, tau=TAU_SEP, grad_tol=kernels.SEP_GTOL,
                     f_tol=kernels.SEP_FTOL, max_iters=500) -> SeparationResult:
    """Minimize the squared-hinge objective over ``(u, gamma)``.

    ``warm`` is an optional ``(u, gamma)`` starting point; otherwise
    :func:`cold_start` is used. Stops once the objective is below ``f_tol`` or
    the gradient is below ``grad_tol``.
    """
    A, B = _points(A), _points(B)
    x0 = cold_start(A, B) if warm is None else np.r_[np.asarray(warm[0], float), float(warm[1])]

    def fg(x):
        f, g = separation_gradient(A, B, x[:2], x[2])
        if f <= f_tol:
            # flat region reached; a zero gradient stops the minimizer here
            return f, np.zeros(3)
        return f, g

    res = minimize(fg, x0, grad_tol=grad_tol, step_tol=0.0, max_iters=max_iters)
    u, gamma = res.x[:2].copy(), float(res.x[2])
    f = separation_objective(A, B, u, gamma)
    return SeparationResult(u, gamma, f, f <= tau, res.converged)


def separate_many(P, Q, warm=None, tau=TAU_SEP):
    """Solve many pairs at once with the compiled BFGS kernel.

    ``P`` and ``Q`` are ``(K, v, 2)`` and ``(K, s, 2)``; ``warm`` is an optional
    ``(K, 3)`` array of starting ``(u0, u1, gamma)`` rows, NaN rows meaning cold
    start. Returns ``(params, violation, separated, status)``.
    """
    P = np.ascontiguousarray(P, dtype=float)
    Q = np.ascontiguousarray(Q, dtype=float)
    x0 = cold_start_batch(P, Q)
    if warm is not None:
        warm = np.asarray(warm, dtype=float)
        use = np.all(np.isfinite(warm), axis=1)
        x0[use] = warm[use]
    X, F, status, _ = kernels.separate_batch(
        P, Q, np.ascontiguousarray(x0), kernels.SEP_GTOL, kernels.SEP_FTOL, kernels.SEP_MAXITER
    )
    return X, F, F <= tau, status


def find_common_point(A, B):
    """Solve the convex-combination feasibility system by linear programming.

    Looks for ``dA, dB >= 0`` with ``sum(dA) = sum(dB) = 1`` and
    ``A' dA = B' dB``. Returns ``(dA, dB)`` or ``None`` when infeasible.
    """
    A, B = _points(A), _points(B)
    v, s = len(A), len(B)
    Aeq = np.zeros((4, v + s))
    Aeq[0:2, :v] = A.T
    Aeq[0:2, v:] = -B.T
    Aeq[2, :v] = 1.0
    Aeq[3, v:] = 1.0
    beq = np.array([0.0, 0.0, 1.0, 1.0])
    res = linprog(np.zeros(v + s), A_eq=Aeq, b_eq=beq, bounds=[(0, None)] * (v + s), method="highs")
    if res.status != 0:
        return None
    z = np.maximum(res.x, 0.0)
    return z[:v] / z[:v].sum(), z[v:] / z[v:].sum()


def hull_distance(A, B):
    """Euclidean distance between the convex hulls (0 when they meet)."""
    A, B = _points(A), _points(B)
    v, s = len(A), len(B)
    best = np.inf
    # for planar hulls the closest pair lies on a vertex/edge combination
    for P, Q in ((A, B), (B, A)):
        for p in P:
            if len(Q) == 1:
                best = min(best, np.hypot(*(p - Q[0])))
                continue
            for i in range(len(Q)):
                for j in range(i + 1, len(Q)):
                    best = min(best, _point_segment(p, Q[i], Q[j]))
    if find_common_point(A, B) is not None:
        return 0.0
    return float(best)


def _point_segment(p, a, b):
    ab = b - a
    L = ab @ ab
    t = 0.0 if L == 0.0 else np.clip((p - a) @ ab / L, 0.0, 1.0)
    return float(np.hypot(*(p - (a + t * ab))))


class CertificateError(AssertionError):
    """A separation verdict disagrees with the feasibility system."""


def certify_no_solution_system1(A, B, result: SeparationResult, tol=MARGIN_TOL):
    """Cross-check a separation verdict against the convex-combination system.

    For a separated verdict the hyperplane must satisfy both margins within
    ``tol`` and no common point may exist. For an intersecting verdict a
    witness ``(dA, dB)`` is returned. Inconsistencies raise CertificateError.
    """
    A, B = _points(A), _points(B)
    witness = find_common_point(A, B)
    if result.separated:
        ma = A @ result.u - result.gamma
        mb = B @ result.u - result.gamma
        if np.any(ma < 1.0 - tol) or np.any(mb > -1.0 + tol):
            raise CertificateError(f"hyperplane margins violated: {ma}, {mb}")
        if witness is not None:
            raise CertificateError(f"separated verdict but hulls share a point {A.T @ witness[0]}")
        return True
    if witness is None:
        raise CertificateError("intersecting verdict but no common point exists")
    return witness
