"""Crossing reduction with stress majorization.

Alternates a U-phase (fit a soft-margin hyperplane to every detected crossing
pair) with an X-phase (minimize the majorized stress plus squared-hinge
penalties that push each pair's endpoints to opposite sides of its
hyperplane), raising the penalty weights geometrically between X-phases.
"""
from __future__ import annotations

import logging
import time
import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import kernels
from .geometry import candidate_pairs, count_crossings
from .mds import build_majorization, fstress_grad, smacof_embed, stress
from .model import GraphInstance, as_layout, build_weights
from .optim import OptimizationError, minimize
from .separation import separate_many

log = logging.getLogger(__name__)

NO_CROSSINGS = "no_crossings"
MOVEMENT_BELOW_TOL = "movement_below_tol"
ITERATION_CAP = "iteration_cap"


@dataclass(frozen=True)
class PenaltyParams:
    epsilon: float = 1e-3
    tau: float = 1e-6
    constant: float = 4.0
    rho_min: Optional[float] = None  # None: initial stress / constant
    rho_inc: float = 1.1
    rho_max: float = 1e6
    max_outer: int = 200
    max_inner: int = 50
    alpha: float = 2.0
    # let the X-phase move the hyperplanes together with the layout
    joint_planes: bool = True
    # stop as soon as a pass leaves no crossings
    stop_at_zero: bool = True
    # stop after this many penalty iterations without fewer crossings (None: never)
    patience: Optional[int] = 100
    # return the iterate with the fewest crossings (ties: lowest stress)
    keep_best: bool = True
    # X-phase minimizer
    grad_tol: float = 1e-6
    step_tol: float = 1e-9
    max_iters: int = 400

    def __post_init__(self):
        if not self.rho_inc > 1.0:
            raise ValueError("rho_inc must exceed 1")
        if self.rho_min is not None and not (0.0 < self.rho_min <= self.rho_max):
            raise ValueError("need 0 < rho_min <= rho_max")
        if self.constant <= 0.0:
            raise ValueError("constant must be positive")

    def resolved(self, initial_stress, stress_scale=0.0):
        """Fill in rho_min from the initial stress.

        A floor of 1% of ``stress_scale`` (sum of w_ij d_ij^2) keeps the weight
        positive when the starting layout realizes the metric exactly.
        """
        if self.rho_min is not None:
            return self
        rho_min = max(initial_stress, 1e-2 * stress_scale, 1e-12) / self.constant
        return replace(self, rho_min=min(rho_min, self.rho_max))


@dataclass
class PenaltyState:
    """Crossing set C: edge-index pairs with their hyperplanes and weights.

    ``pairs[k] = (i, j)`` are edge indices, ``a_nodes[k]``/``b_nodes[k]`` the
    endpoint node indices of edges i and j, ``U[k]``/``r[k]`` the hyperplane.
    Members are only ever appended.
    """

    pairs: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))
    a_nodes: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))
    b_nodes: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))
    U: np.ndarray = field(default_factory=lambda: np.empty((0, 2)))
    r: np.ndarray = field(default_factory=lambda: np.empty(0))
    rho: np.ndarray = field(default_factory=lambda: np.empty(0))
    # pairs flagged (violation >= tau) by the latest detection pass
    violating: np.ndarray = field(default_factory=lambda: np.empty((0, 2), dtype=np.int64))

    def __len__(self):
        return len(self.pairs)

    def copy(self):
        return PenaltyState(*(np.array(getattr(self, f)) for f in
                              ("pairs", "a_nodes", "b_nodes", "U", "r", "rho", "violating")))

    @property
    def max_rho(self):
        return float(self.rho.max()) if len(self.rho) else 0.0


@dataclass
class RunReport:
    initial_stress: float
    final_stress: float
    initial_crossings: int
    final_crossings: int
    trace: list
    convergence_reason: str
    runtime_seconds: float = 0.0
    penalty_iterations: int = 0
    rho_min: float = 0.0


def penalty_value_grad(X, state: PenaltyState):
    X = np.ascontiguousarray(X, dtype=float)
    if len(state) == 0:
        return 0.0, np.zeros_like(X)
    return kernels.penalty(X, state.a_nodes, state.b_nodes, state.U, state.r, state.rho)


def penalized_objective(X, ctx, state: PenaltyState):
    """Majorized stress plus the weighted squared-hinge crossing penalties.

    Returns ``(value, gradient)`` with the gradient shaped like ``X``.
    """
    X = np.asarray(X, dtype=float)
    f, g = fstress_grad(X, ctx)
    pv, pg = penalty_value_grad(X, state)
    return f + pv, g + pg


def detect_and_update(layout, g: GraphInstance, state: PenaltyState, params: PenaltyParams):
    """U-phase: re-fit hyperplanes for members of C and add newly crossing pairs.

    Candidates are the non-adjacent pairs whose bounding boxes overlap plus
    every current member. Members are warm-started from their stored plane.
    """
    if params.rho_min is None:
        raise ValueError("params.rho_min must be resolved before detection")
    X = np.asarray(layout, dtype=float)
    edges = g.edges
    cand = candidate_pairs(X, edges)
    m = len(edges)
    member_key = state.pairs[:, 0] * m + state.pairs[:, 1]
    cand_key = cand[:, 0] * m + cand[:, 1]
    fresh = cand[~np.isin(cand_key, member_key)]
    pairs = np.concatenate([state.pairs, fresh]) if len(fresh) else state.pairs
    out = state.copy()
    if len(pairs) == 0:
        out.violating = np.empty((0, 2), dtype=np.int64)
        return out
    P = X[edges[pairs[:, 0]]]
    Q = X[edges[pairs[:, 1]]]
    warm = np.full((len(pairs), 3), np.nan)
    K = len(state)
    if K:
        warm[:K, :2] = state.U
        warm[:K, 2] = state.r
    params_uv, F, _, _ = separate_many(P, Q, warm)
    flagged = F >= params.tau
    out.violating = pairs[flagged]
    if K:
        out.U = params_uv[:K, :2].copy()
        out.r = params_uv[:K, 2].copy()
    new = np.flatnonzero(flagged[K:]) + K
    if len(new):
        out.pairs = np.concatenate([out.pairs, pairs[new]])
        out.a_nodes = np.concatenate([out.a_nodes, edges[pairs[new, 0]]])
        out.b_nodes = np.concatenate([out.b_nodes, edges[pairs[new, 1]]])
        out.U = np.concatenate([out.U, params_uv[new, :2]])
        out.r = np.concatenate([out.r, params_uv[new, 2]])
        out.rho = np.concatenate([out.rho, np.full(len(new), params.rho_min)])
    return out


def escalate(state: PenaltyState, params: PenaltyParams) -> PenaltyState:
    out = state.copy()
    out.rho = np.minimum(out.rho * params.rho_inc, params.rho_max)
    return out


def _x_phase(X, ctx, state, params):
    """Minimize the penalized majorant from ``X``.

    With ``joint_planes`` the hyperplanes are free variables too, so a pair
    can shrink its margin band instead of pushing its endpoints apart.
    Returns the re-centred layout, the state with the final planes and the
    minimizer result (gradient restricted to the layout).
    """
    shape = X.shape
    n2 = X.size
    K = len(state)
    if not params.joint_planes or K == 0:
        def fg(x):
            v, gr = penalized_objective(x.reshape(shape), ctx, state)
            return v, gr.ravel()

        res = minimize(fg, X.ravel(), grad_tol=params.grad_tol, step_tol=params.step_tol,
                       max_iters=params.max_iters)
        Xn = res.x.reshape(shape)
        return Xn - Xn.mean(axis=0), state, res

    a_idx, b_idx, rho = state.a_nodes, state.b_nodes, state.rho
    Lw = np.ascontiguousarray(ctx.Lw)
    LZZ = np.ascontiguousarray(ctx.LZZ)

    def fgj(z):
        return kernels.joint_objective(z, Lw, LZZ, ctx.const_term, a_idx, b_idx, rho)

    z0 = np.concatenate([X.ravel(), state.U.ravel(), state.r])
    res = minimize(fgj, z0, grad_tol=params.grad_tol, step_tol=params.step_tol,
                   max_iters=params.max_iters)
    Xn = res.x[:n2].reshape(shape)
    c = Xn.mean(axis=0)
    out = state.copy()
    out.U = res.x[n2:n2 + 2 * K].reshape(K, 2).copy()
    out.r = res.x[n2 + 2 * K:] - out.U @ c
    res.grad = res.grad[:n2]
    return Xn - c, out, res


def crsm_run(g: GraphInstance, params: PenaltyParams = PenaltyParams(), init=None, seed=0,
             callback=None, mds_iters=500, mds_tol=1e-6):
    """Embed ``g`` with crossing penalties.

    Starts from ``init`` or from a SMACOF layout (seeded random start). The
    optional ``callback(layout, entry)`` sees every iterate.
    Returns ``(layout, RunReport)``.
    """
    t0 = time.perf_counter()
    w = build_weights(g, params.alpha)
    if init is None:
        X, _ = smacof_embed(g, w, max_iters=mds_iters, tol=mds_tol, seed=seed)
    else:
        X = as_layout(init, g.node_count)
    s1 = stress(X, g, w)
    iu = np.triu_indices(g.node_count, 1)
    params = params.resolved(s1, float(np.sum(w.w[iu] * g.distances[iu] ** 2)))
    c1 = count_crossings(X, g)
    state = PenaltyState() if c1 == 0 else detect_and_update(X, g, PenaltyState(), params)

    def entry(outer, inner, Xc, cur_stress, crossings, movement):
        e = dict(outer=outer, inner=inner, stress=cur_stress, crossings=crossings,
                 crossing_set=len(state), max_rho=state.max_rho, movement=movement)
        if callback is not None:
            callback(Xc, e)
        return e

    trace = [entry(0, 0, X, s1, c1, 0.0)]
    if c1 == 0 or len(state) == 0:
        return X, RunReport(s1, s1, c1, c1, trace, NO_CROSSINGS if c1 == 0 else ITERATION_CAP,
                            time.perf_counter() - t0, 0, params.rho_min)

    reason = ITERATION_CAP
    n_iter = 0
    best = (c1, s1, X, 0)
    since = 0
    first = True
    aborted = False
    for outer in range(1, params.max_outer + 1):
        movement = np.inf
        gnorm = np.inf
        for inner in range(1, params.max_inner + 1):
            if not first:
                state = detect_and_update(X, g, state, params)
            first = False
            ctx = build_majorization(g, w, X)
            try:
                Xn, state, res = _x_phase(X, ctx, state, params)
            except OptimizationError as exc:
                warnings.warn(f"X-phase aborted ({exc}); returning the last layout", RuntimeWarning)
                aborted = True
                break
            n_iter += 1
            movement = float(np.linalg.norm(Xn - X))
            gnorm = float(np.max(np.abs(res.grad)))
            state = escalate(state, params)
            X = Xn
            crossings = count_crossings(X, g)
            trace.append(entry(outer, inner, X, stress(X, g, w), crossings, movement))
            since += 1
            if crossings < best[0]:
                since = 0
            if (crossings, trace[-1]["stress"]) < best[:2]:
                best = (crossings, trace[-1]["stress"], X, len(trace) - 1)
            if movement < params.epsilon or len(state) == 0 or crossings == 0:
                break
            if params.patience is not None and since >= params.patience:
                break
        if aborted:
            reason = ITERATION_CAP
            break
        if params.stop_at_zero and trace[-1]["crossings"] == 0:
            reason = NO_CROSSINGS
            break
        if movement < params.tau and gnorm < params.tau:
            reason = MOVEMENT_BELOW_TOL
            break
        if params.patience is not None and since >= params.patience:
            # a no-progress cap: reported as iteration_cap
            reason = ITERATION_CAP
            break
    if params.keep_best and best[3] != len(trace) - 1:
        # the restored layout keeps the final crossing set and weights
        e = dict(trace[best[3]], crossing_set=len(state), max_rho=state.max_rho,
                 movement=float(np.linalg.norm(best[2] - X)), restored_from=best[3])
        X = best[2]
        if callback is not None:
            callback(X, e)
        trace.append(e)
    last = trace[-1]
    return X, RunReport(s1, last["stress"], c1, last["crossings"], trace, reason,
                        time.perf_counter() - t0, n_iter, params.rho_min)
