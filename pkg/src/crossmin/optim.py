"""Limited-memory BFGS with backtracking line search, and a gradient checker."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._accel import USE_NUMBA, njit


class OptimizationError(FloatingPointError):
    """The objective produced a non-finite value or gradient."""


@dataclass
class MinimizeResult:
    x: np.ndarray
    fun: float
    grad: np.ndarray
    status: str  # "gradient" | "step" | "maxiter" | "linesearch"
    nit: int
    nfev: int

    @property
    def converged(self):
        return self.status in ("gradient", "step")


def _evaluate(fg, x):
    f, g = fg(x)
    f = float(f)
    g = np.asarray(g, dtype=float).reshape(x.shape)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise OptimizationError(f"non-finite objective ({f}) or gradient at iterate")
    return f, g


def _direction_py(g, S, Y, R, count, head):
    """Two-loop recursion over a ring buffer; slot ``head - 1`` is the newest pair."""
    m = S.shape[0]
    q = g.copy()
    alpha = np.zeros(m)
    for k in range(count):
        i = (head - 1 - k + m) % m
        a = R[i] * np.dot(S[i], q)
        alpha[i] = a
        q -= a * Y[i]
    if count > 0:
        j = (head - 1 + m) % m
        q *= np.dot(S[j], Y[j]) / np.dot(Y[j], Y[j])
    else:
        q *= min(1.0, 1.0 / np.max(np.abs(g)))
    for k in range(count - 1, -1, -1):
        i = (head - 1 - k + m) % m
        b = R[i] * np.dot(Y[i], q)
        q += (alpha[i] - b) * S[i]
    return -q


_direction = njit(cache=True)(_direction_py) if USE_NUMBA else _direction_py


def minimize(fg, x0, grad_tol=1e-6, step_tol=1e-9, max_iters=400, memory=10,
             armijo=1e-4, max_halvings=50) -> MinimizeResult:
    """Minimize a smooth (or C1) function given ``fg(x) -> (value, gradient)``.

    Every accepted step satisfies the Armijo sufficient-decrease condition, so
    the returned value never exceeds ``fg(x0)``.
    """
    x = np.array(x0, dtype=float).ravel()
    f, g = _evaluate(fg, x)
    nfev = 1
    S = np.zeros((memory, x.size))
    Y = np.zeros((memory, x.size))
    R = np.zeros(memory)
    count = 0
    head = 0
    status = "maxiter"
    nit = 0
    for nit in range(max_iters):
        gmax = np.max(np.abs(g), initial=0.0)
        if gmax <= grad_tol:
            status = "gradient"
            break
        d = _direction(g, S, Y, R, count, head)
        slope = d @ g
        if not slope < 0.0:
            count = 0
            d = -g * min(1.0, 1.0 / gmax)
            slope = d @ g
        t = 1.0
        for _ in range(max_halvings):
            xn = x + t * d
            fn, gn = _evaluate(fg, xn)
            nfev += 1
            if fn <= f + armijo * t * slope:
                break
            t *= 0.5
        else:
            status = "linesearch"
            break
        s = xn - x
        y = gn - g
        sy = s @ y
        if sy > 1e-12 * np.linalg.norm(s) * np.linalg.norm(y):
            S[head] = s
            Y[head] = y
            R[head] = 1.0 / sy
            head = (head + 1) % memory
            count = min(count + 1, memory)
        x, f, g = xn, fn, gn
        if np.max(np.abs(s)) <= step_tol:
            status = "step"
            nit += 1
            break
    else:
        nit = max_iters
        if np.max(np.abs(g), initial=0.0) <= grad_tol:
            status = "gradient"
    return MinimizeResult(x, f, g, status, nit, nfev)


def check_gradient(fg, x, rel_step=1e-6) -> float:
    """Worst relative mismatch between the analytic and a central-difference gradient.

    Step per coordinate is ``rel_step * (1 + |x_i|)``; the error for coordinate
    i is ``|g_i - fd_i| / max(1, |g_i|, |fd_i|)``.
    """
    x = np.array(x, dtype=float).ravel()
    _, g = fg(x)
    g = np.asarray(g, dtype=float).ravel()
    worst = 0.0
    for i in range(x.size):
        h = rel_step * (1.0 + abs(x[i]))
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        fd = (float(fg(xp)[0]) - float(fg(xm)[0])) / (2.0 * h)
        err = abs(g[i] - fd) / max(1.0, abs(g[i]), abs(fd))
        worst = max(worst, err)
    return worst
