"""Hot inner loops, each in a numba and a vectorized-numpy flavour.

The public names at the bottom dispatch on ``USE_NUMBA``; both flavours are
importable directly so they can be cross-checked and benchmarked.
"""
import numpy as np

from ._accel import USE_NUMBA, njit

ORIENT_EPS = 1e-12

SEP_GTOL = 1e-8
SEP_FTOL = 1e-10
SEP_MAXITER = 200
_ARMIJO = 1e-4
_MAX_HALVINGS = 60

CONVERGED, MAXITER, LINESEARCH_FAILED = 0, 1, 2


# --------------------------------------------------------------------------
# segment predicates
# --------------------------------------------------------------------------


@njit(cache=True)
def _orient(px, py, qx, qy, rx, ry):
    ux = qx - px
    uy = qy - py
    vx = rx - px
    vy = ry - py
    o = ux * vy - uy * vx
    scale = np.sqrt(ux * ux + uy * uy) * np.sqrt(vx * vx + vy * vy)
    if abs(o) <= ORIENT_EPS * scale:
        return 0
    return 1 if o > 0.0 else -1


@njit(cache=True)
def _boxes(ax, ay, cx, cy, bx, by, dx, dy):
    return (
        min(ax, cx) <= max(bx, dx)
        and min(bx, dx) <= max(ax, cx)
        and min(ay, cy) <= max(by, dy)
        and min(by, dy) <= max(ay, cy)
    )


@njit(cache=True)
def _intersect(ax, ay, cx, cy, bx, by, dx, dy):
    o1 = _orient(ax, ay, cx, cy, bx, by)
    o2 = _orient(ax, ay, cx, cy, dx, dy)
    o3 = _orient(bx, by, dx, dy, ax, ay)
    o4 = _orient(bx, by, dx, dy, cx, cy)
    if o1 == 0 and o2 == 0 and o3 == 0 and o4 == 0:
        return _boxes(ax, ay, cx, cy, bx, by, dx, dy)
    return o1 * o2 <= 0 and o3 * o4 <= 0


@njit(cache=True)
def scan_pairs_numba(coords, edges, need_intersection):
    m = edges.shape[0]
    out = np.empty((max(m * (m - 1) // 2, 0), 2), dtype=np.int64)
    k = 0
    for i in range(m):
        p, q = edges[i, 0], edges[i, 1]
        ax, ay = coords[p, 0], coords[p, 1]
        cx, cy = coords[q, 0], coords[q, 1]
        for j in range(i + 1, m):
            s, t = edges[j, 0], edges[j, 1]
            if s == p or s == q or t == p or t == q:
                continue
            bx, by = coords[s, 0], coords[s, 1]
            dx, dy = coords[t, 0], coords[t, 1]
            if not _boxes(ax, ay, cx, cy, bx, by, dx, dy):
                continue
            if need_intersection and not _intersect(ax, ay, cx, cy, bx, by, dx, dy):
                continue
            out[k, 0] = i
            out[k, 1] = j
            k += 1
    return out[:k].copy()


def _orient_np(p, q, r):
    u = q - p
    v = r - p
    o = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
    scale = np.hypot(u[:, 0], u[:, 1]) * np.hypot(v[:, 0], v[:, 1])
    s = np.sign(o).astype(np.int64)
    s[np.abs(o) <= ORIENT_EPS * scale] = 0
    return s


def _boxes_np(a, c, b, d):
    lo1, hi1 = np.minimum(a, c), np.maximum(a, c)
    lo2, hi2 = np.minimum(b, d), np.maximum(b, d)
    return np.all((lo1 <= hi2) & (lo2 <= hi1), axis=1)


def _intersect_np(a, c, b, d):
    o1 = _orient_np(a, c, b)
    o2 = _orient_np(a, c, d)
    o3 = _orient_np(b, d, a)
    o4 = _orient_np(b, d, c)
    collinear = (o1 == 0) & (o2 == 0) & (o3 == 0) & (o4 == 0)
    general = (o1 * o2 <= 0) & (o3 * o4 <= 0)
    return np.where(collinear, _boxes_np(a, c, b, d), general)


def scan_pairs_numpy(coords, edges, need_intersection):
    m = edges.shape[0]
    if m < 2:
        return np.empty((0, 2), dtype=np.int64)
    i, j = np.triu_indices(m, 1)
    ei, ej = edges[i], edges[j]
    disjoint = (
        (ei[:, 0] != ej[:, 0])
        & (ei[:, 0] != ej[:, 1])
        & (ei[:, 1] != ej[:, 0])
        & (ei[:, 1] != ej[:, 1])
    )
    i, j, ei, ej = i[disjoint], j[disjoint], ei[disjoint], ej[disjoint]
    a, c, b, d = coords[ei[:, 0]], coords[ei[:, 1]], coords[ej[:, 0]], coords[ej[:, 1]]
    keep = _boxes_np(a, c, b, d)
    if need_intersection:
        keep[keep] = _intersect_np(a[keep], c[keep], b[keep], d[keep])
    return np.stack([i[keep], j[keep]], axis=1).astype(np.int64)


# --------------------------------------------------------------------------
# batched soft-margin separation (BFGS on (u0, u1, gamma) per pair)
# --------------------------------------------------------------------------


@njit(cache=True)
def _sep_fg(P, Q, k, x0, x1, x2):
    f = 0.0
    g0 = 0.0
    g1 = 0.0
    g2 = 0.0
    for a in range(P.shape[1]):
        h = -(P[k, a, 0] * x0 + P[k, a, 1] * x1) + x2 + 1.0
        if h > 0.0:
            f += h * h
            g0 -= 2.0 * h * P[k, a, 0]
            g1 -= 2.0 * h * P[k, a, 1]
            g2 += 2.0 * h
    for b in range(Q.shape[1]):
        h = Q[k, b, 0] * x0 + Q[k, b, 1] * x1 - x2 + 1.0
        if h > 0.0:
            f += h * h
            g0 += 2.0 * h * Q[k, b, 0]
            g1 += 2.0 * h * Q[k, b, 1]
            g2 -= 2.0 * h
    return f, g0, g1, g2


@njit(cache=True)
def separate_batch_numba(P, Q, X0, gtol, ftol, maxiter):
    K = P.shape[0]
    X = X0.copy()
    F = np.empty(K)
    status = np.empty(K, dtype=np.int64)
    iters = np.empty(K, dtype=np.int64)
    x = np.empty(3)
    g = np.empty(3)
    xn = np.empty(3)
    gn = np.empty(3)
    d = np.empty(3)
    s = np.empty(3)
    y = np.empty(3)
    Hy = np.empty(3)
    H = np.empty((3, 3))
    for k in range(K):
        for i in range(3):
            x[i] = X0[k, i]
        f, g[0], g[1], g[2] = _sep_fg(P, Q, k, x[0], x[1], x[2])
        H[:, :] = 0.0
        for i in range(3):
            H[i, i] = 1.0
        st = MAXITER
        it = 0
        first = True
        while it < maxiter:
            gmax = max(abs(g[0]), abs(g[1]), abs(g[2]))
            if gmax <= gtol or f <= ftol:
                st = CONVERGED
                break
            slope = 0.0
            for i in range(3):
                d[i] = -(H[i, 0] * g[0] + H[i, 1] * g[1] + H[i, 2] * g[2])
                slope += d[i] * g[i]
            if slope >= 0.0:
                H[:, :] = 0.0
                slope = 0.0
                for i in range(3):
                    H[i, i] = 1.0
                    d[i] = -g[i]
                    slope -= g[i] * g[i]
            t = 1.0
            accepted = False
            for _ in range(_MAX_HALVINGS):
                for i in range(3):
                    xn[i] = x[i] + t * d[i]
                fn, gn[0], gn[1], gn[2] = _sep_fg(P, Q, k, xn[0], xn[1], xn[2])
                if fn <= f + _ARMIJO * t * slope:
                    accepted = True
                    break
                t *= 0.5
            if not accepted:
                st = LINESEARCH_FAILED
                break
            sy = 0.0
            yy = 0.0
            for i in range(3):
                s[i] = xn[i] - x[i]
                y[i] = gn[i] - g[i]
                sy += s[i] * y[i]
                yy += y[i] * y[i]
            if sy > 1e-12 * np.sqrt(yy) * np.sqrt(s[0] ** 2 + s[1] ** 2 + s[2] ** 2):
                if first:
                    scale = sy / yy
                    for i in range(3):
                        for j in range(3):
                            H[i, j] = scale if i == j else 0.0
                    first = False
                yHy = 0.0
                for i in range(3):
                    Hy[i] = H[i, 0] * y[0] + H[i, 1] * y[1] + H[i, 2] * y[2]
                    yHy += y[i] * Hy[i]
                c = (1.0 + yHy / sy) / sy
                for i in range(3):
                    for j in range(3):
                        H[i, j] += c * s[i] * s[j] - (Hy[i] * s[j] + s[i] * Hy[j]) / sy
            for i in range(3):
                x[i] = xn[i]
                g[i] = gn[i]
            f = fn
            it += 1
        if st == MAXITER and (max(abs(g[0]), abs(g[1]), abs(g[2])) <= gtol or f <= ftol):
            st = CONVERGED
        for i in range(3):
            X[k, i] = x[i]
        F[k] = f
        status[k] = st
        iters[k] = it
    return X, F, status, iters


def _sep_fg_np(P, Q, X):
    u0, u1, gam = X[:, 0:1], X[:, 1:2], X[:, 2:3]
    ha = np.maximum(-(P[:, :, 0] * u0 + P[:, :, 1] * u1) + gam + 1.0, 0.0)
    hb = np.maximum(Q[:, :, 0] * u0 + Q[:, :, 1] * u1 - gam + 1.0, 0.0)
    f = np.einsum("ka,ka->k", ha, ha) + np.einsum("kb,kb->k", hb, hb)
    g = np.empty_like(X)
    g[:, 0] = 2.0 * (np.einsum("kb,kb->k", hb, Q[:, :, 0]) - np.einsum("ka,ka->k", ha, P[:, :, 0]))
    g[:, 1] = 2.0 * (np.einsum("kb,kb->k", hb, Q[:, :, 1]) - np.einsum("ka,ka->k", ha, P[:, :, 1]))
    g[:, 2] = 2.0 * (ha.sum(axis=1) - hb.sum(axis=1))
    return f, g


def separate_batch_numpy(P, Q, X0, gtol, ftol, maxiter):
    """Same BFGS iteration as the numba kernel, run in lockstep over pairs."""
    K = P.shape[0]
    X = np.array(X0, dtype=float, copy=True)
    F, G = _sep_fg_np(P, Q, X)
    H = np.tile(np.eye(3), (K, 1, 1))
    first = np.ones(K, dtype=bool)
    status = np.full(K, MAXITER, dtype=np.int64)
    iters = np.zeros(K, dtype=np.int64)
    live = np.ones(K, dtype=bool)
    for _ in range(maxiter):
        done = live & ((np.abs(G).max(axis=1) <= gtol) | (F <= ftol))
        status[done] = CONVERGED
        live &= ~done
        idx = np.flatnonzero(live)
        if idx.size == 0:
            break
        Pk, Qk = P[idx], Q[idx]
        x, f, g, h = X[idx], F[idx], G[idx], H[idx]
        d = -np.einsum("kij,kj->ki", h, g)
        slope = np.einsum("ki,ki->k", d, g)
        bad = slope >= 0.0
        if bad.any():
            h[bad] = np.eye(3)
            d[bad] = -g[bad]
            slope[bad] = -np.einsum("ki,ki->k", g[bad], g[bad])
        t = np.ones(idx.size)
        xn = x + d
        fn, gn = _sep_fg_np(Pk, Qk, xn)
        ok = fn <= f + _ARMIJO * t * slope
        for _ in range(_MAX_HALVINGS - 1):
            if ok.all():
                break
            r = ~ok
            t[r] *= 0.5
            xn[r] = x[r] + t[r, None] * d[r]
            fr, gr = _sep_fg_np(Pk[r], Qk[r], xn[r])
            fn[r], gn[r] = fr, gr
            ok[r] = fr <= f[r] + _ARMIJO * t[r] * slope[r]
        failed = ~ok
        status[idx[failed]] = LINESEARCH_FAILED
        live[idx[failed]] = False
        s = xn - x
        y = gn - g
        sy = np.einsum("ki,ki->k", s, y)
        yy = np.einsum("ki,ki->k", y, y)
        upd = ok & (sy > 1e-12 * np.sqrt(yy) * np.linalg.norm(s, axis=1))
        fst = upd & first[idx]
        if fst.any():
            h[fst] = (sy[fst] / yy[fst])[:, None, None] * np.eye(3)
            first[idx[fst]] = False
        if upd.any():
            su, yu, hu, syu = s[upd], y[upd], h[upd], sy[upd]
            hy = np.einsum("kij,kj->ki", hu, yu)
            yhy = np.einsum("ki,ki->k", yu, hy)
            c = (1.0 + yhy / syu) / syu
            hu = (
                hu
                + c[:, None, None] * su[:, :, None] * su[:, None, :]
                - (hy[:, :, None] * su[:, None, :] + su[:, :, None] * hy[:, None, :]) / syu[:, None, None]
            )
            h[upd] = hu
        acc = idx[ok]
        X[acc], F[acc], G[acc], H[idx] = xn[ok], fn[ok], gn[ok], h
        iters[acc] += 1
    else:
        done = live & ((np.abs(G).max(axis=1) <= gtol) | (F <= ftol))
        status[done] = CONVERGED
    return X, F, status, iters


# --------------------------------------------------------------------------
# crossing penalty: value and gradient w.r.t. the layout
# --------------------------------------------------------------------------


@njit(cache=True)
def penalty_numba(X, a_idx, b_idx, U, r, rho):
    grad = np.zeros_like(X)
    val = 0.0
    for k in range(a_idx.shape[0]):
        u0 = U[k, 0]
        u1 = U[k, 1]
        w = rho[k]
        for a in range(a_idx.shape[1]):
            n = a_idx[k, a]
            h = -(X[n, 0] * u0 + X[n, 1] * u1) + r[k] + 1.0
            if h > 0.0:
                val += 0.5 * w * h * h
                grad[n, 0] -= w * h * u0
                grad[n, 1] -= w * h * u1
        for b in range(b_idx.shape[1]):
            n = b_idx[k, b]
            h = X[n, 0] * u0 + X[n, 1] * u1 - r[k] + 1.0
            if h > 0.0:
                val += 0.5 * w * h * h
                grad[n, 0] += w * h * u0
                grad[n, 1] += w * h * u1
    return val, grad


def penalty_numpy(X, a_idx, b_idx, U, r, rho):
    n = X.shape[0]
    grad = np.zeros_like(X)
    if a_idx.shape[0] == 0:
        return 0.0, grad
    ha = np.maximum(-np.einsum("kac,kc->ka", X[a_idx], U) + r[:, None] + 1.0, 0.0)
    hb = np.maximum(np.einsum("kbc,kc->kb", X[b_idx], U) - r[:, None] + 1.0, 0.0)
    val = 0.5 * float(rho @ (np.einsum("ka,ka->k", ha, ha) + np.einsum("kb,kb->k", hb, hb)))
    ca = -(rho[:, None] * ha)
    cb = rho[:, None] * hb
    for c in range(2):
        grad[:, c] += np.bincount(a_idx.ravel(), (ca * U[:, c:c + 1]).ravel(), minlength=n)
        grad[:, c] += np.bincount(b_idx.ravel(), (cb * U[:, c:c + 1]).ravel(), minlength=n)
    return val, grad


@njit(cache=True)
def penalty_joint_numba(X, a_idx, b_idx, U, r, rho):
    """Same penalty, with gradients w.r.t. the layout, the normals and the offsets."""
    gX = np.zeros_like(X)
    gU = np.zeros_like(U)
    gr = np.zeros_like(r)
    val = 0.0
    for k in range(a_idx.shape[0]):
        u0 = U[k, 0]
        u1 = U[k, 1]
        w = rho[k]
        for a in range(a_idx.shape[1]):
            n = a_idx[k, a]
            h = -(X[n, 0] * u0 + X[n, 1] * u1) + r[k] + 1.0
            if h > 0.0:
                wh = w * h
                val += 0.5 * wh * h
                gX[n, 0] -= wh * u0
                gX[n, 1] -= wh * u1
                gU[k, 0] -= wh * X[n, 0]
                gU[k, 1] -= wh * X[n, 1]
                gr[k] += wh
        for b in range(b_idx.shape[1]):
            n = b_idx[k, b]
            h = X[n, 0] * u0 + X[n, 1] * u1 - r[k] + 1.0
            if h > 0.0:
                wh = w * h
                val += 0.5 * wh * h
                gX[n, 0] += wh * u0
                gX[n, 1] += wh * u1
                gU[k, 0] += wh * X[n, 0]
                gU[k, 1] += wh * X[n, 1]
                gr[k] -= wh
    return val, gX, gU, gr


def penalty_joint_numpy(X, a_idx, b_idx, U, r, rho):
    n = X.shape[0]
    gX = np.zeros_like(X)
    if a_idx.shape[0] == 0:
        return 0.0, gX, np.zeros_like(U), np.zeros_like(r)
    XA = X[a_idx]
    XB = X[b_idx]
    ha = np.maximum(-np.einsum("kac,kc->ka", XA, U) + r[:, None] + 1.0, 0.0)
    hb = np.maximum(np.einsum("kbc,kc->kb", XB, U) - r[:, None] + 1.0, 0.0)
    val = 0.5 * float(rho @ (np.einsum("ka,ka->k", ha, ha) + np.einsum("kb,kb->k", hb, hb)))
    ca = -(rho[:, None] * ha)
    cb = rho[:, None] * hb
    for c in range(2):
        gX[:, c] += np.bincount(a_idx.ravel(), (ca * U[:, c:c + 1]).ravel(), minlength=n)
        gX[:, c] += np.bincount(b_idx.ravel(), (cb * U[:, c:c + 1]).ravel(), minlength=n)
    gU = np.einsum("ka,kac->kc", ca, XA) + np.einsum("kb,kbc->kc", cb, XB)
    gr = -ca.sum(axis=1) - cb.sum(axis=1)
    return val, gX, gU, gr


@njit(cache=True)
def joint_objective_numba(z, Lw, LZZ, const, a_idx, b_idx, rho):
    """Majorized stress plus crossing penalty over z = [vec(X), vec(U), r]."""
    n = Lw.shape[0]
    K = a_idx.shape[0]
    X = z[:2 * n].reshape((n, 2))
    U = z[2 * n:2 * n + 2 * K].reshape((K, 2))
    r = z[2 * n + 2 * K:]
    grad = np.zeros(z.size)
    val = const
    for i in range(n):
        l0 = 0.0
        l1 = 0.0
        for j in range(n):
            l0 += Lw[i, j] * X[j, 0]
            l1 += Lw[i, j] * X[j, 1]
        val += X[i, 0] * (l0 - 2.0 * LZZ[i, 0]) + X[i, 1] * (l1 - 2.0 * LZZ[i, 1])
        grad[2 * i] = 2.0 * (l0 - LZZ[i, 0])
        grad[2 * i + 1] = 2.0 * (l1 - LZZ[i, 1])
    pv, gX, gU, gr = penalty_joint_numba(X, a_idx, b_idx, U, r, rho)
    for i in range(n):
        grad[2 * i] += gX[i, 0]
        grad[2 * i + 1] += gX[i, 1]
    for k in range(K):
        grad[2 * n + 2 * k] = gU[k, 0]
        grad[2 * n + 2 * k + 1] = gU[k, 1]
        grad[2 * n + 2 * K + k] = gr[k]
    return val + pv, grad


def joint_objective_numpy(z, Lw, LZZ, const, a_idx, b_idx, rho):
    n = Lw.shape[0]
    K = a_idx.shape[0]
    X = z[:2 * n].reshape(n, 2)
    U = z[2 * n:2 * n + 2 * K].reshape(K, 2)
    r = z[2 * n + 2 * K:]
    LwX = Lw @ X
    val = const + float(np.sum(X * (LwX - 2.0 * LZZ)))
    pv, gX, gU, gr = penalty_joint_numpy(X, a_idx, b_idx, U, r, rho)
    return val + pv, np.concatenate([(2.0 * (LwX - LZZ) + gX).ravel(), gU.ravel(), gr])


if USE_NUMBA:
    scan_pairs = scan_pairs_numba
    separate_batch = separate_batch_numba
    penalty = penalty_numba
    penalty_joint = penalty_joint_numba
    joint_objective = joint_objective_numba
else:
    scan_pairs = scan_pairs_numpy
    separate_batch = separate_batch_numpy
    penalty = penalty_numpy
    penalty_joint = penalty_joint_numpy
    joint_objective = joint_objective_numpy

BACKEND = "numba" if USE_NUMBA else "numpy"
