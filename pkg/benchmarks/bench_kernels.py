"""Time the compiled kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--nodes 80] [--edges 160]

Both variants are imported directly, so the CROSSMIN_DISABLE_NUMBA flag does
not matter here. The first compiled call (JIT warm-up) is excluded.
"""
import argparse
import time

import numpy as np

from crossmin import datagen, kernels
from crossmin._accel import NUMBA_AVAILABLE
from crossmin.mds import build_majorization, smacof_embed
from crossmin.model import build_weights
from crossmin.separation import cold_start_batch


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases(nodes, edges, seed):
    inst = datagen.generate(nodes, edges, 7, seed)
    g = inst.graph
    w = build_weights(g)
    X, _ = smacof_embed(g, w, seed=seed)
    E = np.ascontiguousarray(g.edges)
    pairs = kernels.scan_pairs_numba(X, E, False)
    P = np.ascontiguousarray(X[E[pairs[:, 0]]])
    Q = np.ascontiguousarray(X[E[pairs[:, 1]]])
    x0 = cold_start_batch(P, Q)
    rng = np.random.default_rng(seed)
    K = len(pairs)
    a, b = E[pairs[:, 0]], E[pairs[:, 1]]
    U = rng.normal(size=(K, 2))
    r = rng.normal(size=K)
    rho = np.full(K, 10.0)
    ctx = build_majorization(g, w, X)
    z = np.concatenate([X.ravel(), U.ravel(), r])
    sep = (kernels.SEP_GTOL, kernels.SEP_FTOL, kernels.SEP_MAXITER)
    return K, {
        "scan_pairs": (lambda: kernels.scan_pairs_numba(X, E, True), lambda: kernels.scan_pairs_numpy(X, E, True)),
        "separate_batch": (lambda: kernels.separate_batch_numba(P, Q, x0.copy(), *sep),
                           lambda: kernels.separate_batch_numpy(P, Q, x0.copy(), *sep)),
        "penalty": (lambda: kernels.penalty_numba(X, a, b, U, r, rho),
                    lambda: kernels.penalty_numpy(X, a, b, U, r, rho)),
        "joint_objective": (lambda: kernels.joint_objective_numba(z, ctx.Lw, ctx.LZZ, ctx.const_term, a, b, rho),
                            lambda: kernels.joint_objective_numpy(z, ctx.Lw, ctx.LZZ, ctx.const_term, a, b, rho)),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--nodes", type=int, default=80)
    ap.add_argument("--edges", type=int, default=160)
    ap.add_argument("--seed", type=int, default=0)
    a = ap.parse_args()
    K, table = cases(a.nodes, a.edges, a.seed)
    print(f"{a.nodes} nodes, {a.edges} edges, {K} candidate pairs; numba available: {NUMBA_AVAILABLE}")
    print(f"{'kernel':<16}{'numba ms':>12}{'numpy ms':>12}{'speedup':>10}")
    for name, (fast, slow) in table.items():
        tf = best_of(fast, a.repeat)
        ts = best_of(slow, a.repeat)
        print(f"{name:<16}{1e3 * tf:>12.3f}{1e3 * ts:>12.3f}{ts / tf:>10.1f}")


if __name__ == "__main__":
    main()
