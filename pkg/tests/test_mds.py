import numpy as np
import pytest

from crossmin.mds import (build_majorization, fstress, fstress_grad, lw_pseudo_inverse, smacof_embed,
                          stress)
from crossmin.model import GraphInstance, build_weights


def inst(d, edges=()):
    d = np.asarray(d, float)
    return GraphInstance(len(d), np.array(edges, dtype=np.int64).reshape(-1, 2), d)


def two(d12):
    return inst([[0, d12], [d12, 0]])


def test_stress_examples():
    g = two(2.0)
    w = build_weights(g)
    assert stress([[0, 0], [2, 0]], g, w) == 0.0
    assert stress([[0, 0], [0, 0]], g, w) == pytest.approx(1.0)
    g3 = inst(np.ones((3, 3)) - np.eye(3))
    assert stress([[0, 0], [1, 0], [2, 0]], g3, build_weights(g3)) == pytest.approx(1.0)


def test_laplacians_unit_case():
    g = two(1.0)
    ctx = build_majorization(g, build_weights(g), [[0, 0], [1, 0]])
    L = np.array([[1, -1], [-1, 1]], float)
    assert np.allclose(ctx.Lw, L) and np.allclose(ctx.LZ, L)
    assert fstress([[0, 0], [1, 0]], ctx) == pytest.approx(0.0, abs=1e-12)


def test_coincident_support_gives_zero_entry():
    g = two(1.0)
    ctx = build_majorization(g, build_weights(g), [[1, 1], [1, 1]])
    assert np.all(ctx.LZ == 0.0)


def test_equilateral_support():
    g = inst(np.ones((3, 3)) - np.eye(3))
    Z = 2 * np.array([[0, 0], [1, 0], [0.5, np.sqrt(3) / 2]])
    LZ = build_majorization(g, build_weights(g), Z).LZ
    off = LZ[~np.eye(3, dtype=bool)]
    assert np.allclose(off, -0.5) and np.allclose(LZ.sum(axis=1), 0)


def rand_graph(rng, n):
    return GraphInstance.from_points(rng.uniform(size=(n, 4)), np.empty((0, 2)))


@pytest.mark.parametrize("seed", range(10))
def test_majorization_bound_and_touching(seed):
    rng = np.random.default_rng(seed)
    g = rand_graph(rng, 12)
    w = build_weights(g)
    Z = rng.normal(size=(12, 2))
    ctx = build_majorization(g, w, Z)
    assert np.allclose(ctx.Lw, ctx.Lw.T) and np.allclose(ctx.Lw.sum(axis=1), 0)
    assert np.allclose(ctx.LZ, ctx.LZ.T) and np.allclose(ctx.LZ.sum(axis=1), 0)
    sz = stress(Z, g, w)
    assert abs(fstress(Z, ctx) - sz) <= 1e-9 * (1 + sz)
    for _ in range(5):
        X = rng.normal(size=(12, 2))
        assert stress(X, g, w) <= fstress(X, ctx) + 1e-9


def test_fstress_gradient():
    rng = np.random.default_rng(1)
    g = rand_graph(rng, 8)
    ctx = build_majorization(g, build_weights(g), rng.normal(size=(8, 2)))
    X = rng.normal(size=(8, 2))
    _, G = fstress_grad(X, ctx)
    h = 1e-6
    fd = np.zeros_like(X)
    for idx in np.ndindex(X.shape):
        E = np.zeros_like(X)
        E[idx] = h
        fd[idx] = (fstress(X + E, ctx) - fstress(X - E, ctx)) / (2 * h)
    assert np.allclose(G, fd, rtol=1e-6, atol=1e-6)


def test_pseudo_inverse():
    rng = np.random.default_rng(2)
    g = rand_graph(rng, 6)
    Lw = build_majorization(g, build_weights(g), np.zeros((6, 2))).Lw
    assert np.allclose(lw_pseudo_inverse(Lw), np.linalg.pinv(Lw))


def test_two_nodes_converge():
    g = two(1.0)
    X, tr = smacof_embed(g, build_weights(g), init=[[0, 0], [0.5, 0]])
    assert np.linalg.norm(X[0] - X[1]) == pytest.approx(1.0, abs=1e-6)
    assert tr[-1] <= 1e-10


def test_collapsed_start_makes_progress():
    rng = np.random.default_rng(3)
    g = rand_graph(rng, 7)
    w = build_weights(g)
    _, tr = smacof_embed(g, w, init=np.zeros((7, 2)))
    assert tr[-1] < tr[0]


def test_square_metric_is_recovered():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    g = GraphInstance.from_points(sq, [[0, 1]])
    w = build_weights(g)
    assert stress(sq, g, w) == pytest.approx(0.0, abs=1e-12)
    best = min(smacof_embed(g, w, seed=s, max_iters=2000, tol=1e-12)[1][-1] for s in range(5))
    assert best <= 1e-6


@pytest.mark.parametrize("seed", range(5))
def test_trace_is_monotone(seed):
    rng = np.random.default_rng(seed)
    g = rand_graph(rng, 20)
    _, tr = smacof_embed(g, build_weights(g), seed=seed)
    assert np.all(np.diff(tr) <= 1e-9)


def test_tiny_graphs():
    g = GraphInstance(1, np.empty((0, 2)), np.zeros((1, 1)))
    X, tr = smacof_embed(g, build_weights(g))
    assert X.shape == (1, 2) and tr == [0.0]
