"""Random benchmark graphs that come with a known crossing-free drawing."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .kernels import _intersect_np
from .mds import stress
from .model import GraphInstance, build_weights

log = logging.getLogger(__name__)

STALL_LIMIT = 10_000


class GenerationError(RuntimeError):
    def __init__(self, msg, achieved_edges):
        super().__init__(msg)
        self.achieved_edges = achieved_edges


@dataclass(frozen=True)
class BenchmarkInstance:
    graph: GraphInstance
    planar_layout: np.ndarray
    planar_stress: float
    source_dim: int
    seed: int
    points: Optional[np.ndarray] = None


def _crosses_any(P2, edges, i, j):
    if not edges:
        return False
    E = np.asarray(edges)
    keep = (E[:, 0] != i) & (E[:, 0] != j) & (E[:, 1] != i) & (E[:, 1] != j)
    E = E[keep]
    if len(E) == 0:
        return False
    a = np.broadcast_to(P2[i], (len(E), 2))
    c = np.broadcast_to(P2[j], (len(E), 2))
    return bool(_intersect_np(a, c, P2[E[:, 0]], P2[E[:, 1]]).any())


def grow_planar_edges(P2, e_count, rng, stall_limit=STALL_LIMIT, max_proposals=None):
    """Accept/reject chain over straight-line edges on fixed 2-D points.

    Proposes uniformly random absent edges and accepts those crossing no
    accepted edge; after ``stall_limit`` consecutive rejections a random
    accepted edge is dropped.
    """
    v = len(P2)
    if max_proposals is None:
        max_proposals = 50 * stall_limit + 200 * e_count
    edges = []
    present = set()
    best = 0
    rejections = 0
    for _ in range(max_proposals):
        if len(edges) == e_count:
            return edges
        i, j = (int(t) for t in rng.choice(v, size=2, replace=False))
        key = (min(i, j), max(i, j))
        if key in present or _crosses_any(P2, edges, i, j):
            rejections += 1
            if rejections >= stall_limit and edges:
                k = int(rng.integers(len(edges)))
                present.discard(edges.pop(k))
                rejections = 0
            continue
        rejections = 0
        edges.append(key)
        present.add(key)
        best = max(best, len(edges))
    if len(edges) == e_count:
        return edges
    raise GenerationError(f"could not place {e_count} non-crossing edges (best {best})", best)


def generate(v_count, e_count, source_dim=7, seed=0) -> BenchmarkInstance:
    """Points uniform in the unit cube of ``source_dim`` dimensions, Euclidean
    target distances, and planar edges drawn on the first two coordinates."""
    if v_count < 3:
        raise ValueError("v_count must be at least 3")
    if e_count < 0 or e_count > 3 * v_count - 6:
        raise ValueError(f"e_count must lie in [0, {3 * v_count - 6}] for {v_count} nodes")
    if source_dim < 2:
        raise ValueError("source_dim must be at least 2")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(v_count, source_dim))
    P2 = pts[:, :2].copy()
    edges = grow_planar_edges(P2, e_count, rng)
    g = GraphInstance.from_points(pts, np.array(edges, dtype=np.int64).reshape(-1, 2))
    s = stress(P2, g, build_weights(g))
    return BenchmarkInstance(g, P2, s, source_dim, seed, pts)


def suite(spec, seed=0):
    """One instance per replicate of each ``(v, e, dim, reps)`` row.

    Failed instances are logged and skipped.
    """
    ss = np.random.SeedSequence(seed)
    rows = list(spec)
    out = []
    children = ss.spawn(sum(int(r[3]) for r in rows))
    k = 0
    for v, e, dim, reps in rows:
        for _ in range(int(reps)):
            inst_seed = int(children[k].generate_state(1)[0])
            k += 1
            try:
                out.append(generate(int(v), int(e), int(dim), inst_seed))
            except GenerationError as exc:
                log.warning("instance (%s, %s, %s) seed %s failed: %s", v, e, dim, inst_seed, exc)
    return out


def tree_instance(v_count, seed=0) -> BenchmarkInstance:
    """Euclidean minimum spanning tree on random planar points.

    The metric is exactly realizable in the plane and the tree drawn on the
    points has no crossings.
    """
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0.0, 1.0, size=(v_count, 2))
    g0 = GraphInstance.from_points(pts, np.empty((0, 2), dtype=np.int64))
    T = minimum_spanning_tree(g0.distances).tocoo()
    edges = np.stack([T.row, T.col], axis=1).astype(np.int64)
    g = GraphInstance(v_count, edges, g0.distances)
    return BenchmarkInstance(g, pts, stress(pts, g, build_weights(g)), 2, seed, pts)


def synthetic_forest(n_nodes=151, n_edges=138, n_markers=55, seed=0, max_flips=3):
    """Forest of binary genotypes grown by small mutations, Hamming distances.

    Every tree is one lineage (its group label); single-node trees are orphans.
    Returns a GraphInstance with an explicit distance matrix.
    """
    n_trees = n_nodes - n_edges
    if n_trees < 1:
        raise ValueError("a forest needs n_edges < n_nodes")
    rng = np.random.default_rng(seed)
    cuts = np.sort(rng.choice(np.arange(1, n_nodes), size=n_trees - 1, replace=False))
    sizes = np.diff(np.r_[0, cuts, n_nodes])
    genomes = []
    seen = set()
    edges = []
    groups = []

    def fresh(base):
        while True:
            gnm = base.copy()
            k = int(rng.integers(1, max_flips + 1))
            gnm[rng.choice(n_markers, size=k, replace=False)] ^= 1
            key = gnm.tobytes()
            if key not in seen:
                seen.add(key)
                return gnm

    for t, size in enumerate(sizes):
        root = fresh(rng.integers(0, 2, size=n_markers).astype(np.uint8))
        members = [len(genomes)]
        genomes.append(root)
        groups.append(f"L{t}")
        for _ in range(size - 1):
            parent = members[int(rng.integers(len(members)))]
            members.append(len(genomes))
            edges.append((parent, len(genomes)))
            genomes.append(fresh(genomes[parent]))
            groups.append(f"L{t}")
    G = np.array(genomes, dtype=np.int64)
    d = (G[:, None, :] != G[None, :, :]).sum(axis=2).astype(float)
    return GraphInstance(n_nodes, np.array(edges, dtype=np.int64), d, tuple(groups))
