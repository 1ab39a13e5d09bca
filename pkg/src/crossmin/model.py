"""Core value types: graphs with target distances, weights and layouts."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np


class GraphError(ValueError):
    """Raised when a graph, distance matrix or layout is malformed."""


def plus_part(v):
    """Componentwise max(v, 0)."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)


def _normalize_edges(edges, node_count):
    out = []
    seen = set()
    for e in edges:
        i, j = int(e[0]), int(e[1])
        if not (0 <= i < node_count and 0 <= j < node_count):
            raise GraphError(f"edge ({i}, {j}) references a node outside [0, {node_count})")
        if i == j:
            raise GraphError(f"self-loop edge on node {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        out.append(key)
    return np.array(out, dtype=np.int64).reshape(-1, 2)


@dataclass(frozen=True)
class GraphInstance:
    """Nodes ``0..node_count-1``, undirected edges and a target distance matrix.

    ``directed`` keeps the original orientation of each edge for rendering
    only; every algorithm treats edges as unordered pairs.
    """

    node_count: int
    edges: np.ndarray
    distances: np.ndarray
    groups: Optional[tuple] = None
    directed: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        n = int(self.node_count)
        if n < 0:
            raise GraphError("node_count must be nonnegative")
        raw = np.asarray(self.edges).reshape(-1, 2)
        edges = _normalize_edges(raw, n)
        d = np.array(self.distances, dtype=float)
        if d.shape != (n, n):
            raise GraphError(f"distances must be {n}x{n}, got {d.shape}")
        if not np.all(np.isfinite(d)):
            raise GraphError("distances contain non-finite entries")
        if np.any(np.diag(d) != 0.0):
            raise GraphError("distances must have a zero diagonal")
        if not np.allclose(d, d.T, rtol=0.0, atol=1e-12):
            raise GraphError("distances must be symmetric")
        off = ~np.eye(n, dtype=bool)
        if np.any(d[off] <= 0.0):
            i, j = np.argwhere((d <= 0.0) & off)[0]
            raise GraphError(f"distance d[{i},{j}] must be positive off the diagonal")
        d = 0.5 * (d + d.T)
        d.setflags(write=False)
        edges.setflags(write=False)
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "distances", d)
        if self.directed is None:
            object.__setattr__(self, "directed", raw.astype(np.int64).copy())
        if self.groups is not None:
            if len(self.groups) != n:
                raise GraphError("groups must have one label per node")
            object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def edge_count(self):
        return len(self.edges)

    @classmethod
    def from_points(cls, points, edges, groups=None):
        """Build an instance whose distances are Euclidean distances of ``points``."""
        pts = np.asarray(points, dtype=float)
        diff = pts[:, None, :] - pts[None, :, :]
        d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        return cls(len(pts), np.asarray(edges).reshape(-1, 2), d, groups)


@dataclass(frozen=True)
class WeightMatrix:
    w: np.ndarray
    alpha: float = 2.0


def build_weights(g: GraphInstance, alpha: float = 2.0) -> WeightMatrix:
    """w_ij = d_ij ** -alpha off the diagonal, zero on it."""
    d = g.distances
    off = ~np.eye(g.node_count, dtype=bool)
    if np.any(d[off] <= 0.0):
        raise GraphError("zero off-diagonal distance gives an infinite weight")
    w = np.zeros_like(d)
    w[off] = d[off] ** (-float(alpha))
    if not np.all(np.isfinite(w)):
        raise GraphError("weights overflow; distances too small for this alpha")
    w.setflags(write=False)
    return WeightMatrix(w, float(alpha))


def as_layout(coords, node_count: Optional[int] = None) -> np.ndarray:
    """Validate and copy an ``(n, 2)`` coordinate array."""
    x = np.array(coords, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise GraphError(f"layout must be an (n, 2) array, got shape {x.shape}")
    if node_count is not None and x.shape[0] != node_count:
        raise GraphError(f"layout has {x.shape[0]} rows, graph has {node_count} nodes")
    if not np.all(np.isfinite(x)):
        raise GraphError("layout contains non-finite coordinates")
    return x


def edge_segment(layout, edge: Sequence[int]) -> np.ndarray:
    """2x2 matrix whose rows are the endpoint coordinates of ``edge``."""
    x = np.asarray(layout, dtype=float)
    return x[[int(edge[0]), int(edge[1])]].copy()
