"""Exact segment predicates and crossing counts (no optimization involved)."""
import numpy as np

from . import kernels
from .kernels import ORIENT_EPS, _boxes, _intersect  # noqa: F401  (re-exported)


def _unpack(s):
    s = np.asarray(s, dtype=float)
    return float(s[0, 0]), float(s[0, 1]), float(s[1, 0]), float(s[1, 1])


def segments_intersect(s1, s2) -> bool:
    """True iff the closed segments share at least one point."""
    return bool(_intersect(*_unpack(s1), *_unpack(s2)))


def boxes_overlap(s1, s2) -> bool:
    """True iff the closed axis-aligned bounding boxes intersect."""
    return bool(_boxes(*_unpack(s1), *_unpack(s2)))


def _prepare(layout, edges):
    x = np.ascontiguousarray(layout, dtype=float)
    e = np.ascontiguousarray(np.asarray(edges, dtype=np.int64).reshape(-1, 2))
    return x, e


def candidate_pairs(layout, edges):
    """Non-adjacent edge pairs ``(i, j)``, ``i < j``, whose bounding boxes overlap."""
    return kernels.scan_pairs(*_prepare(layout, edges), False)


def crossing_pairs(layout, edges):
    """Non-adjacent edge pairs whose closed segments intersect."""
    return kernels.scan_pairs(*_prepare(layout, edges), True)


def count_crossings(layout, g) -> int:
    """Number of crossing pairs of edges that do not share a node.

    ``g`` may be a GraphInstance or a raw ``(m, 2)`` edge array.
    """
    edges = getattr(g, "edges", g)
    return int(len(crossing_pairs(layout, edges)))
