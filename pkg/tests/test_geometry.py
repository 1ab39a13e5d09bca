from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crossmin import kernels
from crossmin.geometry import (boxes_overlap, candidate_pairs, count_crossings, crossing_pairs,
                               segments_intersect)


def exact_intersect(p1, p2, q1, q2):
    """Closed-segment test in rational arithmetic."""
    p1, p2, q1, q2 = [tuple(Fraction(v) for v in p) for p in (p1, p2, q1, q2)]

    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    def on_seg(a, b, c):
        return min(a[0], b[0]) <= c[0] <= max(a[0], b[0]) and min(a[1], b[1]) <= c[1] <= max(a[1], b[1])

    o1, o2 = orient(p1, p2, q1), orient(p1, p2, q2)
    o3, o4 = orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 * o2 < 0 and o3 * o4 < 0:
        return True
    return ((o1 == 0 and on_seg(p1, p2, q1)) or (o2 == 0 and on_seg(p1, p2, q2))
            or (o3 == 0 and on_seg(q1, q2, p1)) or (o4 == 0 and on_seg(q1, q2, p2)))


def seg(*pts):
    return np.array(pts, dtype=float)


@pytest.mark.parametrize("s1,s2,want", [
    (seg((0, 0), (1, 1)), seg((0, 1), (1, 0)), True),
    (seg((0, 0), (1, 0)), seg((0, 1), (1, 1)), False),
    (seg((0, 0), (2, 0)), seg((1, 0), (3, 0)), True),
    (seg((0, 0), (1, 0)), seg((2, 0), (3, 0)), False),
    (seg((0, 0), (2, 0)), seg((1, 0), (1, 5)), True),
    (seg((0, 0), (1, 1)), seg((1, 1), (2, 0)), True),
])
def test_segments_intersect_examples(s1, s2, want):
    assert segments_intersect(s1, s2) is want
    assert segments_intersect(s2, s1) is want


@pytest.mark.parametrize("s1,s2,want", [
    (seg((0, 0), (1, 1)), seg((2, 2), (3, 3)), False),
    (seg((0, 0), (1, 1)), seg((0, 1), (1, 0)), True),
    (seg((0, 0), (1, 1)), seg((1, 1), (2, 0)), True),
])
def test_boxes_overlap_examples(s1, s2, want):
    assert boxes_overlap(s1, s2) is want


coord = st.integers(-6, 6)
point = st.tuples(coord, coord)


@settings(max_examples=400, deadline=None)
@given(point, point, point, point)
def test_matches_rational_oracle_on_integer_grid(a, b, c, d):
    # integer coordinates keep every orientation exact in doubles
    want = exact_intersect(a, b, c, d)
    assert segments_intersect(seg(a, b), seg(c, d)) == want


@settings(max_examples=200, deadline=None)
@given(point, point, point, point)
def test_intersection_implies_box_overlap(a, b, c, d):
    if segments_intersect(seg(a, b), seg(c, d)):
        assert boxes_overlap(seg(a, b), seg(c, d))


def test_count_k4_square_with_diagonals():
    pts = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    edges = list(combinations(range(4), 2))
    assert count_crossings(pts, np.array(edges)) == 1


def test_triangle_has_no_crossings():
    pts = np.array([[0, 0], [1, 0], [0, 1]], float)
    assert count_crossings(pts, np.array([[0, 1], [1, 2], [0, 2]])) == 0


def test_five_edge_instance_against_enumeration():
    pts = np.array([[0, 0], [4, 0], [0, 4], [4, 4], [2, 2]], float)
    edges = np.array([[0, 3], [1, 2], [0, 1], [2, 3], [0, 4]])
    want = 0
    for (i, j), (k, l) in combinations(edges.tolist(), 2):
        if len({i, j, k, l}) < 4:
            continue
        want += exact_intersect(pts[i], pts[j], pts[k], pts[l])
    assert want == 2
    assert count_crossings(pts, edges) == want


def test_shared_endpoint_pairs_are_excluded():
    pts = np.array([[0, 0], [1, 0], [2, 0]], float)
    # collinear overlapping edges that share node 0
    assert count_crossings(pts, np.array([[0, 2], [0, 1]])) == 0


def brute_pairs(X, E, need):
    out = []
    for i in range(len(E)):
        for j in range(i + 1, len(E)):
            if len(set(E[i]) | set(E[j])) < 4:
                continue
            s1, s2 = X[E[i]], X[E[j]]
            hit = segments_intersect(s1, s2) if need else boxes_overlap(s1, s2)
            if hit:
                out.append([i, j])
    return out


@pytest.mark.parametrize("seed", range(5))
def test_pair_scans_match_brute_force(seed):
    rng = np.random.default_rng(seed)
    X = rng.uniform(size=(20, 2))
    E = np.array(sorted({tuple(sorted(rng.choice(20, 2, replace=False))) for _ in range(35)}))
    assert crossing_pairs(X, E).tolist() == brute_pairs(X, E, True)
    assert candidate_pairs(X, E).tolist() == brute_pairs(X, E, False)


@pytest.mark.parametrize("need", [False, True])
def test_numba_and_numpy_scans_agree(need):
    rng = np.random.default_rng(11)
    X = rng.uniform(size=(40, 2))
    E = np.array(sorted({tuple(sorted(rng.choice(40, 2, replace=False))) for _ in range(90)}), dtype=np.int64)
    a = kernels.scan_pairs_numba(X, E, need)
    b = kernels.scan_pairs_numpy(X, E, need)
    assert np.array_equal(a, b)


def test_crossing_subset_of_candidates():
    rng = np.random.default_rng(3)
    X = rng.uniform(size=(30, 2))
    E = np.array(sorted({tuple(sorted(rng.choice(30, 2, replace=False))) for _ in range(60)}))
    cand = {tuple(p) for p in candidate_pairs(X, E)}
    assert {tuple(p) for p in crossing_pairs(X, E)} <= cand
