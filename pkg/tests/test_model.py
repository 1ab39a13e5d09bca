import numpy as np
import pytest

from crossmin.model import (GraphError, GraphInstance, as_layout, build_weights, edge_segment,
                            plus_part)


def test_plus_part():
    assert plus_part([-1, 0, 2]).tolist() == [0, 0, 2]
    assert plus_part([0, 0]).tolist() == [0, 0]
    assert plus_part([-3.5]).tolist() == [0]


def tri(d12=1.0, d13=2.0, d23=4.0):
    d = np.array([[0, d12, d13], [d12, 0, d23], [d13, d23, 0]], float)
    return GraphInstance(3, [[0, 1]], d)


def test_weights_direct_formula():
    w = build_weights(tri()).w
    assert w[0, 1] == 1.0 and w[0, 2] == 0.25 and w[1, 2] == 0.0625
    assert np.all(np.diag(w) == 0)
    assert build_weights(tri(2.0)).w[0, 1] == 0.25
    assert build_weights(tri(1.0), alpha=3.7).w[0, 1] == 1.0


def test_edges_are_normalized_and_kept_directed():
    g = GraphInstance(3, [[2, 0], [1, 2]], tri().distances)
    assert g.edges.tolist() == [[0, 2], [1, 2]]
    assert g.directed.tolist() == [[2, 0], [1, 2]]
    assert g.edge_count == 2


@pytest.mark.parametrize("edges,msg", [
    ([[0, 3]], "outside"),
    ([[1, 1]], "self-loop"),
    ([[0, 1], [1, 0]], "duplicate"),
])
def test_bad_edges(edges, msg):
    with pytest.raises(GraphError, match=msg):
        GraphInstance(3, edges, tri().distances)


def test_bad_distances():
    d = tri().distances.copy()
    d[0, 1] = 5.0
    with pytest.raises(GraphError, match="symmetric"):
        GraphInstance(3, [], d)
    d = tri().distances.copy()
    d[0, 1] = d[1, 0] = 0.0
    with pytest.raises(GraphError, match="positive"):
        GraphInstance(3, [], d)
    with pytest.raises(GraphError, match="3x3"):
        GraphInstance(3, [], np.zeros((2, 2)))


def test_instance_arrays_are_read_only():
    g = tri()
    with pytest.raises(ValueError):
        g.distances[0, 1] = 3.0
    with pytest.raises(ValueError):
        g.edges[0, 0] = 2


def test_from_points_is_euclidean():
    pts = np.array([[0, 0, 0], [3, 4, 0], [0, 0, 12]], float)
    g = GraphInstance.from_points(pts, [[0, 1]])
    assert g.distances[0, 1] == 5.0 and g.distances[0, 2] == 12.0 and g.distances[1, 2] == 13.0


def test_layout_validation():
    assert as_layout([[0, 1], [2, 3]]).shape == (2, 2)
    with pytest.raises(GraphError):
        as_layout([[0, 1, 2]])
    with pytest.raises(GraphError):
        as_layout([[0, np.nan]])
    with pytest.raises(GraphError):
        as_layout([[0, 1]], node_count=2)


def test_edge_segment():
    assert edge_segment([[0, 0], [1, 1]], (0, 1)).tolist() == [[0, 0], [1, 1]]
    assert edge_segment([[5, 2], [0, 0], [3, 4]], (0, 2)).tolist() == [[5, 2], [3, 4]]
    assert edge_segment([[1, 1], [1, 1]], (0, 1)).tolist() == [[1, 1], [1, 1]]
