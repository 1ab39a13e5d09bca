"""JSON graph and layout documents.

Graph document::

    {"format_version": "1",
     "nodes": [{"id": "a", "group": "L1", "coords": [0.1, 2.0, ...]}, ...],
     "edges": [{"source": "a", "target": "b"}, ...],
     "distances": "euclidean-from-coords" | [d10, d20, d21, d30, ...]}

An explicit matrix is stored as its strict lower triangle, row by row.

Layout document::

    {"format_version": "1",
     "nodes": [{"id": "a", "x": 0.5, "y": -1.25}, ...],
     "metrics": {"stress": ..., "crossings": ..., "runtime_seconds": ... | null},
     "trace": [...] | null}

Floats are written with ``repr`` precision, so a save/load round trip is exact.
"""
from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .model import GraphError, GraphInstance, as_layout

FORMAT_VERSION = "1"
EUCLIDEAN = "euclidean-from-coords"


class DocumentError(GraphError):
    """Malformed graph or layout document; the message names the field."""


def _fail(where, msg):
    raise DocumentError(f"{where}: {msg}")


def _real(v, where):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(where, f"expected a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        _fail(where, "must be finite")
    return v


def tril_to_square(vals, n):
    vals = np.asarray(vals, dtype=float)
    if vals.shape != (n * (n - 1) // 2,):
        raise DocumentError(f"distances: expected {n * (n - 1) // 2} entries for {n} nodes, got {vals.size}")
    d = np.zeros((n, n))
    i, j = np.tril_indices(n, -1)
    d[i, j] = vals
    d[j, i] = vals
    return d


def square_to_tril(d):
    d = np.asarray(d, dtype=float)
    i, j = np.tril_indices(len(d), -1)
    return d[i, j]


@dataclass
class GraphDocument:
    ids: list
    edges: list  # (source id, target id)
    distances: object  # EUCLIDEAN or a 1-d array of lower-triangular entries
    groups: Optional[list] = None
    coords: Optional[np.ndarray] = None
    format_version: str = FORMAT_VERSION

    def index(self):
        return {k: i for i, k in enumerate(self.ids)}

    def to_instance(self) -> GraphInstance:
        n = len(self.ids)
        pos = self.index()
        E = np.array([(pos[s], pos[t]) for s, t in self.edges], dtype=np.int64).reshape(-1, 2)
        if isinstance(self.distances, str):
            if self.coords is None:
                _fail("distances", "euclidean-from-coords needs coords on every node")
            pts = np.asarray(self.coords, dtype=float)
            diff = pts[:, None, :] - pts[None, :, :]
            d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
        else:
            d = tril_to_square(self.distances, n)
        try:
            return GraphInstance(n, E, d, tuple(self.groups) if self.groups is not None else None)
        except DocumentError:
            raise
        except GraphError as exc:
            raise DocumentError(f"distances: {exc}") from exc

    @classmethod
    def from_instance(cls, g: GraphInstance, ids=None, coords=None, explicit=True):
        """Document for ``g``; ``explicit=False`` stores coords instead of the matrix."""
        ids = [str(i) for i in range(g.node_count)] if ids is None else [str(i) for i in ids]
        E = g.directed if g.directed is not None else g.edges
        edges = [(ids[int(a)], ids[int(b)]) for a, b in E]
        if explicit or coords is None:
            dist = square_to_tril(g.distances)
        else:
            dist = EUCLIDEAN
        groups = list(g.groups) if g.groups is not None else None
        return cls(ids, edges, dist, groups, None if coords is None else np.asarray(coords, dtype=float))

    def to_json(self):
        nodes = []
        for k, nid in enumerate(self.ids):
            rec = {"id": nid}
            if self.groups is not None and self.groups[k] is not None:
                rec["group"] = self.groups[k]
            if self.coords is not None:
                rec["coords"] = [float(v) for v in self.coords[k]]
            nodes.append(rec)
        dist = self.distances if isinstance(self.distances, str) else [float(v) for v in self.distances]
        return {"format_version": self.format_version, "nodes": nodes,
                "edges": [{"source": s, "target": t} for s, t in self.edges],
                "distances": dist}

    @classmethod
    def from_json(cls, doc):
        if not isinstance(doc, dict):
            _fail("document", "top level must be an object")
        ver = doc.get("format_version")
        if ver != FORMAT_VERSION:
            _fail("format_version", f"unsupported version {ver!r} (expected {FORMAT_VERSION!r})")
        nodes = doc.get("nodes")
        if not isinstance(nodes, list):
            _fail("nodes", "must be a list")
        ids, groups, coords = [], [], []
        seen = set()
        for k, rec in enumerate(nodes):
            where = f"nodes[{k}]"
            if not isinstance(rec, dict) or "id" not in rec:
                _fail(where, "each node needs an 'id'")
            nid = rec["id"]
            if not isinstance(nid, str):
                _fail(f"{where}.id", f"must be a string, got {nid!r}")
            if nid in seen:
                _fail(f"{where}.id", f"duplicate id {nid!r}")
            seen.add(nid)
            ids.append(nid)
            grp = rec.get("group")
            if grp is not None and not isinstance(grp, str):
                _fail(f"{where}.group", "must be a string")
            groups.append(grp)
            c = rec.get("coords")
            if c is not None:
                if not isinstance(c, list) or not c:
                    _fail(f"{where}.coords", "must be a non-empty list of numbers")
                c = [_real(v, f"{where}.coords") for v in c]
            coords.append(c)
        edges_raw = doc.get("edges")
        if not isinstance(edges_raw, list):
            _fail("edges", "must be a list")
        edges = []
        for k, rec in enumerate(edges_raw):
            where = f"edges[{k}]"
            if not isinstance(rec, dict):
                _fail(where, "must be an object with source and target")
            for key in ("source", "target"):
                if rec.get(key) not in seen:
                    _fail(f"{where}.{key}", f"unknown node id {rec.get(key)!r}")
            edges.append((rec["source"], rec["target"]))
        have = [c is not None for c in coords]
        pts = None
        if any(have):
            if not all(have):
                _fail("nodes", "coords must be given on every node or on none")
            dims = {len(c) for c in coords}
            if len(dims) != 1:
                _fail("nodes", f"coords have mixed dimensions {sorted(dims)}")
            pts = np.array(coords, dtype=float)
        dist = doc.get("distances")
        if isinstance(dist, str):
            if dist != EUCLIDEAN:
                _fail("distances", f"unknown mode {dist!r}")
            if pts is None:
                _fail("distances", "euclidean-from-coords needs coords on every node")
        elif isinstance(dist, list):
            dist = np.array([_real(v, f"distances[{k}]") for k, v in enumerate(dist)], dtype=float)
            n = len(ids)
            if dist.size != n * (n - 1) // 2:
                _fail("distances", f"expected {n * (n - 1) // 2} lower-triangular entries, got {dist.size}")
            if np.any(dist <= 0.0):
                k = int(np.flatnonzero(dist <= 0.0)[0])
                _fail(f"distances[{k}]", "must be positive")
        else:
            _fail("distances", "must be 'euclidean-from-coords' or a list of numbers")
        if all(g is None for g in groups):
            groups = None
        return cls(ids, edges, dist, groups, pts, ver)


@dataclass
class LayoutDocument:
    ids: list
    coords: np.ndarray
    metrics: dict = field(default_factory=dict)
    trace: Optional[list] = None
    format_version: str = FORMAT_VERSION

    def to_json(self):
        X = np.asarray(self.coords, dtype=float)
        return {"format_version": self.format_version,
                "nodes": [{"id": nid, "x": float(X[k, 0]), "y": float(X[k, 1])}
                          for k, nid in enumerate(self.ids)],
                "metrics": _plain(self.metrics),
                "trace": _plain(self.trace)}

    @classmethod
    def from_json(cls, doc):
        if not isinstance(doc, dict):
            _fail("document", "top level must be an object")
        ver = doc.get("format_version")
        if ver != FORMAT_VERSION:
            _fail("format_version", f"unsupported version {ver!r} (expected {FORMAT_VERSION!r})")
        nodes = doc.get("nodes")
        if not isinstance(nodes, list):
            _fail("nodes", "must be a list")
        ids, xy = [], []
        for k, rec in enumerate(nodes):
            if not isinstance(rec, dict) or "id" not in rec:
                _fail(f"nodes[{k}]", "each node needs an 'id'")
            ids.append(rec["id"])
            xy.append((_real(rec.get("x"), f"nodes[{k}].x"), _real(rec.get("y"), f"nodes[{k}].y")))
        if len(set(ids)) != len(ids):
            _fail("nodes", "duplicate ids")
        metrics = doc.get("metrics") or {}
        if not isinstance(metrics, dict):
            _fail("metrics", "must be an object")
        return cls(ids, np.array(xy, dtype=float).reshape(-1, 2), metrics, doc.get("trace"), ver)

    def aligned(self, gdoc: GraphDocument):
        """Coordinates reordered to the node order of ``gdoc``; ids must match exactly."""
        if sorted(self.ids) != sorted(gdoc.ids):
            missing = sorted(set(gdoc.ids) - set(self.ids))
            extra = sorted(set(self.ids) - set(gdoc.ids))
            _fail("nodes", f"layout ids do not match the graph (missing {missing[:5]}, extra {extra[:5]})")
        pos = {k: i for i, k in enumerate(self.ids)}
        return as_layout(self.coords[[pos[k] for k in gdoc.ids]])


def _plain(obj):
    """numpy scalars/arrays -> JSON-ready Python values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def write_json_atomic(path, obj):
    """Serialize to a temp file in the target directory, then rename over ``path``."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix=".json")
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(obj, fh, indent=1, allow_nan=False)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _read(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"document: not valid JSON ({exc})") from exc


def read_graph_document(path) -> GraphDocument:
    return GraphDocument.from_json(_read(path))


def load_graph(path) -> GraphInstance:
    return read_graph_document(path).to_instance()


def save_graph(path, doc: GraphDocument):
    write_json_atomic(path, doc.to_json())


def load_layout(path) -> LayoutDocument:
    return LayoutDocument.from_json(_read(path))


def save_layout(path, doc: LayoutDocument):
    write_json_atomic(path, doc.to_json())
