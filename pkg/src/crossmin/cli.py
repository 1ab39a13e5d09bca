"""Command line: ``crossmin gen | embed | metrics | bench``."""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np

from . import datagen
from .crsm import PenaltyParams, crsm_run
from .geometry import count_crossings
from .io import (DocumentError, GraphDocument, LayoutDocument, load_layout, read_graph_document,
                 save_graph, save_layout, write_json_atomic)
from .mds import smacof_embed, stress
from .model import GraphError, build_weights
from .render import RenderOptions, render_svg

log = logging.getLogger("crossmin")


def fmt(v):
    return format(float(v), ".12g")


def _positive(kind):
    def conv(s):
        v = kind(s)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {s}")
        return v
    return conv


def build_parser():
    p = argparse.ArgumentParser(prog="crossmin", description="Graph embedding with edge-crossing penalties.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a benchmark graph document")
    g.add_argument("--kind", choices=("planar", "tree", "forest"), default="planar")
    g.add_argument("--nodes", type=_positive(int), default=50)
    g.add_argument("--edges", type=int, default=80)
    g.add_argument("--dim", type=_positive(int), default=7)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.add_argument("--planar-out", help="also save the known crossing-free layout (planar/tree kinds)")

    e = sub.add_parser("embed", help="embed a graph document")
    e.add_argument("--in", dest="inp", required=True)
    e.add_argument("--mode", choices=("mds", "crsm"), default="crsm")
    e.add_argument("--alpha", type=float, default=2.0)
    e.add_argument("--epsilon", type=_positive(float), default=1e-3)
    e.add_argument("--tau", type=_positive(float), default=1e-6)
    e.add_argument("--rho-inc", type=float, default=1.1)
    e.add_argument("--rho-max", type=_positive(float), default=1e6)
    e.add_argument("--rho-div", type=_positive(float), default=4.0)
    e.add_argument("--max-outer", type=_positive(int), default=200)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--init", help="layout document used as the starting layout")
    e.add_argument("--out", required=True)
    e.add_argument("--svg")
    e.add_argument("--trace", help="write per-iteration layouts to this file")
    e.add_argument("--timing", action="store_true", help="record wall-clock runtime in the metrics")

    m = sub.add_parser("metrics", help="stress and crossing count of a layout")
    m.add_argument("--graph", required=True)
    m.add_argument("--layout", required=True)
    m.add_argument("--alpha", type=float, default=2.0)

    b = sub.add_parser("bench", help="MDS vs CR-SM over a generated suite")
    b.add_argument("--spec", required=True, help='JSON: {"rows": [[nodes, edges, dim, reps], ...]}')
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out", required=True)
    b.add_argument("--max-outer", type=_positive(int), default=200)
    return p


def cmd_gen(a):
    if a.kind == "planar":
        inst = datagen.generate(a.nodes, a.edges, a.dim, a.seed)
        doc = GraphDocument.from_instance(inst.graph, coords=inst.points, explicit=False)
    elif a.kind == "tree":
        inst = datagen.tree_instance(a.nodes, a.seed)
        doc = GraphDocument.from_instance(inst.graph, coords=inst.points, explicit=False)
    else:
        if a.planar_out:
            raise GraphError("--planar-out: forests have no reference layout")
        inst = None
        doc = GraphDocument.from_instance(datagen.synthetic_forest(a.nodes, a.edges, seed=a.seed))
    save_graph(a.out, doc)
    if a.planar_out and inst is not None:
        _save_layout(a.planar_out, doc.ids, inst.planar_layout, inst.graph, 2.0)
    print(f"wrote {a.out}: {len(doc.ids)} nodes, {len(doc.edges)} edges")
    return 0


def _metrics(X, g, alpha):
    return {"stress": float(stress(X, g, build_weights(g, alpha))), "crossings": int(count_crossings(X, g))}


def _save_layout(path, ids, X, g, alpha, runtime=None, trace=None):
    met = _metrics(X, g, alpha)
    met["runtime_seconds"] = runtime
    save_layout(path, LayoutDocument(list(ids), np.asarray(X, dtype=float), met, trace))
    return met


def cmd_embed(a):
    gdoc = read_graph_document(a.inp)
    g = gdoc.to_instance()
    init = None
    if a.init:
        init = load_layout(a.init).aligned(gdoc)
    t0 = time.perf_counter()
    frames = []
    records = None
    if a.mode == "mds":
        w = build_weights(g, a.alpha)
        X, tr = smacof_embed(g, w, init=init, seed=a.seed)
        records = [{"iteration": k, "stress": float(s)} for k, s in enumerate(tr)]
    else:
        params = PenaltyParams(epsilon=a.epsilon, tau=a.tau, constant=a.rho_div, rho_inc=a.rho_inc,
                               rho_max=a.rho_max, max_outer=a.max_outer, alpha=a.alpha)

        def keep(Xc, entry):
            if a.trace:
                frames.append(dict(entry, coords=np.asarray(Xc, dtype=float).tolist()))

        X, rep = crsm_run(g, params, init=init, seed=a.seed, callback=keep)
        records = [dict(e) for e in rep.trace]
        log.info("crsm: %s after %d penalty iterations", rep.convergence_reason, rep.penalty_iterations)
    runtime = time.perf_counter() - t0 if a.timing else None
    met = _save_layout(a.out, gdoc.ids, X, g, a.alpha, runtime, records)
    if a.svg:
        with open(a.svg, "w") as fh:
            fh.write(render_svg(X, g, RenderOptions(ids=tuple(gdoc.ids))))
    if a.trace:
        write_json_atomic(a.trace, {"ids": gdoc.ids, "frames": frames})
    print(f"stress {fmt(met['stress'])}")
    print(f"crossings {met['crossings']}")
    return 0


def cmd_metrics(a):
    gdoc = read_graph_document(a.graph)
    g = gdoc.to_instance()
    X = load_layout(a.layout).aligned(gdoc)
    met = _metrics(X, g, a.alpha)
    print(f"stress {fmt(met['stress'])}")
    print(f"crossings {met['crossings']}")
    return 0


def read_bench_spec(path):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"spec: not valid JSON ({exc})") from exc
    rows = doc.get("rows") if isinstance(doc, dict) else None
    if not isinstance(rows, list) or not rows:
        raise DocumentError("rows: expected a non-empty list of [nodes, edges, dim, reps]")
    out = []
    for k, r in enumerate(rows):
        if not (isinstance(r, list) and len(r) == 4 and all(isinstance(v, int) and v > 0 for v in r)):
            raise DocumentError(f"rows[{k}]: expected four positive integers, got {r!r}")
        out.append(tuple(r))
    return out


def run_bench(rows, seed=0, params=PenaltyParams()):
    """Per-instance MDS and CR-SM results plus a per-size summary."""
    per = []
    for inst in datagen.suite(rows, seed):
        g = inst.graph
        w = build_weights(g, params.alpha)
        Xm, _ = smacof_embed(g, w, seed=inst.seed % 2**31)
        Xc, rep = crsm_run(g, params, init=Xm)
        sm = stress(Xm, g, w)
        per.append({"nodes": g.node_count, "edges": g.edge_count, "dim": inst.source_dim, "seed": inst.seed,
                    "planar_stress": inst.planar_stress,
                    "mds_stress": sm, "mds_crossings": count_crossings(Xm, g),
                    "crsm_stress": rep.final_stress, "crsm_crossings": rep.final_crossings,
                    "stress_ratio": rep.final_stress / sm if sm > 0 else float("nan")})
    table = []
    keys = sorted({(r["nodes"], r["edges"], r["dim"]) for r in per})
    for v, e, d in keys:
        sel = [r for r in per if (r["nodes"], r["edges"], r["dim"]) == (v, e, d)]
        table.append({"nodes": v, "edges": e, "dim": d, "instances": len(sel),
                      "mds_stress": 1.0,
                      "crsm_stress": float(np.mean([r["stress_ratio"] for r in sel])),
                      "mds_crossings": float(np.mean([r["mds_crossings"] for r in sel])),
                      "crsm_crossings": float(np.mean([r["crsm_crossings"] for r in sel]))})
    return per, table


def cmd_bench(a):
    rows = read_bench_spec(a.spec)
    os.makedirs(a.out, exist_ok=True)
    per, table = run_bench(rows, a.seed, PenaltyParams(max_outer=a.max_outer))
    write_json_atomic(os.path.join(a.out, "instances.json"), per)
    write_json_atomic(os.path.join(a.out, "summary.json"), table)
    head = "nodes\tedges\tdim\tn\tmds_stress\tcrsm_stress\tmds_crossings\tcrsm_crossings"
    lines = [head] + ["\t".join([str(t["nodes"]), str(t["edges"]), str(t["dim"]), str(t["instances"]),
                                 fmt(t["mds_stress"]), fmt(t["crsm_stress"]),
                                 fmt(t["mds_crossings"]), fmt(t["crsm_crossings"])]) for t in table]
    text = "\n".join(lines) + "\n"
    with open(os.path.join(a.out, "table.tsv"), "w") as fh:
        fh.write(text)
    sys.stdout.write(text)
    return 0


COMMANDS = {"gen": cmd_gen, "embed": cmd_embed, "metrics": cmd_metrics, "bench": cmd_bench}


def main(argv=None):
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[a.cmd](a)
    except (GraphError, datagen.GenerationError, ValueError, OSError) as exc:
        print(f"crossmin {a.cmd}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
