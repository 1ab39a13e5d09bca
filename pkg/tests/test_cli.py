import json

import numpy as np
import pytest

from crossmin import datagen
from crossmin.cli import main, run_bench
from crossmin.crsm import PenaltyParams, crsm_run
from crossmin.io import GraphDocument, LayoutDocument, save_graph, save_layout
from crossmin.mds import smacof_embed, stress
from crossmin.model import build_weights


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_embed_metrics(tmp_path, capsys):
    g = tmp_path / "g.json"
    ref = tmp_path / "ref.json"
    code, out, _ = run(capsys, "gen", "--nodes", 20, "--edges", 30, "--seed", 1, "--out", g, "--planar-out", ref)
    assert code == 0 and "20 nodes, 30 edges" in out
    lay = tmp_path / "l.json"
    code, out, _ = run(capsys, "embed", "--in", g, "--out", lay, "--svg", tmp_path / "l.svg",
                       "--trace", tmp_path / "t.json", "--max-outer", 3)
    assert code == 0
    doc = json.loads(lay.read_text())
    assert doc["metrics"]["runtime_seconds"] is None
    assert doc["trace"] and (tmp_path / "l.svg").read_text().startswith("<svg")
    frames = json.loads((tmp_path / "t.json").read_text())["frames"]
    assert len(frames) == len(doc["trace"])
    code, out2, _ = run(capsys, "metrics", "--graph", g, "--layout", lay)
    assert code == 0 and out2 == out
    code, out, _ = run(capsys, "metrics", "--graph", g, "--layout", ref)
    assert "crossings 0" in out


def test_metrics_on_exact_triangle(tmp_path, capsys):
    doc = {"format_version": "1", "nodes": [{"id": "a", "coords": [0, 0]}, {"id": "b", "coords": [3, 4]},
                                            {"id": "c", "coords": [3, 0]}],
           "edges": [{"source": "a", "target": "b"}, {"source": "b", "target": "c"},
                     {"source": "a", "target": "c"}],
           "distances": "euclidean-from-coords"}
    (tmp_path / "t.json").write_text(json.dumps(doc))
    save_layout(tmp_path / "l.json", LayoutDocument(["a", "b", "c"], np.array([[0, 0], [3, 4], [3, 0]], float)))
    code, out, _ = run(capsys, "metrics", "--graph", tmp_path / "t.json", "--layout", tmp_path / "l.json")
    assert code == 0 and out == "stress 0\ncrossings 0\n"


def test_crsm_on_crossing_free_seed(tmp_path, capsys):
    inst = datagen.tree_instance(15, seed=2)
    g = tmp_path / "g.json"
    save_graph(g, GraphDocument.from_instance(inst.graph))
    init = tmp_path / "init.json"
    save_layout(init, LayoutDocument([str(i) for i in range(15)], inst.planar_layout))
    code, out, _ = run(capsys, "embed", "--in", g, "--init", init, "--out", tmp_path / "o.json")
    want = stress(inst.planar_layout, inst.graph, build_weights(inst.graph))
    assert code == 0
    lines = out.split()
    assert float(lines[1]) == pytest.approx(want, rel=1e-11) and lines[3] == "0"


def test_mds_mode(tmp_path, capsys):
    g = tmp_path / "g.json"
    run(capsys, "gen", "--nodes", 10, "--edges", 12, "--out", g)
    code, out, _ = run(capsys, "embed", "--in", g, "--mode", "mds", "--out", tmp_path / "m.json", "--timing")
    assert code == 0
    assert json.loads((tmp_path / "m.json").read_text())["metrics"]["runtime_seconds"] >= 0


@pytest.mark.parametrize("argv", [[], ["gen"], ["embed", "--in", "x"], ["gen", "--nodes", "0", "--out", "x"]])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2


def test_runtime_errors_exit_1(tmp_path, capsys):
    code, _, err = run(capsys, "embed", "--in", tmp_path / "missing.json", "--out", tmp_path / "o.json")
    assert code == 1 and "error" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"format_version": "1", "nodes": [{"id": "a"}], "edges": [{"source": "a", "target": "q"}],'
                   ' "distances": []}')
    code, _, err = run(capsys, "embed", "--in", bad, "--out", tmp_path / "o.json")
    assert code == 1 and "'q'" in err
    code, _, err = run(capsys, "gen", "--nodes", 3, "--edges", 10, "--out", tmp_path / "g.json")
    assert code == 1


def test_mini_bench(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    rows = [[12, 10, 4, 1], [12, 14, 4, 1], [14, 12, 4, 1], [14, 16, 4, 1]]
    spec.write_text(json.dumps({"rows": rows}))
    code, out, _ = run(capsys, "bench", "--spec", spec, "--out", tmp_path / "b", "--max-outer", 3)
    assert code == 0
    table = out.strip().splitlines()
    assert len(table) == 5 and table[0].startswith("nodes\tedges")
    per = json.loads((tmp_path / "b" / "instances.json").read_text())
    insts = datagen.suite([tuple(r) for r in rows], 0)
    for rec, inst in zip(per, insts):
        w = build_weights(inst.graph)
        Xm, _ = smacof_embed(inst.graph, w, seed=inst.seed % 2**31)
        _, rep = crsm_run(inst.graph, PenaltyParams(max_outer=3), init=Xm)
        assert rec["crsm_crossings"] == rep.final_crossings
        assert rec["stress_ratio"] == pytest.approx(rep.final_stress / stress(Xm, inst.graph, w))


def test_bad_bench_spec(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text('{"rows": [[1, 2]]}')
    code, _, err = run(capsys, "bench", "--spec", spec, "--out", tmp_path / "b")
    assert code == 1 and "rows[0]" in err
