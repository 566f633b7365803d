import csv
import json

import mpmath as mp
import pytest

from geonet import cli
from geonet import constructions as cs
from geonet import netcore as nc
from geonet.errors import PreconditionError
from geonet.render import RenderStyle, render_svg


def _segment():
    b = nc.NetBuilder(digits=20)
    b.add_vertex("a", (0, 0), nc.BOUNDARY)
    b.add_vertex("b", (1, 0), nc.BOUNDARY)
    b.add_edge("a", "b")
    return b.build()


def test_segment_renders_one_line():
    svg = render_svg(_segment())
    assert svg.count("<line") == 1
    assert svg.count("<circle") == 2
    assert svg.startswith("<?xml")


def test_render_is_deterministic():
    net = cs.build_double_polygon(5, 30)
    assert render_svg(net) == render_svg(net)


def test_multiplicity_widens_stroke():
    net = cs.build_weighted_triangle(cs.WeightedTriangleSpec.pythagorean(1), 30)
    svg = render_svg(net, RenderStyle(stroke=1.0, stroke_per_mult=1.0))
    lines = [ln for ln in svg.splitlines() if ln.startswith("<line")]
    widths = {float(ln.split('stroke-width="')[1].split('"')[0]) for ln in lines}
    mults = {e.mult for e in net.edges}
    assert widths == {1.0 + (m - 1) for m in mults}


def test_render_labels():
    svg = render_svg(_segment(), RenderStyle(labels=True))
    assert ">a</text>" in svg and ">b</text>" in svg


def test_empty_net_rejected():
    with pytest.raises(PreconditionError):
        render_svg(nc.PlanarNet((), (), 20, mp.mpf("1e-10")))


def test_gen_validate_round_trip(tmp_path, capsys):
    out = tmp_path / "y.json"
    assert cli.main(["gen", "--kind", "y", "--digits", "40", "--output", str(out)]) == 0
    rep = tmp_path / "rep.json"
    assert cli.main(["validate", "--net", str(out), "--report", str(rep)]) == 0
    data = json.loads(rep.read_text())
    assert data["ok"] is True
    assert mp.mpf(data["length"]) == pytest.approx(mp.mpf(data["length_via_imbalance"]))
    assert "ok=True" in capsys.readouterr().out


def test_validate_fails_on_unbalanced(tmp_path):
    b = nc.NetBuilder(digits=20)
    b.add_vertex("a", (0, 0), nc.BOUNDARY)
    b.add_vertex("b", (2, 0), nc.BOUNDARY)
    b.add_vertex("c", (1, 2), nc.BOUNDARY)
    b.add_vertex("s", (1, 1))
    for v in "abc":
        b.add_edge(v, "s")
    path = tmp_path / "bad.json"
    path.write_text(nc.dumps(b.build()))
    assert cli.main(["validate", "--net", str(path), "--report", str(tmp_path / "r.json")]) == 1


def test_usage_error_exit_code(tmp_path):
    assert cli.main(["validate", "--net", str(tmp_path / "missing.json")]) == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["star", "--layers", "x"])
    assert info.value.code == 2


def test_gen_all_kinds(tmp_path):
    for kind in ("weighted-triangle", "double-polygon", "four-point"):
        out = tmp_path / f"{kind}.json"
        svg = tmp_path / f"{kind}.svg"
        assert cli.main(["gen", "--kind", kind, "--output", str(out), "--svg", str(svg)]) == 0
        assert nc.validate(nc.loads(out.read_text())).ok
        assert "<svg" in svg.read_text()


def test_star_command(tmp_path):
    rep, emit = tmp_path / "s.json", tmp_path / "net.json"
    assert cli.main(["star", "--layers", "5", "--digits", "40", "--report", str(rep), "--emit", str(emit)]) == 0
    data = json.loads(rep.read_text())
    assert data["counts"]["boundary_vertices"] == 14
    assert data["validation"]["ok"]
    assert nc.validate(nc.loads(emit.read_text())).ok


def test_star_command_reports_breakdown(tmp_path):
    rep = tmp_path / "s.json"
    assert cli.main(["star", "--layers", "30", "--phi", "1e-4", "--report", str(rep)]) == 1
    assert json.loads(rep.read_text())["layer"] is not None


def test_derivseq_command(tmp_path):
    gap, table = tmp_path / "g.json", tmp_path / "t.csv"
    assert cli.main(["derivseq", "--n", "40", "--gap", str(gap), "--csv", str(table)]) == 0
    g = json.loads(gap.read_text())
    assert g["pair"] == [0, 2]
    rows = list(csv.reader(table.open()))
    assert rows[0][0] == "i" and len(rows) == 42


def test_relax_command(tmp_path):
    net = cs.y_net(((0, 0), (3, 0), (1, 2)), digits=30)
    data = nc.to_json(net)
    prob = tmp_path / "p.json"
    prob.write_text(json.dumps(data))
    trace = tmp_path / "t.json"
    assert cli.main(["relax", "--problem", str(prob), "--trace", str(trace)]) == 0
    assert json.loads(trace.read_text())["converged"]


def test_render_command(tmp_path):
    path = tmp_path / "seg.json"
    path.write_text(nc.dumps(_segment()))
    svg = tmp_path / "seg.svg"
    assert cli.main(["render", "--net", str(path), "--output", str(svg)]) == 0
    assert svg.read_text().count("<line") == 1


def test_report_without_layers(tmp_path):
    out = tmp_path / "r.json"
    cli.main(["report", "--layers", "0", "--output", str(out)])
    rep = json.loads(out.read_text())
    s = rep["summary"]
    assert s["structure_counts"] and s["star_valid"]
    assert s["derivative_gap"] and s["radius_claims"] and s["angle_window"]
    assert mp.mpf(rep["x9"]) < mp.mpf("0.7")


def test_report_rejects_bad_alpha0(tmp_path):
    out = tmp_path / "r.json"
    assert cli.main(["report", "--alpha0", "4", "--output", str(out)]) == 1
    assert json.loads(out.read_text())["error"]["stage"] == "config"


def test_report_function_records_failures():
    rep = cli.run_report(layers=30, phi=mp.mpf("1e-4"), digits=40, overlaps=False)
    assert "error" in rep["steps"]["star"]
    assert rep["summary"]["all_passed"] is False
