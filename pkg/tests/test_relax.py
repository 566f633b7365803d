import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geonet import constructions as cs
from geonet import netcore as nc
from geonet.errors import NetStructureError, PreconditionError
from geonet.relax import RelaxProblem, load_problem, problem_from_json, relax, trace_to_json

from oracles import brute_force_min, distance_sum


def _star_problem(pts, start):
    ids = [f"p{i}" for i in range(len(pts))] + ["s"]
    edges = [(f"p{i}", "s", 1) for i in range(len(pts))]
    return RelaxProblem(ids, edges, {f"p{i}": p for i, p in enumerate(pts)}, {"s": start})


@settings(max_examples=15)
@given(st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=3, max_size=3))
def test_single_junction_reaches_brute_force_minimum(pts):
    xs, ys = zip(*pts)
    area2 = abs((xs[1] - xs[0]) * (ys[2] - ys[0]) - (xs[2] - xs[0]) * (ys[1] - ys[0]))
    if area2 < 0.5:
        return
    start = (sum(xs) / 3 + 0.1, sum(ys) / 3 - 0.1)
    t = relax(_star_problem(pts, start))
    assert t.monotone
    f = distance_sum(pts)
    _, _, best = brute_force_min(f, sum(xs) / 3, sum(ys) / 3, span=8.0)
    assert t.lengths[-1] <= best + 1e-9


def test_equilateral_junction_lands_on_center():
    pts = [(math.cos(a), math.sin(a)) for a in (0, 2 * math.pi / 3, 4 * math.pi / 3)]
    t = relax(_star_problem(pts, (0.3, -0.2)))
    assert t.converged and not t.events
    x, y = t.positions["s"]
    assert math.hypot(x, y) < 1e-9
    assert abs(t.lengths[-1] - 3) < 1e-12


def test_collinear_junction_merges():
    p = RelaxProblem(
        ["a", "b", "c", "s"],
        [("a", "s", 1), ("b", "s", 1), ("c", "s", 1)],
        {"a": (0, 0), "b": (1, 0), "c": (2, 0)},
        {"s": (1, 0.5)},
    )
    t = relax(p)
    assert t.converged
    kinds = [e["type"] for e in t.events]
    assert kinds == ["edge-shrink", "vertex-merge"]
    assert t.aliases == {"s": "b"}
    assert sorted(t.edges) == [("a", "b", 1), ("b", "c", 1)]
    assert abs(t.lengths[-1] - 2) < 1e-12


def test_near_square_h_net_collapses_to_x():
    # Junctions joined to opposite corners: the best net of that shape is the X.
    sq = {"a": (0, 0), "b": (1, 0), "c": (1, 1), "d": (0, 1)}
    p = RelaxProblem(
        list(sq) + ["s", "t"],
        [("a", "s", 1), ("c", "s", 1), ("b", "t", 1), ("d", "t", 1), ("s", "t", 1)],
        sq,
        {"s": (0.45, 0.5), "t": (0.55, 0.5)},
    )
    t = relax(p)
    assert t.converged and t.monotone
    assert any(e["type"] == "vertex-merge" for e in t.events)
    assert abs(t.lengths[-1] - 2 * math.sqrt(2)) < 1e-9


def test_square_h_net_keeps_its_junctions():
    sq = {"a": (0, 0), "b": (1, 0), "c": (1, 1), "d": (0, 1)}
    p = RelaxProblem(
        list(sq) + ["s", "t"],
        [("a", "s", 1), ("d", "s", 1), ("b", "t", 1), ("c", "t", 1), ("s", "t", 1)],
        sq,
        {"s": (0.3, 0.5), "t": (0.7, 0.5)},
    )
    t = relax(p)
    assert t.converged and not t.events
    assert abs(t.lengths[-1] - (1 + math.sqrt(3))) < 1e-9


def test_relaxed_net_validates():
    net = cs.y_net(((0, 0), (4, 0), (1, 3)), digits=30)
    p = RelaxProblem.from_net(net)
    p.initial = {k: (v[0] + 0.2, v[1] - 0.1) for k, v in p.initial.items()}
    t = relax(p)
    out = t.net(digits=20, tolerance="1e-7")
    assert nc.validate(out).ok
    assert abs(t.lengths[-1] - float(nc.length(net))) < 1e-10


def test_json_round_trip(tmp_path):
    net = cs.y_net(((0, 0), (2, 0), (1, 2)), digits=30)
    data = nc.to_json(net)
    data["max_iter"] = 500
    data["tolerance"] = 1e-10
    path = tmp_path / "p.json"
    path.write_text(json.dumps(data))
    p = load_problem(path)
    assert p.max_iter == 500 and p.tolerance == 1e-10
    assert problem_from_json(data).pinned == p.pinned
    out = trace_to_json(relax(p))
    assert out["converged"] and out["monotone"]
    again = nc.from_json(json.loads(json.dumps(out["net"])))
    assert len(again.vertices) == 4


def test_rejects_unpinned():
    with pytest.raises(PreconditionError):
        RelaxProblem(["a", "b"], [("a", "b", 1)], {}, {"a": (0, 0), "b": (1, 0)})


def test_rejects_disconnected():
    with pytest.raises(PreconditionError):
        RelaxProblem(["a", "b", "c"], [("a", "b", 1)], {"a": (0, 0), "c": (2, 0)}, {"b": (1, 0)})


def test_rejects_unknown_endpoint():
    with pytest.raises(NetStructureError):
        RelaxProblem(["a", "b"], [("a", "z", 1)], {"a": (0, 0)}, {"b": (1, 0)})


def test_weighted_junction_moves_toward_heavy_edge():
    p = RelaxProblem(
        ["a", "b", "c", "s"],
        [("a", "s", 3), ("b", "s", 1), ("c", "s", 1)],
        {"a": (0, 0), "b": (2, 1), "c": (2, -1)},
        {"s": (1, 0)},
    )
    t = relax(p)
    # Weight 3 exceeds 1 + 1, so the junction sits on the heavy terminal.
    assert t.aliases.get("s") == "a"
    assert abs(t.lengths[-1] - 2 * math.sqrt(5)) < 1e-9
