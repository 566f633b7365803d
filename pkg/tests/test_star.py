from dataclasses import replace

import mpmath as mp
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geonet import geometry as g
from geonet import netcore as nc
from geonet import star
from geonet.errors import ConstructionError, PreconditionError

DEG = lambda x: x * 180 / mp.pi  # noqa: E731


@pytest.fixture(scope="module")
def g20():
    return star.build_star(n=20, phi=0, digits=50)


def test_inner_circle_symmetric():
    s = star.build_inner_circle(star.StarConfig(n=0, phi=0, digits=50))
    rec = s.layers[0]
    with mp.workdps(s.config.work_digits):
        for k, v in enumerate(rec.vertices):
            assert abs(g.norm(v) - 1) < mp.mpf("1e-45")
            assert abs(g.direction_angle(v) - mp.mpf(2 * mp.pi * k / 7 if k < 4 else 2 * mp.pi * (k - 7) / 7)) < mp.mpf("1e-45")
        assert abs(rec.vertices[0][1]) < mp.mpf("1e-50")
        P, Q = s.outer[0], s.outer[1]
        v = rec.vertices[0]
        angle = g.ccw_angle(g.sub(Q, v), g.sub(P, v))
        assert abs(angle - mp.mpf(88) / 21) < mp.mpf("1e-45")
        assert rec.case == star.CASE_A and rec.origin == "initial"


def test_inner_circle_deviated_keeps_rotation_only():
    s = star.build_inner_circle(star.StarConfig(n=0, phi=mp.mpf("1e-3"), digits=50))
    rec = s.layers[0]
    with mp.workdps(s.config.work_digits):
        v = rec.vertices[0]
        assert abs(v[1]) > mp.mpf("1e-6")  # reflection symmetry broken
        for k in range(7):
            w = g.rotate(v, 2 * mp.pi * k / 7)
            assert g.dist(w, rec.vertices[k]) < mp.mpf("1e-45")
        assert abs(rec.phi - mp.mpf("1e-3")) < mp.mpf("1e-45")


def test_case_tags_first_layers():
    s = star.build_star(n=4, phi=0, digits=40)
    assert s.case_tags()[:4] == ["A", "A", "B1", "B2"]
    assert s.layers[2].suspension.kind == "two-hook"
    assert s.layers[3].suspension.kind == "one-hook"
    assert s.layers[0].suspension is None and s.layers[1].suspension is None


def test_g3_counts_and_balance():
    s = star.build_star(n=3, phi=0, digits=50)
    c = s.counts()
    assert c["balanced_layer_vertices"] == 21
    assert c["boundary_vertices"] == 14
    assert c["fermat_vertices"] == 7
    assert c["interior_vertices"] == 21 + 7 + c["crossing_vertices"]
    rep = nc.validate(s.net)
    assert rep.ok and rep.max_residual < mp.mpf("1e-25")


def test_g5_residual():
    rep = nc.validate(star.build_star(n=5, phi=0, digits=50).net)
    assert rep.ok and rep.max_residual <= mp.mpf("1e-30")


def test_g0_is_the_bare_frame():
    s = star.build_star(n=0, phi=0, digits=30)
    net = s.net
    assert len(net.boundary_ids) == 14 and len(net.interior_ids) == 0
    rep = nc.validate(net)
    assert rep.ok and len(rep.boundary_edges) == 14


@settings(max_examples=12)
@given(st.integers(0, 12), st.sampled_from(["0", "1e-12", "-1e-12", "1e-20"]))
def test_always_fourteen_boundary_vertices(n, phi):
    s = star.build_star(n=n, phi=mp.mpf(phi), digits=40)
    assert len(s.net.boundary_ids) == 14
    assert len(s.layers) == n + 1
    assert all(len(r.vertices) == 7 for r in s.layers)


@settings(max_examples=8)
@given(st.integers(1, 10), st.floats(-1e-12, 1e-12))
def test_layers_rotationally_symmetric(n, phi):
    s = star.build_star(n=n, phi=mp.mpf(phi), digits=40)
    with mp.workdps(s.config.work_digits):
        for rec in s.layers:
            v0 = rec.vertices[0]
            for k in range(1, 7):
                assert g.dist(g.rotate(v0, 2 * mp.pi * k / 7), rec.vertices[k]) < mp.mpf("1e-45")


def test_suspension_angles_vanish_without_deviation(g20):
    assert all(abs(p) < mp.mpf("1e-40") for p in star.measure_suspension_angles(g20))


def test_first_suspension_angle_is_phi():
    s = star.build_star(n=3, phi=mp.mpf("1e-9"), digits=50)
    assert abs(s.phis[0] - mp.mpf("1e-9")) < mp.mpf("1e-55")


def test_one_step_alpha_examples():
    with mp.workdps(50):
        a120 = star.alpha_beta_x_sequences(1, alpha0=mp.radians(120), digits=50).alpha[1]
        a180 = star.alpha_beta_x_sequences(1, alpha0=mp.radians(180) - mp.mpf("1e-10"), digits=50).alpha[1]
        assert abs(DEG(a120) - 129) < 1
        assert abs(DEG(a180) - 188) < 1


def test_sequences_known_values():
    seq = star.alpha_beta_x_sequences(12, digits=50)
    with mp.workdps(50):
        assert abs(DEG(seq.beta[0]) - mp.mpf("119.9")) < mp.mpf("0.01")
        assert seq.x[9] < mp.mpf("0.7")
        assert 180 < DEG(seq.alpha[9]) < 190
        assert abs(seq.x[9] - mp.mpf("0.69714199")) < mp.mpf("1e-8")


def test_sequence_error_near_pi():
    with pytest.raises(ConstructionError):
        star.alpha_beta_x_sequences(2, alpha0=mp.pi, digits=30)


def test_angle_windows_short():
    seq = star.alpha_beta_x_sequences(200, digits=40)
    rep = star.angle_window_report(seq, 1, 200)
    assert rep["alpha_ok"] and rep["beta_ok"]


def test_contraction_base_case():
    seq = star.alpha_beta_x_sequences(60, digits=50)
    chk = star.check_contraction_claim(seq, 9)
    assert chk.ok and chk.length in (8, 9)


def test_contraction_short_case_uses_nine():
    seq = star.alpha_beta_x_sequences(520, digits=50)
    loops = star.contraction_loops(seq)
    assert loops[-1].start + loops[-1].length <= 520
    assert all(c.ok for c in loops)
    short = [c for c in loops if c.case == 2]
    assert short and all(c.length == 9 for c in short)


def test_contraction_precondition():
    seq = star.alpha_beta_x_sequences(40, digits=50)
    chk = star.check_contraction_claim(seq, 10)  # alpha_10 is below 180 degrees
    assert not chk.ok


def test_iterated_radius_bound_at_loop_boundaries():
    seq = star.alpha_beta_x_sequences(400, digits=50)
    rep = star.radius_report(seq, 400)
    assert rep["iterated_ok"] and rep["x_below_one"]


@pytest.mark.parametrize("n", [0, 10, 30])
def test_geometry_matches_recursion(n):
    r = star.geometric_vs_analytic_crosscheck(n, digits=50)
    assert r.max_alpha_diff <= mp.mpf("1e-25") and r.max_x_diff <= mp.mpf("1e-25")
    assert r.case_mismatch == ()


def test_g0_alpha_exact():
    r = star.geometric_vs_analytic_crosscheck(0, digits=50)
    assert r.max_alpha_diff < mp.mpf("1e-50")


def test_overlaps_only_suspension_and_outer_polygon(g20):
    raw = g20.raw_net()
    rep = nc.detect_overlaps(raw)
    assert not rep.empty
    kinds = set()
    for grp in rep.groups:
        for k in grp.edges:
            e = raw.edges[k]
            ends = {e.a[0], e.b[0]}
            # Layer-connecting edges join two layer vertices.
            assert ends != {"v"}, f"layer edge {e} overlaps"
            kinds.add("".join(sorted(ends)))
    assert "fo" in kinds  # outer 14-gon (hook to Fermat point)
    assert "fv" in kinds  # radial two-hook suspension edges
    assert "ov" in kinds  # one-hook suspension edges
    outer = [grp for grp in rep.groups if all({raw.edges[k].a[0], raw.edges[k].b[0]} == {"f", "o"} for k in grp.edges)]
    assert len(outer) == 14 and all(grp.merged_multiplicity >= 2 for grp in outer)


def test_deviated_first_layers_have_no_overlaps():
    s = star.build_star(n=12, phi=mp.mpf("1e-12"), digits=60)
    assert nc.detect_overlaps(s.net).empty
    assert nc.validate(s.net).ok


def test_small_deviation_makes_angles_distinct():
    s = star.build_star(n=30, phi=mp.mpf("1e-30"), digits=120)
    phis = s.phis
    with mp.workdps(s.config.work_digits):
        for i in range(len(phis)):
            for j in range(i + 1, len(phis)):
                assert abs(phis[i] - phis[j]) > mp.mpf("1e-32")


def test_large_deviation_breaks_down():
    # Suspension angles grow roughly tenfold per layer, so a deviation of
    # 1e-4 leaves the regime where neighbouring wings meet after a few layers.
    with pytest.raises(ConstructionError) as info:
        star.build_star(n=30, phi=mp.mpf("1e-4"), digits=50)
    assert info.value.layer is not None and info.value.layer < 30


@pytest.mark.parametrize("kw", [dict(alpha0=mp.radians(240)), dict(alpha0=4), dict(phi=1), dict(n=-1)])
def test_config_rejected(kw):
    with pytest.raises(PreconditionError):
        star.StarConfig(**kw)


def test_ambiguous_dispatch_aborts():
    s = star.build_star(n=1, phi=0, digits=30)
    bad = replace(s.layers[-1], case=None)
    with pytest.raises(ConstructionError) as info:
        star.advance_layer(replace(s, layers=s.layers[:-1] + (bad,)))
    assert info.value.step == "dispatch"
