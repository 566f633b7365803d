"""Command-line entry point: ``geonet <subcommand> ...``.

Exit status is 0 when every requested check passes, 1 when a check fails,
2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import traceback

import mpmath as mp

from . import __version__
from . import constructions as cons
from . import derivseq as ds
from . import netcore as nc
from . import star as st
from .errors import GeonetError
from .precision import default_digits, parse_angle, parse_real, to_decimal_string
from .relax import load_problem, relax, trace_to_json
from .render import RenderStyle, render_svg

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _dec(x, digits):
    return to_decimal_string(x, digits)


def _write_json(path, data):
    text = json.dumps(data, indent=1, sort_keys=False)
    if path in (None, "-"):
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _write_text(path, text):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _load_net(path, tolerance):
    with open(path, encoding="utf-8") as fh:
        return nc.from_json(json.load(fh), tolerance=tolerance)


def _tolerance(args, digits):
    return parse_real(args.tolerance, digits) if args.tolerance else None


# ---------------------------------------------------------------------------


def cmd_validate(args) -> int:
    net = _load_net(args.net, args.tolerance)
    rep = nc.validate(net)
    out = rep.to_json()
    with mp.workdps(net.digits):
        out["length"] = _dec(nc.length(net), net.digits)
        tiv = nc.total_imbalance_vector(net)
        out["total_imbalance_vector"] = [_dec(tiv[0], 10), _dec(tiv[1], 10)]
        if rep.ok:
            out["length_via_imbalance"] = _dec(nc.length_via_imbalance(net), net.digits)
    if args.overlaps:
        out["overlaps"] = nc.detect_overlaps(net).to_json()
    _write_json(args.report, out)
    if args.report not in (None, "-"):
        print(f"ok={rep.ok} max_residual={_dec(rep.max_residual, 5)} worst={rep.worst_vertex}")
    return EXIT_OK if rep.ok else EXIT_FAIL


def _gen_net(args, digits):
    kind = args.kind
    if kind == "y":
        return cons.y_net(digits=digits)
    if kind == "weighted-triangle":
        return cons.build_weighted_triangle(cons.WeightedTriangleSpec.pythagorean(args.k), digits)
    if kind == "double-polygon":
        return cons.build_double_polygon(args.n, digits)
    if kind == "four-point":
        res = cons.build_four_point_trees(cons.unit_square(digits), digits)
        nets = [res.x_net, *res.trees]
        if not 0 <= args.variant < len(nets):
            raise GeonetError(f"variant must be in [0, {len(nets) - 1}]")
        return nets[args.variant]
    raise GeonetError(f"unknown kind {kind!r}")


def cmd_gen(args) -> int:
    digits = args.digits
    net = _gen_net(args, digits)
    if args.output:
        _write_text(args.output, nc.dumps(net) + "\n")
    else:
        sys.stdout.write(nc.dumps(net) + "\n")
    if args.svg:
        _write_text(args.svg, render_svg(net))
    return EXIT_OK


def _star_config(args) -> st.StarConfig:
    digits = args.digits
    alpha0 = parse_real(args.alpha0, digits + 20) if args.alpha0 else None
    phi = parse_angle(args.phi, digits + 20) if args.phi else 0
    return st.StarConfig(n=args.layers, phi=phi, alpha0=alpha0, digits=digits)


def _layer_json(rec: st.LayerRecord, digits: int) -> dict:
    deg = 180 / mp.pi
    return {
        "i": rec.index,
        "case": rec.case,
        "origin": rec.origin,
        "alpha_deg": _dec(rec.alpha * deg, digits),
        "beta_deg": None if rec.beta is None else _dec(rec.beta * deg, digits),
        "x": _dec(rec.x, digits),
        "phi": _dec(rec.phi, digits),
        "suspension": None if rec.suspension is None else {
            "kind": rec.suspension.kind, "hooks": list(rec.suspension.hooks)},
    }


def star_report(state: st.StarState, overlaps: bool = True) -> dict:
    digits = state.config.digits
    with mp.workdps(state.config.work_digits):
        out = {
            "config": {
                "layers": state.config.n,
                "phi": _dec(mp.mpf(state.config.phi), digits),
                "alpha0": _dec(state.config.alpha0_value, digits),
                "digits": digits,
                "work_digits": state.config.work_digits,
            },
            "layers": [_layer_json(r, digits) for r in state.layers],
            "counts": state.counts(),
        }
        rep = nc.validate(state.net)
        out["validation"] = {"ok": rep.ok, "conventions_ok": rep.conventions_ok,
                             "max_residual": _dec(rep.max_residual, 5),
                             "boundary_edges": len(rep.boundary_edges)}
        if overlaps:
            ov = nc.detect_overlaps(state.net)
            out["overlaps"] = {"groups": len(ov.groups),
                               "max_multiplicity": max((g.merged_multiplicity for g in ov.groups), default=1)}
        return out


def cmd_star(args) -> int:
    config = _star_config(args)
    try:
        state = st.build_star(config)
    except GeonetError as exc:
        _write_json(args.report, {"error": str(exc), "layer": getattr(exc, "layer", None)})
        return EXIT_FAIL
    rep = star_report(state, overlaps=not args.no_overlaps)
    if args.emit:
        _write_text(args.emit, nc.dumps(state.net) + "\n")
    if args.svg:
        _write_text(args.svg, render_svg(state.net))
    _write_json(args.report, rep)
    return EXIT_OK if rep["validation"]["ok"] else EXIT_FAIL


def cmd_derivseq(args) -> int:
    digits = args.digits
    alpha0 = parse_real(args.alpha0, digits + 20) if args.alpha0 else None
    seqd = ds.derivative_sequence(args.n, alpha0, digits)
    coeffs = ds.coefficients(args.n, alpha0, seqd.work_digits)
    angles = st.alpha_beta_x_sequences(args.n, alpha0, seqd.work_digits)
    gap = ds.gap_analysis(seqd)
    if args.csv:
        with open(args.csv, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["i", "phi_prime", "alpha_i", "x_i", "tau_i", "sigma_i", "a_i", "b_i", "c_i"])
            for i in range(args.n + 1):
                row = [i, _dec(seqd.phi[i], digits), _dec(angles.alpha[i], digits), _dec(angles.x[i], digits)]
                if i < len(coeffs):
                    c = coeffs[i]
                    row += [_dec(c.tau, digits), _dec(c.sigma, digits), _dec(c.a, digits), _dec(c.b, digits),
                            _dec(c.c, digits)]
                else:
                    row += [""] * 5
                w.writerow(row)
    _write_json(args.gap, gap.to_json(digits=min(digits, 30)))
    return EXIT_OK


def cmd_relax(args) -> int:
    problem = load_problem(args.problem)
    trace = relax(problem)
    _write_json(args.trace, trace_to_json(trace))
    return EXIT_OK if trace.converged and trace.monotone else EXIT_FAIL


def cmd_render(args) -> int:
    net = _load_net(args.net, None)
    style = RenderStyle(width=args.width, height=args.width, labels=args.labels)
    _write_text(args.output, render_svg(net, style))
    return EXIT_OK


# ---------------------------------------------------------------------------


def run_report(layers: int = 100, phi=0, alpha0=None, digits: int | None = None, overlaps: bool = True) -> dict:
    """Everything in one JSON object; sub-step failures are recorded, never raised."""
    digits = digits or default_digits()
    report: dict = {"version": __version__, "digits": digits, "steps": {}, "summary": {}}
    steps, summary = report["steps"], report["summary"]

    def step(name, fn):
        try:
            steps[name] = fn()
        except Exception as exc:  # noqa: BLE001 - the report must always be emitted
            steps[name] = {"error": f"{type(exc).__name__}: {exc}",
                           "trace": traceback.format_exception_only(type(exc), exc)[-1].strip()}
        return steps[name]

    try:
        config = st.StarConfig(n=layers, phi=phi, alpha0=alpha0, digits=digits)
    except Exception as exc:  # noqa: BLE001
        report["error"] = {"stage": "config", "message": str(exc)}
        summary["all_passed"] = False
        return report

    def star_step():
        state = st.build_star(config)
        return star_report(state, overlaps)

    s = step("star", star_step)
    if "error" not in s:
        summary["structure_counts"] = s["counts"]["boundary_vertices"] == 14
        summary["star_valid"] = s["validation"]["ok"]

    seq_n = 1010

    def claims():
        seq = st.alpha_beta_x_sequences(seq_n, alpha0, digits)
        win = st.angle_window_report(seq, 1, 1000)
        rad = st.radius_report(seq, 1000)
        return {
            "angle_window": {k: (_dec(v, 12) if isinstance(v, mp.mpf) else v) for k, v in win.items()},
            "radius": {
                "x9": _dec(rad["x9"], digits), "x9_ok": rad["x9_ok"],
                "alpha9_deg": _dec(rad["alpha9_deg"], 15), "alpha9_ok": rad["alpha9_ok"],
                "x_max": _dec(rad["x_max"], 15), "x_below_one": rad["x_below_one"],
                "loops": len(rad["loops"]), "loop_lengths": rad["loop_lengths"],
                "loops_ok": rad["loops_ok"], "iterated_ok": rad["iterated_ok"],
            },
        }

    c = step("claims", claims)
    if "error" not in c:
        summary["angle_window"] = c["angle_window"]["alpha_ok"] and c["angle_window"]["beta_ok"]
        summary["radius_claims"] = all(c["radius"][k] for k in ("x9_ok", "alpha9_ok", "x_below_one", "loops_ok"))
        report["x9"] = c["radius"]["x9"]

    def gap():
        seqd = ds.derivative_sequence(min(max(layers, 1), 100) if layers else 100, alpha0, digits)
        return ds.gap_analysis(seqd).to_json(digits=15)

    gp = step("derivative_gap", gap)
    if "error" not in gp:
        report["min_gap"] = gp["min_gap"]
        summary["derivative_gap"] = abs(mp.mpf(gp["min_gap"]) - mp.mpf("3.743673268")) <= mp.mpf("1e-6") and gp["pair"] == [0, 2]

    def cross():
        n = min(layers, 30)
        r = st.geometric_vs_analytic_crosscheck(n, digits, alpha0)
        return {"n": n, "max_alpha_diff": _dec(r.max_alpha_diff, 5), "max_x_diff": _dec(r.max_x_diff, 5),
                "case_mismatch": list(r.case_mismatch), "ok": r.ok(mp.mpf(10) ** -(digits // 2))}

    cr = step("crosscheck", cross)
    if "error" not in cr:
        summary["oracle_equivalence"] = cr["ok"]
    summary["all_passed"] = all(v for k, v in summary.items() if k != "all_passed") and not any(
        isinstance(v, dict) and "error" in v for v in steps.values())
    return report


def cmd_report(args) -> int:
    try:
        alpha0 = parse_real(args.alpha0, args.digits + 20) if args.alpha0 else None
        phi = parse_angle(args.phi, args.digits + 20) if args.phi else 0
    except (ValueError, GeonetError) as exc:
        _write_json(args.output, {"error": {"stage": "config", "message": str(exc)}})
        return EXIT_FAIL
    rep = run_report(args.layers, phi, alpha0, args.digits, overlaps=not args.no_overlaps)
    _write_json(args.output, rep)
    return EXIT_OK if rep["summary"].get("all_passed") else EXIT_FAIL


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--digits", type=int, default=argparse.SUPPRESS, help="significant digits (default: GEONET_DIGITS or 50)")
    common.add_argument("--tolerance", default=argparse.SUPPRESS, help="balance tolerance (default: 1e-(digits/2))")

    p = argparse.ArgumentParser(prog="geonet", description="Planar geodesic nets: checks, constructions, reports.",
                                parents=[common], allow_abbrev=False)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", parents=[common], help="check balance and conventions of a net file")
    v.add_argument("--net", required=True)
    v.add_argument("--report", default="-")
    v.add_argument("--overlaps", action="store_true")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("gen", parents=[common], help="write an example net")
    g.add_argument("--kind", required=True, choices=["y", "weighted-triangle", "double-polygon", "four-point"])
    g.add_argument("--n", type=int, default=7, help="polygon size for double-polygon")
    g.add_argument("--k", type=int, default=1, help="nested copies for weighted-triangle")
    g.add_argument("--variant", type=int, default=0, help="four-point: 0 = X net, 1/2 = trees")
    g.add_argument("--output")
    g.add_argument("--svg")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("star", parents=[common], help="run the layered star construction")
    s.add_argument("--layers", type=int, default=10)
    s.add_argument("--phi", default="0", help="deviation angle; radians, or degrees with a 'deg' suffix")
    s.add_argument("--alpha0", default=None, help="initial angle in radians, e.g. 88/21")
    s.add_argument("--emit")
    s.add_argument("--svg")
    s.add_argument("--report", default="-")
    s.add_argument("--no-overlaps", action="store_true")
    s.set_defaults(func=cmd_star)

    d = sub.add_parser("derivseq", parents=[common], help="derivative sequence and gap analysis")
    d.add_argument("--n", type=int, default=100)
    d.add_argument("--alpha0", default=None)
    d.add_argument("--csv")
    d.add_argument("--gap", default="-")
    d.set_defaults(func=cmd_derivseq)

    r = sub.add_parser("relax", parents=[common], help="minimise length over free vertices")
    r.add_argument("--problem", required=True)
    r.add_argument("--trace", default="-")
    r.set_defaults(func=cmd_relax)

    rd = sub.add_parser("render", parents=[common], help="net file to SVG")
    rd.add_argument("--net", required=True)
    rd.add_argument("--output", required=True)
    rd.add_argument("--width", type=int, default=800)
    rd.add_argument("--labels", action="store_true")
    rd.set_defaults(func=cmd_render)

    rp = sub.add_parser("report", parents=[common], help="aggregate report over the main checks")
    rp.add_argument("--layers", type=int, default=100)
    rp.add_argument("--phi", default="0")
    rp.add_argument("--alpha0", default=None)
    rp.add_argument("--output", default="-")
    rp.add_argument("--no-overlaps", action="store_true")
    rp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.digits = getattr(args, "digits", None) or default_digits()
        args.tolerance = getattr(args, "tolerance", None)
        with mp.workdps(args.digits):
            return args.func(args)
    except (GeonetError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"geonet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
