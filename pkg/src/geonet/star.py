"""Layered 7-fold star construction.

Start from a regular heptagon of boundary points P_k and an inner circle of
seven vertices, each joined to two adjacent P's so that the angle it makes
on the centre side is ``alpha0``.  Each step balances the newest circle of
vertices (by winging, after a one- or two-hook suspension when the incoming
angle is below pi) and intersects neighbouring wings to produce the next
circle.  ``phi`` rotates the inner circle about the outer apexes and breaks
the symmetry; at ``phi = 0`` everything is mirror symmetric.

Only one representative per layer is computed; the other six are exact
rotations of it, so rotational symmetry holds by construction.

The closed-form sequences used for the analytic side live here too:
``alpha_beta_x_sequences`` evaluates the scalar recursion for the symmetric
(phi = 0) case without building any geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import mpmath as mp

from . import geometry as g
from .constructions import fermat_point_two_hook, symmetric_wing_angle, two_unit_decomposition
from .errors import ClaimViolation, ConstructionError, PreconditionError
from .netcore import BOUNDARY, INTERIOR, NetBuilder, PlanarNet, materialize_crossings
from .precision import check_digits, collinear_tolerance, default_digits, guard_tolerance

SECTORS = 7

CASE_A = "A"
CASE_TWO_HOOK = "B1"
CASE_ONE_HOOK = "B2"


def default_alpha0():
    return mp.mpf(88) / 21


def guard_digits_for(n: int) -> int:
    # The suspension angles grow roughly like 10^(0.62 i); keep that many extra digits.
    return 10 + math.ceil(0.7 * n)


@dataclass(frozen=True)
class StarConfig:
    n: int = 10
    phi: object = 0
    alpha0: object = None
    digits: int = field(default_factory=default_digits)
    extra_digits: int | None = None

    def __post_init__(self):
        check_digits(self.digits)
        if not isinstance(self.n, int) or self.n < 0:
            raise PreconditionError("number of layers must be a non-negative integer")
        with mp.workdps(self.work_digits):
            a0 = default_alpha0() if self.alpha0 is None else mp.mpf(self.alpha0)
            if not (4 * mp.pi / 3 < a0 < 2 * mp.pi):
                raise PreconditionError("alpha0 must lie in (4pi/3, 2pi)")
            ph = mp.mpf(self.phi)
            if abs(ph) >= mp.pi / 7:
                raise PreconditionError("|phi| must be below pi/7")

    @property
    def work_digits(self) -> int:
        extra = guard_digits_for(self.n) if self.extra_digits is None else self.extra_digits
        return self.digits + extra

    @property
    def alpha0_value(self):
        return default_alpha0() if self.alpha0 is None else mp.mpf(self.alpha0)


@dataclass(frozen=True)
class Suspension:
    kind: str  # "two-hook" or "one-hook"
    hooks: tuple  # indices of outer points used by the k = 0 representative
    fermat: tuple | None  # Fermat points for all seven sectors (two-hook only)


@dataclass(frozen=True)
class LayerRecord:
    index: int
    vertices: tuple  # seven positions, vertex k near angle 2pi k/7 + index pi/7
    alpha: object  # centre-side angle between incoming edges
    case: str | None  # how the layer is (or would be) winged; None if alpha ~ pi
    x: object  # distance of the layer from the origin
    phi: object  # measured suspension angle
    incoming: tuple  # (prev, next) unit directions at the k = 0 vertex
    beta: object = None  # angle between the wings, once winged
    wings: tuple | None = None  # (cw wing, ccw wing) at the k = 0 vertex
    suspension: Suspension | None = None

    @property
    def processed(self) -> bool:
        return self.wings is not None

    @property
    def origin(self) -> str:
        return "initial" if self.index == 0 else "winged"


def _rot_k(k: int):
    ang = 2 * mp.pi * (k % SECTORS) / SECTORS
    return mp.cos(ang), mp.sin(ang)


def _orbit(p: g.Vec) -> tuple:
    return tuple(p if k == 0 else g.rotate_cs(p, *_rot_k(k)) for k in range(SECTORS))


def _hook_index(layer: int, k: int = 0) -> int:
    if layer % 2 == 0:
        return (k + layer // 2) % SECTORS
    return (k + (layer + 1) // 2) % SECTORS


@dataclass(frozen=True)
class StarState:
    config: StarConfig
    outer: tuple  # P_k
    apexes: tuple  # X_k, apex of the equilateral triangle on P_k P_{k+1}
    layers: tuple

    @property
    def n_layers(self) -> int:
        return len(self.layers) - 1

    def layer(self, i: int) -> LayerRecord:
        return self.layers[i]

    @property
    def alphas(self) -> list:
        return [r.alpha for r in self.layers]

    @property
    def xs(self) -> list:
        return [r.x for r in self.layers]

    @property
    def phis(self) -> list:
        return [r.phi for r in self.layers]

    def case_tags(self) -> list:
        return [r.case for r in self.layers]

    @cached_property
    def net(self) -> PlanarNet:
        return assemble_net(self, crossings=True)

    def raw_net(self) -> PlanarNet:
        return assemble_net(self, crossings=False)

    def counts(self) -> dict:
        net = self.net
        layer_vertices = SECTORS * self.n_layers
        fermat = sum(SECTORS for r in self.layers if r.suspension and r.suspension.fermat)
        crossings = sum(1 for v in net.vertices if v.id.startswith("x"))
        return {
            "layers": self.n_layers,
            "balanced_layer_vertices": layer_vertices,
            "fermat_vertices": fermat,
            "crossing_vertices": crossings,
            "interior_vertices": len(net.interior_ids),
            "boundary_vertices": len(net.boundary_ids),
            "edges": len(net.edges),
        }


def _outer_frame(config: StarConfig):
    a0 = config.alpha0_value
    R = mp.sin(a0 / 2) / mp.sin(mp.pi / 7 + a0 / 2)
    outer = tuple(g.polar(R, (2 * k - 1) * mp.pi / 7) for k in range(SECTORS))
    apexes = []
    for k in range(SECTORS):
        P, Q = outer[k], outer[(k + 1) % SECTORS]
        m = g.scale(g.add(P, Q), mp.mpf(1) / 2)
        apexes.append(g.add(m, g.scale(g.unit(m), g.dist(P, Q) * mp.sqrt(3) / 2)))
    return outer, tuple(apexes)


def measure_suspension_angle(state_outer, state_apexes, layer: int, v: g.Vec, k: int = 0):
    """Signed angle (ccw positive) at the hook between the ray to O and the ray to v."""
    h = _hook_index(layer, k)
    pivot = state_apexes[h] if layer % 2 == 0 else state_outer[h]
    return g.signed_angle(g.neg(pivot), g.sub(v, pivot))


def _incoming_case(alpha, layer: int, tol):
    if abs(alpha - mp.pi) <= tol:
        return None
    if alpha > mp.pi:
        return CASE_A
    return CASE_TWO_HOOK if layer % 2 == 0 else CASE_ONE_HOOK


def _make_record(outer, apexes, index: int, v: g.Vec, prev_pt: g.Vec, next_pt: g.Vec, tol) -> LayerRecord:
    u_prev = g.unit(g.sub(prev_pt, v))
    u_next = g.unit(g.sub(next_pt, v))
    alpha = g.ccw_angle(u_next, u_prev)
    case = _incoming_case(alpha, index, tol)
    return LayerRecord(
        index=index,
        vertices=_orbit(v),
        alpha=alpha,
        case=case,
        x=g.norm(v),
        phi=measure_suspension_angle(outer, apexes, index, v),
        incoming=(u_prev, u_next),
    )


def _initial_state(config: StarConfig) -> StarState:
    with mp.workdps(config.work_digits):
        outer, apexes = _outer_frame(config)
        a0 = config.alpha0_value
        P, Q, X = outer[0], outer[1], apexes[0]
        # Points seeing PQ at angle 2pi - alpha0 on the apex side lie on one circle.
        theta = 2 * mp.pi - a0
        m = g.scale(g.add(P, Q), mp.mpf(1) / 2)
        half = g.dist(P, Q) / 2
        rho = half / mp.sin(theta)
        center = g.add(m, g.scale(g.unit(m), -rho * mp.cos(theta)))
        d = g.rotate(g.unit(g.neg(X)), mp.mpf(config.phi))
        ox = g.norm(X)
        v = None
        for t in g.ray_circle_params(X, d, center, rho):
            p = g.add(X, g.scale(d, t))
            if 0 < t < ox and g.dot(g.sub(p, m), g.unit(m)) < 0:
                v = p
                break
        if v is None:
            raise ConstructionError("inner circle vertex not found on the rotated ray", layer=0, step="initial")
        tol = guard_tolerance(config.digits)
        rec = _make_record(outer, apexes, 0, v, P, Q, tol)
        if abs(rec.alpha - a0) > mp.mpf(10) ** (-(config.work_digits // 2)):
            raise ConstructionError("inner circle angle check failed", layer=0, step="initial")
        return StarState(config, outer, apexes, (rec,))


def build_inner_circle(config: StarConfig) -> StarState:
    return _initial_state(config)


def advance_layer(state: StarState) -> StarState:
    """Wing the newest layer and add the next one."""
    config = state.config
    with mp.workdps(config.work_digits):
        tol = guard_tolerance(config.digits)
        rec = state.layers[-1]
        i = rec.index
        if rec.case is None:
            raise ConstructionError(
                f"incoming angle within {mp.nstr(tol, 3)} of pi; case is ambiguous", layer=i, step="dispatch"
            )
        v = rec.vertices[0]
        u_prev, u_next = rec.incoming
        suspension = None
        if rec.case == CASE_A:
            w1, w2 = g.neg(u_prev), g.neg(u_next)
        else:
            h = _hook_index(i)
            if rec.case == CASE_TWO_HOOK:
                P, Q = state.outer[h], state.outer[(h + 1) % SECTORS]
                try:
                    F = fermat_point_two_hook(P, Q, v, config.work_digits).point
                except PreconditionError as exc:
                    raise ConstructionError(f"two-hook suspension failed: {exc}", layer=i, step="suspend") from exc
                s = g.unit(g.sub(F, v))
                suspension = Suspension("two-hook", (h, (h + 1) % SECTORS), _orbit(F))
            else:
                s = g.unit(g.sub(state.outer[h], v))
                suspension = Suspension("one-hook", (h,), None)
            imb = g.add(g.add(u_prev, u_next), s)
            b = g.norm(imb)
            if not (tol < b < 2 - tol):
                raise ConstructionError(f"imbalance {mp.nstr(b, 10)} after suspension is outside (0, 2)", layer=i, step="wing")
            w1, w2 = two_unit_decomposition(g.neg(imb))
            for w in (w1, w2):
                for u in (u_prev, u_next, s):
                    if g.unsigned_angle(w, u) <= tol:
                        raise ConstructionError("wing coincides with an incident edge", layer=i, step="wing")
        # The ccw wing heads towards sector k+1.
        if g.cross(v, w1) > g.cross(v, w2):
            w_ccw, w_cw = w1, w2
        else:
            w_ccw, w_cw = w2, w1
        beta = g.unsigned_angle(w_cw, w_ccw)
        c1, s1 = _rot_k(1)
        v1 = g.rotate_cs(v, c1, s1)
        w1_cw = g.rotate_cs(w_cw, c1, s1)
        hit = g.line_intersection(v, w_ccw, v1, w1_cw)
        if hit is None or hit[0] <= 0 or hit[1] <= 0:
            raise ConstructionError("neighbouring wings do not meet", layer=i, step="intersect")
        new_v = g.add(v, g.scale(w_ccw, hit[0]))
        if not (g.cross(v, new_v) > 0 and g.cross(new_v, v1) > 0):
            raise ConstructionError("wings meet outside the sector", layer=i, step="intersect")
        done = replace(rec, beta=beta, wings=(w_cw, w_ccw), suspension=suspension)
        nxt = _make_record(state.outer, state.apexes, i + 1, new_v, v, v1, tol)
        return StarState(config, state.outer, state.apexes, state.layers[:-1] + (done, nxt))


def build_star(config: StarConfig | None = None, **kwargs) -> StarState:
    """Run the construction for ``config.n`` steps; keyword arguments build a config."""
    if config is None:
        config = StarConfig(**kwargs)
    state = _initial_state(config)
    for _ in range(config.n):
        state = advance_layer(state)
    return state


def _vid(i: int, k: int) -> str:
    return f"v{i}.{k % SECTORS}"


def assemble_net(state: StarState, crossings: bool = True) -> PlanarNet:
    """The net G_n: outer points and newest layer on the boundary, everything else interior."""
    digits = state.config.digits
    n = state.n_layers
    with mp.workdps(state.config.work_digits):
        b = NetBuilder(digits)
        for k, p in enumerate(state.outer):
            b.add_vertex(f"o{k}", p, BOUNDARY)
        for rec in state.layers:
            kind = BOUNDARY if rec.index == n else INTERIOR
            for k, p in enumerate(rec.vertices):
                b.add_vertex(_vid(rec.index, k), p, kind)
            if rec.suspension and rec.suspension.fermat:
                for k, p in enumerate(rec.suspension.fermat):
                    b.add_vertex(f"f{rec.index}.{k}", p)
        for k in range(SECTORS):
            b.add_edge(f"o{k}", _vid(0, k))
            b.add_edge(f"o{(k + 1) % SECTORS}", _vid(0, k))
        for rec in state.layers:
            if not rec.processed:
                continue
            i = rec.index
            for k in range(SECTORS):
                sus = rec.suspension
                if sus is not None:
                    if sus.fermat:
                        h0, h1 = ((hh + k) % SECTORS for hh in sus.hooks)
                        fid = f"f{i}.{k}"
                        b.add_edge(fid, _vid(i, k))
                        b.add_edge(fid, f"o{h0}")
                        b.add_edge(fid, f"o{h1}")
                    else:
                        b.add_edge(_vid(i, k), f"o{(sus.hooks[0] + k) % SECTORS}")
                b.add_edge(_vid(i, k), _vid(i + 1, k))
                b.add_edge(_vid(i, k + 1), _vid(i + 1, k))
        net = b.build()
    if crossings:
        net, _ = materialize_crossings(net, prefix="x", tolerance=collinear_tolerance(digits))
    return net


# ---------------------------------------------------------------------------
# Scalar sequences for the symmetric case


@dataclass(frozen=True)
class Sequences:
    alpha: list
    beta: list
    x: list
    digits: int


def alpha_beta_x_sequences(n: int, alpha0=None, digits: int | None = None) -> Sequences:
    """alpha_i, beta_i, x_i for i = 0..n from the scalar recursion (x_0 = 1).

    beta_i = 2pi - alpha_i for alpha_i > pi, else 2 arccos(1/2 - cos(alpha_i/2));
    alpha_{i+1} = 12pi/7 - beta_i; x_{i+1} = x_i sin(beta_i/2) / sin(6pi/7 - beta_i/2).
    """
    digits = digits or default_digits()
    with mp.workdps(digits):
        a = default_alpha0() if alpha0 is None else mp.mpf(alpha0)
        alphas, betas, xs = [a], [], [mp.mpf(1)]
        for i in range(n + 1):
            ai = alphas[-1]
            if abs(ai - mp.pi) <= guard_tolerance(digits):
                raise ConstructionError("alpha within tolerance of pi", layer=i, step="dispatch")
            bi = 2 * mp.pi - ai if ai > mp.pi else symmetric_wing_angle(ai)
            betas.append(bi)
            if i == n:
                break
            alphas.append(12 * mp.pi / 7 - bi)
            xs.append(xs[-1] * mp.sin(bi / 2) / mp.sin(6 * mp.pi / 7 - bi / 2))
        return Sequences(alphas, betas, xs, digits)


@dataclass(frozen=True)
class ContractionCheck:
    start: int
    length: int
    case: int  # 1 when alpha_N >= 183 deg, else 2
    alpha_start_deg: object
    alpha_end_deg: object
    max_ratio: object  # max x_{N+j} / x_N for 0 < j < length
    end_ratio: object  # x_{N+length} / x_N
    ok: bool
    problems: tuple


def check_contraction_claim(seq: Sequences, start: int) -> ContractionCheck:
    """Check one loop of the contraction argument starting at index ``start``.

    Requires 180 < alpha_start < 190 degrees.  The loop ends at the first
    later index with alpha above 180 degrees; its length must be 8 or 9 (9
    when alpha_start < 183), intermediate radii must stay below 1.3 x_start,
    the final radius below 0.96 x_start, and the final alpha in (180, 190).
    """
    with mp.workdps(seq.digits):
        deg = 180 / mp.pi
        a = seq.alpha
        problems = []
        a_start = a[start] * deg
        if not (180 < a_start < 190):
            problems.append(f"alpha_{start} = {mp.nstr(a_start, 10)} deg outside (180, 190)")
        j = 1
        while start + j < len(a) and a[start + j] * deg <= 180:
            j += 1
        if start + j >= len(a):
            raise PreconditionError("sequence too short to close the loop")
        case = 1 if a_start >= 183 else 2
        allowed = (8, 9) if case == 1 else (9,)
        if j not in allowed:
            problems.append(f"loop length {j} not in {allowed}")
        x0 = seq.x[start]
        mid = [seq.x[start + t] / x0 for t in range(1, j)]
        max_ratio = max(mid) if mid else mp.mpf(0)
        if max_ratio > mp.mpf("1.3"):
            problems.append(f"intermediate ratio {mp.nstr(max_ratio, 10)} > 1.3")
        end_ratio = seq.x[start + j] / x0
        if not end_ratio < mp.mpf("0.96"):
            problems.append(f"end ratio {mp.nstr(end_ratio, 10)} >= 0.96")
        a_end = a[start + j] * deg
        if not (180 < a_end < 190):
            problems.append(f"alpha_{start + j} = {mp.nstr(a_end, 10)} deg outside (180, 190)")
        return ContractionCheck(start, j, case, a_start, a_end, max_ratio, end_ratio, not problems, tuple(problems))


def contraction_loops(seq: Sequences, first: int = 9, strict: bool = False) -> list:
    """Chain loop checks from ``first`` while the sequence is long enough."""
    out = []
    start = first
    while True:
        try:
            chk = check_contraction_claim(seq, start)
        except PreconditionError:
            break
        out.append(chk)
        if strict and not chk.ok:
            raise ClaimViolation(f"contraction claim fails at {start}: {'; '.join(chk.problems)}")
        start += chk.length
    return out


# ---------------------------------------------------------------------------
# Comparison of the geometric engine against the scalar recursion


@dataclass(frozen=True)
class Crosscheck:
    n: int
    max_alpha_diff: object
    max_x_diff: object
    case_mismatch: tuple

    def ok(self, tol) -> bool:
        return self.max_alpha_diff <= tol and self.max_x_diff <= tol and not self.case_mismatch


def geometric_vs_analytic_crosscheck(n: int, digits: int | None = None, alpha0=None) -> Crosscheck:
    """Build the symmetric star and compare alpha_i, x_i (normalised by x_0) with the recursion."""
    digits = digits or default_digits()
    state = build_star(StarConfig(n=n, phi=0, alpha0=alpha0, digits=digits))
    seq = alpha_beta_x_sequences(n, alpha0, state.config.work_digits)
    with mp.workdps(state.config.work_digits):
        x0 = state.layers[0].x
        da = max(abs(r.alpha - seq.alpha[r.index]) for r in state.layers)
        dx = max(abs(r.x / x0 - seq.x[r.index]) for r in state.layers)
        bad = []
        for r in state.layers:
            expect_a = seq.alpha[r.index] > mp.pi
            if (r.case == CASE_A) != expect_a:
                bad.append(r.index)
        return Crosscheck(n, da, dx, tuple(bad))


def angle_window_report(seq: Sequences, first: int = 1, last: int | None = None) -> dict:
    """Extremes of alpha_i and beta_i (degrees) over first..last against the (120, 190) / (120, 180) windows."""
    last = len(seq.alpha) - 1 if last is None else last
    with mp.workdps(seq.digits):
        deg = 180 / mp.pi
        al = [seq.alpha[i] * deg for i in range(first, last + 1)]
        be = [seq.beta[i] * deg for i in range(first, min(last, len(seq.beta) - 1) + 1)]
        out = {
            "range": [first, last],
            "alpha_min": min(al), "alpha_max": max(al),
            "beta_min": min(be), "beta_max": max(be),
        }
        out["alpha_ok"] = bool(120 < out["alpha_min"] and out["alpha_max"] < 190)
        out["beta_ok"] = bool(120 < out["beta_min"] and out["beta_max"] < 180)
        return out


def radius_report(seq: Sequences, last: int | None = None) -> dict:
    """x_i < 1 for i >= 1, x_9 < 0.7, 180 < alpha_9 < 190, and the chained contraction loops.

    The iterated bound is checked at loop boundaries N_m (x_{N_m} < 0.7 * 0.96^m),
    which is what chaining the single-loop claim gives.
    """
    last = len(seq.x) - 1 if last is None else last
    with mp.workdps(seq.digits):
        deg = 180 / mp.pi
        x_max = max(seq.x[1:last + 1])
        loops = [c for c in contraction_loops(seq) if c.start + c.length <= last]
        iterated = all(
            seq.x[c.start] < mp.mpf("0.7") * mp.mpf("0.96") ** m for m, c in enumerate(loops)
        )
        a9 = seq.alpha[9] * deg
        return {
            "x_max": x_max,
            "x_below_one": bool(x_max < 1),
            "x9": seq.x[9],
            "x9_ok": bool(seq.x[9] < mp.mpf("0.7")),
            "alpha9_deg": a9,
            "alpha9_ok": bool(180 < a9 < 190),
            "loops": loops,
            "loops_ok": bool(loops) and all(c.ok for c in loops),
            "loop_lengths": sorted({c.length for c in loops}),
            "iterated_ok": iterated,
        }


def measure_suspension_angles(state: StarState) -> list:
    """Signed suspension angle of every layer (defined whether or not the layer is suspended)."""
    return list(state.phis)
