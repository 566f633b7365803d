"""Planar geodesic (multi)nets: data model and stationarity identities.

A net is a set of points in the plane joined by straight edges carrying
positive integer multiplicities.  Interior vertices must be balanced: the
multiplicity-weighted unit vectors of their incident edges sum to zero.
Boundary vertices are exempt; their vector sum is the *imbalance vector*.

Everything here is a pure function of an immutable :class:`PlanarNet`.
"""

from __future__ import annotations

import json
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import mpmath as mp
import numpy as np

from . import geometry as g
from .errors import NetStructureError, SpecialRadiusError, UnbalancedNetError, UnknownVertexError
from .precision import (
    balance_tolerance,
    check_digits,
    collinear_tolerance,
    default_digits,
    parse_real,
    to_decimal_string,
)

BOUNDARY = "boundary"
INTERIOR = "interior"
_KINDS = (BOUNDARY, INTERIOR)


@dataclass(frozen=True)
class Vertex:
    id: str
    position: g.Vec
    kind: str = INTERIOR

    @property
    def is_boundary(self) -> bool:
        return self.kind == BOUNDARY


@dataclass(frozen=True)
class Edge:
    a: str
    b: str
    mult: int = 1

    def other(self, vid: str) -> str:
        return self.b if vid == self.a else self.a


@dataclass(frozen=True, eq=False)
class PlanarNet:
    """Immutable weighted straight-line net.

    ``tolerance`` is the balance threshold; None selects 10^-(digits/2).
    Coincident vertices with different ids are allowed (multinets are
    immersions), zero-length edges are not.
    """

    vertices: tuple
    edges: tuple
    digits: int = field(default_factory=default_digits)
    tolerance: mp.mpf | None = None

    def __post_init__(self):
        check_digits(self.digits)
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        if self.tolerance is None:
            object.__setattr__(self, "tolerance", balance_tolerance(self.digits))
        seen = {}
        for v in self.vertices:
            if v.id in seen:
                raise NetStructureError(f"duplicate vertex id {v.id!r}")
            if v.kind not in _KINDS:
                raise NetStructureError(f"vertex {v.id!r}: bad kind {v.kind!r}")
            if not (mp.isfinite(v.position[0]) and mp.isfinite(v.position[1])):
                raise NetStructureError(f"vertex {v.id!r}: non-finite position")
            seen[v.id] = v
        for k, e in enumerate(self.edges):
            if e.a not in seen or e.b not in seen:
                raise NetStructureError(f"edge {k} references unknown vertex ({e.a!r}, {e.b!r})")
            if e.a == e.b:
                raise NetStructureError(f"edge {k} is a loop at {e.a!r}")
            if not isinstance(e.mult, int) or e.mult < 1:
                raise NetStructureError(f"edge {k}: multiplicity must be a positive integer")
            pa, pb = seen[e.a].position, seen[e.b].position
            if pa[0] == pb[0] and pa[1] == pb[1]:
                raise NetStructureError(f"edge {k} ({e.a!r}-{e.b!r}) has zero length")

    @cached_property
    def vertex_map(self) -> dict:
        return {v.id: v for v in self.vertices}

    @cached_property
    def incidence(self) -> dict:
        inc = {v.id: [] for v in self.vertices}
        for k, e in enumerate(self.edges):
            inc[e.a].append(k)
            inc[e.b].append(k)
        return inc

    def position(self, vid: str) -> g.Vec:
        try:
            return self.vertex_map[vid].position
        except KeyError:
            raise UnknownVertexError(vid) from None

    def degree(self, vid: str) -> int:
        return sum(self.edges[k].mult for k in self.incidence[vid])

    @property
    def boundary_ids(self) -> list:
        return [v.id for v in self.vertices if v.kind == BOUNDARY]

    @property
    def interior_ids(self) -> list:
        return [v.id for v in self.vertices if v.kind == INTERIOR]

    def segment(self, k: int):
        e = self.edges[k]
        return self.position(e.a), self.position(e.b)

    def replace(self, **changes) -> "PlanarNet":
        kw = dict(vertices=self.vertices, edges=self.edges, digits=self.digits, tolerance=self.tolerance)
        kw.update(changes)
        return PlanarNet(**kw)


class NetBuilder:
    """Mutable helper for incremental construction; ``build()`` freezes it."""

    def __init__(self, digits: int | None = None):
        self.digits = digits or default_digits()
        self.vertices: dict = {}
        self.edges: list = []

    def add_vertex(self, vid: str, position, kind: str = INTERIOR) -> str:
        if vid in self.vertices:
            raise NetStructureError(f"duplicate vertex id {vid!r}")
        self.vertices[vid] = Vertex(vid, (mp.mpf(position[0]), mp.mpf(position[1])), kind)
        return vid

    def set_kind(self, vid: str, kind: str) -> None:
        v = self.vertices[vid]
        self.vertices[vid] = Vertex(v.id, v.position, kind)

    def add_edge(self, a: str, b: str, mult: int = 1) -> int:
        self.edges.append(Edge(a, b, mult))
        return len(self.edges) - 1

    def build(self, tolerance=None) -> PlanarNet:
        return PlanarNet(tuple(self.vertices.values()), tuple(self.edges), self.digits, tolerance)


# ---------------------------------------------------------------------------
# Imbalance and validation


@dataclass(frozen=True)
class ImbalanceRecord:
    vertex: str
    vector: g.Vec
    norm: mp.mpf


def _imbalance_vector(net: PlanarNet, vid: str) -> g.Vec:
    p = net.position(vid)
    sx, sy = [], []
    for k in net.incidence[vid]:
        e = net.edges[k]
        d = g.sub(net.position(e.other(vid)), p)
        n = g.norm(d)
        if n == 0:
            raise NetStructureError(f"edge {k} has zero length")
        sx.append(e.mult * d[0] / n)
        sy.append(e.mult * d[1] / n)
    return (mp.fsum(sx), mp.fsum(sy))


def imbalance(net: PlanarNet, vid: str) -> ImbalanceRecord:
    """Sum of multiplicity-weighted unit vectors from ``vid`` along its edges."""
    if vid not in net.vertex_map:
        raise UnknownVertexError(vid)
    with mp.workdps(net.digits):
        v = _imbalance_vector(net, vid)
        return ImbalanceRecord(vid, v, g.norm(v))


def imbalances(net: PlanarNet) -> dict:
    with mp.workdps(net.digits):
        out = {}
        for v in net.vertices:
            vecv = _imbalance_vector(net, v.id)
            out[v.id] = ImbalanceRecord(v.id, vecv, g.norm(vecv))
        return out


def total_imbalance_vector(net: PlanarNet) -> g.Vec:
    """Sum of imbalance vectors over all vertices; identically zero."""
    with mp.workdps(net.digits):
        recs = imbalances(net)
        return (mp.fsum(r.vector[0] for r in recs.values()), mp.fsum(r.vector[1] for r in recs.values()))


def total_imbalance(net: PlanarNet):
    """Sum of imbalance norms over boundary vertices."""
    with mp.workdps(net.digits):
        recs = imbalances(net)
        return mp.fsum(recs[v].norm for v in net.boundary_ids)


@dataclass
class ValidationReport:
    digits: int
    tolerance: mp.mpf
    residuals: dict
    max_residual: mp.mpf
    worst_vertex: str | None
    unbalanced: list
    outside_hull: list
    boundary_edges: list
    components: int
    n_boundary: int
    n_interior: int

    @property
    def connected(self) -> bool:
        return self.components <= 1

    @property
    def ok(self) -> bool:
        # Balance and hull containment define a net; the boundary-edge rule is
        # only a normalisation convention and is reported separately.
        return not self.unbalanced and not self.outside_hull

    @property
    def conventions_ok(self) -> bool:
        return not self.boundary_edges and self.connected

    def to_json(self) -> dict:
        d = self.digits
        return {
            "ok": self.ok,
            "conventions_ok": self.conventions_ok,
            "digits": d,
            "tolerance": to_decimal_string(self.tolerance, 5),
            "max_residual": to_decimal_string(self.max_residual, 10),
            "worst_vertex": self.worst_vertex,
            "unbalanced": self.unbalanced,
            "outside_hull": self.outside_hull,
            "boundary_edges": self.boundary_edges,
            "connected": self.connected,
            "components": self.components,
            "n_boundary": self.n_boundary,
            "n_interior": self.n_interior,
            "residuals": {k: to_decimal_string(v, 10) for k, v in self.residuals.items()},
        }


def _components(net: PlanarNet) -> int:
    seen = set()
    count = 0
    for v in net.vertices:
        if v.id in seen:
            continue
        count += 1
        queue = deque([v.id])
        seen.add(v.id)
        while queue:
            u = queue.popleft()
            for k in net.incidence[u]:
                w = net.edges[k].other(u)
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
    return count


def validate(net: PlanarNet, tolerance=None) -> ValidationReport:
    """Report balance residuals and convention violations; never raises on bad nets."""
    tol = net.tolerance if tolerance is None else tolerance
    with mp.workdps(net.digits):
        residuals = {}
        for vid in net.interior_ids:
            residuals[vid] = g.norm(_imbalance_vector(net, vid))
        worst = max(residuals, key=residuals.get) if residuals else None
        max_res = residuals[worst] if worst else mp.mpf(0)
        unbalanced = [vid for vid, r in residuals.items() if r > tol]

        bpts = [net.position(b) for b in net.boundary_ids]
        hull = g.convex_hull(bpts)
        scale_len = max((g.dist(a, b) for a in hull for b in hull), default=mp.mpf(1)) or mp.mpf(1)
        outside = []
        for v in net.vertices:
            if v.kind == INTERIOR and g.hull_excess(hull, v.position) > tol * scale_len:
                outside.append(v.id)
        vmap = net.vertex_map
        bb = [k for k, e in enumerate(net.edges) if vmap[e.a].is_boundary and vmap[e.b].is_boundary]
        return ValidationReport(
            digits=net.digits,
            tolerance=tol,
            residuals=residuals,
            max_residual=max_res,
            worst_vertex=worst,
            unbalanced=unbalanced,
            outside_hull=outside,
            boundary_edges=bb,
            components=_components(net),
            n_boundary=len(bpts),
            n_interior=len(residuals),
        )


# ---------------------------------------------------------------------------
# Length identities


def length(net: PlanarNet):
    with mp.workdps(net.digits):
        return mp.fsum(e.mult * g.dist(net.position(e.a), net.position(e.b)) for e in net.edges)


def length_via_imbalance(net: PlanarNet, origin=(0, 0)):
    """Length recovered from boundary data alone: -sum <v, Imb(v)> over boundary v.

    Refuses nets whose interior vertices are not balanced within tolerance.
    """
    with mp.workdps(net.digits):
        o = (mp.mpf(origin[0]), mp.mpf(origin[1]))
        recs = imbalances(net)
        bad = [vid for vid in net.interior_ids if recs[vid].norm > net.tolerance]
        if bad:
            raise UnbalancedNetError(f"{len(bad)} interior vertices unbalanced (e.g. {bad[0]!r})")
        return -mp.fsum(g.dot(g.sub(net.position(v), o), recs[v].vector) for v in net.boundary_ids)


@dataclass(frozen=True)
class DiskIdentity:
    radius: mp.mpf
    inside_length: mp.mpf
    rhs: mp.mpf
    crossing_term: mp.mpf
    vertex_term: mp.mpf

    @property
    def difference(self):
        return self.inside_length - self.rhs


def special_radii(net: PlanarNet, origin=(0, 0)) -> list:
    """Radii where the circle hits a vertex or touches an edge tangentially."""
    with mp.workdps(net.digits):
        o = (mp.mpf(origin[0]), mp.mpf(origin[1]))
        out = [g.dist(v.position, o) for v in net.vertices]
        for k in range(len(net.edges)):
            a, b = net.segment(k)
            d = g.sub(b, a)
            t = g.dot(g.sub(o, a), d) / g.dot(d, d)
            if 0 < t < 1:
                out.append(g.dist(o, g.add(a, g.scale(d, t))))
        return sorted(out)


class DiskIdentityEvaluator:
    """Both sides of the truncated length identity on disks around ``origin``.

    Left: length of the net inside the disk of radius r.  Right: the sum over
    points where edges cross the circle of <e(r), u>, with u the unit edge
    direction pointing *out of* the disk, minus the sum of <v, Imb(v)> over
    vertices inside.  (With u pointing inward every crossing term changes sign
    and the identity fails already for a single chord.)

    Per-edge data is prepared once, so many radii are cheap: a float prefilter
    sends only edges near the circle through the exact intersection.
    """

    _MARGIN = 1e-9  # relative float slack before falling back to exact work

    def __init__(self, net: PlanarNet, origin=(0, 0), tolerance=None):
        self.net = net
        with mp.workdps(net.digits):
            o = (mp.mpf(origin[0]), mp.mpf(origin[1]))
            self.tolerance = net.tolerance if tolerance is None else mp.mpf(tolerance)
            recs = imbalances(net)
            self._verts = []
            for v in net.vertices:
                p = g.sub(v.position, o)
                n = g.norm(p)
                self._verts.append((v.id, n, float(n), g.dot(p, recs[v.id].vector)))
            self._edges = []
            for k, e in enumerate(net.edges):
                a = g.sub(net.position(e.a), o)
                b = g.sub(net.position(e.b), o)
                d = g.sub(b, a)
                L = g.norm(d)
                u = g.scale(d, 1 / L)
                bq = g.dot(a, u)
                aa = g.dot(a, a)
                foot = aa - bq * bq if 0 < -bq < L else min(aa, g.dot(b, b))
                rmin = mp.sqrt(max(foot, mp.mpf(0)))
                rmax = max(g.norm(a), g.norm(b))
                self._edges.append((k, e.mult, a, u, L, bq, aa, float(rmin), float(rmax)))

    def __call__(self, r) -> DiskIdentity:
        net = self.net
        with mp.workdps(net.digits):
            r = mp.mpf(r)
            rf = float(r)
            lo_f, hi_f = rf * (1 - self._MARGIN) - self._MARGIN, rf * (1 + self._MARGIN) + self._MARGIN
            tol = self.tolerance
            scale_len = max(r, mp.mpf(1))
            vterms = []
            for vid, n, nf, term in self._verts:
                if nf < lo_f:
                    vterms.append(term)
                elif nf <= hi_f:
                    if abs(n - r) <= tol * scale_len:
                        raise SpecialRadiusError(f"circle passes through vertex {vid!r}", r, ("vertex", vid))
                    if n < r:
                        vterms.append(term)
            pieces, crossings = [], []
            for k, mult, a, u, L, bq, aa, rmin, rmax in self._edges:
                if rmax < lo_f:
                    pieces.append(mult * L)
                    continue
                if rmin > hi_f:
                    continue
                # |a + s u|^2 = r^2 with s the arclength from a.
                disc = bq * bq - (aa - r * r)
                # Tangency: disc ~ 0 with the foot of the perpendicular inside the edge.
                if abs(disc) <= tol * scale_len * scale_len and 0 < -bq < L:
                    raise SpecialRadiusError(f"circle tangent to edge {k}", r, ("edge", k))
                if disc <= 0:
                    continue
                sq = mp.sqrt(disc)
                s1, s2 = -bq - sq, -bq + sq
                lo, hi = max(s1, mp.mpf(0)), min(s2, L)
                if hi > lo:
                    pieces.append(mult * (hi - lo))
                # Entering the disk at s1 (outward direction -u), leaving at s2 (+u).
                if 0 < s1 < L:
                    p = g.add(a, g.scale(u, s1))
                    crossings.append(mult * g.dot(p, g.neg(u)))
                if 0 < s2 < L:
                    p = g.add(a, g.scale(u, s2))
                    crossings.append(mult * g.dot(p, u))
            vterm = mp.fsum(vterms)
            inside = mp.fsum(pieces)
            cross_term = mp.fsum(crossings)
            return DiskIdentity(r, inside, cross_term - vterm, cross_term, vterm)


def disk_length_identity(net: PlanarNet, r, origin=(0, 0), tolerance=None) -> DiskIdentity:
    """Single-radius form of ``DiskIdentityEvaluator``."""
    return DiskIdentityEvaluator(net, origin, tolerance)(r)


# ---------------------------------------------------------------------------
# Overlaps and crossings


@dataclass(frozen=True)
class OverlapGroup:
    edges: tuple
    merged_multiplicity: int
    total_multiplicity: int


@dataclass(frozen=True)
class OverlapReport:
    """Groups of edges sharing a positive-length piece of a common line.

    ``merged_multiplicity`` is the largest total multiplicity stacked on any
    point of the group's line, i.e. the weight the merged multinet edge would
    carry at its thickest.
    """

    groups: tuple

    @property
    def empty(self) -> bool:
        return not self.groups

    @property
    def is_multinet(self) -> bool:
        return bool(self.groups)

    def to_json(self) -> dict:
        return {
            "n_groups": len(self.groups),
            "groups": [
                {"edges": list(gr.edges), "merged_multiplicity": gr.merged_multiplicity,
                 "total_multiplicity": gr.total_multiplicity}
                for gr in self.groups
            ],
        }


def _float_segments(net: PlanarNet) -> np.ndarray:
    arr = np.empty((len(net.edges), 4))
    for k, e in enumerate(net.edges):
        a, b = net.position(e.a), net.position(e.b)
        arr[k] = (float(a[0]), float(a[1]), float(b[0]), float(b[1]))
    return arr


def _chains(order, key, window):
    """Split an index list sorted by ``key`` wherever consecutive keys differ by more than ``window``."""
    out, cur = [], [order[0]]
    for m in order[1:]:
        if key[m] - key[cur[-1]] > window:
            out.append(cur)
            cur = []
        cur.append(m)
    out.append(cur)
    return out


def _collinear_candidates(seg: np.ndarray, window: float) -> Iterable[tuple]:
    """Pairs of edges whose supporting lines nearly coincide and whose
    projections onto that line overlap or touch (float prefilter)."""
    if len(seg) < 2:
        return
    dx, dy = seg[:, 2] - seg[:, 0], seg[:, 3] - seg[:, 1]
    theta = np.mod(np.arctan2(dy, dx), np.pi)
    rho = -np.sin(theta) * seg[:, 0] + np.cos(theta) * seg[:, 1]
    idx = list(range(len(seg)))
    th, rh = list(theta), list(rho)
    # Shadow copies handle the wrap of line direction at pi.
    for k in range(len(seg)):
        if theta[k] > np.pi - window:
            idx.append(k)
            th.append(theta[k] - np.pi)
            rh.append(-rho[k])
    scale_len = max(1.0, float(np.max(np.abs(seg))))
    slack = 1e-9 * scale_len
    seen = set()
    for line in _chains(sorted(range(len(idx)), key=lambda m: th[m]), th, window):
        if len(line) < 2:
            continue
        for group in _chains(sorted(line, key=lambda m: rh[m]), rh, window * scale_len):
            if len(group) < 2:
                continue
            c, s_ = np.cos(th[group[0]]), np.sin(th[group[0]])
            spans = []
            for m in group:
                k = idx[m]
                p, q = seg[k, 0] * c + seg[k, 1] * s_, seg[k, 2] * c + seg[k, 3] * s_
                spans.append((min(p, q), max(p, q), m))
            spans.sort()
            active = []
            for lo, hi, m in spans:
                active = [a for a in active if a[0] >= lo - slack]
                for _, m2 in active:
                    i, j = idx[m], idx[m2]
                    if i == j or abs(th[m] - th[m2]) > window or abs(rh[m] - rh[m2]) > window * scale_len:
                        continue
                    pair = (min(i, j), max(i, j))
                    if pair not in seen:
                        seen.add(pair)
                        yield pair
                active.append((hi, m))


def _opposite_at_shared_end(net: PlanarNet, seg: np.ndarray, i: int, j: int) -> bool:
    """True when edges i and j share an endpoint and clearly leave it in opposite directions."""
    ei, ej = net.edges[i], net.edges[j]
    shared = {ei.a, ei.b} & {ej.a, ej.b}
    if len(shared) != 1:
        return False
    v = shared.pop()
    pi_ = seg[i, 2:] if ei.a == v else seg[i, :2]
    vi = seg[i, :2] if ei.a == v else seg[i, 2:]
    pj = seg[j, 2:] if ej.a == v else seg[j, :2]
    u1, u2 = pi_ - vi, pj - vi
    n1, n2 = float(np.hypot(*u1)), float(np.hypot(*u2))
    return float(np.dot(u1, u2)) < -0.5 * n1 * n2


def _overlap_exact(net: PlanarNet, i: int, j: int, tol) -> bool:
    a, b = net.segment(i)
    c, d = net.segment(j)
    d1, d2 = g.sub(b, a), g.sub(d, c)
    L1, L2 = g.norm(d1), g.norm(d2)
    if abs(g.cross(d1, d2)) >= tol * L1 * L2:
        return False
    longer = max(L1, L2)
    if abs(g.cross(d1, g.sub(c, a))) / L1 >= tol * longer or abs(g.cross(d1, g.sub(d, a))) / L1 >= tol * longer:
        return False
    u = g.scale(d1, 1 / L1)
    p, q = g.dot(g.sub(c, a), u), g.dot(g.sub(d, a), u)
    lo, hi = max(mp.mpf(0), min(p, q)), min(L1, max(p, q))
    return hi - lo > tol * min(L1, L2)


def _stack_depth(net: PlanarNet, members: Sequence[int]) -> int:
    a, b = net.segment(members[0])
    u = g.unit(g.sub(b, a))
    events = []
    for k in members:
        p, q = net.segment(k)
        s, t = g.dot(g.sub(p, a), u), g.dot(g.sub(q, a), u)
        lo, hi = min(s, t), max(s, t)
        events.append((lo, 1, net.edges[k].mult))
        events.append((hi, 0, -net.edges[k].mult))
    events.sort(key=lambda ev: (ev[0], ev[1]))
    depth = best = 0
    for _, _, dm in events:
        depth += dm
        best = max(best, depth)
    return best


def detect_overlaps(net: PlanarNet, tolerance=None) -> OverlapReport:
    """Group edges whose segments overlap on a sub-segment of positive length.

    Two edges are linked when their directions agree to within the collinear
    tolerance (10^-(digits/3) by default), the endpoints of one lie within
    tolerance x length of the other's line, and their projections overlap.
    Groups are connected components of that relation.
    """
    with mp.workdps(net.digits):
        tol = collinear_tolerance(net.digits) if tolerance is None else mp.mpf(tolerance)
        seg = _float_segments(net)
        window = max(1e-7, 10 * float(tol))
        parent = list(range(len(net.edges)))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        # Line direction and offset at working precision, quantised to integers
        # (direction in units of tol/10, offset in units of tol*scale/10).
        # Near-coincident bundles that float cannot tell apart are split here
        # before the full test.  Overlapping edges have |dtheta| < 2 tol and
        # offsets within tol*length + 2 tol*|position| < 10 tol*scale.
        scale_len = max(1.0, float(np.max(np.abs(seg)))) if len(seg) else 1.0
        unit = tol / 10
        unit_r = tol * mp.mpf(scale_len) / 10
        half_turn = int(mp.pi / unit)
        line = {}

        def key(k):
            if k not in line:
                a, b = net.segment(k)
                th = mp.atan2(b[1] - a[1], b[0] - a[0]) % mp.pi
                rho = -mp.sin(th) * a[0] + mp.cos(th) * a[1]
                line[k] = (int(th / unit), int(rho / unit_r))
            return line[k]

        for i, j in _collinear_candidates(seg, window):
            if _opposite_at_shared_end(net, seg, i, j):
                continue
            (ti, ri), (tj, rj) = key(i), key(j)
            dth = abs(ti - tj)
            if dth > half_turn - dth:
                dth, rj = half_turn - dth, -rj  # directions on either side of the wrap
            if dth > 22 or abs(ri - rj) > 102:
                continue
            if _overlap_exact(net, i, j, tol):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
        comps = defaultdict(list)
        for k in range(len(net.edges)):
            comps[find(k)].append(k)
        groups = []
        for members in comps.values():
            if len(members) < 2:
                continue
            groups.append(
                OverlapGroup(
                    tuple(members),
                    _stack_depth(net, members),
                    sum(net.edges[k].mult for k in members),
                )
            )
        groups.sort(key=lambda gr: gr.edges)
        return OverlapReport(tuple(groups))


def _crossing_candidates(seg: np.ndarray, shared: Sequence[set], chunk: int = 256):
    """Edge pairs that may cross properly, by float orientation tests with slack."""
    n = len(seg)
    if n < 2:
        return
    ax, ay, bx, by = seg[:, 0], seg[:, 1], seg[:, 2], seg[:, 3]
    xmin, xmax = np.minimum(ax, bx), np.maximum(ax, bx)
    ymin, ymax = np.minimum(ay, by), np.maximum(ay, by)
    scale_len = max(1.0, float(np.max(np.abs(seg))))
    eps = 1e-9 * scale_len
    for start in range(0, n, chunk):
        sl = slice(start, min(n, start + chunk))
        I = np.arange(sl.start, sl.stop)[:, None]
        J = np.arange(n)[None, :]
        box = (
            (xmin[sl, None] <= xmax[None, :] + eps)
            & (xmin[None, :] <= xmax[sl, None] + eps)
            & (ymin[sl, None] <= ymax[None, :] + eps)
            & (ymin[None, :] <= ymax[sl, None] + eps)
            & (J > I)
        )
        dx1, dy1 = (bx - ax)[sl, None], (by - ay)[sl, None]
        dx2, dy2 = (bx - ax)[None, :], (by - ay)[None, :]
        l1 = np.hypot(dx1, dy1)
        l2 = np.hypot(dx2, dy2)
        o1 = (dx1 * (ay[None, :] - ay[sl, None]) - dy1 * (ax[None, :] - ax[sl, None])) / l1
        o2 = (dx1 * (by[None, :] - ay[sl, None]) - dy1 * (bx[None, :] - ax[sl, None])) / l1
        o3 = (dx2 * (ay[sl, None] - ay[None, :]) - dy2 * (ax[sl, None] - ax[None, :])) / l2
        o4 = (dx2 * (by[sl, None] - ay[None, :]) - dy2 * (bx[sl, None] - ax[None, :])) / l2
        hit = box & (np.minimum(o1, o2) <= eps) & (np.maximum(o1, o2) >= -eps) \
            & (np.minimum(o3, o4) <= eps) & (np.maximum(o3, o4) >= -eps)
        for ii, jj in zip(*np.nonzero(hit)):
            i, j = int(ii) + start, int(jj)
            if shared[i] & shared[j]:
                continue
            yield i, j


def find_crossings(net: PlanarNet, tolerance=None) -> list:
    """Proper transversal crossings ``(i, j, t_i, t_j, point)`` between edge interiors.

    Touching at endpoints, T-junctions and (near-)parallel overlaps are not
    crossings.  ``tolerance`` is an absolute length (default 10^-(digits/3)).
    """
    with mp.workdps(net.digits):
        tol = collinear_tolerance(net.digits) if tolerance is None else mp.mpf(tolerance)
        seg = _float_segments(net)
        shared = [{e.a, e.b} for e in net.edges]
        out = []
        for i, j in _crossing_candidates(seg, shared):
            a, b = net.segment(i)
            c, d = net.segment(j)
            d1, d2 = g.sub(b, a), g.sub(d, c)
            L1, L2 = g.norm(d1), g.norm(d2)
            if abs(g.cross(d1, d2)) < tol * L1 * L2:
                # Collinear pieces are overlaps, not crossings.
                off = max(abs(g.cross(d1, g.sub(c, a))), abs(g.cross(d1, g.sub(d, a)))) / L1
                if off < tol * max(L1, L2):
                    continue
            sol = g.line_intersection(a, d1, c, d2)
            if sol is None:
                continue
            t, s = sol
            if t * L1 <= tol or (1 - t) * L1 <= tol or s * L2 <= tol or (1 - s) * L2 <= tol:
                continue
            out.append((i, j, t, s, g.add(a, g.scale(d1, t))))
        return out


def materialize_crossings(net: PlanarNet, prefix: str = "x", tolerance=None) -> tuple:
    """Insert a degree-4 (or higher) interior vertex at every proper crossing.

    Concurrent crossings (several edges through one point) become a single
    vertex.  Returns ``(new_net, crossing_vertex_ids)``.
    """
    crossings = find_crossings(net, tolerance)
    if not crossings:
        return net, []
    with mp.workdps(net.digits):
        tol = collinear_tolerance(net.digits) if tolerance is None else mp.mpf(tolerance)
        # Cluster concurrent crossing points.
        pts = sorted(range(len(crossings)), key=lambda m: (float(crossings[m][4][0]), float(crossings[m][4][1])))
        reach = max(1e-6, 10 * float(tol))
        cluster_of = {}
        reps = []
        for m in pts:
            p = crossings[m][4]
            found = None
            for c_idx in range(len(reps) - 1, -1, -1):
                q = reps[c_idx]
                if float(p[0]) - float(q[0]) > reach:
                    break
                if g.dist(p, q) <= tol:
                    found = c_idx
                    break
            if found is None:
                reps.append(p)
                found = len(reps) - 1
            cluster_of[m] = found
        # Stable ids ordered by first appearance in edge order.
        first = {}
        for m, c in cluster_of.items():
            key = (min(crossings[m][0], crossings[m][1]), max(crossings[m][0], crossings[m][1]))
            if c not in first or key < first[c]:
                first[c] = key
        order = sorted(range(len(reps)), key=first.__getitem__)
        cid = {}
        existing = net.vertex_map
        n = 0
        for c in order:
            while f"{prefix}{n}" in existing:
                n += 1
            cid[c] = f"{prefix}{n}"
            n += 1
        splits = defaultdict(dict)
        for m, (i, j, t, s, _p) in enumerate(crossings):
            c = cluster_of[m]
            splits[i].setdefault(c, t)
            splits[j].setdefault(c, s)
        new_vertices = list(net.vertices)
        for c in order:
            new_vertices.append(Vertex(cid[c], reps[c], INTERIOR))
        new_edges = []
        for k, e in enumerate(net.edges):
            if k not in splits:
                new_edges.append(e)
                continue
            chain = [e.a] + [cid[c] for c, _t in sorted(splits[k].items(), key=lambda kv: kv[1])] + [e.b]
            for u, w in zip(chain, chain[1:]):
                new_edges.append(Edge(u, w, e.mult))
        new = PlanarNet(tuple(new_vertices), tuple(new_edges), net.digits, net.tolerance)
        return new, [cid[c] for c in order]


# ---------------------------------------------------------------------------
# JSON


def to_json(net: PlanarNet) -> dict:
    d = net.digits
    return {
        "digits": d,
        "vertices": [
            {"id": v.id, "x": to_decimal_string(v.position[0], d), "y": to_decimal_string(v.position[1], d),
             "kind": v.kind}
            for v in net.vertices
        ],
        "edges": [{"a": e.a, "b": e.b, "mult": e.mult} for e in net.edges],
    }


def from_json(data: dict, tolerance=None) -> PlanarNet:
    try:
        digits = check_digits(int(data.get("digits", default_digits())))
        vertices = []
        for item in data["vertices"]:
            kind = item.get("kind", INTERIOR)
            if not isinstance(item["x"], str) or not isinstance(item["y"], str):
                raise NetStructureError(f"vertex {item.get('id')!r}: coordinates must be decimal strings")
            vertices.append(Vertex(str(item["id"]), (parse_real(item["x"], digits), parse_real(item["y"], digits)), kind))
        edges = []
        for item in data["edges"]:
            mult = item.get("mult", 1)
            if not isinstance(mult, int) or isinstance(mult, bool):
                raise NetStructureError(f"edge multiplicity must be an integer, got {mult!r}")
            edges.append(Edge(str(item["a"]), str(item["b"]), mult))
    except (KeyError, TypeError) as exc:
        raise NetStructureError(f"malformed net JSON: {exc}") from exc
    if tolerance is not None:
        tolerance = parse_real(tolerance, digits)
    return PlanarNet(tuple(vertices), tuple(edges), digits, tolerance)


def dumps(net: PlanarNet) -> str:
    return json.dumps(to_json(net), indent=1)


def loads(text: str) -> PlanarNet:
    return from_json(json.loads(text))
