"""Geometric primitives (Fermat points, winging, rebalancing) and example nets.

Primitives take and return ``(x, y)`` tuples of mpf and run at ``digits``
significant digits.  Generators return :class:`~geonet.netcore.PlanarNet`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath as mp

from . import geometry as g
from .errors import ConstructionError, PreconditionError
from .netcore import BOUNDARY, INTERIOR, Edge, NetBuilder, PlanarNet, Vertex, imbalance, materialize_crossings
from .precision import balance_tolerance, default_digits, guard_tolerance, parse_real

def _as_vec(p):
    return (mp.mpf(p[0]), mp.mpf(p[1]))


# ---------------------------------------------------------------------------
# Fermat point by the apex / circumcircle construction


@dataclass(frozen=True)
class FermatResult:
    point: g.Vec
    apex: g.Vec
    center: g.Vec
    radius: mp.mpf


def triangle_angles(a: g.Vec, b: g.Vec, c: g.Vec):
    """Interior angles at a, b, c."""
    return (
        g.unsigned_angle(g.sub(b, a), g.sub(c, a)),
        g.unsigned_angle(g.sub(a, b), g.sub(c, b)),
        g.unsigned_angle(g.sub(a, c), g.sub(b, c)),
    )


def external_apex(p: g.Vec, q: g.Vec, away_from: g.Vec) -> g.Vec:
    """Third vertex of the equilateral triangle on pq, on the side opposite ``away_from``."""
    m = g.scale(g.add(p, q), mp.mpf(1) / 2)
    pq = g.sub(q, p)
    normal = g.unit((-pq[1], pq[0]))
    if g.dot(normal, g.sub(away_from, m)) > 0:
        normal = g.neg(normal)
    return g.add(m, g.scale(normal, g.norm(pq) * mp.sqrt(3) / 2))


def fermat_point_two_hook(P, Q, v, digits: int | None = None) -> FermatResult:
    """Fermat point of triangle PvQ via the external apex X on PQ.

    F is the second intersection of segment Xv with the circle through P, Q, X.
    Requires all three angles of the triangle below 120 degrees.
    """
    digits = digits or default_digits()
    with mp.workdps(digits):
        P, Q, v = _as_vec(P), _as_vec(Q), _as_vec(v)
        tol = guard_tolerance(digits)
        pq, pv = g.sub(Q, P), g.sub(v, P)
        if abs(g.cross(pq, pv)) <= tol * g.norm(pq) * g.norm(pv):
            raise PreconditionError("P, Q, v are collinear; no Fermat point construction")
        limit = 2 * mp.pi / 3
        for name, ang in zip("PQv", (triangle_angles(P, Q, v))):
            if ang >= limit - tol:
                raise PreconditionError(
                    f"angle at {name} is {mp.nstr(ang * 180 / mp.pi, 8)} deg >= 120 deg"
                )
        X = external_apex(P, Q, v)
        center = g.scale(g.add(g.add(P, Q), X), mp.mpf(1) / 3)
        radius = g.dist(P, Q) / mp.sqrt(3)
        d = g.sub(v, X)
        t = -2 * g.dot(g.sub(X, center), d) / g.dot(d, d)
        if not (0 < t < 1):
            raise PreconditionError("segment Xv does not meet the circle a second time inside the segment")
        return FermatResult(g.add(X, g.scale(d, t)), X, center, radius)


# ---------------------------------------------------------------------------
# Geometric median


@dataclass(frozen=True)
class MedianResult:
    point: g.Vec
    at_vertex: bool
    vertex_index: int | None
    iterations: int


def _distance_sum(points, x):
    return mp.fsum(g.dist(p, x) for p in points)


def geometric_median(points: Sequence, digits: int | None = None, max_iter: int = 100000) -> MedianResult:
    """Minimizer of the sum of distances (Weiszfeld iteration with vertex snap).

    Input points are first tested for optimality directly: a_j is the
    minimizer iff the unit vectors from a_j to the other points sum to a
    vector of norm <= 1.  Otherwise Weiszfeld iterates from the centroid
    until the step drops below 10^-(digits/2).
    """
    digits = digits or default_digits()
    with mp.workdps(digits + 10):
        pts = [_as_vec(p) for p in points]
        if len(pts) < 3:
            raise PreconditionError("need at least 3 points")
        if all(p == pts[0] for p in pts):
            raise PreconditionError("all points coincide")
        base = next(p for p in pts if p != pts[0])
        if all(abs(g.cross(g.sub(base, pts[0]), g.sub(p, pts[0]))) == 0 for p in pts):
            raise PreconditionError("points are collinear")
        tol = balance_tolerance(digits)
        for j, a in enumerate(pts):
            pull = [g.unit(g.sub(p, a)) for p in pts if p != a]
            mult = sum(1 for p in pts if p == a)
            s = (mp.fsum(u[0] for u in pull), mp.fsum(u[1] for u in pull))
            if g.norm(s) <= mult:
                with mp.workdps(digits):
                    return MedianResult((+a[0], +a[1]), True, j, 0)
        x = g.centroid(pts)
        scale_len = max(g.dist(p, q) for p in pts for q in pts)
        it = 0
        for it in range(1, max_iter + 1):
            wsum = mp.mpf(0)
            acc_x, acc_y = [], []
            snapped = None
            for j, p in enumerate(pts):
                d = g.dist(p, x)
                if d <= tol * scale_len:
                    snapped = j
                    break
                w = 1 / d
                wsum += w
                acc_x.append(p[0] * w)
                acc_y.append(p[1] * w)
            if snapped is not None:
                # Optimality at input points was ruled out above; step off it.
                x = g.add(x, g.scale(g.sub(g.centroid(pts), x), mp.mpf(1) / 2))
                continue
            new = (mp.fsum(acc_x) / wsum, mp.fsum(acc_y) / wsum)
            step = g.dist(new, x)
            x = new
            if step <= scale_len * mp.mpf(10) ** -(digits + 5):
                break
        with mp.workdps(digits):
            return MedianResult((+x[0], +x[1]), False, None, it)


# ---------------------------------------------------------------------------
# Winging


@dataclass(frozen=True)
class WingResult:
    vertex: g.Vec
    directions: tuple
    degree: int
    beta: mp.mpf
    alpha: mp.mpf | None = None


def symmetric_wing_angle(alpha):
    """Angle between the wings of a symmetric degree-3 vertex with incoming angle alpha."""
    return 2 * mp.acos(mp.mpf(1) / 2 - mp.cos(alpha / 2))


def wing_degree2(v, u1, u2, digits: int | None = None) -> WingResult:
    """Balance a degree-2 vertex by extending both incident edges through it."""
    digits = digits or default_digits()
    with mp.workdps(digits):
        u1, u2 = g.unit(_as_vec(u1)), g.unit(_as_vec(u2))
        small = g.unsigned_angle(u1, u2)
        alpha = 2 * mp.pi - small
        tol = guard_tolerance(digits)
        if abs(alpha - mp.pi) <= tol:
            raise PreconditionError("incoming edges are antipodal (alpha = pi); vertex is already straight")
        if small <= tol:
            raise PreconditionError("incoming edges coincide")
        w1, w2 = g.neg(u1), g.neg(u2)
        return WingResult(_as_vec(v), (w1, w2), 4, g.unsigned_angle(w1, w2), alpha)


class WingCoincidenceError(ConstructionError):
    pass


def two_unit_decomposition(target: g.Vec):
    """The unordered pair of unit vectors summing to ``target`` (0 < |target| < 2)."""
    b = g.norm(target)
    d = g.scale(target, 1 / b)
    half = mp.acos(b / 2)
    return g.rotate(d, half), g.rotate(d, -half)


def wing_degree3(v, u1, u2, u3, digits: int | None = None) -> WingResult:
    """Balance a degree-3 vertex by the unique pair of unit wings summing to -Imb.

    Wings sit at +-arccos(b/2) around -Imb/b where b = |Imb| must be in (0, 2).
    """
    digits = digits or default_digits()
    with mp.workdps(digits):
        us = [g.unit(_as_vec(u)) for u in (u1, u2, u3)]
        imb = (mp.fsum(u[0] for u in us), mp.fsum(u[1] for u in us))
        b = g.norm(imb)
        tol = guard_tolerance(digits)
        if b >= 2 - tol:
            raise PreconditionError(f"imbalance {mp.nstr(b, 10)} >= 2; no unit pair balances it")
        if b <= tol:
            raise PreconditionError("vertex already balanced; wing pair is not unique")
        w1, w2 = two_unit_decomposition(g.neg(imb))
        for w in (w1, w2):
            for u in us:
                if g.unsigned_angle(w, u) <= tol:
                    raise WingCoincidenceError("a wing coincides with an incoming edge")
        return WingResult(_as_vec(v), (w1, w2), 5, g.unsigned_angle(w1, w2))


# ---------------------------------------------------------------------------
# Rebalancing a boundary vertex


def _min_gap(dirs):
    angs = sorted(float(mp.atan2(d[1], d[0])) % (2 * math.pi) for d in dirs)
    gaps = [b - a for a, b in zip(angs, angs[1:])] + [angs[0] + 2 * math.pi - angs[-1]]
    return min(gaps)


def rebalance_vertex(net: PlanarNet, vid: str, edge_length=None, samples: int = 720) -> PlanarNet:
    """Make ``vid`` balanced by attaching new unit-direction edges to new boundary vertices.

    Uses 3 new edges when imb < 1 and max(3, ceil(imb) + 1) in general.  The
    free parameter of the solution family is chosen to maximise the smallest
    angular gap between all edge directions at the vertex.
    """
    with mp.workdps(net.digits):
        rec = imbalance(net, vid)
        b = rec.norm
        if b <= net.tolerance:
            return net
        n_new = 3 if b < 1 else max(3, int(mp.ceil(b)) + 1)
        p = net.position(vid)
        existing = [g.unit(g.sub(net.position(net.edges[k].other(vid)), p)) for k in net.incidence[vid]]
        target = g.neg(rec.vector)
        d = g.scale(target, 1 / b)
        fan = mp.pi / (4 * n_new)
        best = None
        for s in range(samples):
            psi = -mp.pi + 2 * mp.pi * s / samples
            fixed = [g.rotate(d, psi + j * fan) for j in range(n_new - 2)]
            rest = g.sub(target, (mp.fsum(u[0] for u in fixed), mp.fsum(u[1] for u in fixed)))
            rn = g.norm(rest)
            if not (mp.mpf("1e-6") < rn < 2 - mp.mpf("1e-6")):
                continue
            dirs = fixed + list(two_unit_decomposition(rest))
            gap = _min_gap(existing + dirs)
            if best is None or gap > best[0]:
                best = (gap, dirs)
        if best is None or best[0] < 1e-9:
            raise ConstructionError(f"could not place new edges at {vid!r} without coinciding with existing ones")
        dirs = best[1]
        if edge_length is None:
            lens = [g.dist(p, net.position(net.edges[k].other(vid))) for k in net.incidence[vid]]
            edge_length = min(lens) / 2 if lens else mp.mpf(1)
        vertices = [Vertex(v.id, v.position, INTERIOR if v.id == vid else v.kind) for v in net.vertices]
        edges = list(net.edges)
        taken = net.vertex_map
        for j, u in enumerate(dirs):
            nid = f"{vid}+{j}"
            while nid in taken:
                nid += "'"
            vertices.append(Vertex(nid, g.add(p, g.scale(u, edge_length)), BOUNDARY))
            edges.append(Edge(vid, nid, 1))
        return PlanarNet(tuple(vertices), tuple(edges), net.digits, net.tolerance)


# ---------------------------------------------------------------------------
# Example nets


def y_net(points=None, digits: int | None = None) -> PlanarNet:
    """Three boundary points joined to their Fermat point (equilateral by default)."""
    digits = digits or default_digits()
    with mp.workdps(digits):
        if points is None:
            points = [g.polar(mp.mpf(1), 2 * mp.pi * k / 3) for k in range(3)]
        pts = [_as_vec(p) for p in points]
        F = fermat_point_two_hook(pts[0], pts[1], pts[2], digits).point
        b = NetBuilder(digits)
        b.add_vertex("F", F)
        for k, p in enumerate(pts):
            b.add_vertex(f"A{k}", p, BOUNDARY)
            b.add_edge("F", f"A{k}")
        return b.build()


@dataclass(frozen=True)
class WeightedTriangleSpec:
    """Triangle with rational half-angle cosines and k nested homothetic copies.

    ``cosines[i]`` is cos(alpha_i / 2) = m_i / n_i; ``ratios`` are the
    homothety ratios 0 < r_1 < ... < r_k < 1.
    """

    cosines: tuple
    ratios: tuple

    @classmethod
    def pythagorean(cls, k: int = 1) -> "WeightedTriangleSpec":
        """cos(a1/2) = cos(a2/2) = 12/13, so a3 = pi - a1 - a2 has cos(a3/2) = 120/169."""
        return cls((Fraction(12, 13), Fraction(12, 13), Fraction(120, 169)),
                   tuple(Fraction(j, k + 1) for j in range(1, k + 1)))

    @property
    def N(self) -> int:
        return math.prod(c.denominator for c in self.cosines)

    @property
    def Ni(self) -> tuple:
        return tuple(c.numerator * self.N // c.denominator for c in self.cosines)

    def check(self, digits: int) -> None:
        if len(self.cosines) != 3:
            raise PreconditionError("need three half-angle cosines")
        for c in self.cosines:
            if not isinstance(c, Fraction) or not (0 < c < 1):
                raise PreconditionError(f"half-angle cosine {c!r} must be a rational in (0, 1)")
        r = list(self.ratios)
        if not r or any(not (0 < x < 1) for x in r) or any(b <= a for a, b in zip(r, r[1:])):
            raise PreconditionError("ratios must be strictly increasing in (0, 1)")
        with mp.workdps(digits):
            total = mp.fsum(2 * mp.acos(mp.mpf(c.numerator) / c.denominator) for c in self.cosines)
            if abs(total - mp.pi) > balance_tolerance(digits):
                raise PreconditionError(f"angles sum to {mp.nstr(total, 15)}, not pi")


def build_weighted_triangle(spec: WeightedTriangleSpec, digits: int | None = None) -> PlanarNet:
    """The nested-triangle multinet: radial edges e_i^j of weight 2 j N_i, sides of weight N."""
    digits = digits or default_digits()
    spec.check(digits)
    with mp.workdps(digits + 10):
        alpha = [2 * mp.acos(mp.mpf(c.numerator) / c.denominator) for c in spec.cosines]
        A1 = (mp.mpf(0), mp.mpf(0))
        A2 = (mp.mpf(1), mp.mpf(0))
        side13 = mp.sin(alpha[1]) / mp.sin(alpha[2])
        A3 = g.polar(side13, alpha[0])
        A = [A1, A2, A3]
        a = g.dist(A2, A3)
        bb = g.dist(A1, A3)
        c = g.dist(A1, A2)
        O = ((a * A1[0] + bb * A2[0] + c * A3[0]) / (a + bb + c), (a * A1[1] + bb * A2[1] + c * A3[1]) / (a + bb + c))
        N, Ni = spec.N, spec.Ni
        k = len(spec.ratios)
        b = NetBuilder(digits)
        for i in range(3):
            b.add_vertex(f"A{i + 1}", A[i], BOUNDARY)
        for j, r in enumerate(spec.ratios, start=1):
            rr = mp.mpf(r.numerator) / r.denominator if isinstance(r, Fraction) else mp.mpf(r)
            for i in range(3):
                b.add_vertex(f"A{i + 1}^{j}", g.add(O, g.scale(g.sub(A[i], O), rr)))
            for i in range(3):
                b.add_edge(f"A{i + 1}^{j}", f"A{(i + 1) % 3 + 1}^{j}", N)
        for i in range(3):
            for j in range(1, k + 1):
                far = f"A{i + 1}^{j + 1}" if j < k else f"A{i + 1}"
                b.add_edge(f"A{i + 1}^{j}", far, 2 * j * Ni[i])
        return b.build()


def build_double_polygon(N: int, digits: int | None = None) -> PlanarNet:
    """Regular N-gon united with its copy rotated by pi/(2N); side crossings become vertices."""
    if not isinstance(N, int) or N < 3:
        raise PreconditionError("N must be an integer >= 3")
    digits = digits or default_digits()
    with mp.workdps(digits + 10):
        b = NetBuilder(digits)
        for k in range(N):
            b.add_vertex(f"a{k}", g.polar(mp.mpf(1), 2 * mp.pi * k / N), BOUNDARY)
            b.add_vertex(f"b{k}", g.polar(mp.mpf(1), 2 * mp.pi * k / N + mp.pi / (2 * N)), BOUNDARY)
        for k in range(N):
            b.add_edge(f"a{k}", f"a{(k + 1) % N}")
            b.add_edge(f"b{k}", f"b{(k + 1) % N}")
        net, _ = materialize_crossings(b.build(), prefix="c")
        return net


def _is_convex_quad(q) -> bool:
    signs = []
    for i in range(4):
        a, b, c = q[i], q[(i + 1) % 4], q[(i + 2) % 4]
        signs.append(g.cross(g.sub(b, a), g.sub(c, b)))
    return all(s > 0 for s in signs) or all(s < 0 for s in signs)


@dataclass(frozen=True)
class FourPointNets:
    x_net: PlanarNet
    trees: tuple
    infeasible: tuple


def build_four_point_trees(quad: Sequence, digits: int | None = None) -> FourPointNets:
    """X-shaped net at the diagonal crossing plus both two-Steiner-point trees.

    Trees pair the vertices along opposite sides; a topology whose Steiner
    points cannot be placed in the right order is listed in ``infeasible``.
    """
    digits = digits or default_digits()
    with mp.workdps(digits + 10):
        q = [_as_vec(p) for p in quad]
        if len(q) != 4 or not _is_convex_quad(q):
            raise PreconditionError("need four vertices of a convex quadrilateral in cyclic order")
        t, _s = g.line_intersection(q[0], g.sub(q[2], q[0]), q[1], g.sub(q[3], q[1]))
        O = g.add(q[0], g.scale(g.sub(q[2], q[0]), t))
        bx = NetBuilder(digits)
        bx.add_vertex("O", O)
        for k in range(4):
            bx.add_vertex(f"A{k}", q[k], BOUNDARY)
            bx.add_edge("O", f"A{k}")
        x_net = bx.build()
        trees, bad = [], []
        for shift in (0, 1):
            A, B, C, D = (q[(shift + m) % 4] for m in range(4))
            names = [f"A{(shift + m) % 4}" for m in range(4)]
            inside = g.centroid(q)
            try:
                E_ab = external_apex(A, B, inside)
                E_cd = external_apex(C, D, inside)
                O1 = fermat_point_two_hook(A, B, E_cd, digits + 10).point
                O2 = fermat_point_two_hook(C, D, E_ab, digits + 10).point
                axis = g.sub(E_cd, E_ab)
                s1 = g.dot(g.sub(O1, E_ab), axis)
                s2 = g.dot(g.sub(O2, E_ab), axis)
                if not (0 < s1 < s2 < g.dot(axis, axis)):
                    raise PreconditionError("Steiner points out of order along the Melzak line")
            except PreconditionError as exc:
                bad.append((tuple(names), str(exc)))
                continue
            bt = NetBuilder(digits)
            bt.add_vertex("O1", O1)
            bt.add_vertex("O2", O2)
            for nm, p in zip(names, (A, B, C, D)):
                bt.add_vertex(nm, p, BOUNDARY)
            bt.add_edge(names[0], "O1")
            bt.add_edge(names[1], "O1")
            bt.add_edge("O1", "O2")
            bt.add_edge(names[2], "O2")
            bt.add_edge(names[3], "O2")
            trees.append(bt.build())
        return FourPointNets(x_net, tuple(trees), tuple(bad))


def unit_square(digits: int | None = None):
    with mp.workdps(digits or default_digits()):
        return [(mp.mpf(0), mp.mpf(0)), (mp.mpf(1), mp.mpf(0)), (mp.mpf(1), mp.mpf(1)), (mp.mpf(0), mp.mpf(1))]
