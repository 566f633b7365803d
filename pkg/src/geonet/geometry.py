"""Plane vector helpers on ``(x, y)`` tuples of mpf.

These are deliberately thin: every caller already runs inside an mpmath
precision context, so nothing here touches ``mp.dps``.
"""

from __future__ import annotations

from typing import Iterable, Sequence, Tuple

import mpmath as mp

Vec = Tuple[mp.mpf, mp.mpf]


def vec(x, y) -> Vec:
    return (mp.mpf(x), mp.mpf(y))


def add(a: Vec, b: Vec) -> Vec:
    return (a[0] + b[0], a[1] + b[1])


def sub(a: Vec, b: Vec) -> Vec:
    return (a[0] - b[0], a[1] - b[1])


def scale(a: Vec, s) -> Vec:
    return (a[0] * s, a[1] * s)


def neg(a: Vec) -> Vec:
    return (-a[0], -a[1])


def dot(a: Vec, b: Vec):
    return a[0] * b[0] + a[1] * b[1]


def cross(a: Vec, b: Vec):
    return a[0] * b[1] - a[1] * b[0]


def norm(a: Vec):
    return mp.hypot(a[0], a[1])


def dist(a: Vec, b: Vec):
    return mp.hypot(a[0] - b[0], a[1] - b[1])


def unit(a: Vec) -> Vec:
    n = norm(a)
    if n == 0:
        raise ZeroDivisionError("unit vector of zero vector")
    return (a[0] / n, a[1] / n)


def polar(r, theta) -> Vec:
    return (r * mp.cos(theta), r * mp.sin(theta))


def rotate(a: Vec, theta) -> Vec:
    c, s = mp.cos(theta), mp.sin(theta)
    return (c * a[0] - s * a[1], s * a[0] + c * a[1])


def rotate_cs(a: Vec, c, s) -> Vec:
    """Rotation with precomputed cosine/sine (exactly repeatable)."""
    return (c * a[0] - s * a[1], s * a[0] + c * a[1])


def rotate_about(p: Vec, center: Vec, theta) -> Vec:
    return add(center, rotate(sub(p, center), theta))


def direction_angle(a: Vec):
    return mp.atan2(a[1], a[0])


def ccw_angle(frm: Vec, to: Vec):
    """Counterclockwise angle in [0, 2pi) turning direction ``frm`` onto ``to``."""
    ang = mp.atan2(cross(frm, to), dot(frm, to))
    if ang < 0:
        ang += 2 * mp.pi
    return ang


def signed_angle(frm: Vec, to: Vec):
    """Signed angle in (-pi, pi] from ``frm`` to ``to`` (counterclockwise positive)."""
    return mp.atan2(cross(frm, to), dot(frm, to))


def unsigned_angle(a: Vec, b: Vec):
    return abs(signed_angle(a, b))


def line_intersection(p: Vec, d: Vec, q: Vec, e: Vec):
    """Solve ``p + t d = q + s e``; returns ``(t, s)`` or None when parallel."""
    den = cross(d, e)
    if den == 0:
        return None
    w = sub(q, p)
    return cross(w, e) / den, cross(w, d) / den


def circle_through(a: Vec, b: Vec, c: Vec):
    """Center and radius of the circle through three points."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0:
        raise ValueError("collinear points define no circle")
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    center = (ux, uy)
    return center, dist(center, a)


def ray_circle_params(p: Vec, d: Vec, center: Vec, radius):
    """Parameters t (ascending) with |p + t d - center| = radius; d need not be unit."""
    w = sub(p, center)
    a = dot(d, d)
    b = 2 * dot(w, d)
    c = dot(w, w) - radius * radius
    disc = b * b - 4 * a * c
    if disc < 0:
        return []
    r = mp.sqrt(disc)
    # Stable quadratic roots.
    q = -(b + r) / 2 if b >= 0 else -(b - r) / 2
    roots = []
    if q != 0:
        roots.append(c / q)
    roots.append(q / a)
    return sorted(roots)


def convex_hull(points: Sequence[Vec]) -> list:
    """Monotone chain hull, counterclockwise, collinear points dropped."""
    pts = sorted(set((p[0], p[1]) for p in points))
    if len(pts) <= 2:
        return list(pts)

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and cross(sub(out[-1], out[-2]), sub(p, out[-2])) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]


def hull_excess(hull: Sequence[Vec], p: Vec):
    """Distance by which ``p`` lies outside a ccw convex polygon (0 if inside)."""
    n = len(hull)
    if n == 0:
        return mp.inf
    if n == 1:
        return dist(hull[0], p)
    if n == 2:
        return point_segment_distance(p, hull[0], hull[1])
    worst = mp.mpf(0)
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        edge = sub(b, a)
        # Signed distance to the right of the edge = outside for a ccw hull.
        out = -cross(edge, sub(p, a)) / norm(edge)
        if out > worst:
            worst = out
    if worst == 0:
        return worst
    return min(point_segment_distance(p, hull[i], hull[(i + 1) % n]) for i in range(n))


def point_segment_distance(p: Vec, a: Vec, b: Vec):
    ab = sub(b, a)
    denom = dot(ab, ab)
    if denom == 0:
        return dist(p, a)
    t = dot(sub(p, a), ab) / denom
    t = min(max(t, mp.mpf(0)), mp.mpf(1))
    return dist(p, add(a, scale(ab, t)))


def centroid(points: Iterable[Vec]) -> Vec:
    pts = list(points)
    n = len(pts)
    return (mp.fsum(p[0] for p in pts) / n, mp.fsum(p[1] for p in pts) / n)
