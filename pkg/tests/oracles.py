"""Independent reference computations used only by the tests.

Nothing here imports the library's geometry; every oracle takes a different
route to the same number (brute force, bisection, direct summation).
"""

import math

import mpmath as mp


def brute_force_min(f, x0, y0, span, levels=40, grid=21):
    """Minimise f over the plane by repeated grid refinement around the best point."""
    bx, by = x0, y0
    best = f(bx, by)
    for _ in range(levels):
        cx, cy = bx, by
        for i in range(grid):
            for j in range(grid):
                x = cx + span * (2 * i / (grid - 1) - 1)
                y = cy + span * (2 * j / (grid - 1) - 1)
                val = f(x, y)
                if val < best:
                    best, bx, by = val, x, y
        span /= 4
    return bx, by, best


def distance_sum(points, digits=None):
    """Sum of distances; with ``digits`` it is evaluated in mpmath so the flat
    bottom of the objective is resolved past float precision."""
    if digits is None:
        def f(x, y):
            return math.fsum(math.hypot(x - px, y - py) for px, py in points)
        return f
    mpts = [(mp.mpf(px), mp.mpf(py)) for px, py in points]

    def g(x, y):
        with mp.workdps(digits):
            return mp.fsum(mp.hypot(x - px, y - py) for px, py in mpts)
    return g


def clipped_length(segments, r, origin=(0, 0), iters=200):
    """Length of segments inside the disk; circle crossings located by bisection."""
    ox, oy = mp.mpf(origin[0]), mp.mpf(origin[1])
    total = mp.mpf(0)
    for (ax, ay), (bx, by), mult in segments:
        def inside(t):
            x = ax + (bx - ax) * t - ox
            y = ay + (by - ay) * t - oy
            return x * x + y * y < r * r

        # The squared distance is convex along the segment; find its minimum
        # by ternary search, then bisect on both sides.
        lo, hi = mp.mpf(0), mp.mpf(1)
        def d2(t):
            x = ax + (bx - ax) * t - ox
            y = ay + (by - ay) * t - oy
            return x * x + y * y
        for _ in range(iters):
            m1 = lo + (hi - lo) / 3
            m2 = hi - (hi - lo) / 3
            if d2(m1) < d2(m2):
                hi = m2
            else:
                lo = m1
        tmin = (lo + hi) / 2
        if not inside(tmin):
            continue

        def edge(a, b):
            # inside(a) is True, inside(b) may be either
            if inside(b):
                return b
            for _ in range(iters):
                m = (a + b) / 2
                if inside(m):
                    a = m
                else:
                    b = m
            return (a + b) / 2

        t0 = edge(tmin, mp.mpf(0))
        t1 = edge(tmin, mp.mpf(1))
        seg_len = mp.hypot(bx - ax, by - ay)
        total += mult * seg_len * abs(t1 - t0)
    return total


def direct_length(net):
    return mp.fsum(
        e.mult * mp.hypot(net.position(e.a)[0] - net.position(e.b)[0], net.position(e.a)[1] - net.position(e.b)[1])
        for e in net.edges
    )
