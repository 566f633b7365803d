"""Length minimisation over free vertex positions with a fixed graph.

Plain gradient descent with Armijo backtracking on L = sum m_e |e|, in
float64.  Logged lengths are the starting length plus the accumulated
(cancellation-free) per-step decreases.  Edges that shrink below the merge threshold are contracted and
the event is logged; the result is usually a simpler net than the input
topology.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NetStructureError, PreconditionError
from .netcore import BOUNDARY, INTERIOR, Edge, PlanarNet, Vertex, from_json, to_json


@dataclass
class RelaxProblem:
    ids: list
    edges: list  # (a, b, mult)
    pinned: dict  # id -> (x, y)
    initial: dict  # free id -> (x, y)
    max_iter: int = 20000
    tolerance: float = 1e-11
    merge_threshold: float | None = None

    def __post_init__(self):
        if not self.pinned:
            raise PreconditionError("at least one vertex must be pinned")
        known = set(self.ids)
        if set(self.pinned) | set(self.initial) != known or set(self.pinned) & set(self.initial):
            raise PreconditionError("every vertex must be either pinned or given an initial position")
        adj = {v: set() for v in self.ids}
        for a, b, m in self.edges:
            if a not in known or b not in known:
                raise NetStructureError(f"edge ({a}, {b}) has an unknown endpoint")
            if a == b or m < 1:
                raise NetStructureError("loops and non-positive multiplicities are not allowed")
            adj[a].add(b)
            adj[b].add(a)
        seen, stack = {self.ids[0]}, [self.ids[0]]
        while stack:
            for w in adj[stack.pop()]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != len(self.ids):
            raise PreconditionError("graph is not connected")

    @classmethod
    def from_net(cls, net: PlanarNet, **kw) -> "RelaxProblem":
        pinned, initial = {}, {}
        for v in net.vertices:
            p = (float(v.position[0]), float(v.position[1]))
            (pinned if v.kind == BOUNDARY else initial)[v.id] = p
        edges = [(e.a, e.b, e.mult) for e in net.edges]
        return cls([v.id for v in net.vertices], edges, pinned, initial, **kw)

    def diameter(self) -> float:
        pts = np.array(list(self.pinned.values()) + list(self.initial.values()), dtype=float)
        span = pts.max(axis=0) - pts.min(axis=0)
        return float(np.hypot(*span)) or 1.0


@dataclass
class RelaxTrace:
    converged: bool
    iterations: int
    lengths: list
    events: list
    positions: dict
    edges: list  # surviving (a, b, mult) after merges
    pinned: set
    grad_norm: float
    aliases: dict = field(default_factory=dict)  # merged id -> surviving id

    @property
    def monotone(self) -> bool:
        return all(b <= a for a, b in zip(self.lengths, self.lengths[1:]))

    def net(self, digits: int = 16, tolerance=None) -> PlanarNet:
        import mpmath as mp

        with mp.workdps(digits):
            verts = [
                Vertex(v, (mp.mpf(repr(p[0])), mp.mpf(repr(p[1]))), BOUNDARY if v in self.pinned else INTERIOR)
                for v, p in self.positions.items()
            ]
            tol = mp.mpf(tolerance) if tolerance is not None else mp.mpf("1e-8")
            return PlanarNet(tuple(verts), tuple(Edge(a, b, m) for a, b, m in self.edges), digits, tol)


def _length(P, ea, eb, em):
    d = P[ea] - P[eb]
    return math.fsum(em * np.hypot(d[:, 0], d[:, 1]))


def _length_change(P, D, ea, eb, em):
    # Length change for the move P -> P + D.  |a| - |b| = (a - b).(a + b) / (|a| + |b|)
    # with a - b taken from D directly has no cancellation, so tiny decreases
    # stay visible long after L itself stops resolving them.
    d0 = P[ea] - P[eb]
    step = D[ea] - D[eb]
    d1 = d0 + step
    n0 = np.hypot(d0[:, 0], d0[:, 1])
    n1 = np.hypot(d1[:, 0], d1[:, 1])
    den = n0 + n1
    num = np.sum(step * (d1 + d0), axis=1)
    terms = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return math.fsum(em * terms)


def _gradient(P, ea, eb, em, free_mask):
    d = P[ea] - P[eb]
    n = np.hypot(d[:, 0], d[:, 1])
    u = np.zeros_like(d)
    ok = n > 0
    # Zero-length edges contribute nothing (subgradient choice).
    u[ok] = d[ok] / n[ok, None]
    u *= em[:, None]
    G = np.zeros_like(P)
    np.add.at(G, ea, u)
    np.add.at(G, eb, -u)
    G[~free_mask] = 0
    return G


def relax(problem: RelaxProblem) -> RelaxTrace:
    """Minimise total length; returns the trace with per-iteration lengths and merge events."""
    ids = list(problem.ids)
    index = {v: i for i, v in enumerate(ids)}
    P = np.array([problem.pinned.get(v, problem.initial.get(v)) for v in ids], dtype=float)
    pinned = np.array([v in problem.pinned for v in ids])
    alive = np.ones(len(ids), dtype=bool)
    alias = {}
    edges = {}
    for a, b, m in problem.edges:
        key = tuple(sorted((index[a], index[b])))
        edges[key] = edges.get(key, 0) + m
    thresh = problem.merge_threshold if problem.merge_threshold is not None else 1e-9 * problem.diameter()

    def arrays():
        ks = list(edges)
        return (np.array([k[0] for k in ks], dtype=int), np.array([k[1] for k in ks], dtype=int),
                np.array([edges[k] for k in ks], dtype=float))

    ea, eb, em = arrays()
    free = ~pinned & alive
    L = _length(P, ea, eb, em)
    lengths = [L]
    events = []
    step = 1.0 * problem.diameter()
    gnorm = float("inf")
    converged = False
    it = 0
    for it in range(1, problem.max_iter + 1):
        free = ~pinned & alive
        if not free.any():
            converged, gnorm = True, 0.0
            break
        G = _gradient(P, ea, eb, em, free)
        gnorm = float(np.max(np.hypot(G[:, 0], G[:, 1])))
        if gnorm < problem.tolerance:
            converged = True
            break
        g2 = float(np.sum(G * G))
        t = min(step * 2, problem.diameter())
        accepted = False
        while t > 1e-300:
            Pn = P - t * G
            dL = _length_change(P, -t * G, ea, eb, em)
            # c = 1/2 keeps accepted steps below 1/curvature, so no zig-zag near the optimum.
            if dL <= -0.5 * t * g2:
                accepted = True
                break
            t /= 2
        if not accepted:
            # No descent along the subgradient: treat as stationary.
            converged = True
            break
        Ln = L + dL
        P, L, step = Pn, Ln, t
        # Contract short edges.
        merged = False
        for (i, j) in list(edges):
            if (i, j) not in edges:
                continue
            if np.hypot(*(P[i] - P[j])) >= thresh:
                continue
            if pinned[i] and pinned[j]:
                continue
            keep, drop = (i, j) if (pinned[i] or (not pinned[j] and i < j)) else (j, i)
            events.append({"type": "edge-shrink", "iteration": it, "edge": [ids[i], ids[j]]})
            events.append({"type": "vertex-merge", "iteration": it, "into": ids[keep], "from": ids[drop]})
            if not pinned[keep]:
                P[keep] = (P[keep] + P[drop]) / 2
            alive[drop] = False
            alias[ids[drop]] = ids[keep]
            for (a, b) in list(edges):
                if drop in (a, b):
                    m = edges.pop((a, b))
                    other = b if a == drop else a
                    if other == keep:
                        continue
                    key = tuple(sorted((keep, other)))
                    edges[key] = edges.get(key, 0) + m
            merged = True
        if merged:
            ea, eb, em = arrays() if edges else (np.zeros(0, int), np.zeros(0, int), np.zeros(0))
            L = _length(P, ea, eb, em) if edges else 0.0
            # Contraction moves a vertex by < threshold; never let the log go up.
            L = min(L, lengths[-1])
        lengths.append(L)
    for k, v in list(alias.items()):
        while v in alias:
            v = alias[v]
        alias[k] = v
    positions = {ids[i]: (float(P[i, 0]), float(P[i, 1])) for i in range(len(ids)) if alive[i]}
    out_edges = [(ids[a], ids[b], int(m)) for (a, b), m in edges.items()]
    return RelaxTrace(converged, it, lengths, events, positions, out_edges,
                      {ids[i] for i in range(len(ids)) if pinned[i] and alive[i]}, gnorm, alias)


# ---------------------------------------------------------------------------
# JSON shapes: a problem is a net file (interior positions are starting
# points) plus optional solver settings; a trace embeds the final net.


def problem_from_json(data: dict) -> RelaxProblem:
    net = from_json(data)
    kw = {}
    if "max_iter" in data:
        kw["max_iter"] = int(data["max_iter"])
    if "tolerance" in data:
        kw["tolerance"] = float(data["tolerance"])
    if data.get("merge_threshold") is not None:
        kw["merge_threshold"] = float(data["merge_threshold"])
    return RelaxProblem.from_net(net, **kw)


def trace_to_json(trace: RelaxTrace) -> dict:
    return {
        "converged": trace.converged,
        "iterations": trace.iterations,
        "grad_norm": repr(trace.grad_norm),
        "monotone": trace.monotone,
        "lengths": [repr(x) for x in trace.lengths],
        "events": trace.events,
        "aliases": trace.aliases,
        "net": to_json(trace.net()),
    }


def load_problem(path) -> RelaxProblem:
    with open(path, encoding="utf-8") as fh:
        return problem_from_json(json.load(fh))
