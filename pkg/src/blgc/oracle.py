"""Brute-force reference evolver for differential tests.

Deliberately naive: states live in a dict of tuples, edges in a flat list,
neighborhoods are recomputed by breadth-first search over the edge list on
every step, and every functional is written out longhand.  Nothing is
shared with the engine's kernels except the documented arithmetic order
(left-to-right sums in ascending node order, ``mean = sum * (1/n)``,
``math.hypot`` norms, ``math.tanh``), which is what makes bit-for-bit
comparison possible.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteInput, UnknownNode
from .graph_state import GraphSpec, build_graph
from .schedule import schedule_node


@dataclass
class OracleState:
    states: dict
    edges: list
    radius: int
    cap: int
    dim: int

    @classmethod
    def from_graph(cls, g):
        states = {i: tuple(float(v) for v in g.states[i]) for i in g.nodes()}
        return cls(states, list(g.edges()), g.radius, g.cap, g.dim)

    def to_graph(self):
        g = build_graph(GraphSpec.explicit(len(self.states), self.edges),
                        self.radius, self.cap, self.dim)
        for i, s in self.states.items():
            g.states[i] = np.array(s, dtype=np.float64)
        return g


def bfs_ball(edges, i, r):
    """Nodes within ``r`` hops of ``i``, scanning the whole edge list per hop."""
    dist = {i: 0}
    for depth in range(1, r + 1):
        for u, v in edges:
            for a, b in ((u, v), (v, u)):
                if a in dist and dist[a] == depth - 1 and b not in dist:
                    dist[b] = depth
    return sorted(dist)


def _mean(rows):
    d = len(rows[0])
    total = list(rows[0])
    for row in rows[1:]:
        for k in range(d):
            total[k] = total[k] + row[k]
    inv = 1.0 / len(rows)
    return [total[k] * inv for k in range(d)]


def oracle_functional(f, rows, center):
    kind = f.kind
    d = f.dim
    if kind == "zero":
        return [0.0] * d
    m = _mean(rows)
    if kind == "neighbor_average":
        scale = f.params[0]
        return [scale * (m[k] - center[k]) for k in range(d)]
    if kind == "saturated_mix":
        a, b, c = f.params
        return [math.tanh(a * m[k] + b * center[k] + c) for k in range(d)]
    if kind == "curved_rotation":
        amp, theta = f.params
        size = math.hypot(*m)
        if size > 0.0:
            gain = amp * math.tanh(size) / size
        else:
            gain = 0.0
        out = [gain * m[k] for k in range(d)]
        if d >= 2:
            x, y = out[0], out[1]
            out[0] = math.cos(theta) * x - math.sin(theta) * y
            out[1] = math.sin(theta) * x + math.cos(theta) * y
        return out
    raise ValueError(kind)


def oracle_step(s, i, p):
    if i not in s.states:
        raise UnknownNode(i)
    nodes = bfs_ball(s.edges, i, s.radius)
    rows = [s.states[j] for j in nodes]
    center = s.states[i]
    f = oracle_functional(p.functional, rows, center)
    pre = [center[k] + p.eta * f[k] for k in range(s.dim)]
    size = math.hypot(*pre)
    if not math.isfinite(size):
        raise NonFiniteInput(pre)
    if size <= 1.0:
        scale = 1.0
    else:
        scale = 1.0 / size
    s.states[i] = tuple(v * scale for v in pre)


def oracle_evolve(s, sched, p, T, mutations=None):
    """Return a new :class:`OracleState` after ``T`` scheduled updates."""
    out = OracleState(dict(s.states), list(s.edges), s.radius, s.cap, s.dim)
    mutations = mutations or {}
    for t in range(T):
        for op, (u, v) in mutations.get(t, ()):
            key = (min(u, v), max(u, v))
            if op == "add":
                out.edges.append(key)
            else:
                out.edges = [e for e in out.edges
                             if (min(e), max(e)) != key]
        out_node = schedule_node(sched, t, len(out.states))
        oracle_step(out, out_node, p)
    return out
