"""Deterministic schedules and the evolution loop.

Step ``t`` applies the generator of node ``schedule_node(sched, t, M)``::

    S_{t+1} = G_{pi(t)}(S_t)

Schedules never look at the state.  Edge mutations, if any, are applied
between steps from an explicit ``{step: [(op, (u, v)), ...]}`` table.
"""

import hashlib
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

from .errors import EmptyGraph, MonitorViolation, UnknownNode
from .generators import apply_generator
from .graph_state import NORM_EPS, write_snapshot
from .metrics import MetricsRecorder
from .rng import make_rng

SCHEDULE_KINDS = ("round_robin", "explicit_cycle", "seeded_permutation_sweep",
                  "frontier_bfs")


@dataclass(frozen=True)
class Schedule:
    """A state-independent node order.

    ``nodes`` holds the cycle for ``explicit_cycle`` and the precomputed BFS
    order for ``frontier_bfs``.  ``offset`` shifts time: the schedule
    evaluated at ``t`` is the unshifted one at ``t + offset``.
    """

    kind: str
    nodes: tuple = ()
    seed: int = 0
    start: int = 0
    offset: int = 0

    @classmethod
    def round_robin(cls):
        return cls("round_robin")

    @classmethod
    def explicit_cycle(cls, nodes):
        nodes = tuple(int(v) for v in nodes)
        if not nodes:
            raise EmptyGraph("explicit_cycle needs at least one node")
        return cls("explicit_cycle", nodes=nodes)

    @classmethod
    def seeded_permutation_sweep(cls, seed):
        return cls("seeded_permutation_sweep", seed=int(seed))

    @classmethod
    def frontier_bfs(cls, g, start=0):
        """BFS order of ``g`` from ``start``, fixed now.

        Neighbours are visited in ascending id; unreachable nodes follow in
        ascending id.
        """
        if not 0 <= start < g.num_nodes:
            raise UnknownNode(start)
        seen = [False] * g.num_nodes
        seen[start] = True
        order = [start]
        head = 0
        while head < len(order):
            u = order[head]
            head += 1
            for v in g.adj[u]:
                if not seen[v]:
                    seen[v] = True
                    order.append(v)
        order.extend(v for v in range(g.num_nodes) if not seen[v])
        return cls("frontier_bfs", nodes=tuple(order), start=start)

    def shift(self, steps):
        return replace(self, offset=self.offset + int(steps))


@lru_cache(maxsize=8)
def _sweep_permutation(seed, sweep, m):
    return tuple(make_rng(seed, 0x5CED, sweep).permutation(m).tolist())


def schedule_node(sched, t, M):
    """Node updated at step ``t`` on a graph of ``M`` nodes."""
    if M < 1:
        raise EmptyGraph("cannot schedule on an empty graph")
    if t < 0:
        raise ValueError(f"step index must be >= 0, got {t}")
    t = t + sched.offset
    kind = sched.kind
    if kind == "round_robin":
        return t % M
    if kind == "explicit_cycle" or kind == "frontier_bfs":
        node = sched.nodes[t % len(sched.nodes)]
        if node >= M:
            raise UnknownNode(node)
        return node
    if kind == "seeded_permutation_sweep":
        sweep, pos = divmod(t, M)
        return _sweep_permutation(sched.seed, sweep, M)[pos]
    raise ValueError(f"unknown schedule kind {kind!r}; expected one of "
                     f"{SCHEDULE_KINDS}")


class NormMonitor:
    """Checks that every node state stays in the unit ball.

    All norms are checked once at the start; afterwards only the written
    node can change, so checking it alone keeps the global maximum bounded.
    """

    def __init__(self, tol=NORM_EPS):
        self.limit = 1.0 + tol
        self.max_seen = 0.0

    def start(self, g):
        norms = g.norms()
        worst = int(norms.argmax())
        self.max_seen = float(norms[worst])
        if self.max_seen > self.limit:
            raise MonitorViolation(0, worst,
                                   f"initial norm {self.max_seen!r} > 1")

    def after_step(self, g, t, node, m):
        row = g.states[node]
        n = math.sqrt(float(row @ row))
        if n > self.max_seen:
            self.max_seen = n
            if n > self.limit:
                raise MonitorViolation(t, node, f"norm {n!r} > 1 after update")


@dataclass
class Trajectory:
    initial_digest: str
    schedule: Schedule
    steps: int
    final: object
    metrics: MetricsRecorder = None
    checkpoints: list = field(default_factory=list)


@dataclass(frozen=True)
class ReplayDigest:
    final: str
    checkpoints: tuple = ()

    def __str__(self):
        return self.final


def state_digest(g):
    """SHA-256 hex digest of the canonical snapshot of ``g``."""
    return hashlib.sha256(write_snapshot(g)).hexdigest()


def evolve(g, sched, p, T, monitors=(), *, mutations=None, recorder=None,
           instrument=True, checkpoint_every=0, copy=True):
    """Run ``T`` generator applications in schedule order.

    ``g`` is left untouched unless ``copy=False``.  Monitors expose
    ``start(g)`` and ``after_step(g, t, node, metrics)`` (and optionally
    ``before_step(g, t, node)``); any of them may raise
    :class:`MonitorViolation`, which aborts the run.  ``recorder`` defaults
    to a :class:`MetricsRecorder` enforcing the read cap of ``g``.
    """
    if T < 0:
        raise ValueError(f"step count must be >= 0, got {T}")
    initial = state_digest(g)
    work = g.copy() if copy else g
    if recorder is None and instrument:
        recorder = MetricsRecorder(cap=work.cap)
    mutations = mutations or {}
    for mon in monitors:
        if hasattr(mon, "start"):
            mon.start(work)
    before = [mon.before_step for mon in monitors
              if hasattr(mon, "before_step")]
    after = [mon.after_step for mon in monitors]
    checkpoints = []
    m_nodes = work.num_nodes
    for t in range(T):
        if t in mutations:
            for op, pair in mutations[t]:
                work.mutate_edge(op, *pair)
        node = schedule_node(sched, t, m_nodes)
        for hook in before:
            hook(work, t, node)
        m = apply_generator(work, node, p, step=t)
        if recorder is not None:
            recorder.add(m)
        for hook in after:
            hook(work, t, node, m)
        if checkpoint_every and (t + 1) % checkpoint_every == 0:
            checkpoints.append(state_digest(work))
    return Trajectory(initial, sched, T, work, recorder, checkpoints)


def replay_digest(traj):
    return ReplayDigest(state_digest(traj.final), tuple(traj.checkpoints))
