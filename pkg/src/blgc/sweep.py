"""Scaling sweep: per-update work versus graph size.

For each size ``M`` the sweep builds a graph of the same local structure,
runs ``T`` round-robin updates in ``batches`` timed chunks and reports the
operation counts alongside wall-clock per step.  Counts are exact; wall time
is median and interquartile range over the batches and is affected by the
memory hierarchy, so it is reported rather than asserted.
"""

import csv
import math
import time
from dataclasses import astuple, dataclass

import numpy as np

from .generators import apply_generator
from .graph_state import GraphSpec, build_graph, init_state
from .metrics import MetricsRecorder
from .schedule import NormMonitor, Schedule, schedule_node

SWEEP_COLUMNS = ("M", "T", "r", "D", "d", "kind", "mean_reads", "max_reads",
                 "mean_flops", "max_flops", "wall_ns_median", "wall_ns_iqr")


@dataclass(frozen=True)
class SweepRow:
    M: int
    T: int
    r: int
    D: int
    d: int
    kind: str
    mean_reads: float
    max_reads: int
    mean_flops: float
    max_flops: int
    wall_ns_median: float
    wall_ns_iqr: float


@dataclass
class SweepResult:
    rows: list

    def column(self, name):
        return [getattr(r, name) for r in self.rows]

    def write_csv(self, fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_COLUMNS)
        for row in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v
                        for v in astuple(row)])


def family_spec(topology, m, degree=3, seed=0):
    """Graph of ``m`` nodes from a family whose local structure is fixed."""
    if topology == "ring":
        return GraphSpec.ring(m)
    if topology == "torus2d":
        side = math.isqrt(m)
        if side * side != m:
            raise ValueError(f"torus2d sweep sizes must be squares, got {m}")
        return GraphSpec.torus(side, side)
    if topology == "random_regular":
        return GraphSpec.random_regular(m, degree, seed)
    raise ValueError(f"no sweep family for topology {topology!r}")


def scale_sweep(topology, sizes, r, D, d, p, T, batches=10, seed=0,
                init="uniform_ball", degree=3):
    """Run the sweep and return one :class:`SweepRow` per size, in order."""
    rows = []
    for m in sizes:
        g = init_state(build_graph(family_spec(topology, m, degree, seed),
                                   r, D, d), init, seed)
        rec = MetricsRecorder(cap=D)
        monitor = NormMonitor()
        monitor.start(g)
        sched = Schedule.round_robin()
        per_step = []
        bounds = np.linspace(0, T, batches + 1).round().astype(int).tolist()
        for lo, hi in zip(bounds[:-1], bounds[1:]):
            if hi == lo:
                continue
            t0 = time.perf_counter_ns()
            for t in range(lo, hi):
                node = schedule_node(sched, t, m)
                step = apply_generator(g, node, p, step=t)
                rec.add(step)
                monitor.after_step(g, t, node, step)
            per_step.append((time.perf_counter_ns() - t0) / (hi - lo))
        q1, med, q3 = (np.percentile(per_step, [25, 50, 75]) if per_step
                       else (0.0, 0.0, 0.0))
        rows.append(SweepRow(m, T, r, D, d, p.functional.kind,
                             rec.mean_reads, rec.max_reads, rec.mean_flops,
                             rec.max_flops, float(med), float(q3 - q1)))
    return SweepResult(rows)
