"""Per-update work counters.

Every generator application reports how many node states it read, how many
it wrote and a ``flop_proxy``: the number of scalar multiplies, adds,
divisions, square roots and tanh evaluations executed by the functional and
the projection.  The count is incremented by the kernels themselves and
depends only on the functional kind, the neighborhood size and ``d``; it
never looks at the hardware.
"""

import csv
import math
from dataclasses import dataclass

from .errors import MonitorViolation

# Frozen regression baselines: flop_proxy <= c0 + c1 * n * d for a
# neighborhood of n >= 1 states in dimension d, per functional kind.  Exact
# counts are: zero 5d+1; neighbor_average nd+7d+2; saturated_mix nd+10d+2;
# curved_rotation nd+8d+13 (d >= 2).
FLOP_BASELINES = {
    "zero": (1, 5),
    "neighbor_average": (2, 8),
    "saturated_mix": (2, 11),
    "curved_rotation": (13, 9),
}

METRICS_COLUMNS = ("t", "node", "reads", "writes", "flops", "max_norm")


@dataclass(frozen=True, slots=True)
class StepMetrics:
    step: int
    node: int
    state_reads: int
    state_writes: int
    flop_proxy: int
    read_set: tuple = ()
    write_set: tuple = ()


def record_step(step, node, reads, writes, flops, read_set=(), write_set=()):
    """Package the raw counters of one generator application."""
    return StepMetrics(step, node, reads, writes, flops, tuple(read_set),
                       tuple(write_set))


def flop_bound(kind, n, d):
    c0, c1 = FLOP_BASELINES[kind]
    return c0 + c1 * n * d


class MetricsRecorder:
    """Running aggregate of StepMetrics over one evolution.

    Enforces ``state_reads <= cap`` and ``state_writes == 1`` on every step;
    a breach raises :class:`MonitorViolation` immediately.
    """

    def __init__(self, cap=None, keep=False):
        self.cap = cap
        self.keep = keep
        self.rows = []
        self.steps = 0
        self.total_reads = 0
        self.total_writes = 0
        self.total_flops = 0
        self.max_reads = 0
        self.max_flops = 0

    def add(self, m):
        if self.cap is not None and m.state_reads > self.cap:
            raise MonitorViolation(
                m.step, m.node, f"read {m.state_reads} states > D={self.cap}")
        if m.state_writes != 1:
            raise MonitorViolation(
                m.step, m.node, f"wrote {m.state_writes} states, expected 1")
        self.steps += 1
        self.total_reads += m.state_reads
        self.total_writes += m.state_writes
        self.total_flops += m.flop_proxy
        if m.state_reads > self.max_reads:
            self.max_reads = m.state_reads
        if m.flop_proxy > self.max_flops:
            self.max_flops = m.flop_proxy
        if self.keep:
            self.rows.append(m)

    @property
    def mean_reads(self):
        return self.total_reads / self.steps if self.steps else 0.0

    @property
    def mean_flops(self):
        return self.total_flops / self.steps if self.steps else 0.0


def _fmt(x):
    return repr(float(x)) if isinstance(x, float) else str(x)


class StepCsvWriter:
    """Evolution monitor that streams the per-step metrics CSV.

    Tracks every node norm so the ``max_norm`` column is the true maximum over
    the graph after the step; only the written node's norm is recomputed.
    """

    def __init__(self, fh, stride=1):
        self.stride = max(1, int(stride))
        self.writer = csv.writer(fh, lineterminator="\n")
        self.writer.writerow(METRICS_COLUMNS)
        self.norms = None
        self.totals = [0, 0, 0]
        self.max_norm = 0.0

    def start(self, g):
        self.norms = g.norms()
        self.max_norm = float(self.norms.max())

    def after_step(self, g, t, node, m):
        row = g.states[node]
        self.norms[node] = math.sqrt(float(row @ row))
        self.totals[0] += m.state_reads
        self.totals[1] += m.state_writes
        self.totals[2] += m.flop_proxy
        if t % self.stride == 0:
            mx = float(self.norms.max())
            self.max_norm = max(self.max_norm, mx)
            self.writer.writerow((t, node, m.state_reads, m.state_writes,
                                  m.flop_proxy, _fmt(mx)))

    def close(self):
        self.writer.writerow(("total", "", *self.totals, _fmt(self.max_norm)))
