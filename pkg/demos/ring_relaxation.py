"""Relax a ring of unit vectors with the neighbor-average functional.

Every update reads a node and its two neighbours, writes that node only and
projects it back into the unit ball, so norms can never exceed 1.
"""

import numpy as np

from blgc import (GraphSpec, Schedule, UpdateParams, build_graph, evolve,
                  init_state, make_functional)
from blgc.hilbert import global_l2_norm
from blgc.schedule import NormMonitor

g = init_state(build_graph(GraphSpec.ring(64), r=1, D=3, d=2), "surface", 1)
p = UpdateParams(0.5, make_functional("neighbor_average", 2, scale=1.0))
monitor = NormMonitor()

print(f"start: |Psi| = {global_l2_norm(g):.4f}, "
      f"spread = {np.ptp(g.states, axis=0).round(3)}")
for sweeps in (1, 10, 100):
    traj = evolve(g, Schedule.round_robin(), p, 64 * sweeps, [monitor])
    s = traj.final.states
    print(f"after {sweeps:>3} sweeps: |Psi| = {global_l2_norm(traj.final):.4f}, "
          f"max node norm = {traj.final.norms().max():.6f}, "
          f"spread = {np.ptp(s, axis=0).round(3)}")
m = traj.metrics
print(f"per step: {m.mean_reads} reads, {m.mean_flops} flops, "
      f"max monitored norm {monitor.max_seen:.15f}")
