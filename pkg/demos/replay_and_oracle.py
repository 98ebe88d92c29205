"""Runs are reproducible bit for bit and agree with a brute-force oracle.

The oracle keeps states in a dict and recomputes every neighborhood from the
raw edge list; it shares no indexing code with the engine.
"""

from blgc import (GraphSpec, Schedule, UpdateParams, build_graph, evolve,
                  init_state, make_functional)
from blgc.oracle import OracleState, oracle_evolve
from blgc.schedule import replay_digest

g = init_state(build_graph(GraphSpec.random_regular(40, 3, seed=5), 1, 4, 3),
               "uniform_ball", 7)
p = UpdateParams(0.8, make_functional("curved_rotation", 3, amplitude=0.6))
sched = Schedule.seeded_permutation_sweep(11)

a = evolve(g, sched, p, 5000, checkpoint_every=1000)
b = evolve(g, sched, p, 5000, checkpoint_every=1000)
print("replay digests equal:", replay_digest(a) == replay_digest(b))
print("final digest:", replay_digest(a).final)

half = evolve(g, sched, p, 2500).final
rest = evolve(half, sched.shift(2500), p, 2500).final
print("2500 + 2500 split equals 5000 steps:", rest == a.final)

ref = oracle_evolve(OracleState.from_graph(g), sched, p, 200).to_graph()
print("oracle agrees after 200 steps:", ref == evolve(g, sched, p, 200).final)
