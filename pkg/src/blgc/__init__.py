"""Bounded local generators on graph-indexed state.

Deterministic evolution of per-node state vectors in the unit ball by
radius-limited, projected, Lipschitz local updates, with instrumentation
showing that the work of one update does not depend on the graph size.
"""

from .errors import (BLGCError, CapViolation, ConstructionViolatesCap,
                     DimensionMismatch, DuplicateEdge, EmptyGraph,
                     MissingEdge, MonitorViolation, NonFiniteInput,
                     UnknownNode)
from .generators import (LocalFunctional, UpdateParams, apply_generator,
                         estimate_lipschitz, eval_functional, local_increment,
                         make_functional, project)
from .graph_state import (GraphSpec, GraphState, build_graph, init_state,
                          load_snapshot, mutate_edge, neighborhood,
                          read_snapshot, save_snapshot, write_snapshot)
from .hilbert import (BoundCertificate, check_delta_bound,
                      check_operator_bound, check_update_identity,
                      global_l2_norm)
from .metrics import StepMetrics, record_step
from .schedule import (NormMonitor, Schedule, Trajectory, evolve,
                       replay_digest, schedule_node, state_digest)
from .sweep import SweepResult, scale_sweep

__version__ = "0.1.0"
