import numpy as np
import networkx as nx
import pytest

from blgc.generators import FUNCTIONAL_KINDS, UpdateParams, make_functional
from blgc.graph_state import GraphSpec, build_graph, init_state
from blgc.schedule import Schedule


def _nx_graph(g):
    G = nx.Graph()
    G.add_nodes_from(g.nodes())
    G.add_edges_from(g.edges())
    return G


def bfs_oracle(g, i):
    """Radius-r ball of ``i`` via networkx, independent of GraphState.ball."""
    return sorted(nx.single_source_shortest_path_length(_nx_graph(g), i,
                                                        cutoff=g.radius))


def bfs_oracle_all(g):
    G = _nx_graph(g)
    return [sorted(nx.single_source_shortest_path_length(G, i, cutoff=g.radius))
            for i in g.nodes()]


@pytest.fixture
def ring4():
    """Ring M=4, d=2, r=1, all states (1, 0) except s0 = (0, 0)."""
    g = build_graph(GraphSpec.ring(4), 1, 3, 2)
    g.states[:] = [1.0, 0.0]
    g.states[0] = [0.0, 0.0]
    p = UpdateParams(0.5, make_functional("neighbor_average", 2, scale=1.0))
    return g, p


def random_params(rng, kind, d):
    if kind == "neighbor_average":
        kw = {"scale": float(rng.uniform(-2, 2))}
    elif kind == "saturated_mix":
        kw = {"w_mean": float(rng.uniform(-2, 2)),
              "w_self": float(rng.uniform(-1, 1)),
              "bias": float(rng.uniform(-1, 1))}
    elif kind == "curved_rotation":
        kw = {"amplitude": float(rng.uniform(0.1, 2)),
              "angle": float(rng.uniform(-np.pi, np.pi))}
    else:
        kw = {}
    return UpdateParams(float(rng.uniform(0.05, 2.0)),
                        make_functional(kind, d, **kw))


def random_spec(rng, max_nodes):
    topo = rng.choice(["ring", "torus2d", "random_regular", "path"])
    if topo == "ring":
        return GraphSpec.ring(int(rng.integers(3, max_nodes + 1)))
    if topo == "torus2d":
        side = int(rng.integers(3, max(4, int(max_nodes ** 0.5)) + 1))
        return GraphSpec.torus(side, side)
    if topo == "random_regular":
        m = int(rng.integers(6, max_nodes + 1)) // 2 * 2
        return GraphSpec.random_regular(m, int(rng.integers(2, 5)),
                                        int(rng.integers(1 << 30)))
    m = int(rng.integers(2, max_nodes + 1))
    return GraphSpec.explicit(m, [(i, i + 1) for i in range(m - 1)])


def random_instance(seed, max_nodes=100, max_steps=50, kind=None):
    """A random (graph, schedule, params, T) with a tight cap D."""
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, max_nodes)
    r = int(rng.integers(1, 3))
    d = int(rng.integers(1, 7))
    loose = build_graph(spec, r, 10**6, d)
    D = loose.max_neighborhood_size()
    g = build_graph(spec, r, D, d)
    init_state(g, str(rng.choice(["zeros", "uniform_ball", "surface"])),
               int(rng.integers(1 << 62)))
    kind = kind or str(rng.choice(FUNCTIONAL_KINDS))
    p = random_params(rng, kind, d)
    skind = rng.choice(["round_robin", "explicit_cycle",
                        "seeded_permutation_sweep", "frontier_bfs"])
    if skind == "round_robin":
        sched = Schedule.round_robin()
    elif skind == "explicit_cycle":
        sched = Schedule.explicit_cycle(
            rng.integers(0, g.num_nodes, size=int(rng.integers(1, 8))))
    elif skind == "seeded_permutation_sweep":
        sched = Schedule.seeded_permutation_sweep(int(rng.integers(1 << 62)))
    else:
        sched = Schedule.frontier_bfs(g, int(rng.integers(g.num_nodes)))
    T = int(rng.integers(0, max_steps + 1))
    return g, sched, p, T


# -- acceptance summary ---------------------------------------------------

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_criterion_"):
        num = int(name.split("_")[2])
        prev = _CRITERIA.get(num, True)
        _CRITERIA[num] = prev and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        status = "PASS" if _CRITERIA[num] else "FAIL"
        terminalreporter.write_line(f"criterion {num:2d}: {status}")
