import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from blgc.errors import (CapViolation, ConstructionViolatesCap,
                         DimensionMismatch, DuplicateEdge, InvalidGraphSpec,
                         MissingEdge, NormViolation, SnapshotFormatError,
                         UnknownNode)
from blgc.graph_state import (NORM_EPS, GraphSpec, build_graph, init_state,
                              mutate_edge, neighborhood, read_snapshot,
                              write_snapshot)

from conftest import bfs_oracle, bfs_oracle_all, random_spec


def test_ring_r1_every_neighborhood_has_three_nodes():
    g = build_graph(GraphSpec.ring(10), 1, 3, 2)
    assert all(len(neighborhood(g, i)) == 3 for i in g.nodes())


def test_ring_r2_exceeds_cap():
    with pytest.raises(ConstructionViolatesCap) as exc:
        build_graph(GraphSpec.ring(10), 2, 3, 2)
    assert exc.value.node == 0
    assert exc.value.size == 5


def test_random_regular_cap_matches_bfs_count():
    g = build_graph(GraphSpec.random_regular(100, 3, seed=4), 2, 10**6, 2)
    sizes = [len(b) for b in bfs_oracle_all(g)]
    # 2-ball of a 3-regular graph has at most 1 + 3 + 6 = 10 nodes
    assert max(sizes) <= 10
    build_graph(GraphSpec.random_regular(100, 3, seed=4), 2, 10, 2)
    tight = max(sizes)
    with pytest.raises(ConstructionViolatesCap):
        build_graph(GraphSpec.random_regular(100, 3, seed=4), 2, tight - 1, 2)


def test_random_regular_is_regular_and_seeded():
    a = build_graph(GraphSpec.random_regular(50, 4, seed=9), 1, 5, 1)
    b = build_graph(GraphSpec.random_regular(50, 4, seed=9), 1, 5, 1)
    c = build_graph(GraphSpec.random_regular(50, 4, seed=10), 1, 5, 1)
    assert all(len(n) == 4 for n in a.adj)
    assert a.edges() == b.edges()
    assert a.edges() != c.edges()


def test_neighborhood_examples():
    g = build_graph(GraphSpec.ring(10), 1, 3, 2)
    assert neighborhood(g, 0) == (0, 1, 9)
    iso = build_graph(GraphSpec.explicit(3, []), 4, 1, 2)
    assert neighborhood(iso, 1) == (1,)
    path = build_graph(GraphSpec.explicit(4, [(0, 1), (1, 2), (2, 3)]), 2, 4, 2)
    assert neighborhood(path, 0) == (0, 1, 2)
    with pytest.raises(UnknownNode):
        neighborhood(g, 10)


def test_torus_neighborhood_r1():
    g = build_graph(GraphSpec.torus(4, 5), 1, 5, 1)
    assert neighborhood(g, 0) == (0, 1, 4, 5, 15)


@pytest.mark.parametrize("seed", range(12))
def test_neighborhood_matches_networkx_bfs(seed):
    rng = np.random.default_rng(seed)
    spec = random_spec(rng, 1000)
    r = int(rng.integers(1, 4))
    g = build_graph(spec, r, 10**6, 1)
    assert [list(neighborhood(g, i)) for i in g.nodes()] == bfs_oracle_all(g)


def test_add_edge_over_cap_is_rejected_atomically():
    g = build_graph(GraphSpec.ring(10), 1, 3, 2)
    init_state(g, "uniform_ball", 5)
    before = g.copy()
    nb_before = [neighborhood(g, i) for i in g.nodes()]
    with pytest.raises(CapViolation) as exc:
        mutate_edge(g, "add", (0, 5))
    assert exc.value.size == 4
    assert g == before
    assert [neighborhood(g, i) for i in g.nodes()] == nb_before


def test_add_edge_within_cap():
    g = build_graph(GraphSpec.ring(10), 1, 4, 2)
    mutate_edge(g, "add", (0, 5))
    assert neighborhood(g, 0) == (0, 1, 5, 9)
    assert neighborhood(g, 5) == (0, 4, 5, 6)


def test_remove_then_readd_restores_graph():
    g = build_graph(GraphSpec.ring(10), 2, 5, 2)
    orig = g.copy()
    nbs = [neighborhood(g, i) for i in g.nodes()]
    mutate_edge(g, "remove", (3, 4))
    assert neighborhood(g, 3) == (1, 2, 3)
    mutate_edge(g, "add", (4, 3))
    assert g == orig
    assert [neighborhood(g, i) for i in g.nodes()] == nbs


def test_mutation_errors():
    g = build_graph(GraphSpec.ring(6), 1, 4, 1)
    with pytest.raises(DuplicateEdge):
        mutate_edge(g, "add", (0, 1))
    with pytest.raises(MissingEdge):
        mutate_edge(g, "remove", (0, 3))
    with pytest.raises(UnknownNode):
        mutate_edge(g, "add", (0, 6))
    with pytest.raises(InvalidGraphSpec):
        mutate_edge(g, "add", (2, 2))


def test_mutations_invalidate_cached_neighborhoods_at_radius():
    g = build_graph(GraphSpec.explicit(6, [(i, i + 1) for i in range(5)]), 2,
                    6, 1)
    for i in g.nodes():
        neighborhood(g, i)
    mutate_edge(g, "add", (0, 5))
    for i in g.nodes():
        assert list(neighborhood(g, i)) == bfs_oracle(g, i)
    mutate_edge(g, "remove", (2, 3))
    for i in g.nodes():
        assert list(neighborhood(g, i)) == bfs_oracle(g, i)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32), st.lists(
    st.tuples(st.booleans(), st.integers(0, 19), st.integers(0, 19)),
    max_size=40))
def test_cap_invariant_survives_any_mutation_sequence(seed, ops):
    rng = np.random.default_rng(seed)
    r = int(rng.integers(1, 3))
    D = int(rng.integers(3, 9))
    g = build_graph(GraphSpec.explicit(20, []), r, D, 1)
    for add, u, v in ops:
        if u == v:
            continue
        before = (g.edges(), [neighborhood(g, i) for i in g.nodes()])
        try:
            mutate_edge(g, "add" if add else "remove", (u, v))
        except (CapViolation, DuplicateEdge, MissingEdge):
            assert (g.edges(), [neighborhood(g, i) for i in g.nodes()]) == before
    for i, ball in enumerate(bfs_oracle_all(g)):
        assert len(ball) <= D
        assert list(neighborhood(g, i)) == ball


def test_init_zeros():
    g = init_state(build_graph(GraphSpec.ring(8), 1, 3, 3), "zeros", 1)
    assert not g.states.any()


def test_init_surface_has_unit_norms():
    g = init_state(build_graph(GraphSpec.ring(500), 1, 3, 5), "surface", 3)
    assert np.all(np.abs(g.norms() - 1.0) <= NORM_EPS)


@pytest.mark.parametrize("kind", ["zeros", "uniform_ball", "surface"])
def test_init_is_seed_deterministic_and_bounded(kind):
    a = init_state(build_graph(GraphSpec.ring(300), 1, 3, 4), kind, 77)
    b = init_state(build_graph(GraphSpec.ring(300), 1, 3, 4), kind, 77)
    assert a.states.tobytes() == b.states.tobytes()
    assert a.norms().max() <= 1.0 + NORM_EPS


def test_uniform_ball_radii_are_uniform_in_volume():
    g = init_state(build_graph(GraphSpec.ring(20000), 1, 3, 3),
                   "uniform_ball", 1)
    # P(|s| <= 1/2) = (1/2)^3 for the uniform ball in R^3
    frac = float(np.mean(g.norms() <= 0.5))
    assert abs(frac - 0.125) < 0.01


def test_set_state_validates():
    g = build_graph(GraphSpec.ring(4), 1, 3, 2)
    g.set_state(1, [0.6, 0.8])
    with pytest.raises(DimensionMismatch):
        g.set_state(1, [0.1, 0.1, 0.1])
    with pytest.raises(NormViolation):
        g.set_state(1, [1.0, 1.0])


def test_snapshot_round_trip_is_bit_exact():
    g = init_state(build_graph(GraphSpec.random_regular(40, 3, 2), 2, 10, 3),
                   "uniform_ball", 8)
    data = write_snapshot(g)
    assert data[:5] == b"BLGC1"
    h = read_snapshot(data)
    assert h == g
    assert write_snapshot(h) == data


def test_snapshot_layout():
    g = build_graph(GraphSpec.explicit(2, [(0, 1)]), 1, 2, 1)
    g.states[:] = [[0.25], [-0.5]]
    data = write_snapshot(g)
    header = b"BLGC1" + b"".join(
        v.to_bytes(8, "little") for v in (2, 1, 1, 2))
    floats = np.array([0.25, -0.5], dtype="<f8").tobytes()
    edges = np.array([0, 1], dtype="<u8").tobytes()
    assert data == header + floats + edges


def test_snapshot_rejects_garbage():
    g = build_graph(GraphSpec.ring(5), 1, 3, 2)
    data = write_snapshot(g)
    with pytest.raises(SnapshotFormatError):
        read_snapshot(b"XXXXX" + data[5:])
    with pytest.raises(SnapshotFormatError):
        read_snapshot(data[:-3])


def test_snapshot_norm_check_is_optional():
    g = build_graph(GraphSpec.ring(5), 1, 3, 2)
    g.states[2] = [1.5, 0.0]
    data = write_snapshot(g)
    with pytest.raises(NormViolation):
        read_snapshot(data)
    assert read_snapshot(data, check_norms=False).states[2, 0] == 1.5
