import math
from fractions import Fraction

import numpy as np
import pytest

from blgc.errors import MonitorViolation, UnknownNode
from blgc.generators import (FUNCTIONAL_KINDS, UpdateParams, apply_generator,
                             make_functional)
from blgc.graph_state import GraphSpec, build_graph, init_state
from blgc.hilbert import (NormTracker, certify, check_delta_bound,
                          check_operator_bound, check_update_identity,
                          global_l2_norm, measure_c0, operator_lipschitz,
                          zero_offset)
from blgc.schedule import Schedule, evolve

from conftest import random_params


def test_global_norm_examples():
    g = build_graph(GraphSpec.ring(7), 1, 3, 3)
    assert global_l2_norm(g) == 0.0
    init_state(g, "surface", 1)
    assert global_l2_norm(g) == pytest.approx(math.sqrt(7), rel=1e-15)
    two = build_graph(GraphSpec.explicit(2, []), 1, 1, 2)
    two.states[:] = [[0.6, 0.0], [0.0, 0.8]]
    assert global_l2_norm(two) == pytest.approx(1.0, rel=1e-15)


def test_global_norm_relative_error_at_a_million_nodes():
    g = init_state(build_graph(GraphSpec.explicit(10**6, []), 1, 1, 2),
                   "uniform_ball", 3)
    got = global_l2_norm(g)
    # exact reference: sum of squares in rational arithmetic on a subsample
    # would not cover all terms, so compare with a long-double free route:
    # pairwise numpy sum and the squared-row view must agree to 1e-12
    ref = math.sqrt(float(np.sum(np.square(g.states), dtype=np.float64)))
    assert abs(got - ref) / ref <= 1e-12


def test_global_norm_exact_on_small_state():
    g = init_state(build_graph(GraphSpec.ring(50), 1, 3, 3), "uniform_ball", 8)
    exact = sum(Fraction(v) ** 2 for v in g.states.ravel().tolist())
    assert global_l2_norm(g) ** 2 == pytest.approx(float(exact), rel=1e-15)


def test_identity_with_zero_functional():
    g = init_state(build_graph(GraphSpec.ring(10), 1, 3, 2), "uniform_ball", 2)
    p = UpdateParams(0.4, make_functional("zero", 2))
    c = check_update_identity(g, 4, p)
    assert c.pre_norm == c.post_norm
    assert c.residual <= 1e-15


def test_identity_single_node():
    g = build_graph(GraphSpec.explicit(1, []), 1, 1, 3)
    g.states[0] = [0.9, 0.1, -0.2]
    p = UpdateParams(2.0, make_functional("saturated_mix", 3, bias=0.7))
    c = check_update_identity(g, 0, p)
    apply_generator(g, 0, p)
    assert c.post_norm == pytest.approx(np.linalg.norm(g.states[0]), rel=1e-15)
    assert c.residual <= 1e-15


def test_identity_random_ring_saturated_mix():
    rng = np.random.default_rng(0)
    g = build_graph(GraphSpec.ring(50), 1, 3, 4)
    p = UpdateParams(0.8, make_functional("saturated_mix", 4, w_mean=1.2,
                                          w_self=-0.3, bias=0.1))
    for trial in range(200):
        init_state(g, "uniform_ball", trial)
        c = check_update_identity(g, int(rng.integers(50)), p)
        assert c.residual <= 1e-10


def test_certify_restores_state():
    g = init_state(build_graph(GraphSpec.ring(10), 1, 3, 2), "surface", 2)
    before = g.copy()
    certify(g, 3, UpdateParams(0.9, make_functional("curved_rotation", 2)))
    assert g == before


def test_operator_bound_zero_functional():
    g = init_state(build_graph(GraphSpec.ring(10), 1, 3, 2), "uniform_ball", 5)
    p = UpdateParams(0.4, make_functional("zero", 2))
    C0 = measure_c0(g, p)
    assert C0 == 0.0
    c = check_operator_bound(g, 1, p, operator_lipschitz(p), C0)
    assert c.post_norm == c.pre_norm
    assert c.slack >= 0.0


def test_operator_bound_at_zero_state():
    g = build_graph(GraphSpec.ring(10), 1, 3, 2)
    p = UpdateParams(0.9, make_functional("saturated_mix", 2, bias=0.5))
    C0 = measure_c0(g, p)
    assert C0 == pytest.approx(0.9 * math.tanh(0.5) * math.sqrt(2), rel=1e-15)
    c = check_operator_bound(g, 0, p, operator_lipschitz(p), C0)
    assert c.pre_norm == 0.0
    assert c.post_norm <= C0 + 1e-15
    assert c.slack >= -1e-15


def test_zero_offset_per_kind():
    for kind in ("zero", "neighbor_average", "curved_rotation"):
        p = UpdateParams(1.0, make_functional(kind, 3))
        assert zero_offset(p, 4) == 0.0


def test_operator_lipschitz_is_analytic():
    p = UpdateParams(0.5, make_functional("neighbor_average", 2, scale=1.5))
    assert operator_lipschitz(p) == 1.0 + 0.5 * 1.5


@pytest.mark.parametrize("kind", FUNCTIONAL_KINDS)
def test_operator_bound_monte_carlo(kind):
    rng = np.random.default_rng(42)
    g = build_graph(GraphSpec.ring(20), 1, 3, 3)
    worst = np.inf
    for trial in range(500):
        init_state(g, "uniform_ball", trial)
        g.states *= 10 ** rng.uniform(-4, 0)
        p = random_params(rng, kind, 3)
        c = check_operator_bound(g, int(rng.integers(20)), p,
                                 operator_lipschitz(p), measure_c0(g, p))
        worst = min(worst, c.slack)
    assert worst >= -1e-10


def test_delta_bound_examples():
    g = init_state(build_graph(GraphSpec.ring(6), 1, 3, 2), "uniform_ball", 1)
    assert check_delta_bound(g, 2, UpdateParams(1.0, make_functional("zero", 2))) == 0.0
    tight = build_graph(GraphSpec.explicit(2, [(0, 1)]), 1, 2, 2)
    tight.states[:] = [[1.0, 0.0], [-1.0, 0.0]]
    p = UpdateParams(1.0, make_functional("neighbor_average", 2, scale=2.0))
    assert check_delta_bound(tight, 0, p) == 2.0
    with pytest.raises(UnknownNode):
        check_delta_bound(g, 9, p)


def test_norm_tracker_follows_evolution():
    g = init_state(build_graph(GraphSpec.torus(6, 6), 1, 5, 3), "surface", 1)
    p = UpdateParams(0.7, make_functional("curved_rotation", 3))
    tr = NormTracker(check_every=50)
    traj = evolve(g, Schedule.round_robin(), p, 1000, [tr])
    assert tr.max_drift <= 1e-12
    assert global_l2_norm(traj.final) <= math.sqrt(36)


def test_norm_tracker_detects_out_of_band_write():
    class Sneak:
        def after_step(self, g, t, node, m):
            if t == 10:
                g.states[(node + 3) % g.num_nodes] *= 0.5

    g = init_state(build_graph(GraphSpec.ring(8), 1, 3, 2), "surface", 1)
    p = UpdateParams(0.5, make_functional("zero", 2))
    with pytest.raises(MonitorViolation, match="drifted"):
        evolve(g, Schedule.round_robin(), p, 100,
               [NormTracker(check_every=20), Sneak()])
