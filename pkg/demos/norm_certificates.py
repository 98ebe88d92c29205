"""Certify single updates against the global norm identity and bounds.

A local update changes the global squared norm by exactly
|s_i'|^2 - |s_i|^2; the operator bound |T(x)| <= L_T |x| + C0 and the
increment bound |s_i' - s_i| <= 2 are checked alongside.
"""

from blgc import GraphSpec, UpdateParams, build_graph, init_state, make_functional
from blgc.hilbert import certify, check_delta_bound, measure_c0, operator_lipschitz

g = init_state(build_graph(GraphSpec.torus(8, 8), r=1, D=5, d=4),
               "uniform_ball", 3)
p = UpdateParams(0.9, make_functional("saturated_mix", 4, w_mean=1.2,
                                      w_self=-0.4, bias=0.25))
L, C0 = operator_lipschitz(p), measure_c0(g, p)
print(f"L_T = {L:.3f}, C0 = {C0:.4f}")
for i in (0, 9, 27, 63):
    c = certify(g, i, p, L, C0)
    print(f"node {i:>2}: identity residual {c.residual:.1e}, "
          f"bound slack {c.slack:.4f}, |delta| {check_delta_bound(g, i, p):.4f}")
