"""Checks on the l2 embedding of a graph state.

The state is viewed in place as one long vector ``Psi`` of ``M*d``
coordinates (node blocks in ascending order), so ``|Psi|^2`` is the sum of
the squared node norms.  For a single update at node ``i`` with
pre-projection value ``T = s_i + eta f(block)``:

* ``|G_i Psi|^2 = |Psi|^2 - |s_i|^2 + |proj(T)|^2`` (only block ``i`` moves);
* ``|G_i Psi| <= sqrt(|Psi|^2 + (L |Psi| + C0)^2)`` with ``L`` a Lipschitz
  constant of ``Psi -> T`` and ``C0 = |T(0)|``;
* ``|proj(T) - s_i| <= 2``.
"""

import csv
import math
from dataclasses import astuple, dataclass

import numpy as np

from .errors import MonitorViolation
from .generators import _pre_projection, _project, _read_block, apply_generator
from .graph_state import NORM_EPS

CERTIFICATE_COLUMNS = ("node", "pre_norm", "post_norm", "residual", "slack",
                       "L", "C0")
IDENTITY_TOL = 1e-10
BOUND_TOL = 1e-10
DELTA_LIMIT = 2.0 + 1e-12


@dataclass(frozen=True)
class BoundCertificate:
    node: int
    pre_norm: float
    post_norm: float
    residual: float
    slack: float
    L: float
    C0: float

    @property
    def ok(self):
        return self.residual <= IDENTITY_TOL and self.slack >= -BOUND_TOL


def global_l2_norm_sq(g):
    # fsum is exactly rounded, well inside 1e-12 relative at any M
    return math.fsum(np.square(g.states).ravel().tolist())


def global_l2_norm(g):
    """``|Psi| = sqrt(sum_i |s_i|^2)``, accumulated without cancellation loss."""
    return math.sqrt(global_l2_norm_sq(g))


def operator_lipschitz(p):
    """Lipschitz constant of ``Psi -> s_i + eta f(block)``.

    The centre is one row of the block and the block is a sub-vector of
    ``Psi``, so both terms are bounded by ``|Psi|``: ``L = 1 + eta L_f``.
    """
    return 1.0 + p.eta * p.functional.lipschitz_L


def zero_offset(p, arity):
    """``C0 = |T(0)|`` for a neighborhood of ``arity`` all-zero rows."""
    d = p.functional.dim
    t, _ = _pre_projection(p, [[0.0] * d for _ in range(arity)], 0)
    return math.hypot(*t)


def measure_c0(g, p):
    """Largest ``C0`` over the neighborhood sizes present in ``g``."""
    arities = {len(g.neighborhood(i)) for i in g.nodes()}
    return max(zero_offset(p, a) for a in arities)


def _one_update(g, i, p):
    """Pre/post squared norms around an update of ``i``; ``g`` is restored."""
    nb, block, pos = _read_block(g, i)
    t, _ = _pre_projection(p, block, pos)
    proj_t, _ = _project(t)
    pre_sq = global_l2_norm_sq(g)
    saved = g.states[i].copy()
    apply_generator(g, i, p)
    post_sq = global_l2_norm_sq(g)
    g.states[i] = saved
    s_sq = math.fsum(v * v for v in block[pos])
    new_sq = math.fsum(v * v for v in proj_t)
    return pre_sq, post_sq, s_sq, new_sq


def certify(g, i, p, L=None, C0=None):
    """Evaluate the norm identity and the operator bound at node ``i``.

    ``L`` defaults to :func:`operator_lipschitz` and ``C0`` to the value for
    node ``i``'s own neighborhood size.
    """
    if L is None:
        L = operator_lipschitz(p)
    if C0 is None:
        C0 = zero_offset(p, len(g.neighborhood(i)))
    pre_sq, post_sq, s_sq, new_sq = _one_update(g, i, p)
    predicted = pre_sq - s_sq + new_sq
    scale = max(post_sq, predicted, abs(pre_sq))
    residual = abs(post_sq - predicted) / scale if scale > 0.0 else 0.0
    pre = math.sqrt(pre_sq)
    post = math.sqrt(post_sq)
    rhs = math.sqrt(pre_sq + (L * pre + C0) ** 2)
    return BoundCertificate(i, pre, post, residual, rhs - post, L, C0)


def check_update_identity(g, i, p):
    return certify(g, i, p)


def check_operator_bound(g, i, p, L, C0):
    return certify(g, i, p, L, C0)


def check_delta_bound(g, i, p):
    """``|proj(T) - s_i|`` for an update of node ``i`` (``g`` untouched)."""
    nb, block, pos = _read_block(g, i)
    t, _ = _pre_projection(p, block, pos)
    new, _ = _project(t)
    return math.hypot(*[a - b for a, b in zip(new, block[pos])])


def write_certificates(certs, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CERTIFICATE_COLUMNS)
    for c in certs:
        w.writerow([repr(v) if isinstance(v, float) else v
                    for v in astuple(c)])


class NormTracker:
    """Evolution monitor maintaining ``|Psi|^2`` incrementally.

    Each step adds ``|s_i'|^2 - |s_i|^2``; every ``check_every`` steps the
    running value is compared against a full recomputation and a relative
    drift above ``drift_tol`` aborts the run.  The tracker also asserts the
    sup-norm bound (every block <= 1) and ``|Psi| <= sqrt(M)``.
    """

    def __init__(self, check_every=10_000, drift_tol=1e-9):
        self.check_every = check_every
        self.drift_tol = drift_tol
        self.norm_sq = 0.0
        self.max_drift = 0.0
        self._old = 0.0

    def start(self, g):
        self.norm_sq = global_l2_norm_sq(g)
        self.bound_sq = float(g.num_nodes) * (1.0 + NORM_EPS) ** 2

    def before_step(self, g, t, node):
        row = g.states[node]
        self._old = float(row @ row)

    def after_step(self, g, t, node, m):
        row = g.states[node]
        new = float(row @ row)
        if new > (1.0 + NORM_EPS) ** 2:
            raise MonitorViolation(t, node, f"block norm {math.sqrt(new)!r} > 1")
        self.norm_sq += new - self._old
        if self.check_every and (t + 1) % self.check_every == 0:
            exact = global_l2_norm_sq(g)
            drift = abs(self.norm_sq - exact) / max(exact, 1.0)
            self.max_drift = max(self.max_drift, drift)
            if drift > self.drift_tol:
                raise MonitorViolation(
                    t, node, f"|Psi|^2 drifted by {drift!r} (relative)")
            if exact > self.bound_sq:
                raise MonitorViolation(t, node, f"|Psi|^2 = {exact!r} > M")
            self.norm_sq = exact
