"""Local update operators.

A generator for node ``i`` reads the states of its neighborhood, evaluates a
bounded Lipschitz functional ``f`` on them, takes a step of size ``eta`` from
the node's own state and projects the result radially onto the closed unit
ball::

    s_i  <-  proj(s_i + eta * f(block))

``block`` is the full neighborhood in ascending node order with ``s_i`` at
position ``center_pos``.

Canonical arithmetic
--------------------
Kernels work on plain Python floats so that the operation order is fixed
and a separately written reference evolver can reproduce every bit:

* sums over the block run left to right starting from the first row;
* ``mean = sum * (1.0 / n)``;
* vector norms use ``math.hypot``; ``tanh`` is ``math.tanh``;
* projection multiplies by ``scale = 1.0 if |x| <= 1 else 1.0 / |x|``
  unconditionally (``x * 1.0`` is exact).

Each kernel also returns its operation count (the ``flop_proxy``), which is
fixed by the kind, the block size and ``d``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput
from .metrics import StepMetrics
from .rng import make_rng

FUNCTIONAL_KINDS = ("zero", "neighbor_average", "saturated_mix",
                    "curved_rotation")

PARAM_NAMES = {
    "zero": (),
    "neighbor_average": ("scale",),
    "saturated_mix": ("w_mean", "w_self", "bias"),
    "curved_rotation": ("amplitude", "angle"),
}

PARAM_DEFAULTS = {
    "zero": {},
    "neighbor_average": {"scale": 1.0},
    "saturated_mix": {"w_mean": 1.0, "w_self": 0.0, "bias": 0.0},
    "curved_rotation": {"amplitude": 1.0, "angle": 0.5},
}


@dataclass(frozen=True)
class LocalFunctional:
    """Immutable descriptor of a local functional.

    ``lipschitz_L`` is w.r.t. the Euclidean norm of the whole concatenated
    block and ``bound_B`` bounds ``|f|`` on admissible blocks (every row in
    the unit ball).  Both are derived analytically in :func:`make_functional`.
    """

    kind: str
    params: tuple
    dim: int
    lipschitz_L: float
    bound_B: float

    def param(self, name):
        return self.params[PARAM_NAMES[self.kind].index(name)]


def make_functional(kind, dim, **params):
    """Build a :class:`LocalFunctional` with its declared L and B.

    Derivations (block ``x`` of ``n`` rows, centre ``c``, mean ``m``; the map
    ``x -> m`` has operator norm ``1/sqrt(n) <= 1``):

    ``zero``
        f = 0.  L = 0, B = 0.
    ``neighbor_average(scale)``
        f = scale * (m - c).  Linear; per coordinate the coefficient vector is
        ``scale * (1/n - 1, 1/n, ..., 1/n)`` with norm
        ``|scale| * sqrt((n-1)/n) < |scale|``, so L = |scale|.
        |m| <= 1 and |c| <= 1 give B = 2 |scale|.
    ``saturated_mix(w_mean, w_self, bias)``
        f_k = tanh(w_mean m_k + w_self c_k + bias).  tanh is 1-Lipschitz
        componentwise, so L = |w_mean| + |w_self|.  |tanh(u)| <= min(|u|, 1)
        gives B = min(sqrt(d), |w_mean| + |w_self| + |bias| sqrt(d)).
    ``curved_rotation(amplitude, angle)``
        f = amplitude * tanh(|m|) * R m/|m| (0 at m = 0), R a rotation by
        ``angle`` in the first two coordinates.  The radial map
        ``m -> tanh(|m|) m/|m|`` has Lipschitz constant
        ``max(sup tanh', sup tanh(r)/r) = 1`` and R is orthogonal, so
        L = B = |amplitude|.
    """
    if kind not in FUNCTIONAL_KINDS:
        raise ValueError(f"unknown functional kind {kind!r}; expected one of "
                         f"{FUNCTIONAL_KINDS}")
    if dim < 1:
        raise ValueError("dim must be >= 1")
    names = PARAM_NAMES[kind]
    unknown = set(params) - set(names)
    if unknown:
        raise ValueError(f"{kind} takes parameters {names}, got "
                         f"{sorted(unknown)}")
    merged = {**PARAM_DEFAULTS[kind], **params}
    vals = tuple(float(merged[n]) for n in names)
    if not all(math.isfinite(v) for v in vals):
        raise ValueError(f"{kind} parameters must be finite, got {vals}")
    root_d = math.sqrt(dim)
    if kind == "zero":
        L, B = 0.0, 0.0
    elif kind == "neighbor_average":
        (scale,) = vals
        L, B = abs(scale), 2.0 * abs(scale)
    elif kind == "saturated_mix":
        w_mean, w_self, bias = vals
        L = abs(w_mean) + abs(w_self)
        B = min(root_d, L + abs(bias) * root_d)
    else:
        amplitude, _ = vals
        L = B = abs(amplitude)
    return LocalFunctional(kind, vals, int(dim), L, B)


@dataclass(frozen=True)
class UpdateParams:
    eta: float
    functional: LocalFunctional

    def __post_init__(self):
        if not (math.isfinite(self.eta) and self.eta > 0):
            raise ValueError(f"eta must be positive and finite, got "
                             f"{self.eta!r}")


@dataclass(frozen=True)
class Increment:
    """``delta = proj(T) - s_i`` for one node."""

    node: int
    delta: np.ndarray

    @property
    def norm(self):
        return math.hypot(*self.delta.tolist())


# -- kernels ---------------------------------------------------------------

def _block_sum(block):
    acc = list(block[0])
    for row in block[1:]:
        acc = [a + b for a, b in zip(acc, row)]
    return acc


def _block_mean(block, d):
    n = len(block)
    inv = 1.0 / n
    return [a * inv for a in _block_sum(block)], (n - 1) * d + 1 + d


def _k_zero(params, block, pos, d):
    return [0.0] * d, 0


def _k_neighbor_average(params, block, pos, d):
    (scale,) = params
    m, fl = _block_mean(block, d)
    c = block[pos]
    return [scale * (mk - ck) for mk, ck in zip(m, c)], fl + 2 * d


def _k_saturated_mix(params, block, pos, d):
    w_mean, w_self, bias = params
    m, fl = _block_mean(block, d)
    c = block[pos]
    out = [math.tanh(w_mean * mk + w_self * ck + bias)
           for mk, ck in zip(m, c)]
    return out, fl + 5 * d


def _k_curved_rotation(params, block, pos, d):
    amplitude, angle = params
    m, fl = _block_mean(block, d)
    nrm = math.hypot(*m)
    gain = amplitude * math.tanh(nrm) / nrm if nrm > 0.0 else 0.0
    v = [gain * mk for mk in m]
    # hypot: d mul + (d-1) add + sqrt; gain: tanh, mul, div; scale: d mul
    fl += 3 * d + 3
    if d >= 2:
        cs, sn = math.cos(angle), math.sin(angle)
        v0, v1 = v[0], v[1]
        v[0] = cs * v0 - sn * v1
        v[1] = sn * v0 + cs * v1
        fl += 8
    return v, fl


_KERNELS = {
    "zero": _k_zero,
    "neighbor_average": _k_neighbor_average,
    "saturated_mix": _k_saturated_mix,
    "curved_rotation": _k_curved_rotation,
}


def _project(x):
    nrm = math.hypot(*x)
    if not math.isfinite(nrm):
        raise NonFiniteInput(f"non-finite pre-projection vector {x!r}")
    scale = 1.0 if nrm <= 1.0 else 1.0 / nrm
    d = len(x)
    return [v * scale for v in x], 2 * d + 1 + d


def _evaluate(f, block, pos):
    return _KERNELS[f.kind](f.params, block, pos, f.dim)


def _pre_projection(p, block, pos):
    """``T = s_i + eta * f(block)`` and its op count."""
    out, fl = _evaluate(p.functional, block, pos)
    eta = p.eta
    return [ck + eta * ok for ck, ok in zip(block[pos], out)], fl + 2 * len(out)


def _update(p, block, pos):
    t, fl = _pre_projection(p, block, pos)
    new, fp = _project(t)
    return new, fl + fp


def _read_block(g, i):
    nb = g.neighborhood(i)
    return nb, g.states[list(nb)].tolist(), nb.index(i)


# -- public operations -----------------------------------------------------

def project(x):
    """Radial projection of a finite vector onto the closed unit ball."""
    arr = np.asarray(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInput(f"non-finite input {arr!r}")
    return np.array(_project(arr.tolist())[0])


def eval_functional(f, center, neighbors, center_pos=0):
    """Evaluate ``f`` on a neighborhood given as centre plus other rows.

    ``neighbors`` are in ascending node order; ``center_pos`` is where the
    centre sits among them in that order (0 when its id is smallest).
    """
    rows = [np.asarray(v, dtype=np.float64).tolist() for v in neighbors]
    c = np.asarray(center, dtype=np.float64).tolist()
    for v in [c, *rows]:
        if len(v) != f.dim:
            raise DimensionMismatch(f"expected d={f.dim}, got a vector of "
                                    f"length {len(v)}")
    block = rows[:center_pos] + [c] + rows[center_pos:]
    out, _ = _evaluate(f, block, center_pos)
    if not all(math.isfinite(v) for v in out):
        raise NonFiniteInput(f"functional {f.kind} produced {out!r}")
    return np.array(out)


def _check_dim(g, p):
    if p.functional.dim != g.dim:
        raise DimensionMismatch(f"functional built for d={p.functional.dim}, "
                                f"graph has d={g.dim}")


def local_increment(g, i, p):
    """Increment ``proj(s_i + eta f) - s_i`` without touching ``g``."""
    _check_dim(g, p)
    nb, block, pos = _read_block(g, i)
    new, _ = _update(p, block, pos)
    old = block[pos]
    return Increment(i, np.array([a - b for a, b in zip(new, old)]))


def apply_generator(g, i, p, step=0, trace=False):
    """Apply the generator of node ``i`` to ``g`` in place.

    Only row ``i`` of ``g.states`` is written.  Returns the step's
    :class:`StepMetrics`; with ``trace=True`` it also carries the exact read
    and write sets.
    """
    _check_dim(g, p)
    nb, block, pos = _read_block(g, i)
    new, flops = _update(p, block, pos)
    g.states[i] = new
    if trace:
        return StepMetrics(step, i, len(nb), 1, flops, nb, (i,))
    return StepMetrics(step, i, len(nb), 1, flops)


def _sample_ball(rng, count, d):
    x = rng.standard_normal((count, d))
    n = np.linalg.norm(x, axis=1)
    n[n == 0.0] = 1.0
    return x / n[:, None] * (rng.random(count) ** (1.0 / d))[:, None]


def estimate_lipschitz(f, arity, samples, seed=0):
    """Largest observed ``|f(x) - f(y)| / |x - y|`` over admissible pairs.

    Half of the pairs are independent, half are small perturbations of ``x``
    (which probe local slopes).  A result above ``f.lipschitz_L`` means the
    declaration is wrong.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    d = f.dim
    rng = make_rng(seed, 0x11F)
    xs = _sample_ball(rng, samples * arity, d).reshape(samples, arity, d)
    ys = _sample_ball(rng, samples * arity, d).reshape(samples, arity, d)
    near = np.arange(samples) % 2 == 1
    eps = 10.0 ** rng.uniform(-6, -1, size=samples)
    pert = xs + eps[:, None, None] * rng.standard_normal(xs.shape)
    pn = np.maximum(np.linalg.norm(pert, axis=2, keepdims=True), 1.0)
    ys[near] = (pert / pn)[near]
    best = 0.0
    for x, y in zip(xs.tolist(), ys.tolist()):
        dx = math.sqrt(sum((a - b) ** 2 for rx, ry in zip(x, y)
                           for a, b in zip(rx, ry)))
        if dx == 0.0:
            continue
        fx, _ = _evaluate(f, x, 0)
        fy, _ = _evaluate(f, y, 0)
        ratio = math.hypot(*[a - b for a, b in zip(fx, fy)]) / dx
        if ratio > best:
            best = ratio
    return best
