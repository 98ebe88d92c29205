"""Graph-indexed bounded state.

A :class:`GraphState` holds an undirected simple graph over dense node ids
``0..M-1``, one ``d``-dimensional state vector per node (rows of an
``(M, d)`` float64 array) and the locality parameters ``r`` (interaction
radius) and ``D`` (cap on the size of every radius-``r`` ball, the node
itself included).

The cap is enforced eagerly: construction fails if any ball is too large,
and an edge insertion that would break it is rejected before anything is
changed.  Neighborhoods are cached per node and invalidated around mutated
edges, so a lookup during evolution is a dict hit.
"""

import struct
from bisect import insort
from dataclasses import dataclass

import numpy as np

from .errors import (CapViolation, ConstructionViolatesCap, DimensionMismatch,
                     DuplicateEdge, InvalidGraphSpec, MissingEdge,
                     NonFiniteInput, NormViolation, SnapshotFormatError,
                     UnknownNode)
from .rng import make_rng

NORM_EPS = 1e-12
TOPOLOGIES = ("ring", "torus2d", "random_regular", "explicit_edge_list")
INIT_KINDS = ("zeros", "uniform_ball", "surface")

SNAPSHOT_MAGIC = b"BLGC1"
_HEADER = struct.Struct("<5sQQQQ")


@dataclass(frozen=True)
class GraphSpec:
    """Recipe for a graph.

    ``num_nodes`` is used by ring, random_regular and explicit_edge_list;
    ``shape`` (rows, cols) by torus2d; ``degree`` by random_regular;
    ``edges`` by explicit_edge_list.
    """

    topology: str
    num_nodes: int = 0
    shape: tuple = ()
    degree: int = 0
    edges: tuple = ()
    seed: int = 0

    @classmethod
    def ring(cls, num_nodes):
        return cls("ring", num_nodes=num_nodes)

    @classmethod
    def torus(cls, rows, cols):
        return cls("torus2d", shape=(rows, cols))

    @classmethod
    def random_regular(cls, num_nodes, degree, seed=0):
        return cls("random_regular", num_nodes=num_nodes, degree=degree,
                   seed=seed)

    @classmethod
    def explicit(cls, num_nodes, edges):
        return cls("explicit_edge_list", num_nodes=num_nodes,
                   edges=tuple(tuple(e) for e in edges))


def _ring_edges(m):
    if m < 2:
        return []
    return [(i, (i + 1) % m) for i in range(m)]


def _torus_edges(rows, cols):
    edges = []
    for a in range(rows):
        for b in range(cols):
            u = a * cols + b
            if cols > 1:
                edges.append((u, a * cols + (b + 1) % cols))
            if rows > 1:
                edges.append((u, ((a + 1) % rows) * cols + b))
    return edges


def _random_regular_edges(m, k, seed, max_tries=1000):
    # Pairing model: shuffle m*k stubs, pair neighbours, reject the whole
    # configuration on a loop or multi-edge.
    if k < 0 or k >= m:
        raise InvalidGraphSpec(f"random_regular needs 0 <= degree < M, got "
                               f"degree={k}, M={m}")
    if (m * k) % 2:
        raise InvalidGraphSpec(f"random_regular needs M*degree even, got "
                               f"M={m}, degree={k}")
    if k == 0:
        return []
    stubs = np.repeat(np.arange(m, dtype=np.int64), k)
    for attempt in range(max_tries):
        rng = make_rng(seed, 0x5E6, attempt)
        perm = rng.permutation(stubs).reshape(-1, 2)
        lo = perm.min(axis=1)
        hi = perm.max(axis=1)
        if np.any(lo == hi):
            continue
        keys = lo * m + hi
        if np.unique(keys).size != keys.size:
            continue
        return list(zip(lo.tolist(), hi.tolist()))
    raise InvalidGraphSpec(
        f"no simple {k}-regular graph on {m} nodes after {max_tries} tries")


def _spec_edges(spec):
    kind = spec.topology
    if kind == "ring":
        if spec.num_nodes < 1:
            raise InvalidGraphSpec("ring needs num_nodes >= 1")
        return spec.num_nodes, _ring_edges(spec.num_nodes)
    if kind == "torus2d":
        if len(spec.shape) != 2 or min(spec.shape) < 1:
            raise InvalidGraphSpec("torus2d needs shape=(rows, cols) >= 1")
        rows, cols = spec.shape
        return rows * cols, _torus_edges(rows, cols)
    if kind == "random_regular":
        if spec.num_nodes < 1:
            raise InvalidGraphSpec("random_regular needs num_nodes >= 1")
        return spec.num_nodes, _random_regular_edges(
            spec.num_nodes, spec.degree, spec.seed)
    if kind == "explicit_edge_list":
        if spec.num_nodes < 1:
            raise InvalidGraphSpec("explicit_edge_list needs num_nodes >= 1")
        seen = set()
        for e in spec.edges:
            if len(e) != 2:
                raise InvalidGraphSpec(f"edge {e!r} is not a pair")
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < spec.num_nodes and 0 <= v < spec.num_nodes):
                raise InvalidGraphSpec(f"edge {e!r} references a node "
                                       f"outside [0, {spec.num_nodes})")
            if u == v:
                raise InvalidGraphSpec(f"self-loop {e!r}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise InvalidGraphSpec(f"duplicate edge {e!r}")
            seen.add(key)
        return spec.num_nodes, list(seen)
    raise InvalidGraphSpec(
        f"unknown topology {kind!r}; expected one of {TOPOLOGIES}")


class GraphState:
    """Dynamic graph plus per-node bounded state.

    ``adj[u]`` is the ascending list of ``u``'s neighbours.  Use
    :func:`build_graph` or :func:`read_snapshot` rather than filling it by
    hand.
    """

    def __init__(self, num_nodes, radius, cap, dim):
        if num_nodes < 1:
            raise InvalidGraphSpec("a graph needs at least one node")
        if radius < 1 or cap < 1 or dim < 1:
            raise InvalidGraphSpec(
                f"need r >= 1, D >= 1, d >= 1; got r={radius}, D={cap}, "
                f"d={dim}")
        self.radius = int(radius)
        self.cap = int(cap)
        self.dim = int(dim)
        self.adj = [[] for _ in range(num_nodes)]
        self.states = np.zeros((num_nodes, self.dim), dtype=np.float64)
        self._nbhd = {}

    @property
    def num_nodes(self):
        return len(self.adj)

    def __len__(self):
        return len(self.adj)

    def nodes(self):
        return range(len(self.adj))

    def edges(self):
        """Edge list as sorted ``(u, v)`` pairs with ``u < v``."""
        out = []
        for u, nbrs in enumerate(self.adj):
            out.extend((u, v) for v in nbrs if u < v)
        out.sort()
        return out

    def has_edge(self, u, v):
        self._check_node(u)
        self._check_node(v)
        return v in self.adj[u]

    def copy(self):
        g = GraphState.__new__(GraphState)
        g.radius, g.cap, g.dim = self.radius, self.cap, self.dim
        g.adj = [list(s) for s in self.adj]
        g.states = self.states.copy()
        g._nbhd = dict(self._nbhd)
        return g

    def __eq__(self, other):
        if not isinstance(other, GraphState):
            return NotImplemented
        return (self.radius == other.radius and self.cap == other.cap
                and self.dim == other.dim and self.adj == other.adj
                and self.states.shape == other.states.shape
                and self.states.tobytes() == other.states.tobytes())

    __hash__ = None

    def __repr__(self):
        return (f"GraphState(M={self.num_nodes}, |E|={len(self.edges())}, "
                f"r={self.radius}, D={self.cap}, d={self.dim})")

    def _check_node(self, i):
        if not (isinstance(i, (int, np.integer)) and 0 <= i < len(self.adj)):
            raise UnknownNode(i)

    def ball(self, i, limit=None):
        """Nodes within distance ``r`` of ``i``, computed by BFS (uncached).

        Stops early once the ball exceeds ``limit`` nodes.
        """
        adj = self.adj
        seen = {i}
        frontier = [i]
        for _ in range(self.radius):
            nxt = []
            for u in frontier:
                for v in adj[u]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            if limit is not None and len(seen) > limit:
                return seen
            if not nxt:
                break
            frontier = nxt
        return seen

    def _within(self, sources, depth):
        seen = set(sources)
        frontier = list(seen)
        for _ in range(depth):
            nxt = []
            for u in frontier:
                for v in self.adj[u]:
                    if v not in seen:
                        seen.add(v)
                        nxt.append(v)
            frontier = nxt
        return seen

    def neighborhood(self, i):
        """Radius-``r`` neighborhood of ``i`` in ascending id order, ``i`` included."""
        try:
            return self._nbhd[i]
        except KeyError:
            pass
        self._check_node(i)
        nb = tuple(sorted(self.ball(i)))
        self._nbhd[i] = nb
        return nb

    def max_neighborhood_size(self):
        if self.radius == 1:
            return 1 + max(len(s) for s in self.adj)
        return max(len(self.ball(i, self.cap)) for i in self.nodes())

    def mutate_edge(self, op, u, v):
        """Add or remove edge ``(u, v)``; all-or-nothing on failure."""
        self._check_node(u)
        self._check_node(v)
        pair = (min(u, v), max(u, v))
        if u == v:
            raise InvalidGraphSpec(f"self-loop {pair}")
        if op == "add":
            if v in self.adj[u]:
                raise DuplicateEdge(f"edge {pair} already present")
            insort(self.adj[u], v)
            insort(self.adj[v], u)
            affected = self._within((u, v), self.radius)
            # only nodes within r-1 of an endpoint can route through the edge
            for w in sorted(self._within((u, v), self.radius - 1)):
                if len(self.ball(w, self.cap)) > self.cap:
                    size = len(self.ball(w))
                    self.adj[u].remove(v)
                    self.adj[v].remove(u)
                    raise CapViolation(w, size, self.cap, pair)
        elif op == "remove":
            if v not in self.adj[u]:
                raise MissingEdge(f"edge {pair} not present")
            affected = self._within((u, v), self.radius)
            self.adj[u].remove(v)
            self.adj[v].remove(u)
        else:
            raise ValueError(f"unknown edge op {op!r}; expected add or remove")
        for w in affected:
            self._nbhd.pop(w, None)
        return self

    def set_state(self, i, vector):
        """Store one node state after checking dimension, finiteness and norm."""
        self._check_node(i)
        self.states[i] = validate_state(vector, self.dim)

    def norms(self):
        return np.sqrt(np.einsum("ij,ij->i", self.states, self.states))


def validate_state(vector, dim):
    x = np.asarray(vector, dtype=np.float64)
    if x.shape != (dim,):
        raise DimensionMismatch(f"state has shape {x.shape}, expected ({dim},)")
    if not np.all(np.isfinite(x)):
        raise NonFiniteInput(f"state {x!r} is not finite")
    n = float(np.linalg.norm(x))
    if n > 1.0 + NORM_EPS:
        raise NormViolation(f"state norm {n!r} exceeds 1")
    return x


def _from_edges(num_nodes, edges, radius, cap, dim):
    g = GraphState(num_nodes, radius, cap, dim)
    for u, v in edges:
        g.adj[u].append(v)
        g.adj[v].append(u)
    for nbrs in g.adj:
        nbrs.sort()
    if radius == 1:
        for i, nbrs in enumerate(g.adj):
            if len(nbrs) + 1 > cap:
                raise ConstructionViolatesCap(i, len(nbrs) + 1, cap)
    else:
        for i in g.nodes():
            size = len(g.ball(i, cap))
            if size > cap:
                # report the exact size, not the early-exit count
                raise ConstructionViolatesCap(i, len(g.ball(i)), cap)
    return g


def build_graph(spec, r, D, d):
    """Construct a zero-initialised :class:`GraphState` from ``spec``.

    Raises :class:`ConstructionViolatesCap` naming the first node (ascending
    id) whose radius-``r`` ball has more than ``D`` nodes.
    """
    m, edges = _spec_edges(spec)
    return _from_edges(m, edges, r, D, d)


def neighborhood(g, i):
    return g.neighborhood(i)


def mutate_edge(g, op, pair):
    return g.mutate_edge(op, *pair)


def init_state(g, kind, seed):
    """Fill every node state in place and return ``g``.

    ``zeros``: the origin.  ``surface``: uniform on the unit sphere
    (normalised Gaussian).  ``uniform_ball``: uniform in the closed ball
    (Gaussian direction, radius ``u**(1/d)``).  Rows are drawn in ascending
    node order from ``make_rng(seed, kind_tag)``.
    """
    m, d = g.states.shape
    if kind == "zeros":
        g.states[:] = 0.0
        return g
    if kind not in INIT_KINDS:
        raise ValueError(f"unknown init kind {kind!r}; expected one of "
                         f"{INIT_KINDS}")
    rng = make_rng(seed, INIT_KINDS.index(kind))
    x = rng.standard_normal((m, d))
    n = np.sqrt(np.einsum("ij,ij->i", x, x))
    n[n == 0.0] = 1.0
    x /= n[:, None]
    if kind == "uniform_ball":
        x *= (rng.random(m) ** (1.0 / d))[:, None]
    g.states[:] = x
    return g


def write_snapshot(g):
    """Serialise ``g`` to the little-endian BLGC1 snapshot byte format."""
    m, d = g.states.shape
    header = _HEADER.pack(SNAPSHOT_MAGIC, m, d, g.radius, g.cap)
    body = g.states.astype("<f8", copy=False).tobytes()
    edges = np.asarray(g.edges(), dtype="<u8").reshape(-1, 2).tobytes()
    return header + body + edges


def read_snapshot(data, check_norms=True):
    """Inverse of :func:`write_snapshot`.

    With ``check_norms=False`` out-of-ball states are loaded as-is so that a
    verifier can report them.
    """
    if len(data) < _HEADER.size:
        raise SnapshotFormatError("snapshot shorter than its header")
    magic, m, d, r, cap = _HEADER.unpack_from(data)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"bad magic {magic!r}")
    n_state = m * d * 8
    rest = len(data) - _HEADER.size - n_state
    if m < 1 or d < 1 or rest < 0 or rest % 16:
        raise SnapshotFormatError(
            f"snapshot size {len(data)} inconsistent with M={m}, d={d}")
    off = _HEADER.size
    states = np.frombuffer(data, dtype="<f8", count=m * d, offset=off)
    pairs = np.frombuffer(data, dtype="<u8", offset=off + n_state)
    pairs = pairs.reshape(-1, 2)
    if pairs.size and pairs.max() >= m:
        raise SnapshotFormatError("edge list references unknown nodes")
    try:
        m_, edges = _spec_edges(GraphSpec.explicit(m, pairs.tolist()))
    except InvalidGraphSpec as exc:
        raise SnapshotFormatError(str(exc)) from exc
    g = _from_edges(m, edges, r, cap, d)
    g.states[:] = states.reshape(m, d).astype(np.float64)
    if not np.all(np.isfinite(g.states)):
        raise SnapshotFormatError("snapshot contains non-finite state")
    if check_norms:
        bad = np.flatnonzero(g.norms() > 1.0 + NORM_EPS)
        if bad.size:
            raise NormViolation(f"node {int(bad[0])} has state norm "
                                f"{float(g.norms()[bad[0]])!r} > 1")
    return g


def save_snapshot(g, path):
    with open(path, "wb") as fh:
        fh.write(write_snapshot(g))


def load_snapshot(path, check_norms=True):
    with open(path, "rb") as fh:
        return read_snapshot(fh.read(), check_norms=check_norms)
