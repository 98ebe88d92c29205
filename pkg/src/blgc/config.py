"""Run configuration: one TOML file describes an entire experiment.

Minimal example (everything else takes the defaults below)::

    [graph]
    topology = "ring"
    nodes = 10

    [functional]
    kind = "zero"

Tables and keys, with defaults:

``[graph]``      topology, nodes, shape = [rows, cols], degree = 3,
                 edges = [[u, v], ...], seed = 0
``[model]``      r = 1, D = 3, d = 2, eta = 0.5
``[functional]`` kind, plus that kind's named parameters
``[schedule]``   kind = "round_robin"; nodes (explicit_cycle),
                 seed (seeded_permutation_sweep), start (frontier_bfs)
``[run]``        steps = 1000, init = "uniform_ball", seed = 0
``[[mutations]]`` step, op = "add" | "remove", edge = [u, v]
``[monitors]``   norm = true, l2 = true, l2_check_every = 10000
``[output]``     dir = ".", stride = 1
``[sweep]``      topology = "ring", sizes = [1000, 10000, 100000],
                 steps = 100000, batches = 10
``[verify]``     snapshot = "" (empty: verify the configured run's final
                 state), max_nodes = 1000
"""

import math
from dataclasses import dataclass, field

import tomli

from .errors import BLGCError
from .generators import (FUNCTIONAL_KINDS, PARAM_DEFAULTS, PARAM_NAMES,
                         UpdateParams, make_functional)
from .graph_state import INIT_KINDS, TOPOLOGIES, GraphSpec, build_graph, init_state
from .schedule import SCHEDULE_KINDS, Schedule

DEFAULTS = {
    "graph": {"topology": None, "nodes": 0, "shape": [], "degree": 3,
              "edges": [], "seed": 0},
    "model": {"r": 1, "D": 3, "d": 2, "eta": 0.5},
    "schedule": {"kind": "round_robin", "nodes": [], "seed": 0, "start": 0},
    "run": {"steps": 1000, "init": "uniform_ball", "seed": 0},
    "monitors": {"norm": True, "l2": True, "l2_check_every": 10_000},
    "output": {"dir": ".", "stride": 1},
    "sweep": {"topology": "ring", "sizes": [1000, 10_000, 100_000],
              "steps": 100_000, "batches": 10},
    "verify": {"snapshot": "", "max_nodes": 1000},
}
MUTATION_KEYS = ("step", "op", "edge")


class ConfigParseError(BLGCError):
    def __init__(self, message, line=None):
        where = f"line {line}: " if line else ""
        super().__init__(f"{where}{message}")
        self.line = line


class ConfigValidationError(BLGCError):
    """Every constraint violation found, as ``(key_path, message)`` pairs."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{k}: {m}" for k, m in self.problems))


@dataclass
class RunConfig:
    graph: GraphSpec
    r: int
    D: int
    d: int
    eta: float
    functional_kind: str
    functional_params: dict
    schedule_kind: str
    schedule_params: dict
    steps: int
    init: str
    seed: int
    mutations: dict = field(default_factory=dict)
    monitors: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    verify: dict = field(default_factory=dict)

    def update_params(self):
        return UpdateParams(self.eta, make_functional(
            self.functional_kind, self.d, **self.functional_params))

    def build_state(self):
        g = build_graph(self.graph, self.r, self.D, self.d)
        return init_state(g, self.init, self.seed)

    def make_schedule(self, g):
        kind = self.schedule_kind
        sp = self.schedule_params
        if kind == "round_robin":
            return Schedule.round_robin()
        if kind == "explicit_cycle":
            return Schedule.explicit_cycle(sp["nodes"])
        if kind == "seeded_permutation_sweep":
            return Schedule.seeded_permutation_sweep(sp["seed"])
        return Schedule.frontier_bfs(g, sp["start"])


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v):
    return (isinstance(v, (int, float)) and not isinstance(v, bool)
            and math.isfinite(v))


class _Checker:
    def __init__(self):
        self.problems = []

    def fail(self, key, msg):
        self.problems.append((key, msg))

    def int_at_least(self, key, v, low):
        if not _is_int(v):
            self.fail(key, f"expected an integer, got {v!r}")
            return False
        if v < low:
            self.fail(key, f"must be >= {low}, got {v}")
            return False
        return True

    def choice(self, key, v, options):
        if v not in options:
            self.fail(key, f"unknown value {v!r}; permitted: "
                           f"{', '.join(options)}")
            return False
        return True


def _merge(doc, table, chk):
    raw = doc.get(table, {})
    if not isinstance(raw, dict):
        chk.fail(table, "expected a table")
        raw = {}
    for key in raw:
        if key not in DEFAULTS[table]:
            chk.fail(f"{table}.{key}", "unknown key")
    return {**DEFAULTS[table], **raw}


def parse_config(text):
    """Parse and validate a TOML run configuration.

    Raises :class:`ConfigParseError` for malformed TOML and
    :class:`ConfigValidationError` listing every violated constraint.
    """
    try:
        doc = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigParseError(str(exc), getattr(exc, "lineno", None)) from exc
    chk = _Checker()
    known = set(DEFAULTS) | {"functional", "mutations"}
    for key in doc:
        if key not in known:
            chk.fail(key, "unknown table")

    gr = _merge(doc, "graph", chk)
    topo = gr["topology"]
    spec = None
    if topo is None:
        chk.fail("graph.topology", "required; permitted: " + ", ".join(TOPOLOGIES))
    elif chk.choice("graph.topology", topo, TOPOLOGIES):
        if not _is_int(gr["seed"]):
            chk.fail("graph.seed", f"expected an integer, got {gr['seed']!r}")
        if topo == "torus2d":
            shape = gr["shape"]
            if (not isinstance(shape, list) or len(shape) != 2
                    or not all(_is_int(v) and v >= 1 for v in shape)):
                chk.fail("graph.shape", "torus2d needs shape = [rows, cols] "
                                        "with positive integers")
            else:
                spec = GraphSpec.torus(*shape)
        elif chk.int_at_least("graph.nodes", gr["nodes"], 1):
            if topo == "ring":
                spec = GraphSpec.ring(gr["nodes"])
            elif topo == "random_regular":
                if chk.int_at_least("graph.degree", gr["degree"], 0):
                    spec = GraphSpec.random_regular(gr["nodes"], gr["degree"],
                                                    gr["seed"])
            else:
                edges = gr["edges"]
                if not (isinstance(edges, list) and all(
                        isinstance(e, list) and len(e) == 2
                        and all(_is_int(v) for v in e) for e in edges)):
                    chk.fail("graph.edges", "expected a list of [u, v] "
                                            "integer pairs")
                else:
                    spec = GraphSpec.explicit(gr["nodes"], edges)

    model = _merge(doc, "model", chk)
    chk.int_at_least("model.r", model["r"], 1)
    chk.int_at_least("model.D", model["D"], 1)
    chk.int_at_least("model.d", model["d"], 1)
    eta = model["eta"]
    if not _is_num(eta) or eta <= 0:
        chk.fail("model.eta", f"must be a finite number > 0, got {eta!r}")

    fn = doc.get("functional")
    fkind, fparams = None, {}
    if not isinstance(fn, dict) or "kind" not in fn:
        chk.fail("functional.kind", "required; permitted: "
                                    + ", ".join(FUNCTIONAL_KINDS))
    elif chk.choice("functional.kind", fn["kind"], FUNCTIONAL_KINDS):
        fkind = fn["kind"]
        for key, val in fn.items():
            if key == "kind":
                continue
            if key not in PARAM_NAMES[fkind]:
                chk.fail(f"functional.{key}", f"not a parameter of {fkind}; "
                         f"expected {', '.join(PARAM_NAMES[fkind]) or 'none'}")
            elif not _is_num(val):
                chk.fail(f"functional.{key}", f"expected a finite number, "
                                              f"got {val!r}")
            else:
                fparams[key] = float(val)

    sc = _merge(doc, "schedule", chk)
    if chk.choice("schedule.kind", sc["kind"], SCHEDULE_KINDS):
        if sc["kind"] == "explicit_cycle":
            nodes = sc["nodes"]
            if not (isinstance(nodes, list) and nodes
                    and all(_is_int(v) and v >= 0 for v in nodes)):
                chk.fail("schedule.nodes", "explicit_cycle needs a non-empty "
                                           "list of node ids")
        if not _is_int(sc["seed"]):
            chk.fail("schedule.seed", f"expected an integer, got {sc['seed']!r}")
        chk.int_at_least("schedule.start", sc["start"], 0)

    run = _merge(doc, "run", chk)
    chk.int_at_least("run.steps", run["steps"], 0)
    chk.choice("run.init", run["init"], INIT_KINDS)
    if not _is_int(run["seed"]):
        chk.fail("run.seed", f"expected an integer, got {run['seed']!r}")

    mutations = {}
    raw_mut = doc.get("mutations", [])
    if not isinstance(raw_mut, list):
        chk.fail("mutations", "expected an array of tables [[mutations]]")
        raw_mut = []
    for n, mu in enumerate(raw_mut):
        key = f"mutations[{n}]"
        if not isinstance(mu, dict):
            chk.fail(key, "expected a table")
            continue
        for k in mu:
            if k not in MUTATION_KEYS:
                chk.fail(f"{key}.{k}", "unknown key")
        ok = chk.int_at_least(f"{key}.step", mu.get("step"), 0)
        ok &= chk.choice(f"{key}.op", mu.get("op"), ("add", "remove"))
        edge = mu.get("edge")
        if not (isinstance(edge, list) and len(edge) == 2
                and all(_is_int(v) and v >= 0 for v in edge)):
            chk.fail(f"{key}.edge", "expected [u, v] with node ids")
            ok = False
        if ok:
            mutations.setdefault(mu["step"], []).append(
                (mu["op"], tuple(edge)))

    monitors = _merge(doc, "monitors", chk)
    for k in ("norm", "l2"):
        if not isinstance(monitors[k], bool):
            chk.fail(f"monitors.{k}", "expected true or false")
    chk.int_at_least("monitors.l2_check_every", monitors["l2_check_every"], 0)

    output = _merge(doc, "output", chk)
    if not isinstance(output["dir"], str):
        chk.fail("output.dir", "expected a path string")
    chk.int_at_least("output.stride", output["stride"], 1)

    sweep = _merge(doc, "sweep", chk)
    chk.choice("sweep.topology", sweep["topology"],
               ("ring", "torus2d", "random_regular"))
    sizes = sweep["sizes"]
    if not (isinstance(sizes, list) and sizes
            and all(_is_int(v) and v >= 1 for v in sizes)):
        chk.fail("sweep.sizes", "expected a non-empty list of positive sizes")
    chk.int_at_least("sweep.steps", sweep["steps"], 0)
    chk.int_at_least("sweep.batches", sweep["batches"], 1)

    verify = _merge(doc, "verify", chk)
    if not isinstance(verify["snapshot"], str):
        chk.fail("verify.snapshot", "expected a path string")
    chk.int_at_least("verify.max_nodes", verify["max_nodes"], 1)

    if chk.problems:
        raise ConfigValidationError(chk.problems)
    return RunConfig(
        graph=spec, r=model["r"], D=model["D"], d=model["d"],
        eta=float(eta), functional_kind=fkind,
        functional_params={**PARAM_DEFAULTS[fkind], **fparams},
        schedule_kind=sc["kind"],
        schedule_params={"nodes": sc["nodes"], "seed": sc["seed"],
                         "start": sc["start"]},
        steps=run["steps"], init=run["init"], seed=run["seed"],
        mutations=mutations, monitors=monitors, output=output, sweep=sweep,
        verify=verify)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
