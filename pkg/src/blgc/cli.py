"""Command-line experiment runner.

    blgc evolve --config run.toml [--out DIR] [--stride K] [--quiet]
    blgc sweep  --config run.toml ...
    blgc verify --config run.toml ...
    blgc replay --config run.toml ...

Exit codes: 0 success, 2 config parse error, 3 config validation error,
4 invariant violation (including a replay digest mismatch), 5 I/O error.
The output directory is ``--out``, else ``$BLGC_OUT_DIR``, else
``[output] dir`` from the config.
"""

import argparse
import csv
import os
import sys

from .config import ConfigParseError, ConfigValidationError, load_config
from .errors import (BLGCError, CapViolation, ConstructionViolatesCap,
                     MonitorViolation, SnapshotFormatError)
from .graph_state import NORM_EPS, load_snapshot, save_snapshot
from .hilbert import (BOUND_TOL, DELTA_LIMIT, IDENTITY_TOL, NormTracker,
                      certify, check_delta_bound, measure_c0,
                      operator_lipschitz, write_certificates)
from .metrics import StepCsvWriter
from .schedule import NormMonitor, evolve, state_digest
from .sweep import scale_sweep

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_INVARIANT = 4
EXIT_IO = 5

SNAPSHOT_FILE = "snapshot.blgc"
METRICS_FILE = "metrics.csv"
DIGEST_FILE = "digest.txt"
SWEEP_FILE = "sweep.csv"
CERT_FILE = "certificates.csv"
VIOLATIONS_FILE = "violations.csv"


class _Invariant(Exception):
    pass


def _monitors(cfg):
    mons = []
    if cfg.monitors["norm"]:
        mons.append(NormMonitor())
    if cfg.monitors["l2"]:
        mons.append(NormTracker(check_every=cfg.monitors["l2_check_every"]))
    return mons


def _run_config(cfg, extra_monitors=()):
    g = cfg.build_state()
    sched = cfg.make_schedule(g)
    return evolve(g, sched, cfg.update_params(), cfg.steps,
                  [*_monitors(cfg), *extra_monitors], mutations=cfg.mutations,
                  copy=False)


def cmd_evolve(cfg, out, stride, say):
    with open(os.path.join(out, METRICS_FILE), "w", newline="") as fh:
        writer = StepCsvWriter(fh, stride)
        traj = _run_config(cfg, [writer])
        writer.close()
    save_snapshot(traj.final, os.path.join(out, SNAPSHOT_FILE))
    digest = state_digest(traj.final)
    with open(os.path.join(out, DIGEST_FILE), "w") as fh:
        fh.write(digest + "\n")
    say(f"evolved {traj.steps} steps; digest {digest}")
    return EXIT_OK


def cmd_replay(cfg, out, stride, say):
    with open(os.path.join(out, DIGEST_FILE)) as fh:
        expected = fh.read().strip()
    got = state_digest(_run_config(cfg).final)
    if got != expected:
        raise _Invariant(f"replay digest {got} != recorded {expected}")
    say(f"replay matches digest {got}")
    return EXIT_OK


def cmd_sweep(cfg, out, stride, say):
    sw = cfg.sweep
    res = scale_sweep(sw["topology"], sw["sizes"], cfg.r, cfg.D, cfg.d,
                      cfg.update_params(), sw["steps"], batches=sw["batches"],
                      seed=cfg.seed, init=cfg.init)
    with open(os.path.join(out, SWEEP_FILE), "w", newline="") as fh:
        res.write_csv(fh)
    for row in res.rows:
        say(f"M={row.M}: mean_reads={row.mean_reads} "
            f"mean_flops={row.mean_flops} wall_ns={row.wall_ns_median:.0f}")
    return EXIT_OK


def _verify_nodes(m, limit, forced):
    if m <= limit:
        return list(range(m))
    stride = m / limit
    picked = {int(k * stride) for k in range(limit)}
    return sorted(picked | set(forced))


def cmd_verify(cfg, out, stride, say):
    if cfg.verify["snapshot"]:
        g = load_snapshot(cfg.verify["snapshot"], check_norms=False)
        if g.dim != cfg.d:
            raise ConfigValidationError(
                [("model.d", f"snapshot has d={g.dim}, config says {cfg.d}")])
    else:
        g = _run_config(cfg).final
    p = cfg.update_params()
    violations = []
    norms = g.norms()
    bad_nodes = [int(i) for i in (norms > 1.0 + NORM_EPS).nonzero()[0]]
    for i in bad_nodes:
        violations.append((i, "admissible", repr(float(norms[i])),
                           repr(1.0 + NORM_EPS)))
    L = operator_lipschitz(p)
    C0 = measure_c0(g, p)
    certs = []
    for i in _verify_nodes(g.num_nodes, cfg.verify["max_nodes"], bad_nodes):
        c = certify(g, i, p, L, C0)
        certs.append(c)
        if c.residual > IDENTITY_TOL:
            violations.append((i, "norm_identity", repr(c.residual),
                               repr(IDENTITY_TOL)))
        if c.slack < -BOUND_TOL:
            violations.append((i, "operator_bound", repr(c.slack),
                               repr(-BOUND_TOL)))
        delta = check_delta_bound(g, i, p)
        if delta > DELTA_LIMIT:
            violations.append((i, "delta_bound", repr(delta),
                               repr(DELTA_LIMIT)))
    with open(os.path.join(out, CERT_FILE), "w", newline="") as fh:
        write_certificates(certs, fh)
    with open(os.path.join(out, VIOLATIONS_FILE), "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("node", "check", "value", "limit"))
        w.writerows(violations)
    if violations:
        nodes = sorted({v[0] for v in violations})
        raise _Invariant(f"{len(violations)} violation(s) at node(s) {nodes}")
    say(f"verified {len(certs)} node(s): no violations")
    return EXIT_OK


COMMANDS = {"evolve": cmd_evolve, "sweep": cmd_sweep, "verify": cmd_verify,
            "replay": cmd_replay}


def run(subcommand, cfg, out=None, stride=None, quiet=False):
    """Execute one subcommand on a parsed config; return the exit code."""
    def say(msg):
        if not quiet:
            print(msg)

    out = out or os.environ.get("BLGC_OUT_DIR") or cfg.output["dir"]
    stride = stride or cfg.output["stride"]
    try:
        os.makedirs(out, exist_ok=True)
        return COMMANDS[subcommand](cfg, out, stride, say)
    except ConfigValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (_Invariant, MonitorViolation, CapViolation,
            ConstructionViolatesCap) as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (OSError, SnapshotFormatError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except BLGCError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


def main(argv=None):
    ap = argparse.ArgumentParser(prog="blgc", description=__doc__.split("\n")[0])
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="TOML run configuration")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--stride", type=int, help="metrics row decimation")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigValidationError as exc:
        print("validation error:", file=sys.stderr)
        for key, msg in exc.problems:
            print(f"  {key}: {msg}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.stride is not None and args.stride < 1:
        print("validation error: --stride must be >= 1", file=sys.stderr)
        return EXIT_VALIDATION
    return run(args.command, cfg, args.out, args.stride, args.quiet)


if __name__ == "__main__":
    sys.exit(main())
