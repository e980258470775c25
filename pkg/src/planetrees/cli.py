"""Command-line front end.

Every file written with ``--out`` gets a sibling ``<out>.manifest.json``
holding the command line, the parsed options, the seed, the library version,
a timestamp and sha256 digests of the outputs.

Exit status: 0 on success, 1 on bad input, 2 on an internal error.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backbone import (
    branch_composition,
    decompose,
    feasible_compositions,
    lr_set,
    prob_composition,
    r_set,
)
from .checks import run_all
from .coalescent import run_labelled, run_plane, trajectory_stats
from .degseq import DegreeSequence, parse, require_tree
from .limits import ExperimentConfig, FunctionalSample, parallel_map, run_experiment
from .oracle import DEFAULT_CAP, enumerate_trees, verify_counts
from .sampler import (
    RNG_NAME,
    MarkedTree,
    OffspringDistribution,
    replica_seeds,
    sample_gw_conditioned,
    sample_uniform,
)
from .tree_core import PlaneTree, contour, height, lukasiewicz, rank_of_word

THREADS_ENV = "PLANETREES_THREADS"


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# -- io helpers ------------------------------------------------------------------

def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load_tree(spec: str) -> PlaneTree:
    """Tree from a JSON file, inline JSON or inline child counts "2,1,0,0"."""
    text = spec.strip()
    if text.startswith(("{", "[")):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed inline tree JSON ({exc.msg})") from None
    elif Path(text).is_file() or text.endswith(".json"):
        data = _read_json(text)
    else:
        try:
            data = [int(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise UsageError(f"cannot parse tree {spec!r}; expected a JSON file or child counts like 2,1,0,0") from None
    if isinstance(data, dict):
        data = data.get("child_counts")
    if not isinstance(data, list):
        raise UsageError('tree JSON must look like {"child_counts": [2,1,0,0]}')
    return PlaneTree(data)


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _write(path: str | None, text: str, written: list[Path]) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True)
    p.write_text(text)
    written.append(p)


def _options(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",) and not k.startswith("_")}


def write_manifest(args, argv: list[str], written: list[Path]) -> Path | None:
    if not written:
        return None
    main = written[0]
    manifest = {
        "command": ["planetrees", *argv],
        "config": _options(args),
        "seed": getattr(args, "seed", None),
        "rng": RNG_NAME,
        "version": __version__,
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": {str(p): _digest(p) for p in written},
    }
    out = main.with_name(main.name + ".manifest.json")
    out.write_text(json.dumps(manifest, indent=2, default=str) + "\n")
    return out


def _jsonl(rows) -> str:
    return "".join(json.dumps(r, separators=(",", ":")) + "\n" for r in rows)


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV}={raw!r} is not an integer") from None


# -- replica tasks (top level so worker processes can pickle them) ---------------

def _sample_task(args):
    counts, seq = args
    return sample_uniform(DegreeSequence(counts), np.random.Generator(np.random.PCG64(seq))).key()


def _gw_task(args):
    mu_json, n, seq = args
    mu = OffspringDistribution.from_json(mu_json)
    return sample_gw_conditioned(mu, n, np.random.Generator(np.random.PCG64(seq))).key()


# -- commands ------------------------------------------------------------------

def cmd_sample(args, written):
    s = require_tree(parse(args.degseq))
    tasks = [(s.counts, q) for q in replica_seeds(args.seed, args.count)]
    trees = parallel_map(_sample_task, tasks, _threads(args))
    _write(args.out, _jsonl({"child_counts": list(t)} for t in trees), written)


def cmd_sample_gw(args, written):
    mu = OffspringDistribution.from_json(_read_json(args.mu))
    if args.size < 1:
        raise UsageError("--size must be >= 1")
    tasks = [(mu.to_json(), args.size, q) for q in replica_seeds(args.seed, args.count)]
    trees = parallel_map(_gw_task, tasks, _threads(args))
    _write(args.out, _jsonl({"child_counts": list(t)} for t in trees), written)


def cmd_encode(args, written):
    t = load_tree(args.tree)
    path = {"height": height, "contour": contour, "lukasiewicz": lukasiewicz}[args.kind](t)
    _write(args.out, path.to_csv(), written)


def _mark_of(t: PlaneTree, mark: str) -> int:
    if mark.startswith("w"):
        try:
            word = [int(c) for c in mark[1:].split(".") if c]
            return rank_of_word(t, word)
        except KeyError as exc:
            raise UsageError(str(exc.args[0])) from None
        except ValueError:
            raise UsageError(f"bad node word {mark!r}; use dot-separated child indices like w1.3.1") from None
    try:
        return int(mark)
    except ValueError:
        raise UsageError(f"--mark takes a rank like 5 or a word like w1.3.1, got {mark!r}") from None


def cmd_backbone_decompose(args, written):
    t = load_tree(args.tree)
    mt = MarkedTree(t, _mark_of(t, args.mark))
    d = decompose(mt)
    out = {
        "mark": mt.mark,
        "content": [list(p) for p in d.content],
        "composition": list(branch_composition(mt).m),
        "lr": lr_set(mt),
        "r": r_set(mt),
        "forest": [{"child_counts": list(tr.key())} for tr in d.forest],
    }
    _write(args.out, json.dumps(out) + "\n", written)


def cmd_backbone_law(args, written):
    s = require_tree(parse(args.degseq))
    rows = [(m, prob_composition(s, m)) for m in feasible_compositions(s)]
    rows = [(m, p) for m, p in rows if p]
    if args.emit == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["m", "probability", "float"])
        for m, p in rows:
            w.writerow([" ".join(map(str, m.m)), str(p), float(p)])
        text = buf.getvalue()
    else:
        text = json.dumps({"degseq": list(s.counts),
                           "law": [{"m": list(m.m), "probability": str(p)} for m, p in rows]}, indent=1) + "\n"
    _write(args.out, text, written)


def cmd_oracle_enumerate(args, written):
    s = require_tree(parse(args.degseq))
    cat = enumerate_trees(s, cap=args.cap)
    _write(args.out, _jsonl(t.to_json() for t in cat.trees), written)
    print(f"{len(cat)} trees with degree sequence {s}", file=sys.stderr)


def cmd_oracle_verify_counts(args, written):
    rows = verify_counts(args.max_size, cap=max(args.max_size, DEFAULT_CAP))
    bad = [r for r in rows if r[1] != r[2]]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["degseq", "enumerated", "formula", "match"])
    for s, got, want in rows:
        w.writerow([str(s), got, want, got == want])
    _write(args.out, buf.getvalue(), written)
    print(f"{len(rows) - len(bad)}/{len(rows)} degree sequences match", file=sys.stderr)
    return 0 if not bad else 1


def _emit_plot_data(directory: Path, report: dict, written: list[Path]) -> None:
    directory.mkdir(parents=True, exist_ok=True)

    def walk(prefix, obj):
        if isinstance(obj, FunctionalSample):
            p = directory / f"{prefix}.csv"
            p.write_text("replica,value\n" + "".join(f"{i},{v!r}\n" for i, v in enumerate(obj.values)))
            written.append(p)
        elif isinstance(obj, dict):
            for k, v in obj.items():
                walk(f"{prefix}__{k}" if prefix else str(k), v)

    walk("", report.get("_samples", {}))
    result = report["result"]
    if report["config"]["kind"] == "discrepancy":
        p = directory / "discrepancy_medians.csv"
        lines = ["family,n,median"]
        for fam, row in result.items():
            for n, summary in row["per_size"].items():
                lines.append(f"{fam},{n},{summary['median']!r}")
        p.write_text("\n".join(lines) + "\n")
        written.append(p)


def cmd_limits_run(args, written):
    data = _read_json(args.config)
    if not isinstance(data, dict):
        raise UsageError("experiment config must be a JSON object")
    if args.seed is not None:
        data["seed"] = args.seed
    if "seed" not in data:
        raise UsageError("no seed: put \"seed\" in the config or pass --seed")
    data["threads"] = _threads(args)
    args.seed = data["seed"]
    config = ExperimentConfig.from_dict(data)
    report = run_experiment(config)
    public = {k: v for k, v in report.items() if not k.startswith("_")}
    _write(args.out, json.dumps(public, indent=1) + "\n", written)
    if args.emit_plot_data:
        _emit_plot_data(Path(args.emit_plot_data), report, written)


def cmd_coalesce(args, written):
    s = require_tree(parse(args.degseq))
    trees, trace_rows = [], []
    for i, q in enumerate(replica_seeds(args.seed, args.count)):
        rng = np.random.Generator(np.random.PCG64(q))
        if args.mode == "plane":
            run = run_plane(s, rng)
            trees.append(run.tree.to_json())
        else:
            run = run_labelled(s.child_counts(), rng)
            trees.append(run.tree.to_json())
        if args.trace:
            for step, hist in enumerate(trajectory_stats(run)):
                trace_rows.append((i, step, " ".join(f"{k}:{v}" for k, v in hist.items())))
    _write(args.out, _jsonl(trees), written)
    if args.trace:
        _write(args.trace, "replica,step,cluster_sizes\n"
               + "".join(f"{r},{k},{h}\n" for r, k, h in trace_rows), written)


def cmd_verify(args, written):
    results = run_all(args.max_size)
    lines = [f"{'check':<18} {'cases':>7}  result"]
    for r in results:
        lines.append(f"{r.name:<18} {r.cases:>7}  {'PASS' if r.passed else 'FAIL ' + r.detail}")
    _write(args.out, "\n".join(lines) + "\n", written)
    return 0 if all(r.passed for r in results) else 1


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="planetrees", description="Random plane trees with a prescribed degree sequence.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def stochastic(q, seed_required=True):
        q.add_argument("--seed", type=int, required=seed_required, help="non-negative integer seed")
        q.add_argument("--threads", type=int, default=None,
                       help=f"worker processes (default: ${THREADS_ENV} or 1)")

    q = sub.add_parser("sample", help="uniform trees with a given degree sequence")
    q.add_argument("--degseq", required=True, help='JSON file, {"counts":[...]} or "3,1,2"')
    q.add_argument("--count", type=int, default=1)
    q.add_argument("--out")
    stochastic(q)
    q.set_defaults(func=cmd_sample)

    q = sub.add_parser("sample-gw", help="Galton-Watson trees conditioned on their size")
    q.add_argument("--mu", required=True, help='JSON offspring law, e.g. {"probabilities":[0.5,0,0.5]}')
    q.add_argument("--size", type=int, required=True)
    q.add_argument("--count", type=int, default=1)
    q.add_argument("--out")
    stochastic(q)
    q.set_defaults(func=cmd_sample_gw)

    q = sub.add_parser("encode", help="height, contour or Lukasiewicz path as CSV")
    q.add_argument("--tree", required=True)
    q.add_argument("--kind", choices=("height", "contour", "lukasiewicz"), required=True)
    q.add_argument("--out")
    q.set_defaults(func=cmd_encode)

    q = sub.add_parser("backbone", help="branch decomposition and its exact law")
    bsub = q.add_subparsers(dest="action", parser_class=_Parser, required=True)
    b = bsub.add_parser("decompose")
    b.add_argument("--tree", required=True)
    b.add_argument("--mark", required=True, help="depth-first rank (1-based) or word like w1.3.1")
    b.add_argument("--out")
    b.set_defaults(func=cmd_backbone_decompose)
    b = bsub.add_parser("law")
    b.add_argument("--degseq", required=True)
    b.add_argument("--emit", choices=("csv", "json"), default="csv")
    b.add_argument("--out")
    b.set_defaults(func=cmd_backbone_law)

    q = sub.add_parser("oracle", help="exhaustive enumeration")
    osub = q.add_subparsers(dest="action", parser_class=_Parser, required=True)
    o = osub.add_parser("enumerate")
    o.add_argument("--degseq", required=True)
    o.add_argument("--cap", type=int, default=DEFAULT_CAP)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle_enumerate)
    o = osub.add_parser("verify-counts")
    o.add_argument("--max-size", type=int, default=10)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle_verify_counts)

    q = sub.add_parser("limits", help="Monte Carlo scaling-limit experiments")
    lsub = q.add_subparsers(dest="action", parser_class=_Parser, required=True)
    lr = lsub.add_parser("run")
    lr.add_argument("--config", required=True)
    lr.add_argument("--out")
    lr.add_argument("--emit-plot-data", metavar="DIR")
    stochastic(lr, seed_required=False)
    lr.set_defaults(func=cmd_limits_run)

    q = sub.add_parser("coalesce", help="coalescent construction of random trees")
    q.add_argument("--degseq", required=True)
    q.add_argument("--mode", choices=("plane", "labelled"), default="plane")
    q.add_argument("--count", type=int, default=1)
    q.add_argument("--out")
    q.add_argument("--trace", help="CSV of cluster-size histograms per step")
    q.add_argument("--seed", type=int, required=True)
    q.set_defaults(func=cmd_coalesce)

    q = sub.add_parser("verify", help="exhaustive self-checks on all small degree sequences")
    q.add_argument("--max-size", type=int, default=8)
    q.add_argument("--out")
    q.set_defaults(func=cmd_verify)
    return p


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_help(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
        if not getattr(args, "func", None):
            parser.print_help(sys.stderr)
            return 1
        if getattr(args, "seed", None) is not None and args.seed < 0:
            raise UsageError("--seed must be a non-negative integer")
        if getattr(args, "count", 1) < 0:
            raise UsageError("--count must be non-negative")
        if getattr(args, "threads", None) is not None and args.threads < 1:
            raise UsageError("--threads must be >= 1")
        written: list[Path] = []
        status = args.func(args, written) or 0
        write_manifest(args, argv, written)
        return status
    except (ValueError, KeyError, IndexError, OSError) as exc:
        msg = exc.args[0] if exc.args else type(exc).__name__
        print(f"planetrees: error: {msg}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except Exception as exc:  # pragma: no cover - reported, not hidden
        print(f"planetrees: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
