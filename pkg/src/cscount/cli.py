"""Command-line interface: estimate, exact, bench and inspect."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .candidate_space import RefinementState, build_initial_cs, refine_candidate_space
from .graph import GraphFormatError, LabeledGraph, build_cycle_index, read_graph
from .oracle import exact_count
from .pipeline import MODES, DisconnectedQueryError, EstimatorConfig, estimate, q_error, signed_log_q_error
from .tree_sampler import ZeroEmbeddings, choose_spanning_tree, count_candidate_trees

_CONFIG_FLAGS = {
    "alpha": float,
    "c": float,
    "tau": float,
    "R": float,
    "phi": float,
    "K": float,
    "k_frac": int,
    "tri_cap": int,
    "quad_cap": int,
    "early_fail_trials": int,
    "early_fail_successes": int,
    "trial_cap": int,
}


class CliError(Exception):
    pass


@dataclass
class BenchRecord:
    query: str
    estimate: float
    truth: int | None
    q_error: float | None
    signed_log_q_error: float | None
    method: str
    trials: int
    successes: int
    graph_samples: int
    seed: int | None
    filter_ms: float
    tree_ms: float
    graph_ms: float
    total_ms: float


def _add_graph_args(p: argparse.ArgumentParser, query: bool = True) -> None:
    p.add_argument("--data", required=True, type=Path, help="data graph file")
    if query:
        p.add_argument("--query", required=True, type=Path, help="query graph file")
    p.add_argument("--string-labels", action="store_true", help="treat vertex labels as opaque strings")


def _add_config_args(p: argparse.ArgumentParser) -> None:
    defaults = EstimatorConfig()
    for name, kind in _CONFIG_FLAGS.items():
        flag = "--" + name.replace("_", "-")
        p.add_argument(flag, dest=name, type=kind, default=getattr(defaults, name), help=f"default {getattr(defaults, name)}")
    p.add_argument("--mode", choices=MODES, default="auto")
    p.add_argument("--seed", type=int, default=None)


def _config(args: argparse.Namespace, seed: int | None = None) -> EstimatorConfig:
    kw = {name: getattr(args, name) for name in _CONFIG_FLAGS}
    return EstimatorConfig(**kw, seed=args.seed if seed is None else seed, mode=args.mode)


def _load_pair(args: argparse.Namespace) -> tuple[LabeledGraph, LabeledGraph]:
    labels: dict[str, int] | None = {} if args.string_labels else None
    g = _read(args.data, labels)
    q = _read(args.query, labels)
    return q, g


def _read(path: Path, labels: dict[str, int] | None) -> LabeledGraph:
    try:
        return read_graph(path, labels)
    except GraphFormatError as exc:
        raise CliError(f"{path}: {exc}") from exc


def _ms(timings: dict[str, float], key: str) -> float:
    return round(1000 * timings.get(key, 0.0), 3)


def _estimate_record(path: str, q: LabeledGraph, g, cfg: EstimatorConfig, cycle_g, truth: int | None) -> BenchRecord:
    r = estimate(q, g, cfg, cycle_g=cycle_g)
    t = r.timings
    return BenchRecord(
        query=path,
        estimate=r.estimate,
        truth=truth,
        q_error=None if truth is None else q_error(r.estimate, truth),
        signed_log_q_error=None if truth is None else signed_log_q_error(r.estimate, truth),
        method=r.method,
        trials=r.tree_trials,
        successes=r.tree_successes,
        graph_samples=r.graph_samples_used,
        seed=cfg.seed,
        filter_ms=_ms(t, "filter"),
        tree_ms=_ms(t, "tree_sampling"),
        graph_ms=_ms(t, "graph_sampling"),
        total_ms=_ms(t, "total"),
    )


def cmd_estimate(args: argparse.Namespace) -> int:
    q, g = _load_pair(args)
    cfg = _config(args)
    r = estimate(q, g, cfg)
    out = {
        "query": str(args.query),
        "estimate": r.estimate,
        "method": r.method,
        "tree_trials": r.tree_trials,
        "tree_successes": r.tree_successes,
        "graph_samples_used": r.graph_samples_used,
        "candidate_trees": r.candidate_trees,
        "seed": r.seed,
        "timings_ms": {k: _ms(r.timings, k) for k in r.timings},
    }
    print(json.dumps(out))
    return 0


def cmd_exact(args: argparse.Namespace) -> int:
    q, g = _load_pair(args)
    if not q.is_connected():
        raise DisconnectedQueryError("query graph must be connected")
    r = exact_count(q, g, limit=args.limit, timeout=args.timeout)
    print(json.dumps({"query": str(args.query), "count": r.count, "elapsed": r.elapsed, "partial": r.partial}))
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    q, g = _load_pair(args)
    if not q.is_connected():
        raise DisconnectedQueryError("query graph must be connected")
    cfg = _config(args)
    cs = build_initial_cs(q, g)
    initial = [cs.size(u) for u in range(q.vertex_count)]
    state = RefinementState.initial(q.vertex_count, cfg.refinement())
    if not cs.empty:
        refine_candidate_space(
            cs, build_cycle_index(q, cfg.tri_cap, cfg.quad_cap), build_cycle_index(g, cfg.tri_cap, cfg.quad_cap),
            cfg.refinement(), state,
        )
    out: dict = {
        "initial_sizes": initial,
        "refined_sizes": [cs.size(u) for u in range(q.vertex_count)],
        "refinement_steps": list(state.history),
        "candidate_edges": {f"{a}-{b}": cs.edge_count(a, b) for a, b in q.edges()},
        "empty": cs.empty,
    }
    if not cs.empty:
        try:
            tree = choose_spanning_tree(cs)
        except ZeroEmbeddings:
            tree = None
        if tree is not None:
            table = count_candidate_trees(cs, tree, exact=True)
            out["tree"] = {
                "root": tree.root,
                "edges": [[p, u] for p, u in tree.tree_edges()],
                "non_tree_edges": [list(e) for e in tree.non_tree_edges],
                "densities": {f"{a}-{b}": float(cs.density(a, b)) for a, b in q.edges()},
                "total": table.total,
            }
    if args.dump_cs:
        out["cs"] = cs.dump()
    print(json.dumps(out, indent=2))
    return 0


# -- bench ---------------------------------------------------------------------

_WORKER: dict = {}


def _worker_init(data: str, string_labels: bool, tri_cap: int, quad_cap: int) -> None:
    labels: dict[str, int] | None = {} if string_labels else None
    g = read_graph(data, labels)
    _WORKER.update(g=g, labels=labels, cycle=build_cycle_index(g, tri_cap, quad_cap))


def _worker_run(task: tuple[str, EstimatorConfig, int | None]) -> BenchRecord | str:
    path, cfg, truth = task
    labels = _WORKER["labels"]
    try:
        q = read_graph(path, labels)
        return _estimate_record(path, q, _WORKER["g"], cfg, _WORKER["cycle"], truth)
    except (OSError, GraphFormatError, ValueError) as exc:
        return f"{path}: {exc}"


def _read_truth(path: Path) -> dict[str, int]:
    truth: dict[str, int] = {}
    with open(path, newline="") as fh:
        for i, row in enumerate(csv.reader(fh)):
            if not row or row[0].startswith("#"):
                continue
            if len(row) != 2:
                raise CliError(f"{path}:{i + 1}: expected 'query_path,count'")
            try:
                count = int(row[1])
            except ValueError:
                if i == 0:
                    continue  # header
                raise CliError(f"{path}:{i + 1}: count is not an integer") from None
            truth[row[0].strip()] = count
    return truth


def _lookup(truth: dict[str, int], path: Path) -> int | None:
    for key in (str(path), path.name, str(path.resolve())):
        if key in truth:
            return truth[key]
    return None


def summarize(records: list[BenchRecord]) -> dict:
    errs = np.array([r.q_error for r in records if r.q_error is not None], dtype=float)
    out: dict = {"queries": len(records), "with_truth": int(errs.size)}
    for m in ("tree", "graph", "zero-shortcut"):
        out[f"method_{m}"] = sum(r.method == m for r in records)
    if errs.size:
        qs = np.quantile(errs, [0.0, 0.25, 0.5, 0.75, 0.95, 1.0])
        out.update(
            mean_q_error=float(errs.mean()),
            median_q_error=float(qs[2]),
            quantiles={k: float(v) for k, v in zip(("min", "q1", "median", "q3", "p95", "max"), qs)},
        )
    return out


def _format(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return "" if value is None else value


def cmd_bench(args: argparse.Namespace) -> int:
    if not args.queries.is_dir():
        raise CliError(f"{args.queries}: not a directory")
    paths = sorted(p for p in args.queries.iterdir() if p.is_file() and not p.name.startswith("."))
    if not paths:
        raise CliError(f"{args.queries}: no query files")
    truth = _read_truth(args.truth) if args.truth else {}
    master = 0 if args.seed is None else args.seed
    tasks = [(str(p), _config(args, seed=master + i), _lookup(truth, p)) for i, p in enumerate(paths)]

    init = (str(args.data), args.string_labels, args.tri_cap, args.quad_cap)
    try:
        if args.jobs > 1:
            with ProcessPoolExecutor(args.jobs, initializer=_worker_init, initargs=init) as pool:
                results = list(pool.map(_worker_run, tasks))
        else:
            _worker_init(*init)
            results = [_worker_run(t) for t in tasks]
    except GraphFormatError as exc:
        raise CliError(f"{args.data}: {exc}") from exc

    records = [r for r in results if isinstance(r, BenchRecord)]
    failures = [r for r in results if isinstance(r, str)]
    for msg in failures:
        print(f"error: {msg}", file=sys.stderr)

    out = open(args.output, "w", newline="") if args.output else sys.stdout
    try:
        names = [f.name for f in fields(BenchRecord)]
        if args.format == "csv":
            w = csv.writer(out)
            w.writerow(names)
            for r in records:
                w.writerow([_format(getattr(r, n)) for n in names])
        else:
            for r in records:
                out.write(json.dumps(asdict(r)) + "\n")
    finally:
        if out is not sys.stdout:
            out.close()
    summary = summarize(records)
    if args.summary:
        Path(args.summary).write_text(json.dumps(summary, indent=2) + "\n")
    print(json.dumps(summary), file=sys.stderr)
    return 1 if failures else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cscount", description="Subgraph cardinality estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("estimate", help="estimate the embedding count of one query")
    _add_graph_args(p)
    _add_config_args(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("exact", help="exact embedding count by backtracking")
    _add_graph_args(p)
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--timeout", type=float, default=None, help="seconds")
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("bench", help="estimate every query in a directory")
    _add_graph_args(p, query=False)
    p.add_argument("--queries", required=True, type=Path, help="directory of query graphs")
    p.add_argument("--truth", type=Path, help="CSV of query_path,count")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--output", type=Path, help="records file (default: stdout)")
    p.add_argument("--summary", type=Path, help="also write the summary JSON here")
    _add_config_args(p)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("inspect", help="show the refined candidate space and spanning tree")
    _add_graph_args(p)
    _add_config_args(p)
    p.add_argument("--dump-cs", action="store_true")
    p.set_defaults(func=cmd_inspect)
    return parser


def run_cli(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (CliError, DisconnectedQueryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc.filename or ''}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
