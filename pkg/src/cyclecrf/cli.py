"""Command-line interface.

Exit codes: 0 success, 1 computation error, 2 usage or I/O error. Every
error is reported as a single line on stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, io
from .cycles import count_invalid, enumerate_triangles, is_feasible, round_marginals
from .graph import GridConfig, build_grid_graph, labeling_from_partition
from .meanfield import CoolingState, FitOptions, MeanFieldConfig, PotentialParams, fit_costs, run_meanfield
from .metrics import edge_prf, partition_score
from .solvers import greedy_contract, objective_cubic, objective_linear, round_and_repair, solve_exact
from .synth import planted_instance

REPORT_VERSION = 1
SCHEDULE_NAMES = {
    "none": "none",
    "adaptive": "adaptive_phi",
    "softmax-linear": "softmax_linear",
    "softmax-adaptive": "softmax_adaptive",
}

log = logging.getLogger("cyclecrf")


class CliError(Exception):
    def __init__(self, message: str, code: int = 1):
        super().__init__(message)
        self.code = code


def _distance_range(text: str) -> tuple[int, int]:
    try:
        lo, _, hi = text.partition(":")
        lo, hi = int(lo), int(hi or lo)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN:MAX, got {text!r}") from None
    if not 1 <= lo <= hi:
        raise argparse.ArgumentTypeError("need 1 <= MIN <= MAX")
    return lo, hi


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _load_graph(path):
    try:
        return io.read_graph(path)
    except OSError as exc:
        raise CliError(f"cannot read graph {path}: {exc.strerror}", 2) from exc
    except io.FormatError as exc:
        raise CliError(str(exc), 2) from exc


def _load_partition(path):
    try:
        return io.read_partition(path)
    except OSError as exc:
        raise CliError(f"cannot read partition {path}: {exc.strerror}", 2) from exc
    except io.FormatError as exc:
        raise CliError(str(exc), 2) from exc


def _load_params(args) -> PotentialParams:
    if args.params:
        try:
            params = PotentialParams.from_text(Path(args.params).read_text())
        except OSError as exc:
            raise CliError(f"cannot read params {args.params}: {exc.strerror}", 2) from exc
        except ValueError as exc:
            raise CliError(f"{args.params}: {exc}", 2) from exc
    else:
        params = PotentialParams()
    overrides = {
        "gamma_max": args.gamma_max,
        "unary_weight": args.unary_weight,
        "gamma_valid": tuple(args.gamma_valid) if args.gamma_valid else None,
    }
    overrides = {key: value for key, value in overrides.items() if value is not None}
    if overrides:
        params = replace(params, **overrides)
    return params


def _write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


# -- subcommands -----------------------------------------------------------

def cmd_build_graph(args) -> int:
    try:
        edge_map = io.read_edge_map(args.image)
    except (OSError, io.FormatError) as exc:
        raise CliError(f"cannot read edge map {args.image}: {exc}", 2) from exc
    lo, hi = args.dist
    graph = build_grid_graph(edge_map, GridConfig(lo, hi))
    tris = enumerate_triangles(graph)
    io.write_graph(args.out, graph)
    print(f"nodes {graph.num_nodes} edges {graph.num_edges} triangles {len(tris)}")
    return 0


def cmd_synth(args) -> int:
    lo, hi = args.dist
    inst = planted_instance(
        args.height, args.width, min_distance=lo, max_distance=hi,
        noise=args.noise, margin=args.margin, num_regions=args.regions, seed=args.seed,
    )
    io.write_graph(args.out, inst.graph)
    if args.truth:
        io.write_partition(args.truth, inst.truth_partition)
    print(f"nodes {inst.graph.num_nodes} edges {inst.graph.num_edges} "
          f"regions {int(inst.truth_partition.max()) + 1}")
    return 0


def _final_block(graph, tris, q, params, threshold):
    rounded = round_marginals(q, threshold)
    repaired = round_and_repair(q, graph, threshold, tris, params.gamma_max)
    return {
        "cycle_stats": count_invalid(q, tris, threshold).as_dict(),
        "objectives": {
            "rounded_linear": objective_linear(graph, rounded),
            "rounded_cubic": objective_cubic(graph, tris, rounded, params.gamma_max),
            "repaired_linear": repaired.objective_linear,
            "repaired_cubic": repaired.objective_cubic,
        },
        "feasible": bool(is_feasible(graph, rounded)),
        "repaired": repaired.summary(),
    }, repaired


def cmd_optimize(args) -> int:
    t_start = time.perf_counter()
    graph = _load_graph(args.graph)
    params = _load_params(args)
    cooling = CoolingState(
        SCHEDULE_NAMES[args.schedule], increment=args.increment, threshold_a=args.threshold_a
    )
    config = MeanFieldConfig(args.iters, cooling, "per_iteration", args.rounding_threshold, args.threads)
    t_load = time.perf_counter()
    tris = enumerate_triangles(graph)
    t_tri = time.perf_counter()
    q, trajectory = run_meanfield(graph, graph.probs, tris, params, config)
    t_mf = time.perf_counter()

    final, repaired = _final_block(graph, tris, q, params, args.rounding_threshold)
    report = {
        "version": REPORT_VERSION,
        "input": {"graph": str(args.graph), "sha256": _sha256(args.graph)},
        "config": {
            **cooling.as_dict(),
            "iterations": args.iters,
            "schedule_granularity": "per_iteration",
            "rounding_threshold": args.rounding_threshold,
            "params": params.as_dict(),
        },
        "trajectory": [rec.as_dict() for rec in trajectory],
        "final": final,
        "scores": {},
        "seed": args.seed,
    }
    if args.truth:
        truth = _load_partition(args.truth)
        if len(truth) != graph.num_nodes:
            raise CliError("truth partition does not match the number of nodes", 2)
        raw = round_and_repair(graph.probs, graph, args.rounding_threshold)
        truth_y = labeling_from_partition(graph, truth)
        report["input"]["truth"] = str(args.truth)
        report["scores"] = {
            "raw": {**partition_score(raw.partition, truth).as_dict(),
                    **dict(zip(("precision", "recall", "f_measure"), edge_prf(raw.labeling, truth_y)))},
            "optimized": {**partition_score(repaired.partition, truth).as_dict(),
                          **dict(zip(("precision", "recall", "f_measure"), edge_prf(repaired.labeling, truth_y)))},
        }
    if not args.no_timings:
        report["timings"] = {
            "load_s": t_load - t_start,
            "triangles_s": t_tri - t_load,
            "meanfield_s": t_mf - t_tri,
            "total_s": time.perf_counter() - t_start,
        }
    if args.out:
        io.write_graph(args.out, graph, q)
    if args.report:
        _write_json(args.report, report)
    first, last = trajectory[0].stats, trajectory[-1].stats
    print(f"invalid relaxed {first.invalid_relaxed} -> {last.invalid_relaxed}, "
          f"rounded {first.invalid_rounded} -> {last.invalid_rounded} "
          f"of {last.total_cycles} triangles; k={trajectory[-1].k:.2f} t={trajectory[-1].t:.2f}")
    return 0


def cmd_solve(args) -> int:
    graph = _load_graph(args.graph)
    tris = enumerate_triangles(graph)
    gamma = args.gamma
    if args.method == "exact":
        try:
            result = solve_exact(graph, tris, gamma)
        except ValueError as exc:
            raise CliError(f"{exc} ({graph.num_nodes} nodes; limit is 12)", 1) from exc
    elif args.method == "greedy":
        result = greedy_contract(graph, tris, gamma)
    else:
        result = round_and_repair(graph.probs, graph, args.threshold, tris, gamma)
    if args.labeling:
        io.write_labeling(args.labeling, graph, result.labeling)
    if args.partition:
        io.write_partition(args.partition, result.partition)
    s = result.summary()
    print(f"objective_linear {s['objective_linear']:.6f} objective_cubic {s['objective_cubic']:.6f} "
          f"feasible {str(s['feasible']).lower()} components {s['num_components']}")
    if args.json:
        _write_json(args.json, {"method": args.method, **s})
    return 0


def _read_marginals(path, graph):
    text = Path(path).read_text()
    if text.startswith("nodes "):
        other = io.read_graph(path)
        if other.num_edges != graph.num_edges or not np.array_equal(other.edges, graph.edges):
            raise CliError(f"{path}: edges do not match the graph", 2)
        return other.probs
    try:
        values = np.array([float(x) for x in text.split()])
    except ValueError as exc:
        raise CliError(f"{path}: marginals must be numbers", 2) from exc
    if len(values) != graph.num_edges:
        raise CliError(f"{path}: expected {graph.num_edges} marginals, found {len(values)}", 2)
    return values


def cmd_check(args) -> int:
    graph = _load_graph(args.graph)
    if args.marginals:
        try:
            q = _read_marginals(args.marginals, graph)
        except OSError as exc:
            raise CliError(f"cannot read marginals {args.marginals}: {exc.strerror}", 2) from exc
        except io.FormatError as exc:
            raise CliError(str(exc), 2) from exc
    else:
        q = graph.probs
    stats = count_invalid(q, enumerate_triangles(graph), args.threshold)
    print(f"total {stats.total_cycles} relaxed_invalid {stats.invalid_relaxed} "
          f"rounded_invalid {stats.invalid_rounded}")
    if args.json:
        _write_json(args.json, stats.as_dict())
    return 0


def cmd_metrics(args) -> int:
    a = _load_partition(args.partition_a)
    b = _load_partition(args.partition_b)
    if len(a) != len(b):
        raise CliError(f"node counts differ ({len(a)} vs {len(b)})", 1)
    score = partition_score(a, b)
    row = f"{args.partition_a},{args.partition_b},{score.rand_index:.6f},{score.variation_of_information:.6f}"
    print(f"rand_index {score.rand_index:.6f} variation_of_information {score.variation_of_information:.6f}")
    if args.csv:
        path = Path(args.csv)
        new = not path.exists() or path.stat().st_size == 0
        with open(path, "a") as fh:
            if new:
                fh.write("partition_a,partition_b,rand_index,variation_of_information\n")
            fh.write(row + "\n")
    return 0


def cmd_fit(args) -> int:
    if len(args.graph) != len(args.truth):
        raise CliError("need one --truth per --graph", 2)
    instances = []
    for gpath, tpath in zip(args.graph, args.truth):
        g = _load_graph(gpath)
        truth = _load_partition(tpath)
        if len(truth) != g.num_nodes:
            raise CliError(f"{tpath}: node count does not match {gpath}", 2)
        instances.append((g, g.probs, labeling_from_partition(g, truth)))
    params = _load_params(args)
    cooling = CoolingState(SCHEDULE_NAMES[args.schedule], increment=args.increment, threshold_a=args.threshold_a)
    config = MeanFieldConfig(args.iters, cooling, args.granularity.replace("-", "_"))
    history: list[float] = []
    fitted = fit_costs(instances, config, FitOptions(args.fit_iters, args.step), params, history)
    Path(args.out).write_text(fitted.to_text())
    print(f"loss {history[0]:.6f} -> {history[-1]:.6f} in {len(history) - 1} accepted steps")
    return 0


# -- parser ----------------------------------------------------------------

def _add_param_flags(p):
    p.add_argument("--params", help="potential parameters file (key = value)")
    p.add_argument("--gamma-max", type=float)
    p.add_argument("--gamma-valid", type=float, nargs=3, metavar=("JJJ", "JCC", "CCC"))
    p.add_argument("--unary-weight", type=float)


def _add_schedule_flags(p):
    p.add_argument("--schedule", choices=list(SCHEDULE_NAMES), default="adaptive")
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--threshold-a", type=float, default=100.0)
    p.add_argument("--increment", type=float, default=0.05)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyclecrf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build-graph", help="grid graph with ICC weights from an edge map")
    p.add_argument("image", help="PGM (P2/P5) or CSV edge map")
    p.add_argument("--dist", type=_distance_range, default=(2, 8), metavar="MIN:MAX")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_build_graph)

    p = sub.add_parser("synth", help="planted-partition grid instance")
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--width", type=int, default=32)
    p.add_argument("--dist", type=_distance_range, default=(2, 4), metavar="MIN:MAX")
    p.add_argument("--noise", type=float, default=0.3)
    p.add_argument("--margin", type=float, default=0.25)
    p.add_argument("--regions", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True)
    p.add_argument("--truth", help="write the ground-truth partition here")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("optimize", help="mean-field optimization of edge probabilities")
    p.add_argument("graph")
    _add_schedule_flags(p)
    _add_param_flags(p)
    p.add_argument("--rounding-threshold", type=float, default=0.5)
    p.add_argument("--truth", help="ground-truth partition for scoring")
    p.add_argument("--report", help="report JSON path ('-' for stdout)")
    p.add_argument("-o", "--out", help="write optimized marginals as a graph file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--no-timings", action="store_true")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("solve", help="decompose a graph")
    p.add_argument("graph")
    p.add_argument("--method", choices=["exact", "greedy", "round"], default="round")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=10.0, help="penalty for the cubic objective")
    p.add_argument("--labeling", help="labeling CSV output")
    p.add_argument("--partition", help="partition CSV output")
    p.add_argument("--json")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="count violated triangle inequalities")
    p.add_argument("graph")
    p.add_argument("marginals", nargs="?", help="graph file or whitespace-separated values")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--json")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("metrics", help="compare two partitions")
    p.add_argument("partition_a")
    p.add_argument("partition_b")
    p.add_argument("--csv", help="append a score row to this CSV")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("fit", help="fit pattern costs on instances with ground truth")
    p.add_argument("--graph", action="append", required=True)
    p.add_argument("--truth", action="append", required=True)
    _add_schedule_flags(p)
    _add_param_flags(p)
    p.add_argument("--granularity", choices=["per-iteration", "per-epoch"], default="per-iteration")
    p.add_argument("--fit-iters", type=int, default=10)
    p.add_argument("--step", type=float, default=1.0)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_fit)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"cyclecrf: error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"cyclecrf: error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FloatingPointError) as exc:
        print(f"cyclecrf: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
