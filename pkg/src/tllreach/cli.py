"""Command-line front end: problem I/O, reachability runs, benchmarks.

Every command prints or writes machine-readable JSON; figures (SVG via
matplotlib) and the benchmark CSV are rendered alongside the JSON results and
never change the numbers.
"""

from __future__ import annotations

import argparse
import glob
import json
import os
import statistics
import sys
import time

import numpy as np

from tllreach import figures
from tllreach.exact import one_step_exact
from tllreach.lipgrid import CostGuardError
from tllreach.ltllbox import PropagationError, propagate, select_method
from tllreach.polytope import LP_CALLS, HPolytope, bbox
from tllreach.tll import (
    LTISystem,
    ValidationError,
    lipschitz_bound,
    load_controller,
    load_problem,
    random_problem,
    save_problem,
)
from tllreach.verifier import output_box, verify_lower_bound

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_COST_GUARD = 2


def _emit(obj):
    print(json.dumps(obj, sort_keys=True))


def cmd_generate(args):
    os.makedirs(args.out, exist_ok=True)
    written = []
    for i in range(args.count):
        ctrl, sysm, X0 = random_problem(args.n, args.m, args.N, args.M, args.seed + i)
        path = os.path.join(args.out, f"problem_{i:03d}.json")
        save_problem(ctrl, sysm, X0, args.eps, args.steps, path)
        written.append(path)
    _emit({"generated": written, "seed": args.seed})
    return EXIT_OK


def _result_json(boxes, methods, step_stats, wall_ms):
    total_lp = sum(st.get("lp_calls", 0) for st in step_stats)
    total_nodes = sum(st.get("nodes", 0) for st in step_stats)
    return {
        "boxes": [b.to_json() for b in boxes],
        "method_per_step": list(methods),
        "stats": {"nodes": total_nodes, "lp_calls": total_lp, "wall_ms": wall_ms},
        "steps": step_stats,
    }


def cmd_reach(args):
    ctrl, sysm, X0, eps_file, T_file = load_problem(args.problem)
    eps = args.eps if args.eps is not None else eps_file
    T = args.steps if args.steps is not None else T_file
    t0 = time.perf_counter()
    pieces = None
    if args.method == "exact":
        if T != 1:
            raise ValueError("--method exact supports exactly one step (--steps 1)")
        lp0 = LP_CALLS.snapshot()
        reach = one_step_exact(sysm, ctrl, X0)
        union_box = None
        for piece in reach.pieces:
            b = bbox(piece)
            union_box = b if union_box is None else union_box.merge(b)
        wall_ms = 1000.0 * (time.perf_counter() - t0)
        result = _result_json([union_box], ["exact"], [{"lp_calls": LP_CALLS.snapshot() - lp0}], wall_ms)
        result["reach_set"] = reach.to_json()
        boxes = [union_box]
        pieces = reach.pieces
    else:
        method = {"exact-box": "exact_box"}.get(args.method, args.method)
        prop = propagate(sysm, ctrl, X0, eps, T, method=method)
        wall_ms = 1000.0 * (time.perf_counter() - t0)
        result = _result_json(prop.boxes, prop.methods, [dict(s) for s in prop.stats], wall_ms)
        boxes = list(prop.boxes)
    with open(args.out, "w") as fh:
        json.dump(result, fh, sort_keys=True)
    if args.svg:
        if sysm.n != 2:
            raise ValueError("--svg requires a planar (n = 2) problem")
        figures.plot_reach(X0, boxes, args.svg, pieces=pieces, title=os.path.basename(args.problem))
    _emit({"out": args.out, "boxes": len(boxes), "wall_ms": wall_ms})
    return EXIT_OK


def cmd_verify(args):
    ctrl = load_controller(args.controller)
    with open(args.input_set) as fh:
        P = HPolytope.from_json(json.load(fh))
    if args.lb is not None:
        holds = True
        witness = None
        for comp in ctrl.components:
            ok, w = verify_lower_bound(comp, P, args.lb)
            if not ok:
                holds = False
                witness = w.tolist()
                break
        _emit({"lb": args.lb, "holds": holds, "counterexample": witness})
    else:
        ob = output_box(ctrl, P, args.tol)
        _emit({"lo": ob.lo.tolist(), "hi": ob.hi.tolist(), "tol": args.tol})
    return EXIT_OK


def cmd_lipschitz(args):
    ctrl = load_controller(args.controller)
    _emit({"lipschitz_bound": lipschitz_bound(ctrl)})
    return EXIT_OK


def cmd_validate(args):
    with open(args.file) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            _emit({"valid": False, "error": f"invalid JSON at line {exc.lineno}: {exc.msg}"})
            return EXIT_ERROR
    try:
        if "A" in obj and "B" in obj:
            from tllreach.tll import problem_from_json

            problem_from_json(obj, base_dir=os.path.dirname(args.file) or ".")
            kind = "problem"
        elif "components" in obj:
            from tllreach.tll import controller_from_json

            controller_from_json(obj)
            kind = "controller"
        elif "C" in obj and "d" in obj:
            HPolytope.from_json(obj)
            kind = "polytope"
        else:
            raise ValidationError("unrecognized file schema")
    except (ValidationError, ValueError) as exc:
        _emit({"valid": False, "error": str(exc)})
        return EXIT_ERROR
    _emit({"valid": True, "kind": kind})
    return EXIT_OK


def _bench_one(path, method, timeout):
    ctrl, sysm, X0, eps, T = load_problem(path)
    lp0 = LP_CALLS.snapshot()
    t0 = time.perf_counter()
    record = {
        "problem": os.path.basename(path),
        "method": method,
        "n": sysm.n,
        "m": sysm.m,
        "N": ctrl.N,
        "M": ctrl.M,
        "epsilon": eps,
        "T": T,
    }
    try:
        prop = propagate(sysm, ctrl, X0, eps, T, method=method)
    except (PropagationError, CostGuardError) as exc:
        record["error"] = str(exc)
        record["wall_s"] = time.perf_counter() - t0
        return record
    wall = time.perf_counter() - t0
    record["wall_s"] = wall
    record["timed_out"] = wall > timeout
    record["lp_calls"] = LP_CALLS.snapshot() - lp0
    record["boxes"] = [b.to_json() for b in prop.boxes]
    if sysm.n == 2:
        record["areas"] = [float(b.width[0] * b.width[1]) for b in prop.boxes]
    return record


def cmd_bench(args):
    paths = sorted(glob.glob(os.path.join(args.suite, "problem_*.json")))
    if not paths:
        raise ValueError(f"no problem_*.json files under {args.suite}")
    methods = args.methods.split(",")
    tasks = [(p, m) for p in paths for m in methods]
    workers = int(os.environ.get("TLLREACH_THREADS", "1"))
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_bench_worker, [(p, m, args.timeout) for p, m in tasks]))
    else:
        records = [_bench_one(p, m, args.timeout) for p, m in tasks]
    # Per-size medians of wall time and final box area, per method.
    medians = {}
    for method in methods:
        for N in sorted({r["N"] for r in records}):
            sub = [r for r in records if r["method"] == method and r["N"] == N and "error" not in r]
            if not sub:
                continue
            entry = {"wall_s": statistics.median(r["wall_s"] for r in sub)}
            areas = [r["areas"][-1] for r in sub if "areas" in r]
            if areas:
                entry["final_area"] = statistics.median(areas)
            medians[f"{method}/N={N}"] = entry
    report = {
        "suite": args.suite,
        "methods": methods,
        "timeout_s": args.timeout,
        "instances": records,
        "medians": medians,
    }
    with open(args.report, "w") as fh:
        json.dump(report, fh, sort_keys=True)
    stem = os.path.splitext(args.report)[0]
    _write_bench_csv(records, stem + ".csv")
    figures.plot_bench(report, stem + ".svg")
    _emit({"report": args.report, "instances": len(paths), "methods": methods})
    return EXIT_OK


def _bench_worker(task):
    return _bench_one(*task)


def _write_bench_csv(records, path):
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["problem", "method", "N", "M", "T", "epsilon", "wall_s", "lp_calls", "final_area", "error"])
        for r in records:
            writer.writerow(
                [
                    r["problem"],
                    r["method"],
                    r["N"],
                    r["M"],
                    r["T"],
                    r["epsilon"],
                    f"{r.get('wall_s', float('nan')):.6f}",
                    r.get("lp_calls", ""),
                    r.get("areas", [""])[-1],
                    r.get("error", ""),
                ]
            )


def build_parser():
    parser = argparse.ArgumentParser(prog="tll-reach", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write random benchmark problem files")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, required=True)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--steps", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("reach", help="run reachability on a problem file")
    p.add_argument("--problem", required=True)
    p.add_argument("--method", choices=["exact", "exact-box", "grid", "ltllbox", "auto"], default="ltllbox")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--out", required=True)
    p.add_argument("--svg", default=None)
    p.set_defaults(func=cmd_reach)

    p = sub.add_parser("verify", help="output-range queries for a controller")
    p.add_argument("--controller", required=True)
    p.add_argument("--input-set", required=True, dest="input_set")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--lb", type=float, default=None)
    group.add_argument("--outbox", action="store_true")
    p.add_argument("--tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("lipschitz", help="print the controller Lipschitz bound")
    p.add_argument("--controller", required=True)
    p.set_defaults(func=cmd_lipschitz)

    p = sub.add_parser("validate", help="check a controller/problem/polytope file")
    p.add_argument("file")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("bench", help="run a benchmark suite and write a report")
    p.add_argument("--suite", required=True)
    p.add_argument("--methods", default="ltllbox")
    p.add_argument("--timeout", type=float, default=600.0)
    p.add_argument("--report", required=True)
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CostGuardError as exc:
        print(json.dumps({"error": str(exc), "kind": "cost_guard"}), file=sys.stderr)
        return EXIT_COST_GUARD
    except PropagationError as exc:
        if isinstance(exc.__cause__, CostGuardError):
            print(json.dumps({"error": str(exc), "kind": "cost_guard"}), file=sys.stderr)
            return EXIT_COST_GUARD
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_ERROR
    except (ValidationError, ValueError, OSError) as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
