"""Command-line front end: validation, exact and Monte-Carlo solves, sweeps.

Results go to --out or standard output as JSON (solve commands) or CSV
(vector and sweep commands); diagnostics go to standard error under the
SOLVER_LOG environment variable.  Reruns with identical configuration are
byte-identical except for the elapsed-seconds field.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from .dirichlet import (
    DENSE_SIZE_LIMIT,
    CapacityError,
    exact_dirhkpr,
    exact_local_solution,
    restricted_operator,
)
from .graph import (
    BoundaryConditionError,
    BoundaryProblem,
    Graph,
    GraphFormatError,
    load_boundary,
    load_graph_file,
    load_subset,
    make_boundary_problem,
    validate_b_boundable,
)
from .solvers import (
    error_bound,
    greens_solver,
    local_linear_solver,
    make_schedule,
    report_to_json,
    riemann_sum_solution,
)
from .walks import DEFAULT_SAMPLE_CONSTANT, approx_dirhkpr

__all__ = ["main", "run", "load_vector_csv", "load_sweep_csv"]

log = logging.getLogger("hklocal")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2


def _configure_logging() -> None:
    level_name = os.environ.get("SOLVER_LOG", "error").lower()
    level = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}.get(
        level_name, logging.ERROR
    )
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
    log.handlers[:] = [handler]
    log.setLevel(level)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json_doc(doc: dict) -> str:
    return json.dumps(doc, indent=2) + "\n"


def _vector_csv(graph: Graph, members: np.ndarray, values: np.ndarray) -> str:
    lines = ["# format_version=1", "vertex_id,value"]
    for i, v in enumerate(members):
        lines.append(f"{graph.original_id(int(v))},{float(values[i])!r}")
    return "\n".join(lines) + "\n"


def load_vector_csv(text: str) -> dict[int, float]:
    """Round-trip loader for the vertex_id,value CSV schema."""
    rows: dict[int, float] = {}
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "vertex_id,value":
                raise GraphFormatError(f"unexpected CSV header {line!r}")
            header_seen = True
            continue
        vid, value = line.split(",")
        rows[int(vid)] = float(value)
    return rows


def load_sweep_csv(text: str) -> list[tuple[float, float, float]]:
    """Round-trip loader for the t,l1_norm,max_abs_entry CSV schema."""
    rows: list[tuple[float, float, float]] = []
    header_seen = False
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not header_seen:
            if line != "t,l1_norm,max_abs_entry":
                raise GraphFormatError(f"unexpected CSV header {line!r}")
            header_seen = True
            continue
        t, l1, mx = line.split(",")
        rows.append((float(t), float(l1), float(mx)))
    return rows


def _load_problem(args: argparse.Namespace) -> BoundaryProblem:
    graph = load_graph_file(args.graph)
    with open(args.subset, "r", encoding="utf-8") as fh:
        subset = load_subset(fh, graph)
    with open(args.boundary, "r", encoding="utf-8") as fh:
        b = load_boundary(fh, graph)
    return make_boundary_problem(graph, b, subset)


def _attach_bounds(doc: dict, report, problem: BoundaryProblem) -> None:
    """Evaluate the concrete error bounds when the dense oracle is available."""
    s = problem.subset.size
    if s > DENSE_SIZE_LIMIT:
        log.info("subset size %d beyond the dense backend; skipping bound evaluation", s)
        return
    op = restricted_operator(problem.graph, problem.subset)
    x_s = exact_local_solution(problem, operator=op)
    sched = make_schedule(s, report.schedule.gamma, epsilon=report.schedule.epsilon)
    x_rie = riemann_sum_solution(problem, sched, operator=op)
    bounds = error_bound(report, float(np.linalg.norm(x_s)), float(np.linalg.norm(x_rie)))
    observed = float(np.linalg.norm(report.x_hat - x_s))
    doc["error_bounds"] = {
        "local": bounds["local"],
        "greens": bounds["greens"],
        "observed_error": observed,
        "within_local_bound": observed <= bounds["local"],
        "within_greens_bound": observed <= bounds["greens"],
    }


def _cmd_validate(args: argparse.Namespace) -> int:
    graph = load_graph_file(args.graph)
    with open(args.subset, "r", encoding="utf-8") as fh:
        subset = load_subset(fh, graph)
    with open(args.boundary, "r", encoding="utf-8") as fh:
        b = load_boundary(fh, graph)
    violations = validate_b_boundable(graph, b, subset)
    doc = {
        "format_version": 1,
        "command": "validate",
        "valid": not violations,
        "violations": violations,
    }
    _emit(_json_doc(doc), args.out)
    return EXIT_OK if not violations else EXIT_INVALID


def _cmd_solve_exact(args: argparse.Namespace) -> int:
    start = time.perf_counter()
    problem = _load_problem(args)
    op = restricted_operator(problem.graph, problem.subset)
    x_s = exact_local_solution(problem, operator=op)
    graph, subset = problem.graph, problem.subset
    doc = {
        "format_version": 1,
        "command": "solve-exact",
        "subset_size": subset.size,
        "lambda1": op.lambda1,
        "x_s": {
            str(graph.original_id(int(v))): float(x_s[i])
            for i, v in enumerate(subset.members)
        },
        "elapsed_seconds": time.perf_counter() - start,
    }
    _emit(_json_doc(doc), args.out)
    return EXIT_OK


def _cmd_solve_local(args: argparse.Namespace) -> int:
    problem = _load_problem(args)
    report = local_linear_solver(problem, args.gamma, seed=args.seed, workers=args.workers)
    doc = report_to_json(report, problem)
    doc["command"] = "solve-local"
    _attach_bounds(doc, report, problem)
    _emit(_json_doc(doc), args.out)
    return EXIT_OK


def _cmd_solve_greens(args: argparse.Namespace) -> int:
    problem = _load_problem(args)
    report = greens_solver(
        problem,
        args.gamma,
        args.eps,
        seed=args.seed,
        restricted_range=args.restricted_range,
        workers=args.workers,
        constant=args.constant_override,
    )
    doc = report_to_json(report, problem)
    doc["command"] = "solve-greens"
    _attach_bounds(doc, report, problem)
    _emit(_json_doc(doc), args.out)
    return EXIT_OK


def _cmd_hkpr_exact(args: argparse.Namespace) -> int:
    problem = _load_problem(args)
    op = restricted_operator(problem.graph, problem.subset)
    rho = exact_dirhkpr(op, args.t, problem.b2)
    _emit(_vector_csv(problem.graph, problem.subset.members, rho), args.out)
    return EXIT_OK


def _cmd_hkpr_approx(args: argparse.Namespace) -> int:
    problem = _load_problem(args)
    rho = approx_dirhkpr(
        problem.graph,
        args.t,
        problem.b2,
        problem.subset,
        args.eps,
        args.seed,
        workers=args.workers,
        constant=args.constant_override,
    )
    _emit(_vector_csv(problem.graph, problem.subset.members, rho), args.out)
    return EXIT_OK


def _cmd_sweep_norms(args: argparse.Namespace) -> int:
    problem = _load_problem(args)
    op = restricted_operator(problem.graph, problem.subset)
    schedule = make_schedule(problem.subset.size, args.gamma)
    grid = np.geomspace(1.0, schedule.T, args.points)
    lines = ["# format_version=1", "t,l1_norm,max_abs_entry"]
    for t in grid:
        rho = exact_dirhkpr(op, float(t), problem.b2)
        lines.append(f"{float(t)!r},{float(np.abs(rho).sum())!r},{float(np.abs(rho).max())!r}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hklocal",
        description="Local Laplacian boundary-value solver via heat kernel pagerank",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    io_parent = argparse.ArgumentParser(add_help=False)
    io_parent.add_argument("--graph", required=True, help="edge-list file ('u v' per line)")
    io_parent.add_argument("--subset", required=True, help="subset file (one vertex id per line)")
    io_parent.add_argument("--boundary", required=True, help="boundary file ('vertex_id value' per line)")
    io_parent.add_argument("--out", default=None, help="output path (default: stdout)")

    mc_parent = argparse.ArgumentParser(add_help=False)
    mc_parent.add_argument("--seed", type=int, default=0, help="master RNG seed")
    mc_parent.add_argument("--workers", type=int, default=1, help="parallel sampling workers")
    mc_parent.add_argument(
        "--constant-override",
        type=float,
        default=DEFAULT_SAMPLE_CONSTANT,
        help="leading constant in the walk-round count (default %(default)s)",
    )

    sub.add_parser("validate", parents=[io_parent], help="check the boundary-problem conditions")

    sub.add_parser("solve-exact", parents=[io_parent], help="exact local solution via the Green's function")

    p = sub.add_parser("solve-local", parents=[io_parent, mc_parent],
                       help="sampled solver with the exact heat-kernel backend")
    p.add_argument("--gamma", type=float, required=True, help="solver error parameter in (0,1)")

    p = sub.add_parser("solve-greens", parents=[io_parent, mc_parent],
                       help="sampled solver with the random-walk backend")
    p.add_argument("--gamma", type=float, required=True, help="solver error parameter in (0,1)")
    p.add_argument("--eps", type=float, required=True, help="walk-estimator error parameter, >= gamma")
    p.add_argument("--restricted-range", action="store_true",
                   help="skip samples past the decay threshold t'")

    p = sub.add_parser("hkpr-exact", parents=[io_parent],
                       help="exact heat kernel pagerank of b2 at one t (CSV)")
    p.add_argument("--t", type=float, required=True, help="heat parameter t >= 0")

    p = sub.add_parser("hkpr-approx", parents=[io_parent, mc_parent],
                       help="walk-estimated heat kernel pagerank of b2 at one t (CSV)")
    p.add_argument("--t", type=float, required=True, help="heat parameter t > 0")
    p.add_argument("--eps", type=float, required=True, help="estimator error parameter in (0,1)")

    p = sub.add_parser("sweep-norms", parents=[io_parent],
                       help="CSV of L1 norm and max |entry| of exact pagerank over a log t-grid")
    p.add_argument("--gamma", type=float, default=0.01,
                   help="sets the grid ceiling T (default %(default)s)")
    p.add_argument("--points", type=int, default=200, help="grid size (default %(default)s)")
    return parser


_HANDLERS = {
    "validate": _cmd_validate,
    "solve-exact": _cmd_solve_exact,
    "solve-local": _cmd_solve_local,
    "solve-greens": _cmd_solve_greens,
    "hkpr-exact": _cmd_hkpr_exact,
    "hkpr-approx": _cmd_hkpr_approx,
    "sweep-norms": _cmd_sweep_norms,
}


def run(argv: list[str] | None = None) -> int:
    """Parse arguments and execute one command; returns the exit code."""
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except BoundaryConditionError as exc:
        doc = {
            "format_version": 1,
            "command": args.command,
            "valid": False,
            "violations": exc.violations,
        }
        _emit(_json_doc(doc), getattr(args, "out", None))
        log.error("invalid boundary problem: %s", exc)
        return EXIT_INVALID
    except (GraphFormatError, OSError, CapacityError, MemoryError) as exc:
        log.error("%s", exc)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_ERROR
    except ValueError as exc:
        log.error("%s", exc)
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
