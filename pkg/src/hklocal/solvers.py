"""Sampling schedules and the local linear solvers.

Two backends approximate the local solution x_S = G b1 by sampling
heat-kernel pagerank vectors at random times: an exact backend that
evaluates each sample through the eigenbasis, and a Monte-Carlo backend
that estimates each sample with capped Dirichlet random walks.  A closed
form Riemann-sum reference and the error-bound bookkeeping live here too.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dirichlet import (
    DirichletOperator,
    estimate_lambda1,
    exact_dirhkpr,
    restricted_operator,
)
from .graph import BoundaryProblem
from .walks import (
    DEFAULT_SAMPLE_CONSTANT,
    PHASE_SCHEDULE,
    WalkStats,
    solver_approx_dirhkpr,
    substream,
)

__all__ = [
    "SolverSchedule",
    "SolveReport",
    "make_schedule",
    "draw_t",
    "riemann_sum_solution",
    "local_linear_solver",
    "greens_solver",
    "error_bound",
    "restricted_threshold",
    "report_to_json",
]

_DIRECT_SUM_LIMIT = 50_000_000  # s * floor(N) guard for the literal Riemann loop


@dataclass(frozen=True)
class SolverSchedule:
    """Derived sampling parameters for a subset of size s.

    T is the integration horizon s^3 ln(s^3 / gamma), N = T / gamma the
    discretization count, and r_outer = ceil(ln(s / gamma) / gamma^2) the
    number of sampled times.  The time grid is the multiples of gamma up to
    floor(N) of them.
    """

    gamma: float
    epsilon: float | None
    s: int
    T: float
    N: float
    floor_n: int
    r_outer: int
    t_prime: float | None
    master_seed: int

    @property
    def step(self) -> float:
        return self.gamma


def restricted_threshold(lambda1: float, epsilon: float) -> float:
    """Time beyond which heat-kernel pagerank entries sink below epsilon.

    Conservative cutoff ln(1/epsilon) / lambda1; sampled times past it can
    be skipped and treated as zero vectors.
    """
    if lambda1 <= 0:
        raise ValueError(f"lambda1 must be positive, got {lambda1}")
    if not 0.0 < epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    return math.log(1.0 / epsilon) / lambda1


def make_schedule(
    s: int,
    gamma: float,
    epsilon: float | None = None,
    seed: int = 0,
    lambda1: float | None = None,
) -> SolverSchedule:
    """Build the sampling schedule for a subset of size s.

    ``epsilon`` is only needed for the Monte-Carlo backend and must be at
    least ``gamma`` there; the walk-length cap analysis breaks down below
    that.  ``lambda1``, when known, fixes the restricted-range threshold.
    """
    if s < 1:
        raise ValueError(f"subset size must be positive, got {s}")
    if not 0.0 < gamma < 1.0:
        raise ValueError(f"gamma must lie in (0, 1), got {gamma}")
    if epsilon is not None:
        if not 0.0 < epsilon < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
        if epsilon < gamma:
            raise ValueError(
                f"epsilon ({epsilon}) must be at least gamma ({gamma}): the sampled-time "
                "walk estimator only guarantees its accuracy for epsilon >= gamma"
            )
    cube = float(s) ** 3
    T = cube * math.log(cube / gamma)
    N = T / gamma
    if math.floor(N) < 1:
        raise ValueError(f"empty time grid: floor(N) = 0 for s = {s}, gamma = {gamma}")
    r_outer = math.ceil(math.log(s / gamma) / gamma**2)
    t_prime = None
    if lambda1 is not None and epsilon is not None:
        t_prime = restricted_threshold(lambda1, epsilon)
    return SolverSchedule(
        gamma=gamma,
        epsilon=epsilon,
        s=s,
        T=T,
        N=N,
        floor_n=int(math.floor(N)),
        r_outer=r_outer,
        t_prime=t_prime,
        master_seed=int(seed),
    )


def draw_t(schedule: SolverSchedule, rng: np.random.Generator) -> float:
    """Sample t = j * gamma with j uniform on the integers [1, floor(N)]."""
    j = int(rng.integers(1, schedule.floor_n + 1))
    return j * schedule.step


@dataclass
class SolveReport:
    """Result of one solver run plus the bookkeeping the CLI serializes."""

    x_hat: np.ndarray
    sampled_ts: np.ndarray
    walk_steps_total: int
    elapsed: float
    error_bound_terms: dict[str, float | None]
    schedule: SolverSchedule
    method: str
    walks_started: int = 0
    walks_aborted: int = 0
    samples_skipped: int = 0


def _riemann_direct(op: DirichletOperator, b2: np.ndarray, schedule: SolverSchedule) -> np.ndarray:
    if op.s * schedule.floor_n > _DIRECT_SUM_LIMIT:
        raise MemoryError(
            f"direct Riemann sum needs {schedule.floor_n} kernel evaluations on s = {op.s}; "
            "use the geometric mode"
        )
    acc = np.zeros(op.s, dtype=np.float64)
    for j in range(1, schedule.floor_n + 1):
        acc += exact_dirhkpr(op, j * schedule.step, b2)
    return acc * schedule.step * op.inv_sqrt_degrees


def _riemann_geometric(op: DirichletOperator, b1: np.ndarray, schedule: SolverSchedule) -> np.ndarray:
    # step * sum_{j=1..floor(N)} exp(-lambda * j * step), summed per eigenvalue
    # in closed form.  Identical to the literal sum up to roundoff.
    lam = op.eigenvalues
    q_log = -lam * schedule.step
    denom = -np.expm1(q_log)
    series = np.exp(q_log) * (-np.expm1(q_log * schedule.floor_n)) / denom
    y = op.eigenvectors.T @ b1
    return op.eigenvectors @ (series * schedule.step * y)


def riemann_sum_solution(
    problem: BoundaryProblem,
    schedule: SolverSchedule,
    operator: DirichletOperator | None = None,
    mode: str = "geometric",
) -> np.ndarray:
    """Right Riemann sum of the heat-kernel integral for x_S on the schedule grid.

    Satisfies ||x_S - x_rie|| <= gamma * (||b1|| + ||x_S||).  The default
    geometric mode sums each eigencomponent in closed form (O(s^3) total);
    ``mode="direct"`` evaluates every grid point and is capacity-guarded.
    """
    op = operator if operator is not None else restricted_operator(problem.graph, problem.subset)
    if mode == "geometric":
        return _riemann_geometric(op, problem.b1, schedule)
    if mode == "direct":
        return _riemann_direct(op, problem.b2, schedule)
    raise ValueError(f"unknown mode {mode!r}")


def _collect_rows(compute_row, r: int, s: int, workers: int) -> np.ndarray:
    """Fill an (r, s) array with per-sample rows, chunked across workers.

    Rows land at their own index, so the fixed-order reduction afterwards is
    identical for every worker count.
    """
    rows = np.zeros((r, s), dtype=np.float64)

    def run_chunk(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            rows[i] = compute_row(i)

    if workers <= 1 or r < 2 * workers:
        run_chunk(0, r)
    else:
        bounds = np.linspace(0, r, workers + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(run_chunk, int(bounds[w]), int(bounds[w + 1]))
                for w in range(workers)
            ]
            for f in futures:
                f.result()
    return rows


def local_linear_solver(
    problem: BoundaryProblem,
    gamma: float,
    seed: int,
    workers: int = 1,
    operator: DirichletOperator | None = None,
) -> SolveReport:
    """Approximate x_S by averaging exact heat-kernel pagerank samples.

    Draws r_outer times t uniformly from the schedule grid, evaluates the
    exact pagerank of b2 at each, and returns (T / r) times the accumulated
    sum carried back through D^{-1/2}.  With probability at least
    1 - gamma the error is within gamma * (||b1|| + ||x_S|| + ||x_rie||).
    """
    start = time.perf_counter()
    op = operator if operator is not None else restricted_operator(problem.graph, problem.subset)
    schedule = make_schedule(op.s, gamma, seed=seed, lambda1=op.lambda1)
    ts = np.zeros(schedule.r_outer, dtype=np.float64)

    def row(i: int) -> np.ndarray:
        rng = substream(schedule.master_seed, PHASE_SCHEDULE, i)
        t = draw_t(schedule, rng)
        ts[i] = t
        return exact_dirhkpr(op, t, problem.b2)

    rows = _collect_rows(row, schedule.r_outer, op.s, workers)
    x_hat = (schedule.T / schedule.r_outer) * rows.sum(axis=0) * op.inv_sqrt_degrees
    return SolveReport(
        x_hat=x_hat,
        sampled_ts=ts,
        walk_steps_total=0,
        elapsed=time.perf_counter() - start,
        error_bound_terms=_bound_terms(problem, gamma, None),
        schedule=schedule,
        method="local-linear-solver",
    )


def greens_solver(
    problem: BoundaryProblem,
    gamma: float,
    epsilon: float,
    seed: int,
    restricted_range: bool = False,
    workers: int = 1,
    t_prime: float | None = None,
    constant: float = DEFAULT_SAMPLE_CONSTANT,
) -> SolveReport:
    """Monte-Carlo local solver: walk-based pagerank samples, cap floor(2t).

    Same sampling scheme as :func:`local_linear_solver` with each sample
    estimated by :func:`solver_approx_dirhkpr` under a fresh child seed.
    With ``restricted_range`` samples at t at or past the threshold t'
    contribute zero without simulating any walk.  Error is within
    gamma * (||b1|| + ||x_S|| + ||x_rie||) + epsilon * ||b2||_1 with
    probability at least 1 - gamma.
    """
    start = time.perf_counter()
    subset = problem.subset
    if t_prime is None and restricted_range:
        t_prime = restricted_threshold(
            estimate_lambda1(problem.graph, subset), epsilon
        )
    schedule = make_schedule(subset.size, gamma, epsilon=epsilon, seed=seed)
    ts = np.zeros(schedule.r_outer, dtype=np.float64)
    stats_by_sample = [WalkStats() for _ in range(schedule.r_outer)]
    skipped = np.zeros(schedule.r_outer, dtype=bool)

    def row(i: int) -> np.ndarray:
        rng = substream(schedule.master_seed, PHASE_SCHEDULE, i)
        t = draw_t(schedule, rng)
        ts[i] = t
        # Child seed is drawn whether or not the sample is skipped, so the
        # simulated samples match between restricted and full runs.
        child_seed = int(rng.integers(0, 2**63))
        if restricted_range and t_prime is not None and t >= t_prime:
            skipped[i] = True
            return np.zeros(subset.size, dtype=np.float64)
        return solver_approx_dirhkpr(
            problem.graph, t, problem.b2, subset, epsilon, child_seed,
            constant=constant, stats=stats_by_sample[i],
        )

    rows = _collect_rows(row, schedule.r_outer, subset.size, workers)
    inv_sqrt_deg = 1.0 / np.sqrt(problem.degrees_s.astype(np.float64))
    x_hat = (schedule.T / schedule.r_outer) * rows.sum(axis=0) * inv_sqrt_deg
    totals = WalkStats()
    for st in stats_by_sample:
        totals.merge(st)
    if restricted_range and t_prime is not None:
        schedule = replace(schedule, t_prime=t_prime)
    return SolveReport(
        x_hat=x_hat,
        sampled_ts=ts,
        walk_steps_total=totals.steps_simulated,
        elapsed=time.perf_counter() - start,
        error_bound_terms=_bound_terms(problem, gamma, epsilon),
        schedule=schedule,
        method="greens-solver",
        walks_started=totals.walks_started,
        walks_aborted=totals.walks_aborted,
        samples_skipped=int(skipped.sum()),
    )


def _bound_terms(problem: BoundaryProblem, gamma: float, epsilon: float | None) -> dict:
    return {
        "b1_norm": float(np.linalg.norm(problem.b1)),
        "b2_l1": float(np.abs(problem.b2).sum()),
        "gamma": float(gamma),
        "epsilon": None if epsilon is None else float(epsilon),
    }


def error_bound(
    report: SolveReport,
    x_s_norm: float,
    x_rie_norm: float,
) -> dict[str, float]:
    """Concrete error bounds from the run's terms and the oracle norms.

    ``local`` is gamma * (||b1|| + ||x_S|| + ||x_rie||); ``greens`` adds
    epsilon * ||b2||_1 on top (zero epsilon for the exact backend).
    """
    terms = report.error_bound_terms
    gamma = float(terms["gamma"])
    epsilon = terms.get("epsilon") or 0.0
    local = gamma * (float(terms["b1_norm"]) + float(x_s_norm) + float(x_rie_norm))
    return {"local": local, "greens": local + float(epsilon) * float(terms["b2_l1"])}


def report_to_json(report: SolveReport, problem: BoundaryProblem) -> dict:
    """JSON-ready view of a report; x_hat keyed by original vertex id."""
    graph = problem.graph
    subset = problem.subset
    x_hat = {
        str(graph.original_id(int(v))): float(report.x_hat[i])
        for i, v in enumerate(subset.members)
    }
    sched = report.schedule
    doc = {
        "format_version": 1,
        "method": report.method,
        "schedule": {
            "gamma": sched.gamma,
            "epsilon": sched.epsilon,
            "s": sched.s,
            "T": sched.T,
            "N": sched.N,
            "floor_n": sched.floor_n,
            "r_outer": sched.r_outer,
            "t_prime": sched.t_prime,
            "master_seed": sched.master_seed,
        },
        "x_hat": x_hat,
        "error_bound_terms": report.error_bound_terms,
        "instrumentation": {
            "walk_steps_total": report.walk_steps_total,
            "walks_started": report.walks_started,
            "walks_aborted": report.walks_aborted,
            "samples_skipped": report.samples_skipped,
        },
        "sampled_ts": [float(t) for t in report.sampled_ts],
        "elapsed_seconds": report.elapsed,
    }
    return doc
