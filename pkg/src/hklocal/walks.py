"""Dirichlet random walks and Monte-Carlo heat-kernel pagerank estimators.

Walks use full-graph transition probabilities and are aborted the moment
they step outside the subset; aborted walks contribute nothing.  Every
sampling round draws from its own counter-based substream keyed by
(master seed, phase, sample index), so results are bit-identical for any
worker count and any execution order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .graph import Graph, VertexSubset

__all__ = [
    "WalkConfig",
    "SignedSplit",
    "WalkStats",
    "substream",
    "sample_count",
    "walk_cap",
    "split_signed",
    "sample_poisson",
    "dirichlet_walk",
    "approx_dirhkpr",
    "solver_approx_dirhkpr",
    "DEFAULT_SAMPLE_CONSTANT",
]

DEFAULT_SAMPLE_CONSTANT = 16.0

# Substream phases.  Positive/negative walk rounds are independent of each
# other and of the solver-level draws.
PHASE_POSITIVE = 0
PHASE_NEGATIVE = 1
PHASE_SCHEDULE = 2

CapMode = Literal["eps", "two_t", "none"]


def substream(master_seed: int, phase: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for one sampling round."""
    key = np.array([master_seed & 0xFFFFFFFFFFFFFFFF, (phase << 56) | index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_count(epsilon: float, n: int, constant: float = DEFAULT_SAMPLE_CONSTANT) -> int:
    """Number of walk rounds per signed part: ceil((c / eps^3) * ln n)."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if n < 2:
        return 1
    return max(1, math.ceil(constant / epsilon**3 * math.log(n)))


def walk_cap(t: float, epsilon: float, mode: CapMode) -> int | None:
    """Walk-length cap: floor(t/eps), floor(2t), or None (uncapped)."""
    if mode == "eps":
        return int(math.floor(t / epsilon))
    if mode == "two_t":
        return int(math.floor(2.0 * t))
    if mode == "none":
        return None
    raise ValueError(f"unknown cap mode {mode!r}")


@dataclass(frozen=True)
class WalkConfig:
    """Resolved sampling parameters for one estimator call."""

    t: float
    epsilon: float
    cap_mode: CapMode
    cap: int | None
    r: int
    master_seed: int

    @classmethod
    def from_params(
        cls,
        t: float,
        epsilon: float,
        n: int,
        master_seed: int,
        cap_mode: CapMode = "eps",
        constant: float = DEFAULT_SAMPLE_CONSTANT,
    ) -> "WalkConfig":
        if t <= 0:
            raise ValueError(f"t must be positive, got {t}")
        return cls(
            t=float(t),
            epsilon=float(epsilon),
            cap_mode=cap_mode,
            cap=walk_cap(t, epsilon, cap_mode),
            r=sample_count(epsilon, n, constant),
            master_seed=int(master_seed),
        )


@dataclass(frozen=True)
class SignedSplit:
    """Entrywise split f = f_plus - f_minus with disjoint supports."""

    f_plus: np.ndarray
    f_minus: np.ndarray
    norm_plus: float
    norm_minus: float


def split_signed(f: np.ndarray) -> SignedSplit:
    f = np.asarray(f, dtype=np.float64)
    plus = np.where(f > 0.0, f, 0.0)
    minus = np.where(f < 0.0, -f, 0.0)
    return SignedSplit(
        f_plus=plus,
        f_minus=minus,
        norm_plus=float(plus.sum()),
        norm_minus=float(minus.sum()),
    )


@dataclass
class WalkStats:
    """Instrumentation counters for walk simulation."""

    walks_started: int = 0
    steps_simulated: int = 0
    walks_aborted: int = 0

    def merge(self, other: "WalkStats") -> None:
        self.walks_started += other.walks_started
        self.steps_simulated += other.steps_simulated
        self.walks_aborted += other.walks_aborted


def sample_poisson(t: float, rng: np.random.Generator) -> int:
    """Draw a Poisson(t) walk length; t = 0 is the degenerate point mass at 0."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    return int(rng.poisson(t))


def dirichlet_walk(
    graph: Graph,
    subset: VertexSubset,
    start: int,
    k: int,
    rng: np.random.Generator,
    stats: WalkStats | None = None,
) -> int | None:
    """Run k uniform-neighbor steps from ``start``; abort on leaving S.

    Returns the terminal vertex if every visited vertex stays in S, else
    None.  k = 0 returns the start vertex.  ``start`` must belong to S.
    """
    if start not in subset:
        raise ValueError(f"walk start {start} is not in the subset")
    indptr = graph.indptr
    indices = graph.indices
    mask = subset.mask
    if stats is not None:
        stats.walks_started += 1
    cur = int(start)
    for _ in range(k):
        lo = indptr[cur]
        nxt = int(indices[lo + rng.integers(indptr[cur + 1] - lo)])
        if stats is not None:
            stats.steps_simulated += 1
        if not mask[nxt]:
            if stats is not None:
                stats.walks_aborted += 1
            return None
        cur = nxt
    return cur


def _phase_rounds(
    graph: Graph,
    subset: VertexSubset,
    t: float,
    cap: int | None,
    cdf: np.ndarray,
    support_local: np.ndarray,
    master_seed: int,
    phase: int,
    lo: int,
    hi: int,
) -> tuple[np.ndarray, WalkStats]:
    """Rounds [lo, hi) of one signed phase; returns terminal-vertex counts."""
    counts = np.zeros(subset.size, dtype=np.int64)
    stats = WalkStats()
    members = subset.members
    local_of = subset.local_of
    for i in range(lo, hi):
        rng = substream(master_seed, phase, i)
        pick = int(np.searchsorted(cdf, rng.random(), side="right"))
        start = int(members[support_local[min(pick, len(support_local) - 1)]])
        k = sample_poisson(t, rng)
        if cap is not None:
            k = min(k, cap)
        terminal = dirichlet_walk(graph, subset, start, k, rng, stats)
        if terminal is not None:
            counts[local_of[terminal]] += 1
    return counts, stats


def _run_phase(
    graph: Graph,
    subset: VertexSubset,
    t: float,
    cap: int | None,
    part: np.ndarray,
    norm: float,
    r: int,
    master_seed: int,
    phase: int,
    workers: int,
) -> tuple[np.ndarray, WalkStats]:
    support_local = np.flatnonzero(part)
    cdf = np.cumsum(part[support_local]) / norm
    if workers <= 1 or r < 2 * workers:
        return _phase_rounds(
            graph, subset, t, cap, cdf, support_local, master_seed, phase, 0, r
        )
    bounds = np.linspace(0, r, workers + 1, dtype=int)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(
                _phase_rounds,
                graph, subset, t, cap, cdf, support_local, master_seed, phase,
                int(bounds[w]), int(bounds[w + 1]),
            )
            for w in range(workers)
        ]
        results = [f.result() for f in futures]
    counts = np.zeros(subset.size, dtype=np.int64)
    stats = WalkStats()
    for chunk_counts, chunk_stats in results:
        counts += chunk_counts
        stats.merge(chunk_stats)
    return counts, stats


def _mc_dirhkpr(
    graph: Graph,
    t: float,
    f: np.ndarray,
    subset: VertexSubset,
    epsilon: float,
    master_seed: int,
    cap_mode: CapMode,
    workers: int,
    constant: float,
    stats: WalkStats | None,
) -> np.ndarray:
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if t <= 0:
        raise ValueError(f"t must be positive, got {t}")
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (subset.size,):
        raise ValueError(f"preference vector has shape {f.shape}, expected ({subset.size},)")
    split = split_signed(f)
    if split.norm_plus == 0.0 and split.norm_minus == 0.0:
        raise ValueError("preference vector is identically zero")
    config = WalkConfig.from_params(t, epsilon, graph.n, master_seed, cap_mode, constant)
    rho = np.zeros(subset.size, dtype=np.float64)
    for phase, part, norm, sign in (
        (PHASE_POSITIVE, split.f_plus, split.norm_plus, 1.0),
        (PHASE_NEGATIVE, split.f_minus, split.norm_minus, -1.0),
    ):
        if norm == 0.0:
            continue
        counts, phase_stats = _run_phase(
            graph, subset, t, config.cap, part, norm, config.r,
            master_seed, phase, workers,
        )
        # Surviving walks each deposit the signed L1 mass of their part.
        rho += counts * (sign * norm / config.r)
        if stats is not None:
            stats.merge(phase_stats)
    return rho


def approx_dirhkpr(
    graph: Graph,
    t: float,
    f: np.ndarray,
    subset: VertexSubset,
    epsilon: float,
    master_seed: int,
    workers: int = 1,
    constant: float = DEFAULT_SAMPLE_CONSTANT,
    stats: WalkStats | None = None,
    cap_mode: CapMode = "eps",
) -> np.ndarray:
    """Monte-Carlo Dirichlet heat kernel pagerank with walk cap floor(t/eps).

    For each signed part of f, runs ceil((c/eps^3) ln n) Poisson-length
    Dirichlet walks started from the normalized part and deposits the part's
    L1 mass (negated for the negative part) at each surviving terminal
    vertex, then divides by the round count.  The zero vector is a valid
    output when every walk aborts.

    Parameters
    ----------
    epsilon : accuracy/confidence knob in (0, 1).
    master_seed : 64-bit stream key; fixed seed gives bit-identical output
        for any ``workers`` value.
    cap_mode : test hook; "none" removes the length cap.
    """
    return _mc_dirhkpr(
        graph, t, f, subset, epsilon, master_seed, cap_mode, workers, constant, stats
    )


def solver_approx_dirhkpr(
    graph: Graph,
    t: float,
    f: np.ndarray,
    subset: VertexSubset,
    epsilon: float,
    master_seed: int,
    workers: int = 1,
    constant: float = DEFAULT_SAMPLE_CONSTANT,
    stats: WalkStats | None = None,
) -> np.ndarray:
    """Solver variant of :func:`approx_dirhkpr` with walk cap floor(2t).

    Intended for t drawn from a solver schedule; the caller is responsible
    for keeping epsilon at or above the schedule's gamma.
    """
    return _mc_dirhkpr(
        graph, t, f, subset, epsilon, master_seed, "two_t", workers, constant, stats
    )
