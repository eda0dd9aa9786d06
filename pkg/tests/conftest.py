"""Shared fixtures: tiny path graphs, the bundled dolphin network, random
problem generators, and the independent oracles used across the suite."""

from __future__ import annotations

import math

import numpy as np
import pytest

import hklocal as hk
from hklocal.fixtures import (
    dolphins_boundary_path,
    dolphins_graph_path,
    dolphins_subset_path,
)

P3_EDGES = "0 1\n1 2\n"
P4_EDGES = "0 1\n1 2\n2 3\n"


@pytest.fixture(scope="session")
def p3_graph() -> hk.Graph:
    return hk.load_graph(P3_EDGES)


@pytest.fixture(scope="session")
def p4_graph() -> hk.Graph:
    return hk.load_graph(P4_EDGES)


@pytest.fixture(scope="session")
def p3_problem(p3_graph) -> hk.BoundaryProblem:
    subset = hk.VertexSubset.from_iterable([1], p3_graph.n)
    return hk.make_boundary_problem(p3_graph, {0: 1.0, 2: 1.0}, subset)


@pytest.fixture(scope="session")
def p4_problem(p4_graph) -> hk.BoundaryProblem:
    subset = hk.VertexSubset.from_iterable([1, 2], p4_graph.n)
    return hk.make_boundary_problem(p4_graph, {0: 1.0}, subset)


@pytest.fixture(scope="session")
def dolphins_graph() -> hk.Graph:
    return hk.load_graph_file(dolphins_graph_path())


@pytest.fixture(scope="session")
def dolphins_problem(dolphins_graph) -> hk.BoundaryProblem:
    subset = hk.load_subset(dolphins_subset_path().read_text(), dolphins_graph)
    b = hk.load_boundary(dolphins_boundary_path().read_text(), dolphins_graph)
    return hk.make_boundary_problem(dolphins_graph, b, subset)


def random_connected_graph(rng: np.random.Generator, n: int, extra_edges: int | None = None) -> hk.Graph:
    """Random connected graph: random recursive tree plus extra random edges."""
    edges = set()
    for v in range(1, n):
        edges.add((int(rng.integers(v)), v))
    if extra_edges is None:
        extra_edges = int(rng.integers(0, n + 1))
    for _ in range(extra_edges):
        u, v = int(rng.integers(n)), int(rng.integers(n))
        if u != v:
            edges.add((min(u, v), max(u, v)))
    return hk.Graph.from_edges(edges)


def random_problem(
    rng: np.random.Generator,
    graph: hk.Graph,
    max_size: int | None = None,
    outside_support: bool = False,
) -> hk.BoundaryProblem:
    """Random admissible boundary problem on ``graph``.

    Grows a random connected subset, puts random nonzero values on a
    nonempty selection of its vertex boundary, and optionally adds support
    elsewhere outside S (which the folding must ignore).
    """
    n = graph.n
    limit = min(max_size or n - 1, n - 1)
    for _ in range(500):
        target = int(rng.integers(1, limit + 1))
        members = {int(rng.integers(n))}
        while len(members) < target:
            frontier = sorted(
                {int(u) for v in members for u in graph.neighbors(v)} - members
            )
            if not frontier:
                break
            members.add(int(frontier[int(rng.integers(len(frontier)))]))
        subset = hk.VertexSubset.from_iterable(members, n)
        delta = hk.vertex_boundary(graph, subset)
        if len(delta) == 0:
            continue
        k = int(rng.integers(1, len(delta) + 1))
        chosen = rng.choice(delta, size=k, replace=False)
        b = {
            int(v): float(rng.uniform(0.25, 2.0) * rng.choice([-1.0, 1.0]))
            for v in chosen
        }
        if outside_support:
            far = [
                v for v in range(n)
                if not subset.mask[v] and v not in set(int(x) for x in delta)
            ]
            if far:
                v = int(far[int(rng.integers(len(far)))])
                b[v] = float(rng.uniform(0.25, 2.0) * rng.choice([-1.0, 1.0]))
        if not hk.validate_b_boundable(graph, b, subset):
            return hk.make_boundary_problem(graph, b, subset)
    raise RuntimeError("could not generate an admissible random problem")


def harmonic_solve(problem: hk.BoundaryProblem) -> np.ndarray:
    """Independent oracle: assemble and solve the harmonic system directly.

    For every v in S the solution must equal the degree-weighted average of
    its neighbors' values, with boundary values fixed by b.  Assembled by
    literal adjacency loops and solved with an LU factorization, so it
    shares nothing with the eigendecomposition path.
    """
    graph, subset, b = problem.graph, problem.subset, problem.b
    s = subset.size
    system = np.zeros((s, s))
    rhs = np.zeros(s)
    for i, v in enumerate(subset.members):
        v = int(v)
        system[i, i] = 1.0
        for u in graph.neighbors(v):
            u = int(u)
            w = 1.0 / math.sqrt(graph.degrees[v] * graph.degrees[u])
            if subset.mask[u]:
                system[i, subset.local_of[u]] -= w
            else:
                rhs[i] += float(b.get(u, 0.0)) * w
    return np.linalg.solve(system, rhs)


def is_eps_approx(estimate: np.ndarray, truth: np.ndarray, eps: float) -> bool:
    """Relative error <= eps on reported entries; zeros only where truth <= eps."""
    for est, true in zip(estimate, truth):
        if est != 0.0:
            if abs(true - est) > eps * abs(true):
                return False
        elif abs(true) > eps:
            return False
    return True
