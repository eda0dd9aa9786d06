"""Simple undirected graphs, vertex subsets, and boundary-condition machinery.

Graphs are stored in compressed sparse adjacency form.  Vertex ids appearing
in input files may be arbitrary non-negative integers; they are compacted to
``[0, n)`` internally and the original ids are kept for reporting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Mapping

import numpy as np

__all__ = [
    "Graph",
    "VertexSubset",
    "BoundaryProblem",
    "GraphFormatError",
    "BoundaryConditionError",
    "load_graph",
    "load_graph_file",
    "load_subset",
    "load_boundary",
    "vertex_boundary",
    "edge_boundary",
    "is_connected_induced",
    "validate_b_boundable",
    "make_boundary_problem",
    "compute_b1",
    "compute_b2",
    "write_edge_list",
]


class GraphFormatError(ValueError):
    """Malformed edge-list, subset, or boundary-vector input."""


class BoundaryConditionError(ValueError):
    """The triple (graph, b, S) is not a valid boundary problem.

    Carries the individual violation messages in ``violations``.
    """

    def __init__(self, violations: list[str]):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph with a degree table.

    ``edges`` holds each undirected edge once as a (u, v) row with u < v in
    compact ids.  ``indptr``/``indices`` are the usual CSR neighbor lists,
    sorted per vertex.  Construction is single-threaded; instances are safe
    for unrestricted concurrent reads afterwards.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    degrees: np.ndarray
    original_ids: np.ndarray
    _compact: dict[int, int] = field(repr=False, compare=False, default_factory=dict)

    @classmethod
    def from_edges(
        cls,
        pairs: Iterable[tuple[int, int]],
        vertex_ids: Iterable[int] | None = None,
    ) -> "Graph":
        """Build a graph from (u, v) pairs given in original ids.

        Self-loops are rejected; duplicate pairs (in either orientation)
        collapse to a single edge.  ``vertex_ids`` may list extra isolated
        vertices to keep in storage.
        """
        seen: set[tuple[int, int]] = set()
        ids: set[int] = set(int(v) for v in vertex_ids) if vertex_ids else set()
        for u, v in pairs:
            u, v = int(u), int(v)
            if u < 0 or v < 0:
                raise GraphFormatError(f"negative vertex id in edge ({u}, {v})")
            if u == v:
                raise GraphFormatError(f"self-loop at vertex {u}")
            seen.add((u, v) if u < v else (v, u))
            ids.add(u)
            ids.add(v)
        original = np.array(sorted(ids), dtype=np.int64)
        compact = {int(orig): i for i, orig in enumerate(original)}
        n = len(original)
        m = len(seen)
        edges = np.zeros((m, 2), dtype=np.int64)
        for row, (u, v) in enumerate(sorted(seen)):
            cu, cv = compact[u], compact[v]
            edges[row] = (cu, cv) if cu < cv else (cv, cu)
        order = np.lexsort((edges[:, 1], edges[:, 0])) if m else np.array([], dtype=np.int64)
        edges = edges[order]
        degrees = np.zeros(n, dtype=np.int64)
        if m:
            np.add.at(degrees, edges[:, 0], 1)
            np.add.at(degrees, edges[:, 1], 1)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(degrees, out=indptr[1:])
        indices = np.zeros(2 * m, dtype=np.int64)
        cursor = indptr[:-1].copy()
        for u, v in edges:
            indices[cursor[u]] = v
            cursor[u] += 1
            indices[cursor[v]] = u
            cursor[v] += 1
        for v in range(n):
            indices[indptr[v]:indptr[v + 1]].sort()
        return cls(
            n=n,
            edges=_frozen(edges),
            indptr=_frozen(indptr),
            indices=_frozen(indices),
            degrees=_frozen(degrees),
            original_ids=_frozen(original),
            _compact=compact,
        )

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def has_edge(self, u: int, v: int) -> bool:
        nb = self.neighbors(u)
        i = np.searchsorted(nb, v)
        return i < len(nb) and nb[i] == v

    def compact_id(self, original: int) -> int:
        try:
            return self._compact[int(original)]
        except KeyError:
            raise GraphFormatError(f"unknown vertex id {original}") from None

    def original_id(self, v: int) -> int:
        return int(self.original_ids[v])


def load_graph(source: str | IO[str]) -> Graph:
    """Parse a whitespace-separated edge list into a :class:`Graph`.

    One ``u v`` pair per line; blank lines and lines starting with ``#`` are
    ignored.  Duplicate and reversed-duplicate edge lines collapse.

    Raises
    ------
    GraphFormatError
        On self-loops, non-integer tokens, or malformed lines, with the
        offending line number.
    """
    if isinstance(source, str):
        lines = source.splitlines()
    else:
        lines = source.read().splitlines()
    pairs: list[tuple[int, int]] = []
    for ln, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphFormatError(f"line {ln}: expected two vertex ids, got {len(tokens)} tokens")
        try:
            u, v = int(tokens[0]), int(tokens[1])
        except ValueError:
            raise GraphFormatError(f"line {ln}: non-integer vertex id in {tokens!r}") from None
        if u < 0 or v < 0:
            raise GraphFormatError(f"line {ln}: negative vertex id")
        if u == v:
            raise GraphFormatError(f"line {ln}: self-loop at vertex {u}")
        pairs.append((u, v))
    return Graph.from_edges(pairs)


def load_graph_file(path: str | Path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return load_graph(fh)


def write_edge_list(graph: Graph, stream: IO[str]) -> None:
    """Serialize a graph as 'u v' lines in original ids (canonical order)."""
    for u, v in graph.edges:
        stream.write(f"{graph.original_id(int(u))} {graph.original_id(int(v))}\n")


@dataclass(frozen=True)
class VertexSubset:
    """A validated vertex subset with local/global index maps.

    ``members`` is sorted and duplicate-free; ``local_of`` maps a compact
    vertex id to its position in ``members`` and round-trips exactly.
    """

    members: np.ndarray
    n: int
    mask: np.ndarray = field(repr=False, compare=False)
    local_of: dict[int, int] = field(repr=False, compare=False)

    @classmethod
    def from_iterable(cls, vertices: Iterable[int], n: int) -> "VertexSubset":
        members = sorted(int(v) for v in vertices)
        if members and (members[0] < 0 or members[-1] >= n):
            raise ValueError(f"subset vertex out of range [0, {n})")
        if len(set(members)) != len(members):
            raise ValueError("duplicate vertex in subset")
        arr = _frozen(np.array(members, dtype=np.int64))
        mask = np.zeros(n, dtype=bool)
        mask[arr] = True
        return cls(
            members=arr,
            n=n,
            mask=_frozen(mask),
            local_of={int(v): i for i, v in enumerate(members)},
        )

    @property
    def size(self) -> int:
        return len(self.members)

    def local_index(self, v: int) -> int:
        return self.local_of[int(v)]

    def global_of(self, i: int) -> int:
        return int(self.members[i])

    def __contains__(self, v: int) -> bool:
        return 0 <= v < self.n and bool(self.mask[v])


def load_subset(source: str | IO[str], graph: Graph) -> VertexSubset:
    """Read one original vertex id per line into a :class:`VertexSubset`."""
    if not isinstance(source, str):
        source = source.read()
    members = []
    seen = set()
    for ln, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            orig = int(line)
        except ValueError:
            raise GraphFormatError(f"line {ln}: non-integer vertex id {line!r}") from None
        v = graph.compact_id(orig)
        if v in seen:
            raise GraphFormatError(f"line {ln}: duplicate subset vertex {orig}")
        seen.add(v)
        members.append(v)
    return VertexSubset.from_iterable(members, graph.n)


def load_boundary(source: str | IO[str], graph: Graph) -> dict[int, float]:
    """Read 'vertex_id value' lines into a sparse boundary vector.

    Values are decimal reals and may be negative.  Keys are compact ids.
    """
    if not isinstance(source, str):
        source = source.read()
    b: dict[int, float] = {}
    for ln, raw in enumerate(source.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphFormatError(f"line {ln}: expected 'vertex_id value'")
        try:
            orig = int(tokens[0])
            value = float(tokens[1])
        except ValueError:
            raise GraphFormatError(f"line {ln}: could not parse {raw!r}") from None
        v = graph.compact_id(orig)
        if v in b:
            raise GraphFormatError(f"line {ln}: duplicate boundary entry for vertex {orig}")
        b[v] = value
    return b


def vertex_boundary(graph: Graph, subset: VertexSubset) -> np.ndarray:
    """Vertices outside S adjacent to at least one member of S (sorted)."""
    hit = np.zeros(graph.n, dtype=bool)
    for v in subset.members:
        nb = graph.neighbors(int(v))
        outside = nb[~subset.mask[nb]]
        hit[outside] = True
    return np.flatnonzero(hit).astype(np.int64)


def edge_boundary(graph: Graph, subset: VertexSubset) -> np.ndarray:
    """Edges with exactly one endpoint in S, as canonical (u, v) rows, u < v."""
    if subset.size == 0 or len(graph.edges) == 0:
        return np.zeros((0, 2), dtype=np.int64)
    em = subset.mask[graph.edges]
    crossing = em[:, 0] ^ em[:, 1]
    return graph.edges[crossing]


def is_connected_induced(graph: Graph, subset: VertexSubset) -> bool:
    """True iff the subgraph induced on S is connected (singletons count)."""
    s = subset.size
    if s == 0:
        return False
    if s == 1:
        return True
    root = int(subset.members[0])
    seen = {root}
    stack = [root]
    while stack:
        v = stack.pop()
        for u in graph.neighbors(v):
            u = int(u)
            if subset.mask[u] and u not in seen:
                seen.add(u)
                stack.append(u)
    return len(seen) == s


def validate_b_boundable(
    graph: Graph, b: Mapping[int, float], subset: VertexSubset
) -> list[str]:
    """Check the boundary-problem preconditions; return violation messages.

    An empty list means (graph, b, S) is admissible: the support of b avoids
    S, the vertex boundary of S meets the support of b, and the induced
    subgraph on S is connected with a nonempty vertex boundary.
    """
    violations: list[str] = []
    support = {int(v) for v, value in b.items() if value != 0.0}
    if not support:
        violations.append("trivial boundary vector (no nonzero entries)")
        return violations
    overlap = sorted(v for v in support if v in subset)
    if overlap:
        violations.append(f"condition (i) violated: supp(b) intersects S at {overlap}")
    delta = vertex_boundary(graph, subset)
    delta_set = set(int(v) for v in delta)
    if not (support & delta_set):
        violations.append("condition (ii) violated: vertex boundary of S is disjoint from supp(b)")
    if not is_connected_induced(graph, subset):
        violations.append("condition (iii) violated: induced subgraph on S is not connected")
    elif len(delta) == 0:
        violations.append("condition (iii) violated: vertex boundary of S is empty")
    isolated = sorted(int(v) for v in subset.members if graph.degrees[v] == 0)
    if isolated:
        violations.append(f"isolated vertices in S (degree 0): {isolated}")
    return violations


def compute_b1(
    graph: Graph,
    b: Mapping[int, float],
    subset: VertexSubset,
    delta: np.ndarray | None = None,
) -> np.ndarray:
    """Fold the boundary values into S: b1(v) = sum over boundary neighbors
    u of b(u) / sqrt(d_v * d_u), with degrees taken in the full graph.

    Only entries of b on the vertex boundary of S contribute; runtime is
    proportional to the edge boundary.
    """
    if delta is None:
        delta = vertex_boundary(graph, subset)
    delta_set = set(int(v) for v in delta)
    b1 = np.zeros(subset.size, dtype=np.float64)
    for u in sorted(int(k) for k in b.keys()):
        value = float(b[u])
        if value == 0.0 or u not in delta_set:
            continue
        du = float(graph.degrees[u])
        for v in graph.neighbors(u):
            v = int(v)
            if subset.mask[v]:
                b1[subset.local_of[v]] += value / math.sqrt(graph.degrees[v] * du)
    return b1


def compute_b2(b1: np.ndarray, graph: Graph, subset: VertexSubset) -> np.ndarray:
    """Degree-weighted companion of b1: b2(v) = b1(v) * sqrt(d_v)."""
    return b1 * np.sqrt(graph.degrees[subset.members].astype(np.float64))


@dataclass(frozen=True)
class BoundaryProblem:
    """A graph, a boundary vector b, and an admissible subset S.

    Holds the derived quantities used by every solver: the vertex boundary
    ``delta_s``, the edge boundary ``partial_s``, and the folded boundary
    vectors ``b1`` and ``b2`` over S (in local index order).
    """

    graph: Graph
    b: Mapping[int, float]
    subset: VertexSubset
    delta_s: np.ndarray
    partial_s: np.ndarray
    b1: np.ndarray
    b2: np.ndarray

    @property
    def degrees_s(self) -> np.ndarray:
        return self.graph.degrees[self.subset.members]


def make_boundary_problem(
    graph: Graph, b: Mapping[int, float], subset: VertexSubset
) -> BoundaryProblem:
    """Validate (graph, b, S) and assemble the derived boundary vectors.

    Raises
    ------
    BoundaryConditionError
        Listing every violated admissibility condition.
    """
    violations = validate_b_boundable(graph, b, subset)
    if violations:
        raise BoundaryConditionError(violations)
    delta = vertex_boundary(graph, subset)
    b1 = compute_b1(graph, b, subset, delta)
    b2 = compute_b2(b1, graph, subset)
    return BoundaryProblem(
        graph=graph,
        b=dict(b),
        subset=subset,
        delta_s=_frozen(delta),
        partial_s=_frozen(edge_boundary(graph, subset)),
        b1=_frozen(b1),
        b2=_frozen(b2),
    )
