"""Dense restricted operators, Dirichlet spectra, and exact heat-kernel solves.

This is the exact backend: the restricted normalized Laplacian and transition
matrix of a connected subset, their eigenstructure, the Green's function, and
the heat-kernel pagerank computed through the eigenbasis.  It doubles as the
oracle every Monte-Carlo component is tested against, so sizes are capped and
construction identities are checked eagerly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import IO

import numpy as np

from .graph import BoundaryProblem, Graph, VertexSubset, is_connected_induced, vertex_boundary

__all__ = [
    "DirichletOperator",
    "GreensFunction",
    "CapacityError",
    "SpectrumError",
    "DENSE_SIZE_LIMIT",
    "restricted_operator",
    "greens_function",
    "apply_heat_kernel",
    "exact_dirhkpr",
    "exact_local_solution",
    "estimate_lambda1",
    "dump_matrix_csv",
]

# The dense path is an oracle and small-system backend, not a scalable solver.
DENSE_SIZE_LIMIT = 4096

_EIGENVALUE_FLOOR = 1e-12
_RECONSTRUCTION_TOL = 1e-10
_SPECTRUM_SLACK = 1e-8


class CapacityError(RuntimeError):
    """Requested dense operation exceeds the configured size limit."""


class SpectrumError(RuntimeError):
    """Computed Dirichlet spectrum violates a structural guarantee."""


@dataclass(frozen=True)
class DirichletOperator:
    """Restricted operators over a subset S with eigendecomposition.

    ``laplacian`` is the s x s restriction of the normalized Laplacian (rows
    and columns of S, degrees from the full graph), ``transition`` the
    restricted random-walk matrix.  ``eigenvalues`` are ascending with
    orthonormal ``eigenvectors`` as columns.  Immutable; concurrent reads are
    safe.
    """

    subset: VertexSubset
    degrees: np.ndarray
    laplacian: np.ndarray
    transition: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt_degrees: np.ndarray
    inv_sqrt_degrees: np.ndarray

    @property
    def s(self) -> int:
        return len(self.degrees)

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])


@dataclass(frozen=True)
class GreensFunction:
    """Inverse of the restricted normalized Laplacian."""

    matrix: np.ndarray
    lambda1: float

    @property
    def spectral_norm(self) -> float:
        return 1.0 / self.lambda1


def _check_spectrum(eigenvalues: np.ndarray, s: int) -> None:
    lam1 = float(eigenvalues[0])
    lam_max = float(eigenvalues[-1])
    if lam1 <= _EIGENVALUE_FLOOR:
        raise SpectrumError(f"restricted Laplacian is numerically singular (lambda1 = {lam1:.3e})")
    if lam_max > 2.0 + _SPECTRUM_SLACK:
        raise SpectrumError(f"eigenvalue above 2: {lam_max!r}")
    if lam1 > 1.0 + _SPECTRUM_SLACK:
        raise SpectrumError(f"bottom eigenvalue above 1: {lam1!r}")
    # Strict lower bound s^-3 < lambda1; for s = 1 the spectrum is exactly
    # {1} so equality is accepted.
    floor = s ** -3
    if lam1 + _EIGENVALUE_FLOOR < floor:
        raise SpectrumError(f"bottom eigenvalue {lam1!r} below the size floor {floor!r}")


def restricted_operator(graph: Graph, subset: VertexSubset) -> DirichletOperator:
    """Assemble the dense restricted operators for S and eigendecompose.

    Requires the induced subgraph on S to be connected with a nonempty
    vertex boundary (otherwise the restriction may be singular) and every
    member to have positive degree.
    """
    s = subset.size
    if s == 0:
        raise ValueError("empty subset")
    if s > DENSE_SIZE_LIMIT:
        raise CapacityError(f"subset size {s} exceeds dense limit {DENSE_SIZE_LIMIT}")
    if not is_connected_induced(graph, subset):
        raise ValueError("induced subgraph on S is not connected")
    if len(vertex_boundary(graph, subset)) == 0:
        raise ValueError("vertex boundary of S is empty")
    degrees = graph.degrees[subset.members].astype(np.float64)
    if np.any(degrees == 0):
        raise ValueError("subset contains isolated vertices")
    lap = np.eye(s, dtype=np.float64)
    trans = np.zeros((s, s), dtype=np.float64)
    for i, v in enumerate(subset.members):
        for u in graph.neighbors(int(v)):
            u = int(u)
            if subset.mask[u]:
                j = subset.local_of[u]
                lap[i, j] = -1.0 / math.sqrt(degrees[i] * degrees[j])
                trans[i, j] = 1.0 / degrees[i]
    eigenvalues, eigenvectors = np.linalg.eigh(lap)
    _check_spectrum(eigenvalues, s)
    recon = (eigenvectors * eigenvalues) @ eigenvectors.T
    err = float(np.max(np.abs(recon - lap)))
    if err > _RECONSTRUCTION_TOL:
        raise SpectrumError(f"eigendecomposition residual {err:.3e} above {_RECONSTRUCTION_TOL}")
    return DirichletOperator(
        subset=subset,
        degrees=degrees,
        laplacian=lap,
        transition=trans,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        sqrt_degrees=np.sqrt(degrees),
        inv_sqrt_degrees=1.0 / np.sqrt(degrees),
    )


def greens_function(op: DirichletOperator) -> GreensFunction:
    """Green's function of S: sum of (1/lambda_i) times each eigenprojection."""
    if op.eigenvalues[0] <= _EIGENVALUE_FLOOR:
        raise SpectrumError("cannot invert: eigenvalue at or below the numerical floor")
    matrix = (op.eigenvectors / op.eigenvalues) @ op.eigenvectors.T
    return GreensFunction(matrix=matrix, lambda1=op.lambda1)


def apply_heat_kernel(op: DirichletOperator, t: float, f: np.ndarray) -> np.ndarray:
    """Symmetric heat-kernel action exp(-t * L_S) @ f through the eigenbasis."""
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    f = np.asarray(f, dtype=np.float64)
    if t == 0:
        return f.copy()
    y = op.eigenvectors.T @ f
    y *= np.exp(-t * op.eigenvalues)
    return op.eigenvectors @ y


def exact_dirhkpr(op: DirichletOperator, t: float, f: np.ndarray) -> np.ndarray:
    """Dirichlet heat kernel pagerank f^T exp(-t * (I - P_S)), exactly.

    Computed as D^{-1/2} exp(-t L_S) D^{1/2} applied on the left, i.e. the
    walk-normalized kernel.  ``f`` may have entries of any sign; no
    normalization is performed.  t = 0 returns f unchanged.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (op.s,):
        raise ValueError(f"preference vector has shape {f.shape}, expected ({op.s},)")
    if t == 0:
        return f.copy()
    return apply_heat_kernel(op, t, f * op.inv_sqrt_degrees) * op.sqrt_degrees


def exact_local_solution(
    problem: BoundaryProblem, operator: DirichletOperator | None = None
) -> np.ndarray:
    """Exact local solution over S: the Green's function applied to b1."""
    op = operator if operator is not None else restricted_operator(problem.graph, problem.subset)
    return greens_function(op).matrix @ problem.b1


def estimate_lambda1(
    graph: Graph,
    subset: VertexSubset,
    max_iterations: int = 20000,
    tol: float = 1e-12,
) -> float:
    """Estimate the bottom Dirichlet eigenvalue by power iteration.

    Runs power iteration on I - L_S / 2 using sparse matvecs only, so it
    works past the dense size limit.  The result is an estimate; with a
    small spectral gap convergence is slow and the value is an upper bound
    in practice.
    """
    s = subset.size
    if s == 0:
        raise ValueError("empty subset")
    degrees = graph.degrees[subset.members].astype(np.float64)
    if np.any(degrees == 0):
        raise ValueError("subset contains isolated vertices")
    rows: list[int] = []
    cols: list[int] = []
    weights: list[float] = []
    for i, v in enumerate(subset.members):
        for u in graph.neighbors(int(v)):
            u = int(u)
            if subset.mask[u]:
                j = subset.local_of[u]
                rows.append(i)
                cols.append(j)
                weights.append(1.0 / math.sqrt(degrees[i] * degrees[j]))
    ri = np.array(rows, dtype=np.int64)
    ci = np.array(cols, dtype=np.int64)
    wt = np.array(weights, dtype=np.float64)

    def shifted(x: np.ndarray) -> np.ndarray:
        # (I - L_S/2) x = x/2 + M x / 2 with M the off-diagonal coupling.
        mx = np.zeros_like(x)
        np.add.at(mx, ri, wt * x[ci])
        return 0.5 * x + 0.5 * mx

    x = np.full(s, 1.0 / math.sqrt(s))
    mu = 0.0
    for _ in range(max_iterations):
        y = shifted(x)
        norm = float(np.linalg.norm(y))
        if norm == 0.0:
            break
        y /= norm
        mu_new = float(y @ shifted(y))
        done = abs(mu_new - mu) <= tol * max(1.0, abs(mu_new))
        x, mu = y, mu_new
        if done:
            break
    return 2.0 * (1.0 - mu)


def dump_matrix_csv(matrix: np.ndarray, target: str | Path | IO[str]) -> None:
    """Debug dump of a dense matrix, row-major, 17 significant digits."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2:
        raise ValueError("expected a 2-d matrix")

    def _write(fh: IO[str]) -> None:
        for row in matrix:
            fh.write(",".join(f"{x:.17g}" for x in row) + "\n")

    if isinstance(target, (str, Path)):
        with open(target, "w", encoding="utf-8") as fh:
            _write(fh)
    else:
        _write(target)
