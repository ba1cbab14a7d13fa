"""Weighted symmetric graph Laplacians with cached spectra.

The eigendecomposition is computed eagerly at construction: every
frequency-domain operation downstream reads lambda_2 and the eigenvector
basis repeatedly.  The eigenvector matrix is arranged as V = [1/sqrt(n), V_perp].
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    NodeOutOfRangeError,
    NonPositiveAlphaError,
    NonPositiveWeightError,
    SelfLoopError,
    TooFewNodesError,
)

__all__ = [
    "LaplacianMatrix",
    "from_edge_list",
    "builder",
    "read_edge_list",
    "DisconnectedWarning",
]

ZERO_CLUSTER_REL = 1e-10


class DisconnectedWarning(UserWarning):
    """The zero eigenvalue has multiplicity > 1: the graph is disconnected."""


def _spectrum(entries: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    n = entries.shape[0]
    evals, evecs = np.linalg.eigh(entries)
    lam_max = max(evals[-1], 0.0)
    cutoff = ZERO_CLUSTER_REL * lam_max if lam_max > 0 else 1e-14
    zero_mult = int(np.sum(np.abs(evals) <= cutoff)) or 1
    evals = evals.copy()
    evals[0] = 0.0

    # Force 1/sqrt(n) as the leading null-space vector; re-orthonormalize the
    # rest of the zero cluster around it.
    ones = np.ones(n) / np.sqrt(n)
    cluster = evecs[:, :zero_mult]
    basis = [ones]
    for k in range(cluster.shape[1]):
        v = cluster[:, k].copy()
        for b in basis:
            v -= (b @ v) * b
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            basis.append(v / nv)
    basis = basis[:zero_mult]
    evecs = evecs.copy()
    evecs[:, :zero_mult] = np.column_stack(basis)
    return evals, evecs


@dataclass(frozen=True, eq=False)
class LaplacianMatrix:
    """Symmetric PSD Laplacian with eigenvalues and eigenvectors cached."""

    entries: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __init__(self, entries, eigenvalues=None, eigenvectors=None):
        entries = np.asarray(entries, dtype=float)
        n = entries.shape[0]
        if entries.shape != (n, n) or n < 1:
            raise ValueError("Laplacian must be a square matrix of order >= 1")
        norm = np.linalg.norm(entries)
        if norm > 0:
            if np.linalg.norm(entries - entries.T) > 1e-12 * norm:
                raise ValueError("Laplacian must be symmetric")
            if np.linalg.norm(entries @ np.ones(n)) > 1e-10 * norm:
                raise ValueError("Laplacian rows must sum to zero")
        if eigenvalues is None or eigenvectors is None:
            eigenvalues, eigenvectors = _spectrum(entries)
        if eigenvalues[0] < -1e-10 * max(1.0, abs(eigenvalues[-1])):
            raise ValueError("Laplacian is not positive semidefinite")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "eigenvalues", np.asarray(eigenvalues, float))
        object.__setattr__(self, "eigenvectors", np.asarray(eigenvectors, float))
        if self.zero_multiplicity > 1:
            warnings.warn(
                "zero eigenvalue has multiplicity "
                f"{self.zero_multiplicity}: graph is disconnected",
                DisconnectedWarning,
                stacklevel=2,
            )

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def lambda2(self) -> float:
        """Algebraic connectivity; 0 for a single node."""
        return float(self.eigenvalues[1]) if self.n > 1 else 0.0

    @property
    def zero_multiplicity(self) -> int:
        lam_max = max(float(self.eigenvalues[-1]), 0.0)
        cutoff = ZERO_CLUSTER_REL * lam_max if lam_max > 0 else 1e-14
        return max(int(np.sum(np.abs(self.eigenvalues) <= cutoff)), 1)

    @property
    def is_connected(self) -> bool:
        return self.n == 1 or (self.zero_multiplicity == 1 and self.lambda2 > 0)

    @property
    def v_perp(self) -> np.ndarray:
        return self.eigenvectors[:, 1:]

    def scale(self, alpha: float) -> "LaplacianMatrix":
        """alpha * L; spectrum scales linearly, eigenvectors unchanged."""
        if alpha <= 0:
            raise NonPositiveAlphaError(f"alpha must be positive, got {alpha}")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DisconnectedWarning)
            return LaplacianMatrix(
                alpha * self.entries, alpha * self.eigenvalues, self.eigenvectors
            )


def from_edge_list(edges, n: int) -> LaplacianMatrix:
    """Build a Laplacian from (i, j, w) triples; duplicate edges are summed."""
    L = np.zeros((n, n))
    for i, j, w in edges:
        if i == j:
            raise SelfLoopError(f"self loop at node {i}")
        if w <= 0:
            raise NonPositiveWeightError(f"edge ({i},{j}) has weight {w}")
        if not (0 <= i < n and 0 <= j < n):
            raise NodeOutOfRangeError(f"edge ({i},{j}) outside 0..{n - 1}")
        L[i, i] += w
        L[j, j] += w
        L[i, j] -= w
        L[j, i] -= w
    return LaplacianMatrix(L)


def builder(kind: str, n: int, weight: float = 1.0) -> LaplacianMatrix:
    """Standard topologies with uniform edge weight."""
    if n < 2:
        raise TooFewNodesError(f"builder needs n >= 2, got {n}")
    if kind == "complete":
        edges = [(i, j, weight) for i in range(n) for j in range(i + 1, n)]
    elif kind == "ring":
        edges = [(i, (i + 1) % n, weight) for i in range(n)]
        if n == 2:  # avoid the doubled edge
            edges = [(0, 1, weight)]
    elif kind == "star":
        edges = [(0, i, weight) for i in range(1, n)]
    elif kind == "path":
        edges = [(i, i + 1, weight) for i in range(n - 1)]
    else:
        raise ValueError(f"unknown topology {kind!r}")
    return from_edge_list(edges, n)


def read_edge_list(path) -> LaplacianMatrix:
    """Parse an edge-list file: `i j w` per line, `#` comments, optional
    `n=<count>` header; node count otherwise inferred as max index + 1."""
    edges = []
    n_declared = None
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("n="):
                n_declared = int(line[2:])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"malformed edge line {line!r}")
            edges.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if not edges and n_declared is None:
        raise ValueError("empty edge list and no n= header")
    n = n_declared if n_declared is not None else (
        max(max(i, j) for i, j, _ in edges) + 1
    )
    return from_edge_list(edges, n)
