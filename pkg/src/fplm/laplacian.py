"""Edge weights and graph Laplacian blocks for the fixed-point solve.

Weights live on the 1-skeleton of the mesh: w_ij = exp(-gamma * ||x_i - x_j||)
with plain Euclidean distance in the ambient space. The Laplacian L = D - A
is partitioned by a free/fixed vertex split into the blocks L_y (free x free)
and L_yc (free x fixed) that define the linear system of the mapping.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from .simplicial import SimplicialMesh, mesh_edges


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Undirected weighted 1-skeleton of a mesh.

    Edges are stored once with i < j; weights are strictly positive.
    """

    n: int
    edges: np.ndarray
    weights: np.ndarray
    gamma: float

    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric sparse adjacency matrix with the edge weights."""
        i = self.edges[:, 0]
        j = self.edges[:, 1]
        data = np.concatenate([self.weights, self.weights])
        rows = np.concatenate([i, j])
        cols = np.concatenate([j, i])
        return sparse.csr_matrix(
            (data, (rows, cols)), shape=(self.n, self.n), dtype=float
        )


@dataclass(frozen=True, eq=False)
class LaplacianSystem:
    """Partitioned Laplacian L = D - A for one free/fixed vertex split.

    ``free_indices`` and ``fixed_indices`` are each sorted ascending, and
    the rows/columns of the blocks follow that order; vertices are never
    physically reordered.
    """

    adjacency: sparse.csr_matrix
    laplacian: sparse.csr_matrix
    degrees: np.ndarray
    free_indices: np.ndarray
    fixed_indices: np.ndarray
    lap_free: sparse.csr_matrix
    lap_free_fixed: sparse.csr_matrix

    @property
    def n(self) -> int:
        return self.laplacian.shape[0]


def build_weights(mesh: SimplicialMesh, gamma: float = 0.1) -> WeightedGraph:
    """Exponential-of-distance weights on the mesh 1-skeleton.

    w_ij = exp(-gamma * d_ij) with d_ij the Euclidean distance between the
    ambient coordinates of the edge endpoints. Coincident connected points
    get weight exactly 1, which is allowed but flagged with a warning since
    it usually indicates duplicated samples.
    """
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    edges = mesh_edges(mesh)
    diffs = mesh.vertices[edges[:, 0]] - mesh.vertices[edges[:, 1]]
    dists = np.linalg.norm(diffs, axis=1)
    if (dists == 0.0).any():
        n_zero = int((dists == 0.0).sum())
        warnings.warn(
            f"{n_zero} edge(s) connect coincident points; their weight is 1",
            RuntimeWarning,
            stacklevel=2,
        )
    weights = np.exp(-gamma * dists)
    return WeightedGraph(
        n=mesh.n_vertices, edges=edges, weights=weights, gamma=float(gamma)
    )


def assemble_system(graph: WeightedGraph, fixed) -> LaplacianSystem:
    """Partition L = D - A into the free/fixed blocks of the mapping system.

    Parameters
    ----------
    graph : WeightedGraph
    fixed : array-like of int
        Indices of constrained vertices. Must be nonempty, distinct, and in
        range; every connected component of the graph must contain at least
        one fixed vertex, otherwise the free block is singular.
    """
    fixed = np.asarray(fixed, dtype=np.int64).ravel()
    if fixed.size == 0:
        raise ValueError("fixed vertex set is empty")
    if fixed.min() < 0 or fixed.max() >= graph.n:
        raise ValueError("fixed vertex index out of range")
    fixed_sorted = np.sort(fixed)
    if (np.diff(fixed_sorted) == 0).any():
        raise ValueError("fixed vertex indices contain duplicates")

    adjacency = graph.adjacency()
    degrees = np.asarray(adjacency.sum(axis=1)).ravel()
    laplacian = (sparse.diags(degrees) - adjacency).tocsr()

    n_comp, labels = connected_components(adjacency, directed=False)
    fixed_mask = np.zeros(graph.n, dtype=bool)
    fixed_mask[fixed_sorted] = True
    for comp in range(n_comp):
        members = np.nonzero(labels == comp)[0]
        if not fixed_mask[members].any():
            raise ValueError(
                f"connected component {comp} (example vertex {int(members[0])}) "
                "contains no fixed vertex; its block is singular"
            )

    free = np.nonzero(~fixed_mask)[0]
    lap_free = laplacian[free][:, free].tocsr()
    lap_free_fixed = laplacian[free][:, fixed_sorted].tocsr()
    return LaplacianSystem(
        adjacency=adjacency,
        laplacian=laplacian,
        degrees=degrees,
        free_indices=free,
        fixed_indices=fixed_sorted,
        lap_free=lap_free,
        lap_free_fixed=lap_free_fixed,
    )
