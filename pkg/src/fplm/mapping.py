"""Fixed-point Laplacian mapping: the two-round embedding pipeline.

The mapping minimizes the Laplacian quadratic form tr(Y' L Y) subject to a
small set of vertices pinned at fixed targets. With the free block written
L_y and the free-by-fixed block L_yc, the minimizer solves
L_y Y_free = -L_yc C, which makes every free vertex the weighted convex
combination of its neighbors.

The driver picks one of two branches:

* no dividing faces (strongly connected): round 1 pins one selected
  d-simplex to a regular simplex; if the mesh has a boundary beyond those
  seed vertices, round 2 re-solves with the boundary pinned where round 1
  placed it, freeing everything else. Closed meshes stop after round 1.
* dividing edges present (d = 2 only): the whole boundary loop is pinned to
  a regular polygon and a single solve finishes the job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .laplacian import WeightedGraph, assemble_system, build_weights
from .simplicial import (
    BoundaryComplex,
    SimplicialMesh,
    canonical_orientation,
    detect_boundary,
    detect_dividing_simplices,
    validate_mesh,
)
from .solver import SolveConfig, solve_spd

FIXED_POINT_KINDS = ("selected-simplex", "inner-boundary", "regular-polytope")

SEED_STRATEGIES = ("most-interior", "random", "index")


@dataclass(frozen=True, eq=False)
class FixedPointSet:
    """Constrained vertices and their target coordinates.

    ``indices`` and ``targets`` are aligned row by row; ``kind`` records how
    the set was constructed: a selected seed simplex, the boundary at its
    round-1 image, or a regular polytope over the boundary cycle.
    """

    indices: np.ndarray
    targets: np.ndarray
    kind: str

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        tgt = np.asarray(self.targets, dtype=float)
        if tgt.ndim != 2:
            raise ValueError("targets must be a (p, d) array")
        if idx.shape[0] != tgt.shape[0]:
            raise ValueError("indices and targets disagree on p")
        d = tgt.shape[1]
        if idx.shape[0] < d + 1:
            raise ValueError(
                f"need at least d + 1 = {d + 1} fixed vertices, got {idx.shape[0]}"
            )
        if len(set(idx.tolist())) != idx.shape[0]:
            raise ValueError("fixed vertex indices contain duplicates")
        if self.kind not in FIXED_POINT_KINDS:
            raise ValueError(f"unknown fixed point kind {self.kind!r}")
        idx.setflags(write=False)
        tgt.setflags(write=False)
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "targets", tgt)

    @property
    def p(self) -> int:
        return self.indices.shape[0]

    @property
    def dim(self) -> int:
        return self.targets.shape[1]


@dataclass(frozen=True, eq=False)
class Embedding:
    """Result of a mapping run.

    coords holds the final (N, d) embedding; rows of fixed vertices equal
    their targets exactly, they are scattered rather than solved for.
    coords_round1 keeps the round-1 image (identical to coords for
    single-round runs) so the inner-boundary polygon can be audited.
    """

    coords: np.ndarray
    rounds_run: int
    fixed_round1: FixedPointSet
    fixed_round2: FixedPointSet | None
    coords_round1: np.ndarray
    seed_simplex: int | None
    residuals: dict = field(default_factory=dict)

    @property
    def branch(self) -> str:
        if self.fixed_round1.kind == "regular-polytope":
            return "p-gon"
        return "two-round" if self.rounds_run == 2 else "one-round"


def regular_simplex(d: int) -> np.ndarray:
    """Vertices of the regular d-simplex with unit circumradius at the origin.

    Canonical placements: d = 1 gives -1 and +1; d = 2 puts the corners at
    angles 90, 210 and 330 degrees on the unit circle; d = 3 uses the
    alternating cube corners scaled to unit length. Higher dimensions use a
    Helmert-basis construction.
    """
    if d == 1:
        return np.array([[-1.0], [1.0]])
    if d == 2:
        s = math.sqrt(3.0) / 2.0
        return np.array([[0.0, 1.0], [-s, -0.5], [s, -0.5]])
    if d == 3:
        r = 1.0 / math.sqrt(3.0)
        return np.array(
            [
                [r, r, r],
                [r, -r, -r],
                [-r, r, -r],
                [-r, -r, r],
            ]
        )
    # Rows of the centered standard simplex e_i - 1/(d+1), expressed in the
    # Helmert orthonormal basis of the sum-zero hyperplane, scaled to unit
    # circumradius.
    basis = np.zeros((d, d + 1))
    for k in range(1, d + 1):
        basis[k - 1, :k] = 1.0
        basis[k - 1, k] = -k
        basis[k - 1] /= math.sqrt(k * (k + 1))
    verts = basis.T  # row i is the image of e_i
    verts = verts - verts.mean(axis=0)
    verts /= np.linalg.norm(verts[0])
    return verts


def select_seed_simplex(
    mesh: SimplicialMesh,
    strategy: str = "most-interior",
    *,
    seed: int = 0,
    index: int = 0,
    boundary: BoundaryComplex | None = None,
) -> int:
    """Pick the simplex whose vertices round 1 will pin.

    Strategies: ``most-interior`` maximizes the minimum breadth-first graph
    distance of the simplex vertices to the boundary (ties broken by lowest
    simplex index; on closed meshes every simplex ties, so index 0 wins),
    ``random`` draws uniformly with the given seed, and ``index`` takes the
    simplex at the given position.
    """
    m_total = mesh.n_simplices
    if strategy == "index":
        if not (0 <= index < m_total):
            raise ValueError(f"seed simplex index {index} out of range")
        return int(index)
    if strategy == "random":
        rng = np.random.default_rng(seed)
        return int(rng.integers(m_total))
    if strategy != "most-interior":
        raise ValueError(f"unknown seed strategy {strategy!r}")

    if boundary is None:
        boundary = detect_boundary(mesh)
    sources = boundary.boundary_vertices
    if sources.size == 0:
        return 0
    depth = _bfs_depth(mesh, sources)
    score = depth[mesh.simplices].min(axis=1)
    return int(np.argmax(score))


def _bfs_depth(mesh: SimplicialMesh, sources: np.ndarray) -> np.ndarray:
    """Hop counts from the source vertex set over the 1-skeleton."""
    from .simplicial import mesh_edges

    n = mesh.n_vertices
    neighbors: list[list[int]] = [[] for _ in range(n)]
    for u, v in mesh_edges(mesh):
        neighbors[int(u)].append(int(v))
        neighbors[int(v)].append(int(u))
    depth = np.full(n, -1, dtype=np.int64)
    queue = [int(s) for s in sources]
    for s in queue:
        depth[s] = 0
    head = 0
    while head < len(queue):
        cur = queue[head]
        head += 1
        for nxt in neighbors[cur]:
            if depth[nxt] < 0:
                depth[nxt] = depth[cur] + 1
                queue.append(nxt)
    # unreachable vertices sit infinitely deep; keep them maximal
    depth[depth < 0] = n + 1
    return depth


def make_c1(mesh: SimplicialMesh, simplex_index: int) -> FixedPointSet:
    """Round-1 constraints: the selected simplex pinned to a regular simplex.

    The simplex vertices are taken in ascending index order and matched to
    the canonical regular-simplex corners in that order.
    """
    if not (0 <= simplex_index < mesh.n_simplices):
        raise ValueError(f"simplex index {simplex_index} out of range")
    idx = np.sort(mesh.simplices[simplex_index])
    return FixedPointSet(
        indices=idx,
        targets=regular_simplex(mesh.intrinsic_dim),
        kind="selected-simplex",
    )


def make_regular_polygon(
    boundary: BoundaryComplex,
    mesh: SimplicialMesh | None = None,
    orientation: str = "ccw",
) -> FixedPointSet:
    """Pin the (single) boundary loop of a d = 2 mesh to a regular polygon.

    The k-th cycle vertex goes to (cos 2 pi k / p, sin 2 pi k / p). When the
    mesh is supplied, the cycle direction is first aligned with the
    canonical simplex orientation so that triangles map with positive
    orientation; ``orientation="cw"`` then flips the winding.
    """
    if boundary.boundary_cycles is None:
        raise ValueError("regular polygon targets are defined for d = 2 only")
    if len(boundary.boundary_cycles) == 0:
        raise ValueError("mesh has no boundary; cannot pin a boundary polygon")
    if len(boundary.boundary_cycles) > 1:
        raise ValueError(
            f"boundary has {len(boundary.boundary_cycles)} loops; the "
            "polygon construction needs exactly one"
        )
    if orientation not in ("ccw", "cw"):
        raise ValueError(f"orientation must be 'ccw' or 'cw', got {orientation!r}")
    cycle = list(boundary.boundary_cycles[0])
    if len(cycle) < 3:
        raise ValueError("boundary loop has fewer than 3 vertices")
    if mesh is not None and not _cycle_matches_orientation(mesh, cycle):
        cycle = [cycle[0]] + cycle[:0:-1]
    p = len(cycle)
    angles = 2.0 * math.pi * np.arange(p) / p
    if orientation == "cw":
        angles = -angles
    targets = np.column_stack([np.cos(angles), np.sin(angles)])
    return FixedPointSet(
        indices=np.asarray(cycle, dtype=np.int64),
        targets=targets,
        kind="regular-polytope",
    )


def _cycle_matches_orientation(mesh: SimplicialMesh, cycle: list[int]) -> bool:
    """True when the cycle walks boundary edges the way canonically oriented
    triangles traverse them (interior on the left for ccw triangles)."""
    sign = canonical_orientation(mesh)
    first, second = cycle[0], cycle[1]
    for m, tri in enumerate(mesh.simplices):
        tri = [int(x) for x in tri]
        if first in tri and second in tri:
            directed = [
                (tri[0], tri[1]),
                (tri[1], tri[2]),
                (tri[2], tri[0]),
            ]
            if sign[m] < 0:
                directed = [(b, a) for a, b in directed]
            if (first, second) in directed:
                return True
            if (second, first) in directed:
                return False
    raise ValueError(
        f"boundary edge ({first}, {second}) is not part of any triangle"
    )


def solve_fixed_point(
    graph: WeightedGraph,
    fixed: FixedPointSet,
    config: SolveConfig | None = None,
) -> tuple[np.ndarray, float]:
    """Solve the constrained Laplacian system for one fixed-point set.

    Returns the full (N, d) coordinate array, with fixed rows copied from
    the targets verbatim, plus the achieved relative residual of the free
    block solve.
    """
    system = assemble_system(graph, fixed.indices)
    coords = np.zeros((graph.n, fixed.dim))
    # assemble_system sorts the fixed indices; realign the target rows
    order = np.argsort(fixed.indices, kind="stable")
    targets_sorted = fixed.targets[order]
    coords[system.fixed_indices] = targets_sorted
    if system.free_indices.size:
        rhs = -system.lap_free_fixed @ targets_sorted
        solution = solve_spd(system.lap_free, rhs, config)
        coords[system.free_indices] = solution
        rhs_norm = float(np.linalg.norm(rhs))
        if rhs_norm > 0.0:
            residual = float(
                np.linalg.norm(system.lap_free @ solution - rhs) / rhs_norm
            )
        else:
            residual = 0.0
    else:
        residual = 0.0
    return coords, residual


def run_fplm(
    mesh: SimplicialMesh,
    gamma: float = 0.1,
    seed_strategy: str = "most-interior",
    config: SolveConfig | None = None,
    *,
    seed: int = 0,
    seed_index: int = 0,
    polygon_orientation: str = "ccw",
) -> Embedding:
    """Run the full mapping pipeline on a validated mesh.

    Strongly connected meshes (and all meshes with d != 2) go through the
    seed-simplex rounds; d = 2 meshes with dividing edges are instead pinned
    to a regular polygon in one solve. Raises ValueError when the mesh fails
    validation or has multiple boundary loops (d = 2).
    """
    violations = validate_mesh(mesh)
    if violations:
        head = "; ".join(v.detail for v in violations[:3])
        raise ValueError(
            f"mesh fails validation with {len(violations)} violation(s): {head}"
        )
    boundary = detect_boundary(mesh)
    if boundary.boundary_cycles is not None and len(boundary.boundary_cycles) > 1:
        raise ValueError(
            f"mesh boundary has {len(boundary.boundary_cycles)} loops; "
            "only a single boundary loop is supported"
        )
    # The dividing-simplex reroute exists for d = 2 only, where the regular
    # polygon substitutes for the two-round construction. Tetrahedral meshes
    # of solid regions always carry interior faces with all vertices on the
    # boundary (a lone 5-tet cube already has four), so in higher dimensions
    # the two-round path runs unconditionally.
    dividing = (
        detect_dividing_simplices(mesh, boundary) if mesh.intrinsic_dim == 2 else []
    )
    graph = build_weights(mesh, gamma)

    if not dividing:
        seed_ix = select_seed_simplex(
            mesh, seed_strategy, seed=seed, index=seed_index, boundary=boundary
        )
        fixed1 = make_c1(mesh, seed_ix)
        coords1, res1 = solve_fixed_point(graph, fixed1, config)
        bverts = boundary.boundary_vertices
        if bverts.size == 0 or np.array_equal(np.sort(bverts), fixed1.indices):
            return Embedding(
                coords=coords1,
                rounds_run=1,
                fixed_round1=fixed1,
                fixed_round2=None,
                coords_round1=coords1,
                seed_simplex=seed_ix,
                residuals={"round1": res1},
            )
        fixed2 = FixedPointSet(
            indices=bverts,
            targets=coords1[bverts],
            kind="inner-boundary",
        )
        coords2, res2 = solve_fixed_point(graph, fixed2, config)
        return Embedding(
            coords=coords2,
            rounds_run=2,
            fixed_round1=fixed1,
            fixed_round2=fixed2,
            coords_round1=coords1,
            seed_simplex=seed_ix,
            residuals={"round1": res1, "round2": res2},
        )

    if boundary.boundary_vertices.size == 0:
        raise AssertionError(
            "dividing faces found on a closed mesh; this cannot happen"
        )
    fixed = make_regular_polygon(boundary, mesh, polygon_orientation)
    coords, res = solve_fixed_point(graph, fixed, config)
    return Embedding(
        coords=coords,
        rounds_run=1,
        fixed_round1=fixed,
        fixed_round2=None,
        coords_round1=coords,
        seed_simplex=None,
        residuals={"round1": res},
    )
