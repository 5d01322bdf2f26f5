"""Numerical certification of embedding validity.

The auditor measures the geometric guarantees of a finished embedding:
zero edge crossings in the drawn 1-skeleton (d = 2), a single orientation
sign across all simplex images with no near-degenerate ones, containment of
free vertices in the convex hull of the fixed targets, convexity of the
boundary image, and the convex-combination identity at free vertices.

Crossing and orientation signs come from exact predicates, so the counts
are discrete facts rather than tolerance judgments; only the near-zero
volume classification and the convexity margin use tolerances.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .geometry import bbox_diameter, orient2d, signed_volumes, simplex_orientation
from .laplacian import WeightedGraph
from .mapping import Embedding, FixedPointSet
from .simplicial import (
    SimplicialMesh,
    canonical_orientation,
    detect_boundary,
    mesh_edges,
)


@dataclass(frozen=True)
class CrossingResult:
    """Number of crossing edge pairs plus the offending pairs themselves.

    Pairs are positions into the edge list that was tested, each (i, j)
    with i < j.
    """

    count: int
    pairs: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class BoundaryConvexityResult:
    """Outcome of the boundary convexity check.

    ``worst`` is the most sign-violating normalized cross product (the sine
    of the turn angle against the dominant winding); nonnegative values mean
    every turn agrees with the winding.
    """

    convex: bool
    worst: float
    reflex_vertex: int | None


@dataclass(frozen=True)
class ValidityReport:
    """Composite audit result.

    crossing_count is None for d != 2 where no planar drawing exists.
    verdict is "injective-certified" exactly when the crossing count is
    zero (or not applicable), exactly one orientation sign occurs, and no
    simplex image is near-degenerate; otherwise "violated" with reasons.
    """

    crossing_count: int | None
    crossing_pairs: tuple[tuple[int, int], ...]
    orientation_counts: tuple[int, int, int]
    max_convex_residual: float | None
    hull_violation: float | None
    boundary_convexity: BoundaryConvexityResult | None
    verdict: str
    reasons: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "crossing_count": self.crossing_count,
            "crossing_pairs": [list(p) for p in self.crossing_pairs],
            "orientation_counts": {
                "positive": self.orientation_counts[0],
                "negative": self.orientation_counts[1],
                "near_zero": self.orientation_counts[2],
            },
            "max_convex_residual": self.max_convex_residual,
            "hull_violation": _json_float(self.hull_violation),
            "boundary_convexity": (
                None
                if self.boundary_convexity is None
                else {
                    "convex": self.boundary_convexity.convex,
                    "worst": self.boundary_convexity.worst,
                    "reflex_vertex": self.boundary_convexity.reflex_vertex,
                }
            ),
            "verdict": self.verdict,
            "reasons": list(self.reasons),
        }

    def to_text(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        if self.crossing_count is None:
            lines.append("crossings: not applicable (d != 2)")
        else:
            lines.append(f"crossings: {self.crossing_count}")
            for a, b in self.crossing_pairs[:20]:
                lines.append(f"  edge pair ({a}, {b})")
            if len(self.crossing_pairs) > 20:
                lines.append(f"  ... {len(self.crossing_pairs) - 20} more")
        pos, neg, zero = self.orientation_counts
        lines.append(
            f"orientation: {pos} positive, {neg} negative, {zero} near zero"
        )
        if self.hull_violation is not None:
            lines.append(f"hull violation: {self.hull_violation:.6e}")
        if self.max_convex_residual is not None:
            lines.append(f"max convex residual: {self.max_convex_residual:.6e}")
        if self.boundary_convexity is not None:
            bc = self.boundary_convexity
            lines.append(
                f"boundary convexity: {'ok' if bc.convex else 'VIOLATED'} "
                f"(worst {bc.worst:.6e}"
                + (f", reflex vertex {bc.reflex_vertex}" if not bc.convex else "")
                + ")"
            )
        for reason in self.reasons:
            lines.append(f"reason: {reason}")
        return "\n".join(lines)


def _json_float(x):
    if x is None:
        return None
    if math.isinf(x):
        return None
    return x


def count_crossings(edges, coords) -> CrossingResult:
    """Count crossing pairs among 2-D segments with exact predicates.

    A pair counts when the open segments properly intersect, or when the
    segments are collinear and overlap over positive length. Pairs sharing
    a vertex index are intersection-free unless they overlap beyond the
    shared point. A uniform spatial hash grid prunes the candidate pairs;
    a full quadratic scan covers degenerate extents. Both paths run the
    same exact narrow phase, so the count is exact.
    """
    e = np.asarray(edges, dtype=np.int64)
    p = np.asarray(coords, dtype=float)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError("count_crossings expects (N, 2) coordinates")
    if e.ndim != 2 or e.shape[1] != 2:
        raise ValueError("edges must be index pairs")
    n_edges = e.shape[0]
    if n_edges < 2:
        return CrossingResult(0, ())

    pa = p[e[:, 0]]
    pb = p[e[:, 1]]
    lo = np.minimum(pa, pb)
    hi = np.maximum(pa, pb)

    # plain float lists keep the exact narrow phase in scalar Python
    ends = np.hstack([pa, pb]).tolist()
    idx = e.tolist()

    candidates = _grid_candidates(lo, hi, n_edges)
    hits = []
    for i, j in candidates:
        if _pair_crosses(idx[i], idx[j], ends[i], ends[j]):
            hits.append((i, j))
    hits.sort()
    return CrossingResult(len(hits), tuple(hits))


_GRID_CELL_BUDGET = 4_000_000


def _grid_candidates(lo, hi, n_edges):
    """Candidate pairs whose bounding boxes share a grid cell.

    Cell size follows the median segment extent. Intersecting segments have
    overlapping boxes, and overlapping boxes share a cell, so no true pair
    is ever pruned. Degenerate spreads and rasterization blowups fall back
    to a vectorized quadratic box-overlap scan, which is still exact.
    """
    extent = (hi - lo).max(axis=1)
    h = float(np.median(extent))
    span = float((hi.max(axis=0) - lo.min(axis=0)).max())
    if h <= 0.0:
        h = span / 64.0
    if h <= 0.0 or n_edges <= 64:
        return _bbox_candidates(lo, hi, n_edges)

    ix0 = np.floor(lo[:, 0] / h).astype(np.int64)
    iy0 = np.floor(lo[:, 1] / h).astype(np.int64)
    ix1 = np.floor(hi[:, 0] / h).astype(np.int64)
    iy1 = np.floor(hi[:, 1] / h).astype(np.int64)
    cells = (ix1 - ix0 + 1) * (iy1 - iy0 + 1)
    if int(cells.sum()) > _GRID_CELL_BUDGET:
        return _bbox_candidates(lo, hi, n_edges)

    buckets: dict[tuple[int, int], list[int]] = defaultdict(list)
    for s in range(n_edges):
        for cx in range(ix0[s], ix1[s] + 1):
            for cy in range(iy0[s], iy1[s] + 1):
                buckets[(cx, cy)].append(s)

    seen: set[tuple[int, int]] = set()
    for members in buckets.values():
        k = len(members)
        if k < 2:
            continue
        for u in range(k):
            su = members[u]
            for v in range(u + 1, k):
                sv = members[v]
                pair = (su, sv) if su < sv else (sv, su)
                if pair in seen:
                    continue
                i, j = pair
                # bounding boxes must overlap in both axes
                if (
                    lo[i, 0] <= hi[j, 0]
                    and lo[j, 0] <= hi[i, 0]
                    and lo[i, 1] <= hi[j, 1]
                    and lo[j, 1] <= hi[i, 1]
                ):
                    seen.add(pair)
    return sorted(seen)


def _bbox_candidates(lo, hi, n_edges):
    """All pairs with overlapping bounding boxes, row-vectorized."""
    out = []
    for i in range(n_edges - 1):
        sel = np.nonzero(
            (lo[i + 1 :, 0] <= hi[i, 0])
            & (lo[i, 0] <= hi[i + 1 :, 0])
            & (lo[i + 1 :, 1] <= hi[i, 1])
            & (lo[i, 1] <= hi[i + 1 :, 1])
        )[0]
        out.extend((i, int(i + 1 + j)) for j in sel)
    return out


def _pair_crosses(ei, ej, si, sj) -> bool:
    """Exact narrow phase for one segment pair.

    ei/ej are the vertex index pairs, si/sj the flattened coordinates
    (x0, y0, x1, y1) of each segment.
    """
    ax, ay, bx, by = si
    cx, cy, dx, dy = sj
    o1 = orient2d(ax, ay, bx, by, cx, cy)
    o2 = orient2d(ax, ay, bx, by, dx, dy)
    o3 = orient2d(cx, cy, dx, dy, ax, ay)
    o4 = orient2d(cx, cy, dx, dy, bx, by)
    if o1 == 0 and o2 == 0 and o3 == 0 and o4 == 0:
        return _collinear_overlap(si, sj)
    if ei[0] in ej or ei[1] in ej:
        # sharing a vertex and not collinear: endpoint contact only
        return False
    return o1 * o2 < 0 and o3 * o4 < 0


def _collinear_overlap(si, sj) -> bool:
    """Positive-length 1-D overlap of collinear segments (exact on floats)."""
    ax, ay, bx, by = si
    cx, cy, dx, dy = sj
    if max(abs(ax - bx), abs(cx - dx)) >= max(abs(ay - by), abs(cy - dy)):
        a_lo, a_hi = (ax, bx) if ax <= bx else (bx, ax)
        b_lo, b_hi = (cx, dx) if cx <= dx else (dx, cx)
    else:
        a_lo, a_hi = (ay, by) if ay <= by else (by, ay)
        b_lo, b_hi = (cy, dy) if cy <= dy else (dy, cy)
    return max(a_lo, b_lo) < min(a_hi, b_hi)


def crossing_locations(edges, coords, pairs) -> np.ndarray:
    """Approximate intersection points for reported crossing pairs.

    Float arithmetic is fine here: the points only place markers on a
    drawing, they carry no certification weight. Collinear overlaps get the
    midpoint of the shared interval.
    """
    e = np.asarray(edges, dtype=np.int64)
    p = np.asarray(coords, dtype=float)
    out = []
    for i, j in pairs:
        a, b = p[e[i, 0]], p[e[i, 1]]
        c, d = p[e[j, 0]], p[e[j, 1]]
        r = b - a
        s = d - c
        denom = r[0] * s[1] - r[1] * s[0]
        if denom != 0.0:
            t = ((c[0] - a[0]) * s[1] - (c[1] - a[1]) * s[0]) / denom
            out.append(a + t * r)
        else:
            axis = 0 if max(abs(r[0]), abs(s[0])) >= max(abs(r[1]), abs(s[1])) else 1
            lo = max(min(a[axis], b[axis]), min(c[axis], d[axis]))
            hi = min(max(a[axis], b[axis]), max(c[axis], d[axis]))
            mid = 0.5 * (lo + hi)
            if abs(r[axis]) > 0:
                t = (mid - a[axis]) / r[axis]
                out.append(a + t * r)
            else:
                out.append(0.5 * (a + b))
    if not out:
        return np.zeros((0, 2))
    return np.vstack(out)


def orientation_histogram(
    mesh: SimplicialMesh,
    coords: np.ndarray,
    tol: float = 1e-12,
    *,
    exclude=(),
) -> tuple[int, int, int]:
    """Classify simplex image volumes as (positive, negative, near-zero).

    The mesh orientation is first canonicalized combinatorially, so a
    consistently mapped mesh lands in a single sign bucket regardless of
    stored vertex order. A simplex is near-zero when its absolute volume is
    below tol times (embedding bounding-box diameter)^d; otherwise its sign
    comes from an exact predicate. ``exclude`` skips simplex indices, used
    for the seed simplex of a closed mesh whose image necessarily covers
    the rest.
    """
    coords = np.asarray(coords, dtype=float)
    d = mesh.intrinsic_dim
    if coords.shape != (mesh.n_vertices, d):
        raise ValueError(
            f"coords must be ({mesh.n_vertices}, {d}), got {coords.shape}"
        )
    sign = canonical_orientation(mesh)
    vols = signed_volumes(coords, mesh.simplices)
    scale = bbox_diameter(coords)
    threshold = tol * scale**d
    excluded = set(int(x) for x in exclude)
    pos = neg = zero = 0
    for m in range(mesh.n_simplices):
        if m in excluded:
            continue
        if abs(vols[m]) < threshold:
            zero += 1
            continue
        s = sign[m] * simplex_orientation(coords[mesh.simplices[m]])
        if s > 0:
            pos += 1
        elif s < 0:
            neg += 1
        else:
            zero += 1
    return (pos, neg, zero)


def check_hull_containment(
    fixed: FixedPointSet, coords: np.ndarray, free_indices
) -> float:
    """Largest signed distance of a free vertex outside conv(fixed targets).

    Negative values mean every free vertex lies strictly inside the hull.
    Defined for d in {2, 3}; raises for other dimensions or affinely
    degenerate targets.
    """
    from scipy.spatial import ConvexHull, QhullError

    coords = np.asarray(coords, dtype=float)
    d = fixed.dim
    if d not in (2, 3):
        raise ValueError(f"hull containment is defined for d in {{2, 3}}, got {d}")
    try:
        hull = ConvexHull(fixed.targets)
    except QhullError as exc:
        raise ValueError(
            "fixed targets are affinely degenerate; no full-dimensional hull"
        ) from exc
    free_indices = np.asarray(free_indices, dtype=np.int64)
    if free_indices.size == 0:
        return float("-inf")
    pts = coords[free_indices]
    # hull.equations rows are unit outward normals with offsets: n.x + b <= 0
    signed = pts @ hull.equations[:, :d].T + hull.equations[:, d]
    return float(signed.max())


def check_boundary_convexity(
    cycle, coords: np.ndarray, tol: float = 1e-9
) -> BoundaryConvexityResult:
    """Do all boundary turns share the winding sign of the loop?

    Cross products of consecutive cycle edges are normalized by the edge
    lengths (giving the sine of the turn angle) and compared against the
    loop's dominant winding from the shoelace area. The loop is convex when
    the worst normalized turn is not below -tol.
    """
    cycle = [int(x) for x in cycle]
    if len(cycle) < 3:
        raise ValueError("boundary cycle needs at least 3 vertices")
    p = np.asarray(coords, dtype=float)[cycle]
    nxt = np.roll(p, -1, axis=0)
    edges = nxt - p
    area2 = float(np.sum(p[:, 0] * nxt[:, 1] - nxt[:, 0] * p[:, 1]))
    winding = 1.0 if area2 >= 0.0 else -1.0
    prev_edges = np.roll(edges, 1, axis=0)
    cross = prev_edges[:, 0] * edges[:, 1] - prev_edges[:, 1] * edges[:, 0]
    norms = np.linalg.norm(prev_edges, axis=1) * np.linalg.norm(edges, axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        turns = np.where(norms > 0.0, cross / np.where(norms > 0, norms, 1.0), 0.0)
    turns = winding * turns
    worst_pos = int(np.argmin(turns))
    worst = float(turns[worst_pos])
    convex = worst >= -tol
    return BoundaryConvexityResult(
        convex=convex,
        worst=worst,
        reflex_vertex=None if convex else cycle[worst_pos],
    )


def convex_combination_residual(
    graph: WeightedGraph,
    coords: np.ndarray,
    free_indices,
) -> float:
    """Max distance of a free vertex from its weighted neighbor average.

    At the optimum every free vertex satisfies y_i = sum_j lambda_ij y_j
    with lambda_ij = w_ij / deg_i over all neighbors j; this returns the
    largest Euclidean deviation from that identity.
    """
    coords = np.asarray(coords, dtype=float)
    adjacency = graph.adjacency()
    degrees = np.asarray(adjacency.sum(axis=1)).ravel()
    free_indices = np.asarray(free_indices, dtype=np.int64)
    if free_indices.size == 0:
        return 0.0
    averages = adjacency[free_indices] @ coords / degrees[free_indices, None]
    deviation = np.linalg.norm(coords[free_indices] - averages, axis=1)
    return float(deviation.max())


def audit(
    mesh: SimplicialMesh,
    embedding,
    *,
    graph: WeightedGraph | None = None,
    orientation_tol: float = 1e-12,
    convexity_tol: float = 1e-9,
    seed_exclude: int | None = None,
) -> ValidityReport:
    """Run every applicable check and render the verdict.

    ``embedding`` is either an :class:`Embedding` (full audit, including
    hull containment and, with ``graph``, the convex-combination residual)
    or a bare (N, d) coordinate array, e.g. a third-party embedding read
    from CSV, in which case only the geometric checks run.

    On a closed mesh embedded through a selected seed simplex, the seed's
    image necessarily covers the rest of the drawing with opposite
    orientation (it plays the role of the removed outer face), so it is
    excluded from the histogram; ``seed_exclude`` forces the same exclusion
    for bare coordinate input.
    """
    d = mesh.intrinsic_dim
    if isinstance(embedding, Embedding):
        coords = embedding.coords
        emb = embedding
    else:
        coords = np.asarray(embedding, dtype=float)
        emb = None
    if coords.shape != (mesh.n_vertices, d):
        raise ValueError(
            f"embedding must be ({mesh.n_vertices}, {d}), got {coords.shape}"
        )

    boundary = detect_boundary(mesh)
    closed = boundary.boundary_vertices.size == 0

    exclude = []
    if seed_exclude is not None:
        exclude = [int(seed_exclude)]
    elif (
        emb is not None
        and closed
        and emb.seed_simplex is not None
        and emb.fixed_round1.kind == "selected-simplex"
    ):
        exclude = [emb.seed_simplex]

    reasons: list[str] = []

    if d == 2:
        crossing = count_crossings(mesh_edges(mesh), coords)
        crossing_count: int | None = crossing.count
        crossing_pairs = crossing.pairs
        if crossing.count:
            reasons.append(f"{crossing.count} edge crossing(s)")
    else:
        crossing_count = None
        crossing_pairs = ()

    counts = orientation_histogram(
        mesh, coords, tol=orientation_tol, exclude=exclude
    )
    pos, neg, zero = counts
    if zero:
        reasons.append(f"{zero} near-degenerate simplex image(s)")
    if pos and neg:
        reasons.append(
            f"mixed orientations: {pos} positive vs {neg} negative"
        )

    hull_violation = None
    max_convex_residual = None
    boundary_convexity = None
    if emb is not None:
        final_fixed = emb.fixed_round2 or emb.fixed_round1
        if d in (2, 3):
            free = np.setdiff1d(
                np.arange(mesh.n_vertices), final_fixed.indices
            )
            hull_violation = check_hull_containment(final_fixed, coords, free)
        if graph is not None:
            free = np.setdiff1d(
                np.arange(mesh.n_vertices), final_fixed.indices
            )
            max_convex_residual = convex_combination_residual(
                graph, coords, free
            )
        if (
            d == 2
            and boundary.boundary_cycles is not None
            and len(boundary.boundary_cycles) == 1
        ):
            boundary_convexity = check_boundary_convexity(
                boundary.boundary_cycles[0],
                emb.coords_round1,
                tol=convexity_tol,
            )
    elif d == 2 and boundary.boundary_cycles is not None and len(
        boundary.boundary_cycles
    ) == 1:
        boundary_convexity = check_boundary_convexity(
            boundary.boundary_cycles[0], coords, tol=convexity_tol
        )

    certified = (
        (crossing_count is None or crossing_count == 0)
        and zero == 0
        and not (pos and neg)
        and (pos + neg) > 0
    )
    return ValidityReport(
        crossing_count=crossing_count,
        crossing_pairs=crossing_pairs,
        orientation_counts=counts,
        max_convex_residual=max_convex_residual,
        hull_violation=hull_violation,
        boundary_convexity=boundary_convexity,
        verdict="injective-certified" if certified else "violated",
        reasons=tuple(reasons),
    )
