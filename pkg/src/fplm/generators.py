"""Built-in mesh generators with known latent parameterizations.

Surface generators sample a latent rectangle, lift it through an analytic
map into R^3, and triangulate either on a structured grid or with an
in-package Delaunay triangulation of jittered samples. The sphere generator
subdivides an icosahedron; the ball generator splits a cube grid into
tetrahedra and maps the result onto the exact unit ball shell by shell.
Every generated mesh passes validate_mesh.
"""

from __future__ import annotations

import itertools
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from .geometry import incircle, orient2d
from .simplicial import SimplicialMesh, validate_mesh

GENERATOR_KINDS = (
    "grid-disk",
    "paraboloid",
    "monkey-saddle",
    "twin-peaks",
    "swiss-roll",
    "sphere",
    "ball3",
)

TRIANGULATIONS = ("structured-grid", "delaunay2d")


@dataclass(frozen=True)
class GeneratorSpec:
    """Which dataset to generate and at what resolution.

    resolution is (nx, ny) points per axis for surfaces, the subdivision
    level for the sphere, and cells per axis for the ball.
    """

    kind: str
    resolution: tuple
    seed: int = 0
    triangulation: str = "structured-grid"

    def __post_init__(self):
        if self.kind not in GENERATOR_KINDS:
            raise ValueError(
                f"unknown generator kind {self.kind!r}; choose from "
                f"{GENERATOR_KINDS}"
            )
        if self.triangulation not in TRIANGULATIONS:
            raise ValueError(
                f"unknown triangulation {self.triangulation!r}; choose from "
                f"{TRIANGULATIONS}"
            )
        res = self.resolution
        if isinstance(res, (int, np.integer)):
            res = (int(res),)
        res = tuple(int(r) for r in res)
        if any(r < 1 for r in res):
            raise ValueError(f"resolution entries must be positive, got {res}")
        object.__setattr__(self, "resolution", res)


# latent (u, v) in [-1, 1]^2 lifted to z = f(u, v)
_HEIGHT_FUNCTIONS = {
    "grid-disk": lambda u, v: np.zeros_like(u),
    "paraboloid": lambda u, v: u**2 + v**2,
    "monkey-saddle": lambda u, v: u**3 - 3.0 * u * v**2,
    "twin-peaks": lambda u, v: np.sin(np.pi * u) * np.tanh(3.0 * v),
}


def generate(spec: GeneratorSpec):
    """Build the requested mesh together with its latent coordinates.

    Returns
    -------
    mesh : SimplicialMesh
    latent : (N, k) array or None
        Ground-truth latent coordinates where a global chart exists (all
        surfaces and the ball); None for the sphere.

    Raises
    ------
    ValueError
        For resolutions too low to produce a valid, non-degenerate mesh.
    """
    kind = spec.kind
    if kind == "sphere":
        level = spec.resolution[0]
        mesh = icosphere(level)
        latent = None
    elif kind == "ball3":
        mesh = ball3(spec.resolution[0])
        latent = mesh.vertices.copy()
    elif kind == "swiss-roll":
        nx, ny = _surface_resolution(spec)
        latent = _latent_points(
            nx, ny, 1.5 * math.pi, 4.5 * math.pi, 0.0, 10.0, spec
        )
        t = latent[:, 0]
        h = latent[:, 1]
        verts = np.column_stack([t * np.cos(t), h, t * np.sin(t)])
        mesh = SimplicialMesh(verts, _triangulate_latent(latent, nx, ny, spec), 2)
    else:
        nx, ny = _surface_resolution(spec)
        latent = _latent_points(nx, ny, -1.0, 1.0, -1.0, 1.0, spec)
        z = _HEIGHT_FUNCTIONS[kind](latent[:, 0], latent[:, 1])
        verts = np.column_stack([latent[:, 0], latent[:, 1], z])
        mesh = SimplicialMesh(verts, _triangulate_latent(latent, nx, ny, spec), 2)

    violations = validate_mesh(mesh)
    if violations:
        raise ValueError(
            f"generator {kind!r} at resolution {spec.resolution} produced an "
            f"invalid mesh: {violations[0].detail}"
        )
    return mesh, latent


def _surface_resolution(spec: GeneratorSpec) -> tuple[int, int]:
    res = spec.resolution
    if len(res) == 1:
        res = (res[0], res[0])
    if len(res) != 2:
        raise ValueError(f"surface resolution must be nx x ny, got {res}")
    if res[0] < 2 or res[1] < 2:
        raise ValueError(f"surface resolution must be at least 2x2, got {res}")
    return res


def _latent_points(nx, ny, u0, u1, v0, v1, spec) -> np.ndarray:
    us = np.linspace(u0, u1, nx)
    vs = np.linspace(v0, v1, ny)
    uu, vv = np.meshgrid(us, vs, indexing="xy")
    pts = np.column_stack([uu.ravel(), vv.ravel()])
    if spec.triangulation == "delaunay2d":
        rng = np.random.default_rng(spec.seed)
        du = (u1 - u0) / (nx - 1)
        dv = (v1 - v0) / (ny - 1)
        jitter = rng.uniform(-0.3, 0.3, size=pts.shape) * np.array([du, dv])
        interior = (
            (pts[:, 0] > u0) & (pts[:, 0] < u1) & (pts[:, 1] > v0) & (pts[:, 1] < v1)
        )
        pts[interior] += jitter[interior]
    return pts


def _triangulate_latent(latent, nx, ny, spec) -> np.ndarray:
    if spec.triangulation == "structured-grid":
        return structured_grid_triangles(nx, ny)
    return np.asarray(delaunay2d(latent), dtype=np.int64)


def structured_grid_triangles(nx: int, ny: int) -> np.ndarray:
    """Two triangles per grid cell, row-major vertex ids v = j * nx + i.

    Cells split along the (i, j)-(i+1, j+1) diagonal except in the top-left
    and bottom-right corner cells, which use the opposite diagonal. That
    exception keeps every interior edge incident to an interior vertex for
    grids of at least 3 points per axis, so such grids have no dividing
    edges. All triangles wind counterclockwise in latent coordinates.
    """
    tris = []
    for j in range(ny - 1):
        for i in range(nx - 1):
            a = j * nx + i
            b = j * nx + i + 1
            c = (j + 1) * nx + i
            d = (j + 1) * nx + i + 1
            anti = (i == 0 and j == ny - 2) or (i == nx - 2 and j == 0)
            if anti:
                tris.append((a, b, c))
                tris.append((b, d, c))
            else:
                tris.append((a, b, d))
                tris.append((a, d, c))
    return np.asarray(tris, dtype=np.int64)


# icosahedron with vertices on the unit sphere; r is the golden ratio
def _icosahedron():
    r = (1.0 + math.sqrt(5.0)) / 2.0
    verts = np.array(
        [
            [-1, r, 0], [1, r, 0], [-1, -r, 0], [1, -r, 0],
            [0, -1, r], [0, 1, r], [0, -1, -r], [0, 1, -r],
            [r, 0, -1], [r, 0, 1], [-r, 0, -1], [-r, 0, 1],
        ],
        dtype=float,
    )
    verts /= np.linalg.norm(verts[0])
    faces = np.array(
        [
            [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
            [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
            [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
            [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
        ],
        dtype=np.int64,
    )
    return verts, faces


def icosphere(level: int) -> SimplicialMesh:
    """Icosahedron subdivided ``level`` times, vertices on the unit sphere.

    Level k has 10 * 4^k + 2 vertices and 20 * 4^k consistently oriented
    triangles; level 0 is the icosahedron itself.
    """
    if level < 0:
        raise ValueError("subdivision level must be nonnegative")
    verts, faces = _icosahedron()
    verts = [tuple(v) for v in verts]
    faces = [tuple(f) for f in faces]
    for _ in range(level):
        midpoint: dict[tuple[int, int], int] = {}

        def mid(u, v):
            key = (u, v) if u < v else (v, u)
            if key not in midpoint:
                p = np.array(verts[u]) + np.array(verts[v])
                p /= np.linalg.norm(p)
                midpoint[key] = len(verts)
                verts.append(tuple(p))
            return midpoint[key]

        next_faces = []
        for a, b, c in faces:
            ab = mid(a, b)
            bc = mid(b, c)
            ca = mid(c, a)
            next_faces.extend(
                [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
            )
        faces = next_faces
    return SimplicialMesh(
        np.asarray(verts, dtype=float),
        np.asarray(faces, dtype=np.int64),
        2,
    )


def _kuhn_tets(flip: tuple[int, int, int]):
    """Six path tetrahedra of the unit cube, mirrored per axis by ``flip``.

    Each tetrahedron follows a monotone corner path from (0,0,0) to
    (1,1,1), one per axis permutation, so all six share the cube's main
    diagonal. Mirroring keeps that property with the diagonal anchored at
    the corner ``flip`` itself.
    """
    tets = []
    for perm in itertools.permutations((0, 1, 2)):
        corner = [0, 0, 0]
        path = [tuple(corner)]
        for axis in perm:
            corner[axis] = 1
            path.append(tuple(corner))
        tets.append(tuple(tuple(c ^ f for c, f in zip(p, flip)) for p in path))
    return tuple(tets)


def ball3(resolution: int) -> SimplicialMesh:
    """Tetrahedralization of the unit ball from a split cube grid.

    The cube [-1, 1]^3 is divided into resolution^3 cells, each split into
    six path tetrahedra sharing the cell diagonal that starts at the cell
    corner nearest the origin (the split mirrors per octant). Vertices are
    then carried onto the ball by p -> p * |p|_inf / |p|_2, which maps every
    cubical shell onto a sphere, so the mesh fills the exact unit ball with
    its boundary vertices on the unit sphere.

    Anchoring the diagonals at the inward corner matters: it gives every
    tetrahedron at least one interior vertex. A tetrahedron with all four
    vertices on the boundary would be frozen at its first-round image
    during round two and typically comes out inverted against the refilled
    interior, breaking orientation uniformity.

    Neighboring cells always agree on the shared-face diagonal: the
    diagonal induced on a face depends only on the mirror flips of the two
    in-face axes, and adjacent cells span the same range there.
    """
    if resolution < 2:
        raise ValueError("ball3 needs at least 2 cells per axis")
    n = resolution + 1
    axis = np.linspace(-1.0, 1.0, n)

    def vid(i, j, k):
        return (k * n + j) * n + i

    verts = np.array(
        [[axis[i], axis[j], axis[k]] for k in range(n) for j in range(n) for i in range(n)]
    )
    tets = []
    for k in range(resolution):
        for j in range(resolution):
            for i in range(resolution):
                flip = tuple(
                    1 if axis[c] + axis[c + 1] < 0.0 else 0 for c in (i, j, k)
                )
                for tet in _kuhn_tets(flip):
                    tets.append(
                        [vid(i + dx, j + dy, k + dz) for dx, dy, dz in tet]
                    )

    norm2 = np.linalg.norm(verts, axis=1)
    norm_inf = np.abs(verts).max(axis=1)
    safe = np.where(norm2 > 0.0, norm2, 1.0)
    scale = np.where(norm2 > 0.0, norm_inf / safe, 0.0)
    return SimplicialMesh(
        verts * scale[:, None],
        np.asarray(tets, dtype=np.int64),
        3,
    )


def delaunay2d(points) -> list[tuple[int, int, int]]:
    """Delaunay triangulation by incremental insertion (Bowyer-Watson).

    Exact incircle and orientation predicates drive every decision; a final
    local edge-flip pass restores the Delaunay property near the hull that
    the finite super-triangle may disturb. Cocircular ties resolve
    deterministically in insertion order because only strict circumcircle
    containment triggers retriangulation.

    Returns counterclockwise triangles over the input points. Raises for
    fewer than 3 points, duplicate points, or an all-collinear input.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("delaunay2d expects (N, 2) points")
    n = pts.shape[0]
    if n < 3:
        raise ValueError(f"need at least 3 points, got {n}")
    rounded = [(float(x), float(y)) for x, y in pts]
    if len(set(rounded)) != n:
        raise ValueError("duplicate points are not supported")

    center = pts.mean(axis=0)
    radius = float(np.max(np.linalg.norm(pts - center, axis=1)))
    big = 1024.0 * max(radius, 1.0)
    s = math.sqrt(3.0) / 2.0
    sup = np.array(
        [
            [center[0], center[1] + 2.0 * big],
            [center[0] - 2.0 * s * big, center[1] - big],
            [center[0] + 2.0 * s * big, center[1] - big],
        ]
    )
    all_pts = [tuple(q) for q in pts] + [tuple(q) for q in sup]
    s0, s1, s2 = n, n + 1, n + 2

    triangles: set[tuple[int, int, int]] = {(s0, s1, s2)}
    for idx in range(n):
        px, py = all_pts[idx]
        bad = []
        for tri in triangles:
            a, b, c = (all_pts[t] for t in tri)
            if incircle(a, b, c, (px, py)) > 0:
                bad.append(tri)
        cavity: dict[tuple[int, int], int] = {}
        for tri in bad:
            for u, v in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
                if (v, u) in cavity:
                    del cavity[(v, u)]
                else:
                    cavity[(u, v)] = 1
            triangles.remove(tri)
        for u, v in cavity:
            triangles.add((u, v, idx))

    result = [
        tri for tri in triangles if s0 not in tri and s1 not in tri and s2 not in tri
    ]
    if not result:
        raise ValueError("points are collinear; no triangulation exists")
    result = _lawson_pass(result, all_pts)
    return sorted(tuple(tri) for tri in result)


def _lawson_pass(triangles, all_pts):
    """Flip interior edges that strictly violate the empty-circumcircle test.

    With exact predicates the incremental phase already returns a Delaunay
    triangulation, so this normally performs zero flips; it remains as a
    cheap safety net guaranteeing the postcondition.
    """
    tris = [tuple(t) for t in triangles]
    edge_map: dict[tuple[int, int], list[int]] = defaultdict(list)
    for t_index, tri in enumerate(tris):
        for u, v in _tri_edges(tri):
            edge_map[_norm_edge(u, v)].append(t_index)

    queue = list(edge_map.keys())
    alive = [True] * len(tris)
    guard = 0
    limit = 16 * max(len(tris), 2) ** 2
    while queue:
        guard += 1
        if guard > limit:
            raise RuntimeError("edge flip pass failed to terminate")
        edge = queue.pop()
        owners = [t for t in edge_map.get(edge, []) if alive[t]]
        if len(owners) != 2:
            continue
        t1, t2 = owners
        u, v = edge
        a = _opposite(tris[t1], u, v)
        b = _opposite(tris[t2], u, v)
        tri1 = tris[t1]
        if incircle(all_pts[tri1[0]], all_pts[tri1[1]], all_pts[tri1[2]],
                    all_pts[b]) > 0:
            alive[t1] = alive[t2] = False
            for new_tri in ((a, u, b), (a, b, v)):
                new_tri = _orient_tri(new_tri, all_pts)
                t_new = len(tris)
                tris.append(new_tri)
                alive.append(True)
                for x, y in _tri_edges(new_tri):
                    key = _norm_edge(x, y)
                    edge_map[key].append(t_new)
                    queue.append(key)
    return [tris[t] for t in range(len(tris)) if alive[t]]


def _tri_edges(tri):
    return ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0]))


def _norm_edge(u, v):
    return (u, v) if u < v else (v, u)


def _opposite(tri, u, v):
    for t in tri:
        if t != u and t != v:
            return t
    raise ValueError("edge not part of triangle")


def _orient_tri(tri, all_pts):
    a, b, c = tri
    if orient2d(*all_pts[a], *all_pts[b], *all_pts[c]) < 0:
        return (a, c, b)
    return (a, b, c)
