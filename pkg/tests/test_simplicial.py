"""Mesh representation, validation, boundary, and orientation tests."""

import numpy as np
import pytest

from fplm.generators import icosphere, structured_grid_triangles
from fplm.geometry import simplex_orientation
from fplm.simplicial import (
    SimplicialMesh,
    canonical_orientation,
    detect_boundary,
    detect_dividing_simplices,
    mesh_edges,
    mesh_faces,
    triangulate_polygon_faces,
    validate_mesh,
)


def triangle_mesh():
    return SimplicialMesh(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
        np.array([[0, 1, 2]]),
        2,
    )


def two_triangles():
    return SimplicialMesh(
        np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]),
        np.array([[0, 1, 2], [1, 3, 2]]),
        2,
    )


def grid_mesh(nx, ny):
    xs, ys = np.meshgrid(np.linspace(0, 1, nx), np.linspace(0, 1, ny))
    verts = np.column_stack([xs.ravel(), ys.ravel()])
    return SimplicialMesh(verts, structured_grid_triangles(nx, ny), 2)


class TestSimplicialMesh:
    def test_basic_properties(self):
        m = triangle_mesh()
        assert m.n_vertices == 3
        assert m.n_simplices == 1
        assert m.ambient_dim == 2
        assert m.intrinsic_dim == 2

    def test_arrays_read_only(self):
        m = triangle_mesh()
        with pytest.raises(ValueError):
            m.vertices[0, 0] = 5.0
        with pytest.raises(ValueError):
            m.simplices[0, 0] = 2

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            SimplicialMesh(
                np.zeros((3, 2)), np.array([[0, 1, 3]]), 2
            )

    def test_wrong_simplex_width(self):
        with pytest.raises(ValueError):
            SimplicialMesh(np.zeros((4, 2)), np.array([[0, 1, 2, 3]]), 2)

    def test_intrinsic_dim_above_ambient(self):
        with pytest.raises(ValueError):
            SimplicialMesh(np.zeros((4, 2)), np.array([[0, 1, 2, 3]]), 3)

    def test_intrinsic_equal_ambient_allowed(self):
        m = SimplicialMesh(
            np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]),
            np.array([[0, 1, 2]]),
            2,
        )
        assert m.intrinsic_dim == m.ambient_dim == 2


class TestValidateMesh:
    def test_single_triangle_valid(self):
        assert validate_mesh(triangle_mesh()) == []

    def test_repeated_vertex(self):
        m = SimplicialMesh(np.eye(3, 2), np.array([[0, 1, 1]]), 2)
        rules = [v.rule for v in validate_mesh(m)]
        assert "repeated-vertex" in rules

    def test_overshared_face(self):
        # three triangles all containing edge (1, 2)
        verts = np.array(
            [[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [1.5, 1.0], [-0.5, 1.0]]
        )
        simp = np.array([[0, 1, 2], [1, 3, 2], [1, 2, 4]])
        rules = [v.rule for v in validate_mesh(SimplicialMesh(verts, simp, 2))]
        assert "face-overshared" in rules

    def test_collinear_degenerate(self):
        m = SimplicialMesh(
            np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]),
            np.array([[0, 1, 2]]),
            2,
        )
        rules = [v.rule for v in validate_mesh(m, vol_tol=1e-12)]
        assert "degenerate-simplex" in rules

    def test_disconnected(self):
        verts = np.array(
            [[0, 0], [1, 0], [0, 1], [10, 10], [11, 10], [10, 11]], dtype=float
        )
        simp = np.array([[0, 1, 2], [3, 4, 5]])
        rules = [v.rule for v in validate_mesh(SimplicialMesh(verts, simp, 2))]
        assert "disconnected" in rules

    def test_generated_meshes_valid(self):
        assert validate_mesh(grid_mesh(5, 4)) == []
        assert validate_mesh(icosphere(1)) == []


class TestFacesAndEdges:
    def test_incidence_sum_property(self):
        # every d-simplex contributes d+1 faces, shared or not
        for mesh in (triangle_mesh(), two_triangles(), grid_mesh(4, 4), icosphere(1)):
            faces, counts = mesh_faces(mesh)
            d = mesh.intrinsic_dim
            assert counts.sum() == (d + 1) * mesh.n_simplices

    def test_edges_unique_sorted(self):
        e = mesh_edges(two_triangles())
        assert e.shape == (5, 2)
        assert (e[:, 0] < e[:, 1]).all()
        assert len({tuple(r) for r in e.tolist()}) == 5

    def test_icosahedron_every_edge_shared_twice(self):
        # brute-force incidence count over all 20 faces
        ico = icosphere(0)
        assert ico.n_vertices == 12
        assert ico.n_simplices == 20
        incidence = {}
        for tri in ico.simplices.tolist():
            for a, b in ((0, 1), (0, 2), (1, 2)):
                key = tuple(sorted((tri[a], tri[b])))
                incidence[key] = incidence.get(key, 0) + 1
        assert len(incidence) == 30
        assert set(incidence.values()) == {2}


class TestDetectBoundary:
    def test_single_triangle(self):
        b = detect_boundary(triangle_mesh())
        assert len(b.boundary_faces) == 3
        assert b.boundary_vertices.tolist() == [0, 1, 2]
        assert len(b.boundary_cycles) == 1
        cycle = b.boundary_cycles[0]
        assert sorted(cycle) == [0, 1, 2]

    def test_two_triangles(self):
        b = detect_boundary(two_triangles())
        got = {tuple(sorted(f)) for f in b.boundary_faces.tolist()}
        assert got == {(0, 1), (0, 2), (1, 3), (2, 3)}

    def test_closed_surface_empty(self):
        b = detect_boundary(icosphere(0))
        assert len(b.boundary_faces) == 0
        assert b.boundary_vertices.size == 0
        assert len(b.boundary_cycles) == 0

    def test_nonmanifold_boundary_rejected(self):
        # bowtie: two triangles joined only at vertex 2 gives vertex 2 four
        # incident boundary edges
        verts = np.array(
            [[0, 0], [1, 0], [0.5, 0.5], [0, 1], [1, 1]], dtype=float
        )
        simp = np.array([[0, 1, 2], [2, 3, 4]])
        with pytest.raises(ValueError):
            detect_boundary(SimplicialMesh(verts, simp, 2))

    def test_annulus_two_cycles(self):
        # square ring of 8 vertices, inner square hole
        outer = np.array([[0, 0], [3, 0], [3, 3], [0, 3]], dtype=float)
        inner = np.array([[1, 1], [2, 1], [2, 2], [1, 2]], dtype=float)
        verts = np.vstack([outer, inner])
        simp = np.array(
            [
                [0, 1, 4], [1, 5, 4],
                [1, 2, 5], [2, 6, 5],
                [2, 3, 6], [3, 7, 6],
                [3, 0, 7], [0, 4, 7],
            ]
        )
        b = detect_boundary(SimplicialMesh(verts, simp, 2))
        assert len(b.boundary_cycles) == 2
        sizes = sorted(len(c) for c in b.boundary_cycles)
        assert sizes == [4, 4]

    def test_tet_mesh_boundary_faces(self):
        # two tets sharing a face: 6 of 8 faces on the boundary
        verts = np.array(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float
        )
        simp = np.array([[0, 1, 2, 3], [1, 2, 3, 4]])
        b = detect_boundary(SimplicialMesh(verts, simp, 3))
        assert len(b.boundary_faces) == 6
        assert b.boundary_cycles is None


class TestDividingSimplices:
    def test_two_triangles_shared_edge(self):
        div = detect_dividing_simplices(two_triangles())
        assert div == [(1, 2)]

    def test_wheel_has_none(self):
        ang = np.arange(5) * 2 * np.pi / 5
        rim = np.column_stack([np.cos(ang), np.sin(ang)])
        verts = np.vstack([rim, [[0.0, 0.0]]])
        simp = np.array([[i, (i + 1) % 5, 5] for i in range(5)])
        assert detect_dividing_simplices(SimplicialMesh(verts, simp, 2)) == []

    def test_grid_4x4_none_and_brute_force(self):
        mesh = grid_mesh(4, 4)
        assert detect_dividing_simplices(mesh) == []
        # brute force: every interior edge must touch an interior vertex
        bset = set(detect_boundary(mesh).boundary_vertices.tolist())
        faces, counts = mesh_faces(mesh)
        for face, cnt in zip(faces.tolist(), counts.tolist()):
            if cnt == 2:
                assert not all(v in bset for v in face)

    def test_grids_stay_strongly_connected(self):
        for nx in range(3, 8):
            for ny in range(3, 8):
                assert detect_dividing_simplices(grid_mesh(nx, ny)) == [], (nx, ny)

    def test_closed_mesh_has_none(self):
        assert detect_dividing_simplices(icosphere(0)) == []

    def test_tet_dividing_face(self):
        # two tets sharing face (1,2,3): all of 1,2,3 are boundary vertices
        verts = np.array(
            [[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 1, 1]], dtype=float
        )
        simp = np.array([[0, 1, 2, 3], [1, 2, 3, 4]])
        div = detect_dividing_simplices(SimplicialMesh(verts, simp, 3))
        assert div == [(1, 2, 3)]


class TestCanonicalOrientation:
    def test_single_simplex(self):
        assert canonical_orientation(triangle_mesh()).tolist() == [1]

    def test_consistent_with_geometry_on_planar_mesh(self):
        # a consistently wound planar mesh: canonical sign times geometric
        # sign must be globally constant
        mesh = grid_mesh(5, 5)
        sign = canonical_orientation(mesh)
        geo = np.array(
            [simplex_orientation(mesh.vertices[s]) for s in mesh.simplices]
        )
        prods = set((sign * geo).tolist())
        assert len(prods) == 1

    def test_sphere_orientable(self):
        mesh = icosphere(2)
        sign = canonical_orientation(mesh)
        assert set(sign.tolist()) <= {-1, 1}

    def test_scrambled_vertex_order_recovered(self):
        mesh = grid_mesh(4, 4)
        rng = np.random.default_rng(0)
        scrambled = mesh.simplices.copy()
        parity = np.ones(len(scrambled), dtype=np.int64)
        for i in range(len(scrambled)):
            if rng.random() < 0.5:
                scrambled[i, [0, 1]] = scrambled[i, [1, 0]]
                parity[i] = -1
        m2 = SimplicialMesh(mesh.vertices, scrambled, 2)
        s1 = canonical_orientation(mesh)
        s2 = canonical_orientation(m2)
        # swapping two vertices of simplex i must flip its canonical sign
        assert np.array_equal(s1 * parity, s2) or np.array_equal(-s1 * parity, s2)

    def test_mobius_strip_rejected(self):
        # triangulated Mobius band: 6 rim vertices, strip of 6 triangles
        # with a flip when closing up
        n = 6
        verts = []
        for i in range(n):
            theta = 2 * np.pi * i / n
            for s in (-1.0, 1.0):
                r = 2.0 + 0.5 * s * np.cos(theta / 2)
                z = 0.5 * s * np.sin(theta / 2)
                verts.append([r * np.cos(theta), r * np.sin(theta), z])
        verts = np.array(verts)

        def vid(i, s):
            return 2 * (i % n) + s

        tris = []
        for i in range(n):
            if i < n - 1:
                a, b = vid(i, 0), vid(i, 1)
                c, d = vid(i + 1, 0), vid(i + 1, 1)
            else:
                # closing the loop swaps the two rails
                a, b = vid(i, 0), vid(i, 1)
                c, d = vid(0, 1), vid(0, 0)
            tris.append([a, b, c])
            tris.append([b, d, c])
        mesh = SimplicialMesh(verts, np.array(tris), 2)
        with pytest.raises(ValueError, match="orient"):
            canonical_orientation(mesh)


class TestEulerFormula:
    def test_disk_meshes(self):
        for mesh in (triangle_mesh(), two_triangles(), grid_mesh(4, 5), grid_mesh(7, 3)):
            v = mesh.n_vertices
            e = len(mesh_edges(mesh))
            f = mesh.n_simplices
            assert v - e + f == 1

    def test_sphere(self):
        for level in (0, 1, 2):
            mesh = icosphere(level)
            v = mesh.n_vertices
            e = len(mesh_edges(mesh))
            f = mesh.n_simplices
            assert v - e + f == 2


class TestTriangulatePolygonFaces:
    def test_quad_fan(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float)
        mesh = triangulate_polygon_faces([[0, 1, 2, 3]], verts)
        got = {tuple(t) for t in mesh.simplices.tolist()}
        assert got == {(0, 1, 2), (0, 2, 3)}

    def test_triangle_identity(self):
        verts = np.array([[0, 0, 0], [1, 0, 0], [0, 1, 0]], dtype=float)
        mesh = triangulate_polygon_faces([[0, 1, 2]], verts)
        assert mesh.simplices.tolist() == [[0, 1, 2]]

    def test_hexagon_fan(self):
        ang = np.arange(6) * np.pi / 3
        verts = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(6)])
        mesh = triangulate_polygon_faces([[0, 1, 2, 3, 4, 5]], verts)
        got = [tuple(t) for t in mesh.simplices.tolist()]
        assert got == [(0, 1, 2), (0, 2, 3), (0, 3, 4), (0, 4, 5)]

    def test_fan_from_lowest_index(self):
        verts = np.array(
            [[0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0]], dtype=float
        )
        mesh = triangulate_polygon_faces([[2, 3, 0, 1]], verts)
        # rotated so the fan apex is the lowest index, preserving cyclic order
        got = {tuple(t) for t in mesh.simplices.tolist()}
        assert got == {(0, 1, 2), (0, 2, 3)}

    def test_rejects_degenerate_faces(self):
        verts = np.zeros((4, 3))
        with pytest.raises(ValueError):
            triangulate_polygon_faces([[0, 1]], verts)
        with pytest.raises(ValueError):
            triangulate_polygon_faces([[0, 1, 1]], verts)

    def test_boundary_consistency_with_quad_tessellation(self):
        # cube surface as 6 quads: triangulated mesh must be closed
        corners = np.array(
            [
                [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
                [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
            ],
            dtype=float,
        )
        quads = [
            [0, 3, 2, 1], [4, 5, 6, 7],
            [0, 1, 5, 4], [2, 3, 7, 6],
            [1, 2, 6, 5], [3, 0, 4, 7],
        ]
        mesh = triangulate_polygon_faces(quads, corners)
        assert mesh.n_simplices == 12
        assert len(detect_boundary(mesh).boundary_faces) == 0
