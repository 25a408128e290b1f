"""Structured boundary-fitted triangulation of the periodic strip."""

import numpy as np
import pytest

from pmlstrip import (Geometry, GeometryError, PmlProfile, Rectangle,
                      StripMesh, SurfaceProfile, build_mesh, export_mesh)
from pmlstrip.mesh import FLUID, PML, SOLID


def flat_geometry(obstacle=None):
    return Geometry(period=1.0, surface=SurfaceProfile.flat(0.0), h=0.5,
                    obstacle=obstacle)


class TestBasic:
    def test_flat_no_layer(self):
        mesh = build_mesh(flat_geometry(), None, 0.1)
        assert np.all(mesh.tri_region == FLUID)
        assert "GammaHL" not in mesh.boundary_edges
        # surface and top rows sit exactly on their planes
        gf = np.unique(mesh.boundary_edges["GammaF"])
        assert np.allclose(mesh.vertices[gf, 1], 0.0)
        gh = np.unique(mesh.boundary_edges["GammaH"])
        assert np.allclose(mesh.vertices[gh, 1], 0.5)

    def test_with_layer(self):
        pml = PmlProfile(sigma0=2.0, m=1, L=0.4, s1=1.0)
        mesh = build_mesh(flat_geometry(), pml, 0.1)
        assert np.any(mesh.tri_region == PML)
        ghl = np.unique(mesh.boundary_edges["GammaHL"])
        assert np.allclose(mesh.vertices[ghl, 1], 0.9)
        # layer triangles all above h
        for t in np.flatnonzero(mesh.tri_region == PML):
            assert np.all(mesh.vertices[mesh.triangles[t], 1] >= 0.5 - 1e-12)

    def test_periodic_master_map(self):
        mesh = build_mesh(flat_geometry(), None, 0.1)
        right = np.flatnonzero(
            np.isclose(mesh.vertices[:, 0], 1.0))
        for node in right:
            m = mesh.node_master[node]
            assert np.isclose(mesh.vertices[m, 0], 0.0)
            assert np.isclose(mesh.vertices[m, 1], mesh.vertices[node, 1])
        interior = np.flatnonzero(mesh.vertices[:, 0] < 1.0 - 1e-12)
        assert np.all(mesh.node_master[interior] == interior)

    def test_positive_areas_and_cover(self):
        geom = Geometry(period=1.0,
                        surface=SurfaceProfile.cosine(0.1, 1.0), h=0.5)
        mesh = build_mesh(geom, None, 0.05)
        v = mesh.vertices[mesh.triangles]
        d1 = v[:, 1] - v[:, 0]
        d2 = v[:, 2] - v[:, 0]
        areas = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
        assert np.all(areas > 0)
        # total area = int (h - f) dx = 0.5 (cosine integrates to zero)
        assert areas.sum() == pytest.approx(0.5, rel=1e-10)

    def test_cosine_surface_fitted(self):
        geom = Geometry(period=1.0,
                        surface=SurfaceProfile.cosine(0.1, 2.0), h=0.5)
        mesh = build_mesh(geom, None, 0.05)
        gf = np.unique(mesh.boundary_edges["GammaF"])
        assert np.allclose(mesh.vertices[gf, 1],
                           geom.surface(mesh.vertices[gf, 0]))


class TestObstacle:
    def test_solid_region_and_interface(self):
        ob = Rectangle.square((0.5, 0.25), 0.2)
        mesh = build_mesh(flat_geometry(ob), None, 0.05)
        solid = np.flatnonzero(mesh.tri_region == SOLID)
        assert solid.size > 0
        # solid triangle centroids inside the rectangle
        cent = mesh.vertices[mesh.triangles[solid]].mean(axis=1)
        assert np.all(ob.contains(cent[:, 0], cent[:, 1], pad=1e-9))
        # interface edges on the rectangle boundary, normals outward
        edges = mesh.boundary_edges["Gamma"]
        assert edges.size > 0
        for (a, b), n in zip(edges, mesh.gamma_normals):
            mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b])
            onb = (np.isclose(mid[0], ob.x1a) or np.isclose(mid[0], ob.x1b)
                   or np.isclose(mid[1], ob.x3a)
                   or np.isclose(mid[1], ob.x3b))
            assert onb
            cx, cz = ob.center
            assert n[0] * (mid[0] - cx) + n[1] * (mid[1] - cz) > 0

    def test_obstacle_sides_snapped(self):
        ob = Rectangle(0.33, 0.61, 0.17, 0.34)
        mesh = build_mesh(flat_geometry(ob), None, 0.04)
        xs = mesh.vertices[:, 0]
        assert np.any(np.isclose(xs, 0.33))
        assert np.any(np.isclose(xs, 0.61))


class TestValidation:
    def test_target_size_limits(self):
        with pytest.raises(GeometryError):
            build_mesh(flat_geometry(), None, 0.6)
        with pytest.raises(GeometryError):
            build_mesh(flat_geometry(),
                       PmlProfile(sigma0=1.0, m=1, L=0.05, s1=1.0), 0.1)

    def test_nonperiodic_surface_rejected(self):
        bad = SurfaceProfile(lambda x: 0.1 * x, 0.0, 0.1, "ramp")
        geom = Geometry(period=1.0, surface=bad, h=0.5)
        with pytest.raises(GeometryError):
            build_mesh(geom, None, 0.1)


class TestExport:
    def test_round_trip_counts(self, tmp_path):
        mesh = build_mesh(flat_geometry(Rectangle.square((0.5, 0.25), 0.2)),
                          PmlProfile(sigma0=2.0, m=1, L=0.3, s1=1.0), 0.06)
        path = tmp_path / "mesh.txt"
        export_mesh(mesh, str(path))
        text = path.read_text().splitlines()
        assert text[0] == "$nodes"
        assert int(text[1]) == mesh.n_vertices
        i_el = text.index("$elements")
        assert int(text[i_el + 1]) == mesh.n_triangles
        i_mk = text.index("$markers")
        names = set()
        k = i_mk + 1
        while k < len(text):
            name, count = text[k].split()
            names.add(name)
            k += int(count) + 1
        assert names == set(mesh.boundary_edges)
