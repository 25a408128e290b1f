"""Boundary-fitted triangulation of the periodic strip.

The mesh is built from a mapped structured grid: vertical grid curves
blend from the rough bottom profile to flat levels, so the bottom
surface, the plane x3 = h, the top of the absorbing layer and the
(axis-aligned rectangular) inclusion boundary are all exact unions of
mesh edges.  Lateral periodicity is realized by keeping a duplicated
right column of vertices together with a master-node map used by the
assembly routines.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import Geometry, GeometryError, PmlProfile

FLUID, SOLID, PML = 0, 1, 2

MARKER_GAMMA_F = "GammaF"
MARKER_GAMMA = "Gamma"
MARKER_GAMMA_H = "GammaH"
MARKER_GAMMA_HL = "GammaHL"


@dataclass
class StripMesh:
    """Conforming triangulation of one period of the strip."""

    vertices: np.ndarray          # (nv, 2) coordinates
    triangles: np.ndarray         # (nt, 3) vertex indices
    tri_region: np.ndarray        # (nt,) FLUID / SOLID / PML
    node_master: np.ndarray       # (nv,) periodic master of each node
    boundary_edges: dict          # marker -> (ne, 2) vertex index pairs
    gamma_normals: np.ndarray     # (ne_gamma, 2) outward normals (from solid)
    gamma_h_nodes: np.ndarray     # master nodes on x3 = h, ordered by x1
    geometry: Geometry = None
    pml: PmlProfile | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    @property
    def n_triangles(self) -> int:
        return self.triangles.shape[0]

    def nodes_of_region(self, *regions) -> np.ndarray:
        mask = np.isin(self.tri_region, regions)
        return np.unique(self.triangles[mask])

    def masters(self, nodes) -> np.ndarray:
        return np.unique(self.node_master[np.asarray(nodes)])


def _level_rows(geom: Geometry, pml: PmlProfile | None, target: float):
    """Return (levels, row_of_h, rows_b) where levels is a list of
    callables x1 -> x3 and rows_b the row indices of the obstacle
    bottom/top (or None)."""
    f = geom.surface
    h = geom.h
    levels: list = []
    rows_b = None

    def blend(lo_func, hi_value, n, include_top):
        for j in range(0 if not levels else 1, n + (1 if include_top else 0)):
            t = j / n
            levels.append(lambda x, t=t: (1.0 - t) * lo_func(x) + t * hi_value)

    if geom.obstacle is None:
        n3 = max(2, round((h - 0.5 * (f.f_minus + f.f_plus)) / target))
        blend(f, h, n3, include_top=True)
    else:
        ob = geom.obstacle
        nA = max(2, round((ob.x3a - 0.5 * (f.f_minus + f.f_plus)) / target))
        nB = max(1, round((ob.x3b - ob.x3a) / target))
        nC = max(1, round((h - ob.x3b) / target))
        blend(f, ob.x3a, nA, include_top=True)
        rb1 = len(levels) - 1
        for j in range(1, nB + 1):
            z = ob.x3a + j / nB * (ob.x3b - ob.x3a)
            levels.append(lambda x, z=z: np.full_like(x, z, dtype=float))
        rb2 = len(levels) - 1
        for j in range(1, nC + 1):
            z = ob.x3b + j / nC * (h - ob.x3b)
            levels.append(lambda x, z=z: np.full_like(x, z, dtype=float))
        rows_b = (rb1, rb2)
    row_h = len(levels) - 1
    if pml is not None:
        nP = max(2, round(pml.L / target))
        for j in range(1, nP + 1):
            z = h + j / nP * pml.L
            levels.append(lambda x, z=z: np.full_like(x, z, dtype=float))
    return levels, row_h, rows_b


def build_mesh(geom: Geometry, pml: PmlProfile | None,
               target_h: float) -> StripMesh:
    """Triangulate one period of the strip (plus the absorbing layer if
    a profile is given) at roughly the requested edge length."""
    f = geom.surface
    gap = geom.h - f.f_plus
    if target_h <= 0 or target_h >= gap:
        raise GeometryError("target mesh size must lie in (0, h - f_plus)")
    if pml is not None and target_h >= pml.L:
        raise GeometryError("target mesh size must be below the layer "
                            "thickness")
    if abs(float(f(0.0)) - float(f(geom.period))) > 1e-12:
        raise GeometryError("surface profile is not periodic")

    # lateral grid, snapped to the obstacle's vertical sides
    n1 = max(4, round(geom.period / target_h))
    x1 = np.linspace(0.0, geom.period, n1 + 1)
    cols_ob = None
    if geom.obstacle is not None:
        ob = geom.obstacle
        ia = int(np.clip(round(ob.x1a / geom.period * n1), 1, n1 - 2))
        ib = int(np.clip(round(ob.x1b / geom.period * n1), ia + 1, n1 - 1))
        x1 = x1.copy()
        x1[ia], x1[ib] = ob.x1a, ob.x1b
        if not (np.all(np.diff(x1) > 0)):
            raise GeometryError("obstacle too small for the requested mesh "
                                "size")
        cols_ob = (ia, ib)

    levels, row_h, rows_b = _level_rows(geom, pml, target_h)
    n_rows = len(levels)

    verts = np.empty((n_rows * (n1 + 1), 2))
    for r, lv in enumerate(levels):
        sl = slice(r * (n1 + 1), (r + 1) * (n1 + 1))
        verts[sl, 0] = x1
        verts[sl, 1] = lv(x1)

    def vid(r, c):
        return r * (n1 + 1) + c

    node_master = np.arange(verts.shape[0])
    for r in range(n_rows):
        node_master[vid(r, n1)] = vid(r, 0)

    tris = []
    regions = []
    for r in range(n_rows - 1):
        for c in range(n1):
            if rows_b is not None and rows_b[0] <= r < rows_b[1] \
                    and cols_ob[0] <= c < cols_ob[1]:
                reg = SOLID
            elif r >= row_h:
                reg = PML
            else:
                reg = FLUID
            a, b = vid(r, c), vid(r, c + 1)
            d, e = vid(r + 1, c), vid(r + 1, c + 1)
            tris.append((a, b, e))
            tris.append((a, e, d))
            regions.append(reg)
            regions.append(reg)
    triangles = np.array(tris, dtype=np.int64)
    tri_region = np.array(regions, dtype=np.int64)

    boundary = {
        MARKER_GAMMA_F: np.array([(vid(0, c), vid(0, c + 1))
                                  for c in range(n1)], dtype=np.int64),
        MARKER_GAMMA_H: np.array([(vid(row_h, c), vid(row_h, c + 1))
                                  for c in range(n1)], dtype=np.int64),
    }
    if pml is not None:
        top = n_rows - 1
        boundary[MARKER_GAMMA_HL] = np.array(
            [(vid(top, c), vid(top, c + 1)) for c in range(n1)],
            dtype=np.int64)
    gamma_edges = []
    gamma_normals = []
    if geom.obstacle is not None:
        ia, ib = cols_ob
        rb1, rb2 = rows_b
        for c in range(ia, ib):
            gamma_edges.append((vid(rb1, c), vid(rb1, c + 1)))
            gamma_normals.append((0.0, -1.0))
            gamma_edges.append((vid(rb2, c), vid(rb2, c + 1)))
            gamma_normals.append((0.0, 1.0))
        for r in range(rb1, rb2):
            gamma_edges.append((vid(r, ia), vid(r + 1, ia)))
            gamma_normals.append((-1.0, 0.0))
            gamma_edges.append((vid(r, ib), vid(r + 1, ib)))
            gamma_normals.append((1.0, 0.0))
    boundary[MARKER_GAMMA] = np.array(gamma_edges, dtype=np.int64).reshape(
        -1, 2)

    gamma_h_nodes = np.array([vid(row_h, c) for c in range(n1)],
                             dtype=np.int64)

    return StripMesh(
        vertices=verts, triangles=triangles, tri_region=tri_region,
        node_master=node_master, boundary_edges=boundary,
        gamma_normals=np.array(gamma_normals, dtype=float).reshape(-1, 2),
        gamma_h_nodes=gamma_h_nodes, geometry=geom, pml=pml,
        meta={"n1": n1, "row_h": row_h, "rows_b": rows_b,
              "cols_ob": cols_ob, "n_rows": n_rows, "target_h": target_h},
    )


def export_mesh(mesh: StripMesh, path: str) -> None:
    """Write the mesh in the plain-text format documented in the README:
    $nodes / $elements / $markers sections."""
    with open(path, "w") as fh:
        fh.write("$nodes\n")
        fh.write(f"{mesh.n_vertices}\n")
        for i, (x, z) in enumerate(mesh.vertices):
            fh.write(f"{i} {x:.17g} {z:.17g} {mesh.node_master[i]}\n")
        fh.write("$elements\n")
        fh.write(f"{mesh.n_triangles}\n")
        for i, tri in enumerate(mesh.triangles):
            r = mesh.tri_region[i]
            fh.write(f"{i} {tri[0]} {tri[1]} {tri[2]} {r}\n")
        fh.write("$markers\n")
        for name, edges in mesh.boundary_edges.items():
            fh.write(f"{name} {len(edges)}\n")
            for a, b in edges:
                fh.write(f"{a} {b}\n")
