"""Mesh invariants, generators, and the POLYMESH file format."""

import numpy as np
import pytest

from covswe.errors import InvalidBounds, ParseError
from covswe.mesh import (Mesh1D, build_1d, build_quad_grid, build_voronoi,
                         load_mesh, save_mesh)

BOUNDS = ((-1.0, 1.0), (-1.0, 1.0))


def test_mesh1d_basics():
    mesh = build_1d(-0.5, 0.5, 20)
    assert mesh.dx == pytest.approx(0.05)
    assert len(mesh.centers) == 20
    assert mesh.centers[0] == pytest.approx(-0.5 + 0.025)
    with pytest.raises(InvalidBounds):
        Mesh1D(0.0, 1.0, 2)
    with pytest.raises(InvalidBounds):
        build_1d(1.0, 0.0, 10)


def test_quad_grid_counts_and_areas():
    mesh = build_quad_grid(BOUNDS, 4, 5)
    assert mesh.n_cells == 20
    assert np.allclose(mesh.areas, (2.0 / 4) * (2.0 / 5))
    assert mesh.areas.sum() == pytest.approx(4.0)
    # incircle diameter of a rectangle is its short side
    assert np.allclose(mesh.incircle_diameters,
                       4.0 * mesh.areas / mesh.perimeters)


def _closure_defect(mesh):
    worst = 0.0
    for k in range(mesh.n_cells):
        acc = np.zeros(2)
        for j in range(mesh.cell_edge_ptr[k], mesh.cell_edge_ptr[k + 1]):
            e = mesh.cell_edge_idx[j]
            s = mesh.cell_edge_sign[j]
            acc += s * mesh.lengths[e] * mesh.normals[e]
        worst = max(worst, np.linalg.norm(acc) / mesh.perimeters[k])
    return worst


@pytest.mark.parametrize("builder", [
    lambda: build_quad_grid(BOUNDS, 7, 3),
    lambda: build_voronoi(BOUNDS, 120, lloyd_iters=20, seed=3),
])
def test_mesh_invariants(builder):
    mesh = builder()
    assert np.all(mesh.areas > 0.0)
    assert mesh.areas.sum() == pytest.approx(4.0, rel=1e-12)
    assert _closure_defect(mesh) <= 1e-12
    # every edge normal is unit length and points from left to right cell
    assert np.allclose(np.linalg.norm(mesh.normals, axis=1), 1.0)
    interior = mesh.edge_cells[:, 1] >= 0
    lc = mesh.centroids[mesh.edge_cells[interior, 0]]
    rc = mesh.centroids[mesh.edge_cells[interior, 1]]
    dots = np.sum((rc - lc) * mesh.normals[interior], axis=1)
    assert np.all(dots > 0.0)


def test_voronoi_deterministic_and_sized():
    a = build_voronoi(BOUNDS, 200, lloyd_iters=10, seed=7)
    b = build_voronoi(BOUNDS, 200, lloyd_iters=10, seed=7)
    assert a.n_cells == b.n_cells
    assert np.array_equal(a.vertices, b.vertices)
    # mean cell size tracks the seed density
    assert a.d_n == pytest.approx(2.0 / np.sqrt(200), rel=0.3)


def test_boundary_edges_form_the_rectangle():
    mesh = build_quad_grid(BOUNDS, 6, 6)
    bd = mesh.boundary_edges()
    total = mesh.lengths[bd].sum()
    assert total == pytest.approx(8.0, rel=1e-12)


def test_save_load_roundtrip(tmp_path):
    mesh = build_voronoi(BOUNDS, 60, lloyd_iters=5, seed=1)
    path = tmp_path / "mesh.poly"
    save_mesh(mesh, path)
    back = load_mesh(path)
    assert np.array_equal(back.vertices, mesh.vertices)
    assert np.array_equal(back.cell_vertex_ptr, mesh.cell_vertex_ptr)
    assert np.array_equal(back.cell_vertex_idx, mesh.cell_vertex_idx)
    assert np.allclose(back.areas, mesh.areas)


def test_load_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.poly"
    path.write_text("NOTAMESH 1\n")
    with pytest.raises(ParseError) as info:
        load_mesh(path)
    assert info.value.line == 1


def test_load_rejects_truncated_file(tmp_path):
    mesh = build_quad_grid(BOUNDS, 2, 2)
    path = tmp_path / "trunc.poly"
    save_mesh(mesh, path)
    lines = path.read_text().splitlines()
    path.write_text("\n".join(lines[:-2]) + "\n")
    with pytest.raises(ParseError):
        load_mesh(path)
