"""Slope reconstruction, limiting, and the half-step predictor."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covswe import _kernels
from covswe.errors import SingularStencil
from covswe.mesh import PolyMesh, build_quad_grid, build_voronoi
from covswe.reconstruction import (CONSERVATIVE, WB_ETA, CellPolynomial,
                                   barth_limit, evaluate, ls_slope,
                                   minmod_slope, predictor)

BOUNDS = ((-1.0, 1.0), (-1.0, 1.0))


def _linear_averages(mesh, coeffs):
    """Cell averages of linear fields a + bx + cy (exact at centroids)."""
    out = np.zeros((mesh.n_cells, 7))
    for c, (a, bx, cy) in enumerate(coeffs):
        out[:, c] = a + bx * mesh.centroids[:, 0] + cy * mesh.centroids[:, 1]
    return out


def test_ls_slope_exact_for_linear_fields():
    mesh = build_voronoi(BOUNDS, 80, lloyd_iters=10, seed=2)
    coeffs = [(i * 0.3, 1.0 + i, -0.5 * i) for i in range(7)]
    av = _linear_averages(mesh, coeffs)
    for k in range(mesh.n_cells):
        s = ls_slope(mesh, av, k)
        for c, (_, bx, cy) in enumerate(coeffs):
            assert s[c, 0] == pytest.approx(bx, abs=1e-10)
            assert s[c, 1] == pytest.approx(cy, abs=1e-10)


def test_ls_slope_collinear_stencil_raises():
    # a 3x1 strip: the middle cell's two neighbors are collinear with it
    verts = np.array([[x, y] for y in (0.0, 1.0) for x in (0.0, 1.0, 2.0, 3.0)])
    cells = [[0, 1, 5, 4], [1, 2, 6, 5], [2, 3, 7, 6]]
    ptr = np.array([0, 4, 8, 12])
    idx = np.array([v for cell in cells for v in cell])
    mesh = PolyMesh(verts, ptr, idx)
    av = np.zeros((3, 7))
    with pytest.raises(SingularStencil):
        ls_slope(mesh, av, 1)


def test_barth_preserves_linear_interior():
    mesh = build_quad_grid(BOUNDS, 8, 8)
    coeffs = [(0.0, 1.0, 2.0)] * 7
    av = _linear_averages(mesh, coeffs)
    # an interior cell: all its vertex values lie inside the stencil range
    k = 3 * 8 + 3
    s = ls_slope(mesh, av, k)
    limited = barth_limit(mesh, av, k, s)
    assert np.allclose(limited, s)


def test_barth_bounds_vertex_values(rng):
    mesh = build_voronoi(BOUNDS, 60, lloyd_iters=10, seed=4)
    av = rng.uniform(-1.0, 1.0, (mesh.n_cells, 7))
    for k in range(mesh.n_cells):
        nbs = mesh.stencil_idx[mesh.stencil_ptr[k]:mesh.stencil_ptr[k + 1]]
        s = barth_limit(mesh, av, k, ls_slope(mesh, av, k))
        wmax = np.maximum(av[k], av[nbs].max(axis=0))
        wmin = np.minimum(av[k], av[nbs].min(axis=0))
        for v in mesh.vertices[mesh.cell_loop(k)]:
            val = av[k] + s @ (v - mesh.centroids[k])
            assert np.all(val <= wmax + 1e-12)
            assert np.all(val >= wmin - 1e-12)


def test_minmod_cases():
    assert _kernels.minmod(1.0, 2.0) == 1.0
    assert _kernels.minmod(-1.0, 2.0) == 0.0
    assert _kernels.minmod(3.0, 3.0) == 3.0
    assert _kernels.minmod(-2.0, -1.0) == -1.0
    assert _kernels.minmod(0.0, 5.0) == 0.0


@given(a=st.floats(-10, 10), b=st.floats(-10, 10))
@settings(max_examples=200, deadline=None)
def test_minmod_properties(a, b):
    m = _kernels.minmod(a, b)
    if a * b <= 0.0:
        assert m == 0.0
    else:
        assert abs(m) == min(abs(a), abs(b))
        assert np.sign(m) == np.sign(a)


def test_minmod_slope_matches_kernel():
    av = np.array([[1.0, 0.0], [1.5, 1.0], [1.7, -1.0]]).T  # (2, 3) -> rows
    av3 = np.array([[1.0, 0.0, 0.0, 0, 1, 0, 1],
                    [1.5, 1.0, 0.0, 0, 1, 0, 1],
                    [1.7, -1.0, 0.0, 0, 1, 0, 1]])
    s = minmod_slope(av3, 0.1)
    assert s[0] == pytest.approx(_kernels.minmod(5.0, 2.0))
    assert s[1] == pytest.approx(0.0)


def test_predictor_zero_at_rest_wb_eta():
    """Constant eta and zero velocity over varying b/metric: no dynamics."""
    mesh = build_voronoi(BOUNDS, 50, lloyd_iters=10, seed=5)
    rng = np.random.default_rng(0)
    av = np.zeros((mesh.n_cells, 7))
    av[:, 0] = 3.0                                   # eta (wb variables)
    av[:, 3] = rng.uniform(0.0, 1.0, mesh.n_cells)   # rough bathymetry
    av[:, 4] = 1.0 + 0.2 * mesh.centroids[:, 1]
    av[:, 6] = 1.0
    for k in range(mesh.n_cells):
        slope = ls_slope(mesh, av, k)
        dv = predictor(mesh, k, av[k], slope, mode=WB_ETA)
        assert np.max(np.abs(dv)) <= 1e-13


def test_evaluate_space_time_linear():
    poly = CellPolynomial(
        value=np.array([5.0, 1.0, 2.0, 3.0, 1.0, 0.0, 1.0]),
        slope=np.zeros((7, 2)),
        time_slope=np.ones(7), center=np.zeros(2), t0=1.0)
    poly.slope[0] = (2.0, -1.0)
    q = evaluate(poly, (0.5, 0.5), 1.5, mode=CONSERVATIVE)
    assert q[0] == pytest.approx(5.0 + 1.0 - 0.5 + 0.5)
    assert q[1] == pytest.approx(1.0 + 0.5)
    q_wb = evaluate(poly, (0.0, 0.0), 1.0, mode=WB_ETA)
    assert q_wb[0] == pytest.approx(poly.value[0] - poly.value[3])
