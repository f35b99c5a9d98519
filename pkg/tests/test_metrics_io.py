"""Error norms, convergence orders, and the CSV/VTK writers."""

import csv

import numpy as np
import pytest

from covswe.errors import DegenerateRatio
from covswe.geometry import MetricSpec
from covswe.mesh import build_1d, build_quad_grid
from covswe.metrics_io import (ErrorReport, convergence_order, l2_error_1d,
                               l2_error_2d, write_csv_1d, write_csv_2d,
                               write_vtk_2d)


def test_l2_error_closed_forms():
    # constant difference c over length L: error = c sqrt(L)
    diff = np.full(100, 0.25)
    assert l2_error_1d(diff, 0.01) == pytest.approx(0.25 * 1.0)
    areas = np.full(50, 0.08)
    assert l2_error_2d(diff[:50], areas) == pytest.approx(0.25 * np.sqrt(4.0))


def test_convergence_order_reference_pair():
    coarse = ErrorReport(r_n=2e-2, n_cells=50, t=3.0,
                         errors={"h": 1.1698e-5})
    fine = ErrorReport(r_n=1e-2, n_cells=100, t=3.0,
                       errors={"h": 2.9651e-6})
    assert convergence_order(coarse, fine, "h") == pytest.approx(1.98, abs=0.01)


def test_convergence_order_degenerate():
    a = ErrorReport(r_n=1e-2, n_cells=100, t=1.0, errors={"h": 1.0})
    b = ErrorReport(r_n=1e-2, n_cells=100, t=1.0, errors={"h": 0.5})
    with pytest.raises(DegenerateRatio):
        convergence_order(a, b, "h")


def test_csv_1d_roundtrip(tmp_path):
    mesh = build_1d(-0.5, 0.5, 10)
    rng = np.random.default_rng(1)
    av = np.empty((10, 7))
    av[:, 0] = rng.uniform(1.0, 2.0, 10)
    av[:, 1] = rng.uniform(-1.0, 1.0, 10)
    av[:, 2] = 0.0
    av[:, 3] = rng.uniform(-1.0, 1.0, 10)
    av[:, 4] = 1.0
    av[:, 5] = 0.0
    av[:, 6] = 1.0
    path = tmp_path / "out.csv"
    write_csv_1d(path, mesh, av, axis=0)
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0].keys()) == ["xi", "h", "u", "b", "eta",
                                    "g11", "g12", "g22"]
    assert len(rows) == 10
    for i, row in enumerate(rows):
        # 17 significant digits: bit-exact double roundtrip
        assert float(row["xi"]) == mesh.centers[i]
        assert float(row["h"]) == av[i, 0]
        assert float(row["u"]) == av[i, 1] / av[i, 0]
        assert float(row["eta"]) == av[i, 0] + av[i, 3]


def test_csv_2d_schema(tmp_path):
    mesh = build_quad_grid(((-1.0, 1.0), (-1.0, 1.0)), 3, 3)
    av = np.ones((9, 7))
    av[:, 5] = 0.0
    path = tmp_path / "out2.csv"
    write_csv_2d(path, mesh, av)
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0].keys()) == ["cell", "x1", "x2", "h", "u1", "u2",
                                    "b", "eta"]
    assert len(rows) == 9
    assert float(rows[4]["eta"]) == 2.0


def test_vtk_structure(tmp_path):
    mesh = build_quad_grid(((-0.5, 0.5), (-0.5, 0.5)), 2, 2)
    av = np.ones((4, 7))
    av[:, 5] = 0.0
    path = tmp_path / "out.vtk"
    write_vtk_2d(path, mesh, av, MetricSpec("spherical", R=1.0))
    text = path.read_text().splitlines()
    assert text[0].startswith("# vtk DataFile")
    assert "ASCII" in text
    assert any(line.startswith("DATASET UNSTRUCTURED_GRID") for line in text)
    points_line = next(line for line in text if line.startswith("POINTS"))
    n_points = int(points_line.split()[1])
    assert n_points == len(mesh.vertices)
    cells_line = next(line for line in text if line.startswith("CELLS"))
    assert int(cells_line.split()[1]) == mesh.n_cells
    # polygon cell type (7) for every cell
    types_at = text.index(next(l for l in text if l.startswith("CELL_TYPES")))
    types = " ".join(text[types_at + 1:types_at + 1 + mesh.n_cells]).split()
    assert all(t == "7" for t in types)
    assert any(line.startswith("CELL_DATA") for line in text)
    for name in ("h", "u1", "u2", "b", "eta"):
        assert any(line.startswith(f"SCALARS {name} ") for line in text)
