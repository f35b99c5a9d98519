"""Discrete error norms, convergence orders, and result writers."""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateRatio, IoError
from .geometry import MetricSpec, embed

FMT = "%.17g"


@dataclass(frozen=True)
class ErrorReport:
    """L2 errors at one resolution: r_n is dx (1D) or d_N (2D)."""

    r_n: float
    n_cells: int
    t: float
    errors: dict  # variable name -> discrete L2 error


def l2_error_1d(diff: np.ndarray, dx: float) -> float:
    """Midpoint-rule discrete L2 norm on a uniform 1D mesh."""
    diff = np.asarray(diff, dtype=float)
    return float(np.sqrt(dx * (diff * diff).sum()))


def l2_error_2d(diff: np.ndarray, areas: np.ndarray) -> float:
    """Area-weighted discrete L2 norm on a polygonal mesh."""
    diff = np.asarray(diff, dtype=float)
    return float(np.sqrt((areas * diff * diff).sum()))


def l2_error(mesh, values: np.ndarray, exact) -> float:
    """Discrete L2 error of per-cell values against ``exact`` at centroids."""
    values = np.asarray(values, dtype=float)
    if hasattr(mesh, "centers"):  # Mesh1D
        ex = np.array([exact(x) for x in mesh.centers])
        return l2_error_1d(values - ex, mesh.dx)
    ex = np.array([exact(x[0], x[1]) for x in mesh.centroids])
    return l2_error_2d(values - ex, mesh.areas)


def convergence_order(coarse: ErrorReport, fine: ErrorReport, var: str) -> float:
    """Observed order log(e1/e2) / log(r1/r2) between two resolutions."""
    e1, e2 = coarse.errors[var], fine.errors[var]
    if coarse.r_n == fine.r_n:
        raise DegenerateRatio("equal mesh sizes")
    if e1 <= 0.0 or e2 <= 0.0:
        raise DegenerateRatio("zero error; order undefined")
    return float(np.log(e1 / e2) / np.log(coarse.r_n / fine.r_n))


def _open_write(path):
    try:
        return open(path, "w")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def write_csv_1d(path, mesh, averages: np.ndarray, axis: int) -> None:
    """1D results: columns xi,h,u,b,eta,g11,g12,g22 (17 significant digits)."""
    q = np.asarray(averages, dtype=float)
    with _open_write(path) as f:
        f.write("xi,h,u,b,eta,g11,g12,g22\n")
        for x, row in zip(mesh.centers, q):
            h, b = row[0], row[3]
            u = row[1 + axis] / h
            vals = (x, h, u, b, h + b, row[4], row[5], row[6])
            f.write(",".join(FMT % v for v in vals) + "\n")


def write_csv_2d(path, mesh, averages: np.ndarray) -> None:
    """2D results: columns cell,x1,x2,h,u1,u2,b,eta at the cell centroids."""
    q = np.asarray(averages, dtype=float)
    with _open_write(path) as f:
        f.write("cell,x1,x2,h,u1,u2,b,eta\n")
        for k, (x, row) in enumerate(zip(mesh.centroids, q)):
            h, b = row[0], row[3]
            vals = (x[0], x[1], h, row[1] / h, row[2] / h, b, h + b)
            f.write(str(k) + "," + ",".join(FMT % v for v in vals) + "\n")


def write_vtk_2d(path, mesh, averages: np.ndarray, spec: MetricSpec) -> None:
    """Legacy ASCII unstructured-grid file with embedded 3D vertex coordinates.

    Vertices are embedded on the manifold surface (height 0); the physical
    fields are written as cell data so viewers can offset/color by them.
    """
    q = np.asarray(averages, dtype=float)
    h, b = q[:, 0], q[:, 3]
    cell_data = {
        "h": h,
        "u1": q[:, 1] / h,
        "u2": q[:, 2] / h,
        "b": b,
        "eta": h + b,
    }
    with _open_write(path) as f:
        f.write("# vtk DataFile Version 3.0\n")
        f.write("covswe result\n")
        f.write("ASCII\n")
        f.write("DATASET UNSTRUCTURED_GRID\n")
        f.write(f"POINTS {len(mesh.vertices)} double\n")
        for v in mesh.vertices:
            p = embed(spec, v, 0.0)
            f.write(" ".join(FMT % c for c in p) + "\n")
        sizes = np.diff(mesh.cell_vertex_ptr)
        f.write(f"CELLS {mesh.n_cells} {int(sizes.sum()) + mesh.n_cells}\n")
        for k in range(mesh.n_cells):
            loop = mesh.cell_loop(k)
            f.write(str(len(loop)) + " " + " ".join(str(i) for i in loop) + "\n")
        f.write(f"CELL_TYPES {mesh.n_cells}\n")
        f.write("".join("7\n" for _ in range(mesh.n_cells)))  # VTK_POLYGON
        f.write(f"CELL_DATA {mesh.n_cells}\n")
        for name, values in cell_data.items():
            f.write(f"SCALARS {name} double 1\n")
            f.write("LOOKUP_TABLE default\n")
            for v in values:
                f.write(FMT % v + "\n")
