"""Render figures from solver CSV/VTK files (no physics recomputation)."""

import csv
import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class PlotDataError(ValueError):
    """Input file does not match the expected CSV/VTK schema."""


# ---------------------------------------------------------------------------
# CSV readers


def _read_csv_columns(path, required):
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise PlotDataError(f"{path}: empty file")
        missing = [c for c in required if c not in reader.fieldnames]
        if missing:
            raise PlotDataError(f"{path}: missing columns {missing}; "
                                f"found {reader.fieldnames}")
        rows = list(reader)
    if not rows:
        raise PlotDataError(f"{path}: no data rows")
    try:
        return {name: np.array([float(r[name]) for r in rows])
                for name in reader.fieldnames}, reader.fieldnames
    except (TypeError, ValueError) as exc:
        raise PlotDataError(f"{path}: non-numeric data ({exc})")


def plot_profile_1d(csv_path, out_image):
    """Free surface and bathymetry versus the chart coordinate."""
    cols, _ = _read_csv_columns(csv_path, ("xi", "eta", "b"))
    order = np.argsort(cols["xi"])
    xi = cols["xi"][order]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(xi, cols["eta"][order], lw=1.5, label="free surface $\\eta$")
    ax.plot(xi, cols["b"][order], lw=1.5, label="bathymetry $b$")
    ax.fill_between(xi, cols["b"][order], cols["eta"][order],
                    alpha=0.15, color="tab:blue")
    ax.set_xlabel("$\\xi$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return out_image


def plot_convergence(table_csv, out_image):
    """Log-log error-vs-resolution plot with a slope-2 guide.

    Fits one slope per error column (columns named ``L2_*``) and returns
    them as a dict; the table needs at least two rows.
    """
    cols, names = _read_csv_columns(table_csv, ("dx",))
    err_names = [n for n in names if n.startswith("L2")]
    if not err_names:
        raise PlotDataError(f"{table_csv}: no L2_* error columns")
    dx = cols["dx"]
    if len(dx) < 2:
        raise PlotDataError(f"{table_csv}: need at least 2 rows for a slope")

    fig, ax = plt.subplots(figsize=(5.0, 4.0))
    slopes = {}
    logdx = np.log(dx)
    for name in err_names:
        err = cols[name]
        if np.any(err <= 0.0):
            raise PlotDataError(f"{table_csv}: non-positive error in {name}")
        slope = np.polyfit(logdx, np.log(err), 1)[0]
        slopes[name] = float(slope)
        ax.loglog(dx, err, "o-", label=f"{name} (slope {slope:.2f})")
    guide = cols[err_names[0]][0] * (dx / dx[0]) ** 2
    ax.loglog(dx, guide, "k--", lw=1.0, label="slope 2")
    ax.set_xlabel("$\\Delta x$")
    ax.set_ylabel("$L^2$ error")
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return slopes


# ---------------------------------------------------------------------------
# VTK


def read_vtk_unstructured(path):
    """Parse a legacy ASCII VTK unstructured grid with polygon cells.

    Returns (points (N, 3), cells as vertex-index lists, cell_data dict).
    """
    with open(path) as f:
        tokens = f.read().split()
    pos = 0

    def fail(msg):
        raise PlotDataError(f"{path}: {msg}")

    try:
        upper = [t.upper() for t in tokens]
        if "ASCII" not in upper:
            fail("not an ASCII VTK file")
        i = upper.index("POINTS")
        n_points = int(tokens[i + 1])
        pos = i + 3
        flat = [float(t) for t in tokens[pos:pos + 3 * n_points]]
        if len(flat) != 3 * n_points:
            fail("truncated POINTS block")
        points = np.array(flat).reshape(n_points, 3)
        pos += 3 * n_points

        i = upper.index("CELLS", pos)
        n_cells = int(tokens[i + 1])
        pos = i + 3
        cells = []
        for _ in range(n_cells):
            cnt = int(tokens[pos])
            cells.append([int(t) for t in tokens[pos + 1:pos + 1 + cnt]])
            pos += 1 + cnt

        i = upper.index("CELL_TYPES", pos)
        pos = i + 2 + n_cells  # skip the types block

        cell_data = {}
        if "CELL_DATA" in upper[pos:]:
            pos = upper.index("CELL_DATA", pos) + 2
            while pos < len(tokens) and upper[pos] == "SCALARS":
                name = tokens[pos + 1]
                pos += 3  # SCALARS name type
                if pos < len(tokens) and upper[pos] not in ("LOOKUP_TABLE",):
                    pos += 1  # optional component count
                if pos + 1 >= len(tokens) or upper[pos] != "LOOKUP_TABLE":
                    fail(f"scalar block {name!r} lacks a LOOKUP_TABLE")
                pos += 2
                vals = [float(t) for t in tokens[pos:pos + n_cells]]
                if len(vals) != n_cells:
                    fail(f"truncated scalar block {name!r}")
                cell_data[name] = np.array(vals)
                pos += n_cells
    except (ValueError, IndexError) as exc:
        raise PlotDataError(f"{path}: malformed VTK file ({exc})")
    return points, cells, cell_data


def plot_surface_2d(vtk_path, out_image):
    """Bathymetry and free-surface cell data over the embedded coordinates."""
    from mpl_toolkits.mplot3d.art3d import Poly3DCollection

    points, cells, cell_data = read_vtk_unstructured(vtk_path)
    for needed in ("eta", "b"):
        if needed not in cell_data:
            raise PlotDataError(f"{vtk_path}: missing cell data {needed!r}")

    fig = plt.figure(figsize=(10.0, 4.5))
    for idx, (name, label) in enumerate(
            [("b", "bathymetry $b$"), ("eta", "free surface $\\eta$")]):
        ax = fig.add_subplot(1, 2, idx + 1, projection="3d")
        polys = [points[cell] for cell in cells]
        vals = cell_data[name]
        coll = Poly3DCollection(polys, linewidths=0.1, edgecolors="k")
        norm = plt.Normalize(vals.min(), vals.max() + 1e-300)
        coll.set_facecolor(plt.cm.viridis(norm(vals)))
        ax.add_collection3d(coll)
        lo = points.min(axis=0)
        hi = points.max(axis=0)
        pad = 0.05 * max(np.max(hi - lo), 1e-12)
        ax.set_xlim(lo[0] - pad, hi[0] + pad)
        ax.set_ylim(lo[1] - pad, hi[1] + pad)
        ax.set_zlim(lo[2] - pad, hi[2] + pad)
        ax.set_title(label)
        fig.colorbar(plt.cm.ScalarMappable(norm=norm, cmap="viridis"),
                     ax=ax, shrink=0.7)
    fig.tight_layout()
    fig.savefig(out_image, dpi=150)
    plt.close(fig)
    return out_image
