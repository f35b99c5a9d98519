"""Per-cell space-time linear reconstruction.

Two variable sets are supported. ``conservative`` reconstructs the state
q = (h, m1, m2, b, g11, g12, g22) directly. ``wb_eta`` reconstructs
V = (eta, m1, m2, b, g11, g12, g22) with eta = h + b and derives the depth
pointwise as h = eta - b, so a constant free surface stays exactly constant
no matter how rough the bathymetry is.

These are the readable single-cell operations; the time loop uses the
vectorized kernels in ``_kernels`` (kept equivalent by parity tests).
"""

from dataclasses import dataclass

import numpy as np

from . import physics
from .errors import NonPositiveDepth, SingularStencil
from .mesh import PolyMesh

CONSERVATIVE = "conservative"
WB_ETA = "wb_eta"


@dataclass(frozen=True)
class CellPolynomial:
    """Space-time linear reconstruction anchored at the cell centroid."""

    value: np.ndarray       # (7,) cell average
    slope: np.ndarray       # (7, 2) spatial gradient (or (7, 1) in 1D)
    time_slope: np.ndarray  # (7,)
    center: np.ndarray      # centroid
    t0: float               # time of the averages


def ls_slope(mesh: PolyMesh, averages: np.ndarray, k: int) -> np.ndarray:
    """Unlimited least-squares slope of cell k from its edge-neighbor stencil.

    Minimizes, per component, the mismatch of the linear reconstruction
    against the neighbor averages; centroid anchoring keeps the cell average
    of the reconstruction exact.
    """
    nbs = mesh.stencil_idx[mesh.stencil_ptr[k]:mesh.stencil_ptr[k + 1]]
    if len(nbs) < 2:
        raise SingularStencil(f"cell {k} has fewer than 2 neighbors")
    d = mesh.centroids[nbs] - mesh.centroids[k]
    A = d.T @ d
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) <= 1e-14 * (A[0, 0] + A[1, 1]) ** 2:
        raise SingularStencil(f"cell {k} stencil centroids are collinear")
    rhs = d.T @ (averages[nbs] - averages[k])  # (2, 7)
    return np.linalg.solve(A, rhs).T  # (7, 2)


def barth_limit(mesh: PolyMesh, averages: np.ndarray, k: int,
                slope: np.ndarray) -> np.ndarray:
    """Barth-Jespersen limiter: scale each component's slope so the vertex
    values stay within the stencil's average range."""
    nbs = mesh.stencil_idx[mesh.stencil_ptr[k]:mesh.stencil_ptr[k + 1]]
    w = averages[k]
    wmax = np.maximum(w, averages[nbs].max(axis=0))
    wmin = np.minimum(w, averages[nbs].min(axis=0))
    limited = slope.copy()
    offsets = mesh.vertices[mesh.cell_loop(k)] - mesh.centroids[k]
    for c in range(averages.shape[1]):
        phi = 1.0
        for off in offsets:
            dv = float(slope[c] @ off)
            if dv > 0.0:
                phi = min(phi, (wmax[c] - w[c]) / dv)
            elif dv < 0.0:
                phi = min(phi, (wmin[c] - w[c]) / dv)
        limited[c] *= phi
    return limited


def minmod_slope(averages3: np.ndarray, dx: float) -> np.ndarray:
    """1D minmod slope from three consecutive cell averages."""
    q0, q1, q2 = np.asarray(averages3, dtype=float)
    dl = (q1 - q0) / dx
    dr = (q2 - q1) / dx
    out = np.where(dl * dr <= 0.0, 0.0, np.where(np.abs(dl) < np.abs(dr), dl, dr))
    return out


def _point_state(value, slope, offset, mode):
    """Evaluate the spatial part and return the conserved state q."""
    v = value + slope @ offset
    if mode == WB_ETA:
        q = v.copy()
        q[0] = v[0] - v[3]
        return q
    return v


def predictor(mesh: PolyMesh, k: int, value: np.ndarray, slope: np.ndarray,
              mode: str = CONSERVATIVE) -> np.ndarray:
    """Half-step time derivative of cell k from the discrete spatial operator.

    dV/dt = -(1/|Omega_k|) sum_e |e| F(q_k(x_e)) . n_e - B(q_k) . grad, with
    the free-surface gradient taken from the eta slope in wb_eta mode. Only
    the dynamic components are nonzero; the returned vector lives in the same
    variable set as ``value`` (d eta/dt = dh/dt when b is static).
    """
    acc = np.zeros(7)
    sl = slice(mesh.cell_edge_ptr[k], mesh.cell_edge_ptr[k + 1])
    for e, s in zip(mesh.cell_edge_idx[sl], mesh.cell_edge_sign[sl]):
        q = _point_state(value, slope, mesh.midpoints[e] - mesh.centroids[k], mode)
        if q[0] <= physics.H_FLOOR:
            raise NonPositiveDepth(f"predictor depth {q[0]!r} in cell {k}")
        f1, f2 = physics.flux(q)
        n = s * mesh.normals[e]
        acc += mesh.lengths[e] * (f1 * n[0] + f2 * n[1])
    acc /= mesh.areas[k]
    qc = _point_state(value, slope, np.zeros(2), mode)
    grad = np.array(slope, dtype=float, copy=True)
    if mode == WB_ETA:
        # rows 0/3 of B act on d(h + b) = d eta, taken directly from the
        # eta slope; pass it through the depth row with a zero b row.
        grad[0] = slope[0]
        grad[3] = 0.0
    acc += physics.ncp_apply(qc, grad)
    out = np.zeros(7)
    out[:3] = -acc[:3]
    return out


def evaluate(poly: CellPolynomial, x, t: float, mode: str = CONSERVATIVE) -> np.ndarray:
    """Evaluate the space-time polynomial; returns the conserved state q."""
    offset = np.asarray(x, dtype=float) - poly.center
    v = poly.value + poly.slope @ offset + (t - poly.t0) * poly.time_slope
    if mode == WB_ETA:
        q = v.copy()
        q[0] = v[0] - v[3]
    else:
        q = v
    if q[0] <= physics.H_FLOOR:
        raise NonPositiveDepth(f"evaluated depth {q[0]!r}")
    return q
