"""State algebra: fluxes, nonconservative blocks, eigenstructure, Riemann solvers.

The conserved state is the 7-vector q = (h, m1, m2, b, g11, g12, g22): fluid
depth, the two contravariant mass fluxes m^i = h u^i, bathymetry, and the
covariant metric coefficients. The flux is purely kinetic; pressure and
curvature enter through the nonconservative product B(q) . grad(q).

Functions here are plain-numpy reference implementations; the time loop uses
the numerically identical compiled kernels in ``_kernels`` (kept in sync by
parity tests). ``christoffel_residual`` is an independent evaluation of the
original Christoffel-form equations used to cross-check the B-matrix entries.
"""

import numpy as np

from . import _kernels
from .errors import NonPositiveDepth
from .geometry import (GRAVITY, MetricSpec, christoffel_symbols,
                       contravariant_derivatives, eval_metric,
                       metric_derivatives)

H_FLOOR = _kernels.H_FLOOR

# component indices of the conserved state
IH, IM1, IM2, IB, IG11, IG12, IG22 = range(7)


def _check_depth(q):
    if q[IH] <= H_FLOOR:
        raise NonPositiveDepth(f"non-positive depth h={q[IH]!r}")


def flux(q):
    """Kinetic flux pair (f1, f2); rows 4-7 vanish identically."""
    q = np.asarray(q, dtype=float)
    _check_depth(q)
    h, m1, m2 = q[IH], q[IM1], q[IM2]
    f1 = np.zeros(7)
    f2 = np.zeros(7)
    f1[:3] = (m1, m1 * m1 / h, m1 * m2 / h)
    f2[:3] = (m2, m1 * m2 / h, m2 * m2 / h)
    return f1, f2


def b_matrices(q):
    """The nonconservative blocks (B1, B2) as explicit 7x7 matrices.

    Rows 2-3, columns h and b: the free-surface pressure coupling
    g h [gamma^ij] acting on d(h+b). Rows 1-3, columns g11/g12/g22: the
    curvature (Christoffel) terms, purely kinetic.
    """
    q = np.asarray(q, dtype=float)
    _check_depth(q)
    h, m1, m2 = q[IH], q[IM1], q[IM2]
    a, bb, c = q[IG11], q[IG12], q[IG22]  # g11, g12, g22
    gam = a * c - bb * bb
    gh = GRAVITY * h / gam
    B1 = np.zeros((7, 7))
    B2 = np.zeros((7, 7))
    # free-surface block
    B1[IM1, IH] = B1[IM1, IB] = gh * c
    B1[IM2, IH] = B1[IM2, IB] = -gh * bb
    B2[IM1, IH] = B2[IM1, IB] = -gh * bb
    B2[IM2, IH] = B2[IM2, IB] = gh * a
    # metric block, mass row
    B1[IH, IG11:] = (0.5 * m1 * c, -m1 * bb, 0.5 * m1 * a)
    B2[IH, IG11:] = (0.5 * m2 * c, -m2 * bb, 0.5 * m2 * a)
    # metric block, momentum rows
    B1[IM1, IG11:] = (
        m1 * m1 * c,
        -2.0 * m1 * m1 * bb,
        0.5 * (a * m1 * m1 - 2.0 * bb * m1 * m2 - c * m2 * m2),
    )
    B2[IM1, IG11:] = (
        0.5 * m1 * (bb * m1 + 3.0 * c * m2),
        m2 * (c * m2 - bb * m1),
        0.5 * m2 * (a * m1 - bb * m2),
    )
    B1[IM2, IG11:] = (
        0.5 * m1 * (c * m2 - bb * m1),
        m1 * (a * m1 - bb * m2),
        0.5 * m2 * (3.0 * a * m1 + bb * m2),
    )
    B2[IM2, IG11:] = (
        0.5 * (c * m2 * m2 - a * m1 * m1 - 2.0 * bb * m1 * m2),
        -2.0 * bb * m2 * m2,
        a * m2 * m2,
    )
    B1[IH:IM2 + 1, IG11:] /= np.array([gam, gam * h, gam * h])[:, None]
    B2[IH:IM2 + 1, IG11:] /= np.array([gam, gam * h, gam * h])[:, None]
    return B1, B2


def ncp_apply(q, grad):
    """B1(q) . dq/dx1 + B2(q) . dq/dx2 for a 7x2 gradient array."""
    grad = np.asarray(grad, dtype=float)
    B1, B2 = b_matrices(q)
    return B1 @ grad[:, 0] + B2 @ grad[:, 1]


def wave_speed(q, n):
    """c = sqrt(g h) * ||n||_{gamma^ij}, the dynamic wave speed along n."""
    q = np.asarray(q, dtype=float)
    _check_depth(q)
    a, bb, c = q[IG11], q[IG12], q[IG22]
    gam = a * c - bb * bb
    gunn = (c * n[0] ** 2 - 2.0 * bb * n[0] * n[1] + a * n[1] ** 2) / gam
    return np.sqrt(GRAVITY * q[IH] * gunn)


def eigenvalues(q, n):
    """The three dynamic eigenvalues (u.n, u.n + c, u.n - c) along n.

    The remaining four eigenvalues of the 7x7 system are zero (the static
    components b and gamma).
    """
    q = np.asarray(q, dtype=float)
    _check_depth(q)
    un = (q[IM1] * n[0] + q[IM2] * n[1]) / q[IH]
    c = wave_speed(q, n)
    return np.array([un, un + c, un - c])


def jacobian(q, n):
    """Assembled directional Jacobian A = (dF/dq + B(q)) . n (for testing)."""
    q = np.asarray(q, dtype=float)
    _check_depth(q)
    h, m1, m2 = q[IH], q[IM1], q[IM2]
    n1, n2 = n
    mn = m1 * n1 + m2 * n2
    dF = np.zeros((7, 7))
    dF[IH, IM1] = n1
    dF[IH, IM2] = n2
    dF[IM1, IH] = -m1 * mn / h ** 2
    dF[IM1, IM1] = (2.0 * m1 * n1 + m2 * n2) / h
    dF[IM1, IM2] = m1 * n2 / h
    dF[IM2, IH] = -m2 * mn / h ** 2
    dF[IM2, IM1] = m2 * n1 / h
    dF[IM2, IM2] = (m1 * n1 + 2.0 * m2 * n2) / h
    B1, B2 = b_matrices(q)
    return dF + n1 * B1 + n2 * B2


def max_wave_speed(q, n):
    """max |eigenvalue| over the three dynamic waves."""
    return np.abs(eigenvalues(q, n)).max()


def rusanov(qm, qp, n, mode="standard"):
    """Rusanov numerical flux along the unit chart direction n.

    ``standard`` dissipates the three dynamic components of (qp - qm);
    ``well_balanced`` replaces the depth-row difference by the free-surface
    jump (h + b)+ - (h + b)-, so rest states with matching eta produce no
    spurious depth flux over bathymetry jumps.
    """
    qm = np.asarray(qm, dtype=float)
    qp = np.asarray(qp, dtype=float)
    smax = max(max_wave_speed(qm, n), max_wave_speed(qp, n))
    f1m, f2m = flux(qm)
    f1p, f2p = flux(qp)
    out = 0.5 * (n[0] * (f1m + f1p) + n[1] * (f2m + f2p))
    diff = qp - qm
    if mode == "well_balanced":
        d0 = (qp[IH] + qp[IB]) - (qm[IH] + qm[IB])
    elif mode == "standard":
        d0 = diff[IH]
    else:
        raise ValueError(f"unknown Rusanov mode {mode!r}")
    out[IH] -= 0.5 * smax * d0
    out[IM1] -= 0.5 * smax * diff[IM1]
    out[IM2] -= 0.5 * smax * diff[IM2]
    return out


def path_jump(qm, qp, n):
    """Path-conservative jump D = 1/2 int_0^1 B(psi(tau)).n dtau (qp - qm).

    The path is the straight segment in state space; the integral uses the
    3-point Gauss-Legendre rule on [0, 1].
    """
    qm = np.asarray(qm, dtype=float)
    qp = np.asarray(qp, dtype=float)
    diff = qp - qm
    out = np.zeros(7)
    for tau, w in zip(_kernels.GL_NODES, _kernels.GL_WEIGHTS):
        qt = qm + tau * diff
        B1, B2 = b_matrices(qt)
        out += w * ((n[0] * B1 + n[1] * B2) @ diff)
    return 0.5 * out


def christoffel_residual(spec: MetricSpec, x, h, m, b, dh, dm, db):
    """Spatial residual of the original Christoffel-form equations.

    Evaluates, with exact metric data from ``spec`` at point ``x``:
      mass:      d_j m^j + Gamma^j_jk m^k
      momentum:  d_j T^ij + Gamma^i_jk T^kj + Gamma^j_jk T^ik
                 + g h gamma^ij d_j b
    where T^ij = m^i m^j / h + 1/2 g h^2 gamma^ij. ``dm[i, j]`` is d_j m^i;
    ``dh`` and ``db`` are the chart gradients of h and b. Serves as the
    independent oracle for flux divergence + ncp_apply.
    """
    if h <= H_FLOOR:
        raise NonPositiveDepth(f"non-positive depth h={h!r}")
    m = np.asarray(m, dtype=float)
    dm = np.asarray(dm, dtype=float)
    dh = np.asarray(dh, dtype=float)
    db = np.asarray(db, dtype=float)
    g = eval_metric(spec, x)
    gu = np.array([[g.g22, -g.g12], [-g.g12, g.g11]]) / g.det
    dgu = contravariant_derivatives(spec, x)  # dgu[j] = d_j gamma^
    gam = christoffel_symbols(spec, x)

    T = np.outer(m, m) / h + 0.5 * GRAVITY * h * h * gu
    # dT[i, j, l] = d_l T^ij
    dT = np.empty((2, 2, 2))
    for l in range(2):
        dT[:, :, l] = (
            (np.outer(dm[:, l], m) + np.outer(m, dm[:, l])) / h
            - np.outer(m, m) * dh[l] / (h * h)
            + GRAVITY * h * dh[l] * gu
            + 0.5 * GRAVITY * h * h * dgu[l]
        )

    out = np.zeros(7)
    trace_gam = np.array([gam[0, 0, 0] + gam[1, 1, 0],
                          gam[0, 0, 1] + gam[1, 1, 1]])  # Gamma^j_jk
    out[IH] = dm[0, 0] + dm[1, 1] + trace_gam @ m
    for i in range(2):
        r = dT[i, 0, 0] + dT[i, 1, 1]
        for j in range(2):
            for k in range(2):
                r += gam[i, j, k] * T[k, j]
        for k in range(2):
            r += trace_gam[k] * T[i, k]
        r += GRAVITY * h * (gu[i] @ db)
        out[IM1 + i] = r
    return out
