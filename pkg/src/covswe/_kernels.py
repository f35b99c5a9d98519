"""Numba kernels for the hot path of the finite-volume update.

State layout everywhere: q = (h, m1, m2, b, g11, g12, g22). In well-balanced
runs the evolved per-cell averages V replace h by the free surface eta = h + b;
conversion happens at every pointwise evaluation. The reference (readable)
implementations of the edge operators live in ``physics.py``; the kernels here
must stay numerically equivalent (see the parity tests).
"""

import numpy as np
from numba import njit

G = 9.81
H_FLOOR = 1e-12

# 3-point Gauss-Legendre rule on [0, 1]
_SQ35 = np.sqrt(0.6)
GL_NODES = np.array([0.5 * (1.0 - _SQ35), 0.5, 0.5 * (1.0 + _SQ35)])
GL_WEIGHTS = np.array([5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0])


@njit(cache=True)
def ncp_action(q, dg1, dg2, deta1, deta2, w, out):
    """Accumulate w * (B1(q) dQ/dx1 + B2(q) dQ/dx2) into ``out``.

    Only the free-surface gradient (deta = d(h+b)) and the metric gradients
    (dg1, dg2 = d(g11,g12,g22)/dx1, /dx2) enter the nonconservative blocks.
    """
    h = q[0]
    m1 = q[1]
    m2 = q[2]
    g11 = q[4]
    g12 = q[5]
    g22 = q[6]
    gam = g11 * g22 - g12 * g12
    inv = 1.0 / gam
    gh = G * h * inv
    # free-surface block: rows 2-3 are g h [gamma^ij] d_j(eta)
    out[1] += w * gh * (g22 * deta1 - g12 * deta2)
    out[2] += w * gh * (-g12 * deta1 + g11 * deta2)
    d1a = dg1[0]
    d1b = dg1[1]
    d1c = dg1[2]
    d2a = dg2[0]
    d2b = dg2[1]
    d2c = dg2[2]
    # metric block, mass row: Gamma^j_jk m^k
    out[0] += w * inv * (
        0.5 * m1 * g22 * d1a - m1 * g12 * d1b + 0.5 * m1 * g11 * d1c
        + 0.5 * m2 * g22 * d2a - m2 * g12 * d2b + 0.5 * m2 * g11 * d2c
    )
    invh = inv / h
    # metric block, momentum rows (kinetic Christoffel contractions)
    out[1] += w * invh * (
        m1 * m1 * g22 * d1a
        - 2.0 * m1 * m1 * g12 * d1b
        + 0.5 * (g11 * m1 * m1 - 2.0 * g12 * m1 * m2 - g22 * m2 * m2) * d1c
        + 0.5 * m1 * (g12 * m1 + 3.0 * g22 * m2) * d2a
        + m2 * (g22 * m2 - g12 * m1) * d2b
        + 0.5 * m2 * (g11 * m1 - g12 * m2) * d2c
    )
    out[2] += w * invh * (
        0.5 * m1 * (g22 * m2 - g12 * m1) * d1a
        + m1 * (g11 * m1 - g12 * m2) * d1b
        + 0.5 * m2 * (3.0 * g11 * m1 + g12 * m2) * d1c
        + 0.5 * (g22 * m2 * m2 - g11 * m1 * m1 - 2.0 * g12 * m1 * m2) * d2a
        - 2.0 * m2 * m2 * g12 * d2b
        + g11 * m2 * m2 * d2c
    )


@njit(cache=True)
def flux_n(q, n1, n2, out):
    """Accumulate the kinetic flux F(q) . n into out (rows 1-3 only)."""
    h = q[0]
    m1 = q[1]
    m2 = q[2]
    mn = m1 * n1 + m2 * n2
    out[0] += mn
    out[1] += m1 * mn / h
    out[2] += m2 * mn / h


@njit(cache=True)
def lam_dir(q, n1, n2):
    """|u.n| + c along direction n (largest dynamic wave speed)."""
    h = q[0]
    g11 = q[4]
    g12 = q[5]
    g22 = q[6]
    det = g11 * g22 - g12 * g12
    gunn = (g22 * n1 * n1 - 2.0 * g12 * n1 * n2 + g11 * n2 * n2) / det
    un = (q[1] * n1 + q[2] * n2) / h
    return abs(un) + np.sqrt(G * h * gunn)


@njit(cache=True)
def lam_iso(q):
    """Direction-independent wave-speed bound |u| + sqrt(g h lambda_max(g^ij))."""
    h = q[0]
    g11 = q[4]
    g12 = q[5]
    g22 = q[6]
    det = g11 * g22 - g12 * g12
    disc = np.sqrt((g11 - g22) * (g11 - g22) + 4.0 * g12 * g12)
    maxeig = (g11 + g22 + disc) / (2.0 * det)
    u = np.sqrt(q[1] * q[1] + q[2] * q[2]) / h
    return u + np.sqrt(G * h * maxeig)


@njit(cache=True)
def rusanov_edge(qm, qp, n1, n2, etam, etap, wb, out):
    """Rusanov numerical flux dotted with n; writes the 7 components."""
    smax = max(lam_dir(qm, n1, n2), lam_dir(qp, n1, n2))
    for c in range(7):
        out[c] = 0.0
    flux_n(qm, n1, n2, out)
    flux_n(qp, n1, n2, out)
    for c in range(7):
        out[c] *= 0.5
    if wb:
        out[0] -= 0.5 * smax * (etap - etam)
    else:
        out[0] -= 0.5 * smax * (qp[0] - qm[0])
    out[1] -= 0.5 * smax * (qp[1] - qm[1])
    out[2] -= 0.5 * smax * (qp[2] - qm[2])


@njit(cache=True)
def path_jump_edge(qm, qp, n1, n2, etam, etap, out):
    """Segment-path jump term D = 1/2 int_0^1 B(psi) . n dtau (qp - qm)."""
    for c in range(7):
        out[c] = 0.0
    deta = etap - etam
    dga = qp[4] - qm[4]
    dgb = qp[5] - qm[5]
    dgc = qp[6] - qm[6]
    dg1 = np.empty(3)
    dg2 = np.empty(3)
    dg1[0] = n1 * dga
    dg1[1] = n1 * dgb
    dg1[2] = n1 * dgc
    dg2[0] = n2 * dga
    dg2[1] = n2 * dgb
    dg2[2] = n2 * dgc
    qt = np.empty(7)
    for i in range(3):
        tau = GL_NODES[i]
        for c in range(7):
            qt[c] = qm[c] + tau * (qp[c] - qm[c])
        ncp_action(qt, dg1, dg2, n1 * deta, n2 * deta, 0.5 * GL_WEIGHTS[i], out)


@njit(cache=True)
def minmod(a, b):
    if a * b <= 0.0:
        return 0.0
    if abs(a) < abs(b):
        return a
    return b


@njit(cache=True)
def _state_from_v(V, k, sx, sy, ox, oy, dtv, ht, wb, out):
    """Evaluate the cell polynomial of cell k at offset (ox, oy), time offset ht.

    Returns eta at the point. ``sx/sy`` are (7, N) slope arrays; ``dtv`` the
    (7, N) time slopes. In wb mode component 0 of V is eta and h is derived.
    """
    for c in range(7):
        out[c] = V[c, k] + sx[c, k] * ox + sy[c, k] * oy + ht * dtv[c, k]
    if wb:
        eta = out[0]
        out[0] = eta - out[3]
    else:
        eta = out[0] + out[3]
    return eta


# ----------------------------------------------------------------------------
# 1D scheme
# ----------------------------------------------------------------------------


@njit(cache=True)
def slopes_1d(V, dxi, limiter):
    """Per-cell slopes on the ghost-padded array; first/last cells get zero."""
    m = V.shape[1]
    s = np.zeros((7, m))
    for k in range(1, m - 1):
        for c in range(7):
            dr = (V[c, k + 1] - V[c, k]) / dxi
            dl = (V[c, k] - V[c, k - 1]) / dxi
            if limiter == 1:
                s[c, k] = minmod(dr, dl)
            else:
                s[c, k] = 0.5 * (dr + dl)
    return s


@njit(cache=True)
def step_1d(V, dxi, dt, ax, wb, limiter, use_exact_db, db_ext, out, status):
    """One MUSCL-Hancock step on the ghost-padded 1D array.

    ``ax`` is the chart direction (0 or 1) the problem is integrated along.
    Writes the full array into ``out`` (ghost entries copied through); only
    interior cells 2..m-3 receive updated values.
    """
    m = V.shape[1]
    n1 = 1.0 if ax == 0 else 0.0
    n2 = 1.0 - n1
    slopes = slopes_1d(V, dxi, limiter)
    if use_exact_db:
        for k in range(m):
            slopes[3, k] = db_ext[k]

    # time predictor
    dtv = np.zeros((7, m))
    q = np.empty(7)
    acc = np.empty(7)
    dg = np.empty(3)
    zero3 = np.zeros(3)
    for k in range(1, m - 1):
        for c in range(7):
            acc[c] = 0.0
        # flux difference between the two cell extremes at t^n
        eta = _state_from_v(V, k, slopes, slopes, 0.5 * dxi, 0.0, dtv, 0.0, wb, q)
        flux_n(q, n1 / dxi, n2 / dxi, acc)
        eta = _state_from_v(V, k, slopes, slopes, -0.5 * dxi, 0.0, dtv, 0.0, wb, q)
        flux_n(q, -n1 / dxi, -n2 / dxi, acc)
        # nonconservative part at the cell average
        for c in range(7):
            q[c] = V[c, k]
        if wb:
            q[0] = V[0, k] - V[3, k]
            deta = slopes[0, k]
        else:
            deta = slopes[0, k] + slopes[3, k]
        for j in range(3):
            dg[j] = slopes[4 + j, k]
        if ax == 0:
            ncp_action(q, dg, zero3, deta, 0.0, 1.0, acc)
        else:
            ncp_action(q, zero3, dg, 0.0, deta, 1.0, acc)
        for c in range(3):
            dtv[c, k] = -acc[c]

    # interface fluxes and jumps: interface j between cells j+1 and j+2
    nifc = m - 3
    fl = np.empty((7, nifc))
    dj = np.empty((7, nifc))
    qm = np.empty(7)
    qp = np.empty(7)
    tmp = np.empty(7)
    for j in range(nifc):
        kl = j + 1
        kr = j + 2
        etam = _state_from_v(V, kl, slopes, slopes, 0.5 * dxi * n1, 0.5 * dxi * n2,
                             dtv, 0.5 * dt, wb, qm)
        etap = _state_from_v(V, kr, slopes, slopes, -0.5 * dxi * n1, -0.5 * dxi * n2,
                             dtv, 0.5 * dt, wb, qp)
        if qm[0] <= H_FLOOR or qp[0] <= H_FLOOR:
            status[0] = 1
            status[1] = kl
            return
        rusanov_edge(qm, qp, n1, n2, etam, etap, wb, tmp)
        for c in range(7):
            fl[c, j] = tmp[c]
        path_jump_edge(qm, qp, n1, n2, etam, etap, tmp)
        for c in range(7):
            dj[c, j] = tmp[c]

    # corrector update on interior cells
    for k in range(m):
        for c in range(7):
            out[c, k] = V[c, k]
    r = dt / dxi
    for k in range(2, m - 2):
        jr = k - 1
        jl = k - 2
        # cell-center state at the half time level
        eta = _state_from_v(V, k, slopes, slopes, 0.0, 0.0, dtv, 0.5 * dt, wb, q)
        if q[0] <= H_FLOOR:
            status[0] = 1
            status[1] = k
            return
        for c in range(7):
            acc[c] = 0.0
        if wb:
            deta = slopes[0, k]
        else:
            deta = slopes[0, k] + slopes[3, k]
        for j in range(3):
            dg[j] = slopes[4 + j, k]
        if ax == 0:
            ncp_action(q, dg, zero3, deta, 0.0, 1.0, acc)
        else:
            ncp_action(q, zero3, dg, 0.0, deta, 1.0, acc)
        for c in range(3):
            out[c, k] = (
                V[c, k]
                - r * (fl[c, jr] - fl[c, jl])
                - r * (dj[c, jr] + dj[c, jl])
                - dt * acc[c]
            )
        hnew = out[0, k] - out[3, k] if wb else out[0, k]
        if hnew <= H_FLOOR:
            status[0] = 1
            status[1] = k
            return
    status[0] = 0


@njit(cache=True)
def max_lambda_1d(V, ax, wb, k0, k1):
    """Largest 1D wave speed over cells k0..k1-1 of the padded array."""
    n1 = 1.0 if ax == 0 else 0.0
    n2 = 1.0 - n1
    q = np.empty(7)
    lam = 0.0
    for k in range(k0, k1):
        for c in range(7):
            q[c] = V[c, k]
        if wb:
            q[0] = V[0, k] - V[3, k]
        v = lam_dir(q, n1, n2)
        if v > lam:
            lam = v
    return lam


# ----------------------------------------------------------------------------
# 2D scheme
# ----------------------------------------------------------------------------


@njit(cache=True)
def slopes_2d(V, wb, nb_ptr, nb_idx, dx_nb, dy_nb, minv,
              cv_ptr, cvx, cvy, limiter, use_exact_db, dbx, dby):
    """Limited least-squares slopes for every cell; returns (sx, sy)."""
    n = V.shape[1]
    sx = np.zeros((7, n))
    sy = np.zeros((7, n))
    for k in range(n):
        for c in range(7):
            r0 = 0.0
            r1 = 0.0
            for p in range(nb_ptr[k], nb_ptr[k + 1]):
                dv = V[c, nb_idx[p]] - V[c, k]
                r0 += dx_nb[p] * dv
                r1 += dy_nb[p] * dv
            sx[c, k] = minv[k, 0, 0] * r0 + minv[k, 0, 1] * r1
            sy[c, k] = minv[k, 1, 0] * r0 + minv[k, 1, 1] * r1
    if use_exact_db:
        for k in range(n):
            sx[3, k] = dbx[k]
            sy[3, k] = dby[k]
    if limiter == 2:  # Barth-Jespersen
        for k in range(n):
            for c in range(7):
                w = V[c, k]
                wmax = w
                wmin = w
                for p in range(nb_ptr[k], nb_ptr[k + 1]):
                    v = V[c, nb_idx[p]]
                    if v > wmax:
                        wmax = v
                    if v < wmin:
                        wmin = v
                phi = 1.0
                for p in range(cv_ptr[k], cv_ptr[k + 1]):
                    dv = sx[c, k] * cvx[p] + sy[c, k] * cvy[p]
                    if dv > 0.0:
                        r = (wmax - w) / dv
                    elif dv < 0.0:
                        r = (wmin - w) / dv
                    else:
                        continue
                    if r < phi:
                        phi = r
                if phi < 1.0:
                    sx[c, k] *= phi
                    sy[c, k] *= phi
    return sx, sy


@njit(cache=True)
def step_2d(V, dt, wb, limiter,
            area, eLs, eRs, enx, eny, elen,
            eoxL, eoyL, eoxR, eoyR, btype, dirvals,
            nb_ptr, nb_idx, dx_nb, dy_nb, minv,
            ce_ptr, ce_idx, ce_sign,
            cv_ptr, cvx, cvy,
            use_exact_db, dbx, dby,
            out, status):
    """One MUSCL-Hancock step on a polygonal mesh.

    Edge conventions: the unit normal points from the left cell to the right
    cell; boundary edges (eRs < 0 for transmissive/dirichlet) only contribute
    to their left cell, as do periodic twins (btype == 3, eRs = partner cell).
    """
    n = V.shape[1]
    ne = elen.shape[0]
    sx, sy = slopes_2d(V, wb, nb_ptr, nb_idx, dx_nb, dy_nb, minv,
                       cv_ptr, cvx, cvy, limiter, use_exact_db, dbx, dby)

    # time predictor per cell
    dtv = np.zeros((7, n))
    zdt = np.zeros((7, n))  # zero time slopes for t^n evaluations
    q = np.empty(7)
    acc = np.empty(7)
    dg1 = np.empty(3)
    dg2 = np.empty(3)
    for k in range(n):
        for c in range(7):
            acc[c] = 0.0
        for p in range(ce_ptr[k], ce_ptr[k + 1]):
            e = ce_idx[p]
            s = ce_sign[p]
            if s > 0:
                ox = eoxL[e]
                oy = eoyL[e]
            else:
                ox = eoxR[e]
                oy = eoyR[e]
            _state_from_v(V, k, sx, sy, ox, oy, zdt, 0.0, wb, q)
            w = elen[e] * s
            flux_n(q, w * enx[e], w * eny[e], acc)
        for c in range(3):
            acc[c] /= area[k]
        for c in range(7):
            q[c] = V[c, k]
        if wb:
            q[0] = V[0, k] - V[3, k]
            deta1 = sx[0, k]
            deta2 = sy[0, k]
        else:
            deta1 = sx[0, k] + sx[3, k]
            deta2 = sy[0, k] + sy[3, k]
        for j in range(3):
            dg1[j] = sx[4 + j, k]
            dg2[j] = sy[4 + j, k]
        ncp_action(q, dg1, dg2, deta1, deta2, 1.0, acc)
        for c in range(3):
            dtv[c, k] = -acc[c]

    # edge terms
    fl = np.empty((7, ne))
    dj = np.empty((7, ne))
    qm = np.empty(7)
    qp = np.empty(7)
    tmp = np.empty(7)
    for e in range(ne):
        kl = eLs[e]
        etam = _state_from_v(V, kl, sx, sy, eoxL[e], eoyL[e], dtv, 0.5 * dt, wb, qm)
        bt = btype[e]
        if bt == 0 or bt == 3:
            kr = eRs[e]
            etap = _state_from_v(V, kr, sx, sy, eoxR[e], eoyR[e], dtv, 0.5 * dt, wb, qp)
        elif bt == 1:  # transmissive: copy the interior trace
            for c in range(7):
                qp[c] = qm[c]
            etap = etam
        else:  # dirichlet state supplied by the scenario
            for c in range(7):
                qp[c] = dirvals[c, e]
            etap = qp[0] + qp[3]
        if qm[0] <= H_FLOOR or qp[0] <= H_FLOOR:
            status[0] = 1
            status[1] = kl
            return
        rusanov_edge(qm, qp, enx[e], eny[e], etam, etap, wb, tmp)
        for c in range(7):
            fl[c, e] = tmp[c]
        path_jump_edge(qm, qp, enx[e], eny[e], etam, etap, tmp)
        for c in range(7):
            dj[c, e] = tmp[c]

    # corrector
    for k in range(n):
        for c in range(7):
            out[c, k] = V[c, k]
    for k in range(n):
        for c in range(7):
            acc[c] = 0.0
        for p in range(ce_ptr[k], ce_ptr[k + 1]):
            e = ce_idx[p]
            s = ce_sign[p]
            for c in range(3):
                acc[c] += elen[e] * (s * fl[c, e] + dj[c, e])
        for c in range(3):
            acc[c] /= area[k]
        eta = _state_from_v(V, k, sx, sy, 0.0, 0.0, dtv, 0.5 * dt, wb, q)
        if q[0] <= H_FLOOR:
            status[0] = 1
            status[1] = k
            return
        if wb:
            deta1 = sx[0, k]
            deta2 = sy[0, k]
        else:
            deta1 = sx[0, k] + sx[3, k]
            deta2 = sy[0, k] + sy[3, k]
        for j in range(3):
            dg1[j] = sx[4 + j, k]
            dg2[j] = sy[4 + j, k]
        ncp_action(q, dg1, dg2, deta1, deta2, 1.0, acc)
        for c in range(3):
            out[c, k] = V[c, k] - dt * acc[c]
        hnew = out[0, k] - out[3, k] if wb else out[0, k]
        if hnew <= H_FLOOR:
            status[0] = 1
            status[1] = k
            return
    status[0] = 0


@njit(cache=True)
def min_dt_2d(V, wb, area, perim, cfl):
    """CFL time step: cfl * min_k |Omega_k| / (lambda_k * perimeter_k)."""
    n = V.shape[1]
    q = np.empty(7)
    dt = 1e300
    for k in range(n):
        for c in range(7):
            q[c] = V[c, k]
        if wb:
            q[0] = V[0, k] - V[3, k]
        lam = lam_iso(q)
        v = cfl * area[k] / (lam * perim[k])
        if v < dt:
            dt = v
    return dt
