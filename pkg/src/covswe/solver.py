"""Time integration: CFL control, ghost/boundary handling, scheme variants.

Three schemes:

* ``standard``   — conservative reconstruction + standard Rusanov.
* ``wb_rest``    — free-surface (eta) reconstruction + the modified Rusanov
                   identity, automatically well balanced for water at rest.
* ``wb_general`` — fluctuation reconstruction around a supplied equilibrium;
                   the discrete equilibrium residual is subtracted so the
                   equilibrium itself is preserved exactly.

``standard`` and ``wb_rest`` run through the compiled kernels; ``wb_general``
is a plain-numpy path (it is used for verification, not long production runs).
The evolved cell averages keep the metric components frozen bit-exactly.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _kernels, physics
from .errors import (InvalidBounds, MissingExactSolution, NonPositiveDepth,
                     SingularStencil)
from .geometry import metric_arrays
from .mesh import Mesh1D, PolyMesh
from .scenarios import Scenario, apply_noise

SCHEMES = ("standard", "wb_rest", "wb_general")
LIMITERS = ("minmod", "barth", "none")
_FD_EPS = 1e-6


@dataclass
class SchemeConfig:
    """Scheme selection and run controls."""

    scheme: str = "standard"
    cfl: Optional[float] = None          # default 0.9 / dimension
    t_end: float = 1.0
    limiter: Optional[str] = None        # default: minmod (1D), barth (2D)
    exact_bathymetry_gradient: bool = False
    equilibrium: Optional[Callable] = None  # (x.., t) -> (h, u..) for wb_general

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}; use one of {SCHEMES}")
        if self.limiter is not None and self.limiter not in LIMITERS:
            raise ValueError(f"unknown limiter {self.limiter!r}; use one of {LIMITERS}")
        if self.t_end <= 0.0:
            raise InvalidBounds(f"t_end must be positive, got {self.t_end}")
        if self.scheme == "wb_general" and self.equilibrium is None:
            raise ValueError("scheme wb_general requires an equilibrium")

    def resolved_cfl(self, dimension: int) -> float:
        cfl = 0.9 / dimension if self.cfl is None else self.cfl
        if not 0.0 < cfl < 1.0 / dimension + 1e-12:
            raise InvalidBounds(f"cfl must lie in (0, 1/{dimension}), got {cfl}")
        return cfl


@dataclass
class SimulationState:
    """Snapshot of a run: physical conserved averages (h-based), per cell."""

    t: float
    step: int
    averages: np.ndarray  # (n_cells, 7)


def timestep(mesh, averages: np.ndarray, cfl: float, axis: int = 0) -> float:
    """CFL time step from the dynamic eigenvalues at the cell averages."""
    q = np.ascontiguousarray(np.asarray(averages, dtype=float).T)
    if isinstance(mesh, Mesh1D):
        lam = _kernels.max_lambda_1d(q, axis, False, 0, q.shape[1])
        return cfl * mesh.dx / lam
    perim = mesh.perimeters
    return float(_kernels.min_dt_2d(q, False, mesh.areas, perim, cfl))


def ghost_state(x_ghost, interior_state: np.ndarray, rule: str,
                scenario: Scenario, t: float = 0.0) -> np.ndarray:
    """Boundary ghost state at chart point ``x_ghost``.

    transmissive: copy the interior free surface and velocity, evaluate b and
    the metric analytically at the ghost point; dirichlet: evaluate the
    scenario's exact solution there.
    """
    q = np.asarray(interior_state, dtype=float)
    if scenario.dimension == 1:
        xi = float(np.atleast_1d(x_ghost)[0])
        pt = (xi, 0.0) if scenario.axis == 0 else (0.0, xi)
        b = scenario.bathymetry(xi)
    else:
        pt = (float(x_ghost[0]), float(x_ghost[1]))
        b = scenario.bathymetry(*pt)
    g11, g12, g22 = metric_arrays(scenario.metric, np.array([pt[1]]))
    gvals = (g11[0], g12[0], g22[0])
    out = np.empty(7)
    out[3] = b
    out[4:7] = gvals
    if rule == "transmissive":
        eta = q[0] + q[3]
        h = eta - b
        if h <= physics.H_FLOOR:
            raise NonPositiveDepth(f"transmissive ghost depth {h!r} at {pt}")
        out[0] = h
        out[1] = h * q[1] / q[0]
        out[2] = h * q[2] / q[0]
        return out
    if rule == "dirichlet":
        if scenario.exact is None:
            raise MissingExactSolution(
                f"scenario {scenario.name} has no exact solution for dirichlet")
        if scenario.dimension == 1:
            h, u = scenario.exact(xi, t)
            out[0] = h
            out[1 + scenario.axis] = h * u
            out[1 + (1 - scenario.axis)] = 0.0
        else:
            h, u1, u2 = scenario.exact(*pt, t)
            out[0], out[1], out[2] = h, h * u1, h * u2
        return out
    raise ValueError(f"unknown boundary rule {rule!r}")


# ----------------------------------------------------------------------------
# 1D driver
# ----------------------------------------------------------------------------


class _Driver1D:
    """Ghost-padded 1D state and stepping for all three schemes."""

    def __init__(self, scenario: Scenario, mesh: Mesh1D, config: SchemeConfig):
        self.scenario = scenario
        self.mesh = mesh
        self.config = config
        self.ax = scenario.axis
        self.wb = config.scheme == "wb_rest"
        limiter = config.limiter or "minmod"
        if limiter == "barth":
            raise ValueError("the Barth-Jespersen limiter is 2D-only; use minmod")
        self.limiter_code = 1 if limiter == "minmod" else 0

        n = mesh.n_cells
        dx = mesh.dx
        self.ext_centers = np.concatenate((
            [mesh.xi_left - 1.5 * dx, mesh.xi_left - 0.5 * dx],
            mesh.centers,
            [mesh.xi_right + 0.5 * dx, mesh.xi_right + 1.5 * dx]))
        x2 = self.ext_centers if self.ax == 1 else np.zeros(n + 4)
        g11, g12, g22 = metric_arrays(scenario.metric, x2)

        b = np.array([scenario.bathymetry(x) for x in self.ext_centers])
        if scenario.noise is not None:
            amp, seed = scenario.noise
            b[2:-2] = apply_noise(b[2:-2], amp, seed)
        self.b_ext = b

        eta0 = np.array([scenario.initial_eta(x) for x in mesh.centers])
        u0 = np.array([scenario.initial_u(x) for x in mesh.centers])
        h0 = eta0 - b[2:-2]
        if h0.min() <= physics.H_FLOOR:
            raise NonPositiveDepth(
                f"initial depth {h0.min()!r} in cell {int(h0.argmin())}")

        self.V = np.zeros((7, n + 4))
        self.V[0, 2:-2] = eta0 if self.wb else h0
        self.V[1 + self.ax, 2:-2] = h0 * u0
        self.V[3] = b
        self.V[4], self.V[5], self.V[6] = g11, g12, g22
        self.out = np.empty_like(self.V)
        self.status = np.zeros(2, dtype=np.int64)

        self.db_ext = np.zeros(n + 4)
        if config.exact_bathymetry_gradient:
            if scenario.bathymetry_grad is None:
                raise MissingExactSolution(
                    f"scenario {scenario.name} has no analytic bathymetry gradient")
            self.db_ext = np.array(
                [scenario.bathymetry_grad(x) for x in self.ext_centers])

        if scenario.boundary == "dirichlet":
            if scenario.exact is None:
                raise MissingExactSolution(
                    f"scenario {scenario.name} has no exact solution for dirichlet")
            self.ghosts = np.empty((7, 4))
            for i, j in enumerate((0, 1, n + 2, n + 3)):
                h, u = scenario.exact(self.ext_centers[j], 0.0)
                self.ghosts[:, i] = self.V[:, j]
                self.ghosts[0, i] = (h + b[j]) if self.wb else h
                self.ghosts[1 + self.ax, i] = h * u

        if config.scheme == "wb_general":
            self._setup_wb_general()

        self.t = 0.0
        self.step_count = 0
        self.cfl = config.resolved_cfl(1)

    # -- state access --------------------------------------------------------

    @property
    def averages(self) -> np.ndarray:
        q = self.V[:, 2:-2].T.copy()
        if self.wb:
            q[:, 0] -= q[:, 3]
        return q

    def set_averages(self, q: np.ndarray) -> None:
        q = np.asarray(q, dtype=float)
        self.V[:, 2:-2] = q.T
        if self.wb:
            self.V[0, 2:-2] += q[:, 3]

    # -- stepping -------------------------------------------------------------

    def _fill_ghosts(self):
        V, n = self.V, self.mesh.n_cells
        rule = self.scenario.boundary
        if rule == "periodic":
            V[:, 0:2] = V[:, n:n + 2]
            V[:, n + 2:n + 4] = V[:, 2:4]
            return
        if rule == "dirichlet":
            for i, j in enumerate((0, 1, n + 2, n + 3)):
                V[:, j] = self.ghosts[:, i]
            return
        # transmissive: copy eta and velocity from the nearest interior cell
        for side, (gs, it) in enumerate((((0, 1), 2), ((n + 2, n + 3), n + 1))):
            h_i = V[0, it] - V[3, it] if self.wb else V[0, it]
            eta_i = V[0, it] if self.wb else V[0, it] + V[3, it]
            for j in gs:
                h_g = eta_i - V[3, j]
                if h_g <= physics.H_FLOOR:
                    raise NonPositiveDepth(
                        f"transmissive ghost depth {h_g!r} at t={self.t}")
                V[0, j] = eta_i if self.wb else h_g
                V[1, j] = h_g * V[1, it] / h_i
                V[2, j] = h_g * V[2, it] / h_i

    def cfl_dt(self) -> float:
        self._fill_ghosts()
        lam = _kernels.max_lambda_1d(self.V, self.ax, self.wb, 2,
                                     self.mesh.n_cells + 2)
        return self.cfl * self.mesh.dx / lam

    def advance(self, dt: float) -> None:
        self._fill_ghosts()
        if self.config.scheme == "wb_general":
            self._advance_wb_general(dt)
        else:
            _kernels.step_1d(self.V, self.mesh.dx, dt, self.ax, self.wb,
                             self.limiter_code,
                             self.config.exact_bathymetry_gradient,
                             self.db_ext, self.out, self.status)
            if self.status[0]:
                raise NonPositiveDepth(
                    f"depth became non-positive in cell {self.status[1] - 2} "
                    f"at t={self.t:.6g}")
            self.V, self.out = self.out, self.V
        self.t += dt
        self.step_count += 1

    # -- wb_general -----------------------------------------------------------

    def _equilibrium_q(self, xi: float) -> np.ndarray:
        h, u = self.config.equilibrium(xi, 0.0)
        pt2 = xi if self.ax == 1 else 0.0
        g11, g12, g22 = metric_arrays(self.scenario.metric, np.array([pt2]))
        q = np.empty(7)
        q[0] = h
        q[1] = q[2] = 0.0
        q[1 + self.ax] = h * u
        q[3] = self.scenario.bathymetry(xi)
        q[4:7] = g11[0], g12[0], g22[0]
        return q

    def _setup_wb_general(self):
        n = self.mesh.n_cells
        dx = self.mesh.dx
        # equilibrium on the padded cells; b and gamma are shared with the
        # state so the fluctuation of the static components is exactly zero
        self.QE = np.stack([self._equilibrium_q(x) for x in self.ext_centers], axis=1)
        self.QE[3] = self.b_ext
        self.QE[4:7] = self.V[4:7]
        self.dQE = np.stack(
            [(self._equilibrium_q(x + _FD_EPS) - self._equilibrium_q(x - _FD_EPS))
             / (2.0 * _FD_EPS) for x in self.ext_centers], axis=1)
        # equilibrium at every cell face of the padded array; face i sits
        # between padded cells i-1 and i
        faces = self.ext_centers[0] - 0.5 * dx + np.arange(n + 5) * dx
        self.QE_f = np.stack([self._equilibrium_q(x) for x in faces], axis=1)

    def _advance_wb_general(self, dt: float):
        scen = self.scenario
        dx = self.mesh.dx
        m = self.V.shape[1]
        n1 = np.array([1.0, 0.0]) if self.ax == 0 else np.array([0.0, 1.0])
        W = self.V - self.QE
        sW = _kernels.slopes_1d(W, dx, self.limiter_code)
        gradQ = self.dQE + sW  # (7, m)

        def grad2(col):
            g = np.zeros((7, 2))
            g[:, self.ax] = col
            return g

        # predictor on the fluctuations
        dtW = np.zeros((7, m))
        for k in range(1, m - 1):
            acc = np.zeros(7)
            for sgn in (1.0, -1.0):
                w = W[:, k] + sW[:, k] * (sgn * 0.5 * dx)
                qe = self.QE_f[:, k + 1 if sgn > 0 else k]
                f1, f2 = physics.flux(qe + w)
                fe1, fe2 = physics.flux(qe)
                acc += sgn * ((f1 - fe1) * n1[0] + (f2 - fe2) * n1[1]) / dx
            acc += physics.ncp_apply(self.V[:, k], grad2(gradQ[:, k]))
            acc -= physics.ncp_apply(self.QE[:, k], grad2(self.dQE[:, k]))
            dtW[:3, k] = -acc[:3]

        nifc = m - 3
        fl = np.empty((7, nifc))
        dj = np.empty((7, nifc))
        for j in range(nifc):
            kl, kr = j + 1, j + 2
            qe = self.QE_f[:, j + 2]
            qm = qe + W[:, kl] + 0.5 * dx * sW[:, kl] + 0.5 * dt * dtW[:, kl]
            qp = qe + W[:, kr] - 0.5 * dx * sW[:, kr] + 0.5 * dt * dtW[:, kr]
            fe1, fe2 = physics.flux(qe)
            fl[:, j] = physics.rusanov(qm, qp, n1) - (fe1 * n1[0] + fe2 * n1[1])
            dj[:, j] = physics.path_jump(qm, qp, n1)

        r = dt / dx
        for k in range(2, m - 2):
            qc = self.V[:, k] + 0.5 * dt * dtW[:, k]
            ncp = (physics.ncp_apply(qc, grad2(gradQ[:, k]))
                   - physics.ncp_apply(self.QE[:, k], grad2(self.dQE[:, k])))
            upd = (self.V[:3, k]
                   - r * (fl[:3, k - 1] - fl[:3, k - 2])
                   - r * (dj[:3, k - 1] + dj[:3, k - 2])
                   - dt * ncp[:3])
            if upd[0] <= physics.H_FLOOR:
                raise NonPositiveDepth(
                    f"depth became non-positive in cell {k - 2} at t={self.t:.6g}")
            self.V[:3, k] = upd


# ----------------------------------------------------------------------------
# 2D driver
# ----------------------------------------------------------------------------

BTYPE_INTERIOR = 0
BTYPE_TRANSMISSIVE = 1
BTYPE_DIRICHLET = 2
BTYPE_PERIODIC = 3


class _Driver2D:
    """Polygonal-mesh state and stepping for all three schemes."""

    def __init__(self, scenario: Scenario, mesh: PolyMesh, config: SchemeConfig):
        self.scenario = scenario
        self.mesh = mesh
        self.config = config
        self.wb = config.scheme == "wb_rest"
        limiter = config.limiter or "barth"
        if limiter == "minmod":
            raise ValueError("the minmod limiter is 1D-only; use barth")
        self.limiter_code = 2 if limiter == "barth" else 0

        n = mesh.n_cells
        cx = mesh.centroids[:, 0]
        cy = mesh.centroids[:, 1]
        g11, g12, g22 = metric_arrays(scenario.metric, cy)

        b = np.array([scenario.bathymetry(x, y) for x, y in mesh.centroids])
        if scenario.noise is not None:
            amp, seed = scenario.noise
            b = apply_noise(b, amp, seed)
        eta0 = np.array([scenario.initial_eta(x, y) for x, y in mesh.centroids])
        u0 = np.array([scenario.initial_u(x, y) for x, y in mesh.centroids])
        h0 = eta0 - b
        if h0.min() <= physics.H_FLOOR:
            raise NonPositiveDepth(
                f"initial depth {h0.min()!r} in cell {int(h0.argmin())}")

        self.V = np.zeros((7, n))
        self.V[0] = eta0 if self.wb else h0
        self.V[1] = h0 * u0[:, 0]
        self.V[2] = h0 * u0[:, 1]
        self.V[3] = b
        self.V[4], self.V[5], self.V[6] = g11, g12, g22
        self.out = np.empty_like(self.V)
        self.status = np.zeros(2, dtype=np.int64)

        self._build_edge_arrays()
        self._build_stencil_arrays()

        self.dbx = np.zeros(n)
        self.dby = np.zeros(n)
        if config.exact_bathymetry_gradient:
            if scenario.bathymetry_grad is None:
                raise MissingExactSolution(
                    f"scenario {scenario.name} has no analytic bathymetry gradient")
            gb = np.array([scenario.bathymetry_grad(x, y) for x, y in mesh.centroids])
            self.dbx, self.dby = gb[:, 0].copy(), gb[:, 1].copy()

        if config.scheme == "wb_general":
            self._setup_wb_general()

        self.t = 0.0
        self.step_count = 0
        self.cfl = config.resolved_cfl(2)

    def _build_edge_arrays(self):
        mesh, scen = self.mesh, self.scenario
        self.eLs = np.ascontiguousarray(mesh.edge_cells[:, 0])
        self.eRs = np.ascontiguousarray(mesh.edge_cells[:, 1])
        self.enx = np.ascontiguousarray(mesh.normals[:, 0])
        self.eny = np.ascontiguousarray(mesh.normals[:, 1])
        self.elen = mesh.lengths
        offL = mesh.midpoints - mesh.centroids[self.eLs]
        self.eoxL = np.ascontiguousarray(offL[:, 0])
        self.eoyL = np.ascontiguousarray(offL[:, 1])
        offR = np.zeros_like(offL)
        inter = self.eRs >= 0
        offR[inter] = mesh.midpoints[inter] - mesh.centroids[self.eRs[inter]]
        self.btype = np.zeros(mesh.n_edges, dtype=np.int64)
        self.dirvals = np.zeros((7, mesh.n_edges))
        bnd = mesh.boundary_edges()
        if scen.boundary == "transmissive":
            self.btype[bnd] = BTYPE_TRANSMISSIVE
        elif scen.boundary == "dirichlet":
            self.btype[bnd] = BTYPE_DIRICHLET
            for e in bnd:
                self.dirvals[:, e] = ghost_state(
                    mesh.midpoints[e], np.zeros(7), "dirichlet", scen)
        elif scen.boundary == "periodic":
            self._pair_periodic(bnd, offR)
        else:
            raise ValueError(f"unknown boundary rule {scen.boundary!r}")
        self.eoxR = np.ascontiguousarray(offR[:, 0])
        self.eoyR = np.ascontiguousarray(offR[:, 1])

    def _pair_periodic(self, bnd, offR):
        """Match opposite boundary edges of a rectangle by shifted midpoints."""
        mesh = self.mesh
        lo = mesh.vertices.min(axis=0)
        hi = mesh.vertices.max(axis=0)
        span = hi - lo
        mids = mesh.midpoints
        lookup = {}
        for e in bnd:
            key = (round(mids[e, 0], 9), round(mids[e, 1], 9))
            lookup[key] = e
        for e in bnd:
            x, y = mids[e]
            if abs(self.enx[e]) > 0.5:  # vertical boundary edge
                shift = (x - span[0], y) if x > lo[0] + 0.5 * span[0] else (x + span[0], y)
            else:
                shift = (x, y - span[1]) if y > lo[1] + 0.5 * span[1] else (x, y + span[1])
            partner = lookup.get((round(shift[0], 9), round(shift[1], 9)))
            if partner is None:
                raise InvalidBounds(
                    "periodic boundaries require a matching rectangular grid")
            self.btype[e] = BTYPE_PERIODIC
            self.eRs[e] = self.eLs[partner]
            offR[e] = mids[partner] - mesh.centroids[self.eLs[partner]]

    def _build_stencil_arrays(self):
        mesh = self.mesh
        self.nb_ptr = mesh.stencil_ptr
        self.nb_idx = mesh.stencil_idx
        d = mesh.centroids[self.nb_idx] - np.repeat(
            mesh.centroids, np.diff(mesh.stencil_ptr), axis=0)
        self.dx_nb = np.ascontiguousarray(d[:, 0])
        self.dy_nb = np.ascontiguousarray(d[:, 1])
        self.minv = np.empty((mesh.n_cells, 2, 2))
        for k in range(mesh.n_cells):
            sl = slice(self.nb_ptr[k], self.nb_ptr[k + 1])
            dk = d[sl]
            A = dk.T @ dk
            det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
            if abs(det) <= 1e-14 * (A[0, 0] + A[1, 1]) ** 2:
                raise SingularStencil(f"cell {k} stencil centroids are collinear")
            self.minv[k] = np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]]) / det
        self.ce_ptr = mesh.cell_edge_ptr
        self.ce_idx = mesh.cell_edge_idx
        self.ce_sign = mesh.cell_edge_sign.astype(float)
        self.cv_ptr = mesh.cell_vertex_ptr
        off = mesh.vertices[mesh.cell_vertex_idx] - np.repeat(
            mesh.centroids, np.diff(mesh.cell_vertex_ptr), axis=0)
        self.cvx = np.ascontiguousarray(off[:, 0])
        self.cvy = np.ascontiguousarray(off[:, 1])

    # -- state access ---------------------------------------------------------

    @property
    def averages(self) -> np.ndarray:
        q = self.V.T.copy()
        if self.wb:
            q[:, 0] -= q[:, 3]
        return q

    def set_averages(self, q: np.ndarray) -> None:
        q = np.asarray(q, dtype=float)
        self.V[:] = q.T
        if self.wb:
            self.V[0] += q[:, 3]

    # -- stepping -------------------------------------------------------------

    def cfl_dt(self) -> float:
        return float(_kernels.min_dt_2d(self.V, self.wb, self.mesh.areas,
                                        self.mesh.perimeters, self.cfl))

    def advance(self, dt: float) -> None:
        if self.config.scheme == "wb_general":
            self._advance_wb_general(dt)
        else:
            _kernels.step_2d(
                self.V, dt, self.wb, self.limiter_code,
                self.mesh.areas, self.eLs, self.eRs, self.enx, self.eny,
                self.elen, self.eoxL, self.eoyL, self.eoxR, self.eoyR,
                self.btype, self.dirvals,
                self.nb_ptr, self.nb_idx, self.dx_nb, self.dy_nb, self.minv,
                self.ce_ptr, self.ce_idx, self.ce_sign,
                self.cv_ptr, self.cvx, self.cvy,
                self.config.exact_bathymetry_gradient, self.dbx, self.dby,
                self.out, self.status)
            if self.status[0]:
                raise NonPositiveDepth(
                    f"depth became non-positive in cell {self.status[1]} "
                    f"at t={self.t:.6g}")
            self.V, self.out = self.out, self.V
        self.t += dt
        self.step_count += 1

    # -- wb_general -----------------------------------------------------------

    def _equilibrium_q(self, x1: float, x2: float) -> np.ndarray:
        h, u1, u2 = self.config.equilibrium(x1, x2, 0.0)
        g11, g12, g22 = metric_arrays(self.scenario.metric, np.array([x2]))
        return np.array([h, h * u1, h * u2, self.scenario.bathymetry(x1, x2),
                         g11[0], g12[0], g22[0]])

    def _setup_wb_general(self):
        mesh = self.mesh
        self.QE = np.stack(
            [self._equilibrium_q(x, y) for x, y in mesh.centroids], axis=1)
        self.QE[3] = self.V[3]
        self.QE[4:7] = self.V[4:7]
        dQE = np.empty((7, 2, mesh.n_cells))
        for k, (x, y) in enumerate(mesh.centroids):
            dQE[:, 0, k] = (self._equilibrium_q(x + _FD_EPS, y)
                            - self._equilibrium_q(x - _FD_EPS, y)) / (2 * _FD_EPS)
            dQE[:, 1, k] = (self._equilibrium_q(x, y + _FD_EPS)
                            - self._equilibrium_q(x, y - _FD_EPS)) / (2 * _FD_EPS)
        self.dQE = dQE
        self.QE_e = np.stack(
            [self._equilibrium_q(x, y) for x, y in mesh.midpoints], axis=1)

    def _advance_wb_general(self, dt: float):
        from .reconstruction import barth_limit, ls_slope
        mesh = self.mesh
        n = mesh.n_cells
        W = (self.V - self.QE).T  # (n, 7) fluctuations
        sW = np.empty((n, 7, 2))
        for k in range(n):
            sW[k] = barth_limit(mesh, W, k, ls_slope(mesh, W, k)) \
                if self.limiter_code == 2 else ls_slope(mesh, W, k)

        def edge_w(k, e, half_dt, dtW):
            off = mesh.midpoints[e] - mesh.centroids[k]
            return W[k] + sW[k] @ off + half_dt * dtW[:, k]

        # predictor
        dtW = np.zeros((7, n))
        for k in range(n):
            acc = np.zeros(7)
            sl = slice(self.ce_ptr[k], self.ce_ptr[k + 1])
            for e, s in zip(self.ce_idx[sl], self.ce_sign[sl]):
                qe = self.QE_e[:, e]
                f1, f2 = physics.flux(qe + edge_w(k, e, 0.0, dtW))
                fe1, fe2 = physics.flux(qe)
                nvec = s * mesh.normals[e]
                acc += mesh.lengths[e] * ((f1 - fe1) * nvec[0] + (f2 - fe2) * nvec[1])
            acc /= mesh.areas[k]
            acc += physics.ncp_apply(self.V[:, k], self.dQE[:, :, k] + sW[k])
            acc -= physics.ncp_apply(self.QE[:, k], self.dQE[:, :, k])
            dtW[:3, k] = -acc[:3]

        fl = np.empty((7, mesh.n_edges))
        dj = np.empty((7, mesh.n_edges))
        for e in range(mesh.n_edges):
            kl = self.eLs[e]
            qe = self.QE_e[:, e]
            qm = qe + edge_w(kl, e, 0.5 * dt, dtW)
            bt = self.btype[e]
            if bt == BTYPE_INTERIOR:
                qp = qe + edge_w(self.eRs[e], e, 0.5 * dt, dtW)
            elif bt == BTYPE_TRANSMISSIVE:
                qp = qm
            elif bt == BTYPE_DIRICHLET:
                qp = self.dirvals[:, e]
            else:
                raise ValueError("periodic wb_general boundaries are unsupported")
            nvec = (self.enx[e], self.eny[e])
            fe1, fe2 = physics.flux(qe)
            fl[:, e] = physics.rusanov(qm, qp, nvec) - (fe1 * nvec[0] + fe2 * nvec[1])
            dj[:, e] = physics.path_jump(qm, qp, nvec)

        for k in range(n):
            acc = np.zeros(7)
            sl = slice(self.ce_ptr[k], self.ce_ptr[k + 1])
            for e, s in zip(self.ce_idx[sl], self.ce_sign[sl]):
                acc += self.elen[e] * (s * fl[:, e] + dj[:, e])
            acc /= mesh.areas[k]
            qc = self.V[:, k] + 0.5 * dt * dtW[:, k]
            acc += physics.ncp_apply(qc, self.dQE[:, :, k] + sW[k])
            acc -= physics.ncp_apply(self.QE[:, k], self.dQE[:, :, k])
            upd = self.V[:3, k] - dt * acc[:3]
            if upd[0] <= physics.H_FLOOR:
                raise NonPositiveDepth(
                    f"depth became non-positive in cell {k} at t={self.t:.6g}")
            self.V[:3, k] = upd


# ----------------------------------------------------------------------------
# public driver API
# ----------------------------------------------------------------------------


def make_driver(scenario: Scenario, mesh, config: SchemeConfig):
    """Build the stepping driver matching the scenario's dimension."""
    if scenario.dimension == 1:
        if not isinstance(mesh, Mesh1D):
            raise TypeError(f"scenario {scenario.name} needs a Mesh1D")
        return _Driver1D(scenario, mesh, config)
    if not isinstance(mesh, PolyMesh):
        raise TypeError(f"scenario {scenario.name} needs a PolyMesh")
    return _Driver2D(scenario, mesh, config)


def step(scenario: Scenario, mesh, state: SimulationState,
         config: SchemeConfig) -> SimulationState:
    """Advance a snapshot by one CFL-limited step (clipped to t_end)."""
    driver = make_driver(scenario, mesh, config)
    driver.set_averages(state.averages)
    driver.t = state.t
    dt = min(driver.cfl_dt(), config.t_end - state.t)
    if dt <= 0.0:
        return state
    driver.advance(dt)
    return SimulationState(t=driver.t, step=state.step + 1,
                           averages=driver.averages)


def run(scenario: Scenario, mesh, config: SchemeConfig,
        callbacks=(), output_every: int = 0) -> SimulationState:
    """Advance the scenario to t_end; the last step lands exactly on t_end.

    ``callbacks`` are invoked with the current SimulationState every
    ``output_every`` accepted steps (0 = only at the end) and always at the
    final time. Deterministic for identical inputs.
    """
    driver = make_driver(scenario, mesh, config)
    t_end = config.t_end
    eps = 1e-12 * max(1.0, abs(t_end))
    while driver.t < t_end - eps:
        dt = min(driver.cfl_dt(), t_end - driver.t)
        driver.advance(dt)
        if output_every and callbacks and driver.step_count % output_every == 0:
            snap = SimulationState(driver.t, driver.step_count, driver.averages)
            for cb in callbacks:
                cb(snap)
    final = SimulationState(driver.t, driver.step_count, driver.averages)
    for cb in callbacks:
        cb(final)
    return final


def cartesian_equivalence_errors(n_cells: int, t_end: float) -> dict:
    """Lockstep comparison: 7-variable solver vs the classical 3-variable
    oracle on a flat Cartesian dam break (scenario ``riemann_flat_1d_cart``).

    Both schemes take identical time steps; returns per-cell max differences
    and the L2 mismatch of the fluid depth at t_end.
    """
    from .scenarios import classical_swe_step_1d, get_scenario

    scenario = get_scenario("riemann_flat_1d_cart")
    mesh = Mesh1D(scenario.bounds[0], scenario.bounds[1], n_cells)
    driver = make_driver(scenario, mesh, SchemeConfig(
        scheme="standard", t_end=t_end, limiter="minmod"))
    dx = mesh.dx

    cls = np.zeros((n_cells + 4, 2))
    q0 = driver.averages
    cls[2:-2, 0] = q0[:, 0]
    cls[2:-2, 1] = q0[:, 1]
    b_slopes = np.zeros(n_cells + 4)

    def fill_ghosts(a):
        a[0] = a[1] = a[2]
        a[-1] = a[-2] = a[-3]

    max_dh = 0.0
    max_dm = 0.0
    eps = 1e-12 * max(1.0, abs(t_end))
    while driver.t < t_end - eps:
        dt = min(driver.cfl_dt(), t_end - driver.t)
        driver.advance(dt)
        fill_ghosts(cls)
        cls = classical_swe_step_1d(cls, dx, dt, b_slopes)
        q = driver.averages
        max_dh = max(max_dh, float(np.max(np.abs(q[:, 0] - cls[2:-2, 0]))))
        max_dm = max(max_dm, float(np.max(np.abs(q[:, 1] - cls[2:-2, 1]))))
    q = driver.averages
    l2_h = float(np.sqrt(np.sum((q[:, 0] - cls[2:-2, 0]) ** 2) * dx))
    return {"max_dh": max_dh, "max_dm": max_dm, "l2_h": l2_h,
            "steps": driver.step_count}
