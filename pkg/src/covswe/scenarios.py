"""Test-case catalog: bathymetries, initial data, exact solutions, noise.

1D scenarios are parameterized by the single chart coordinate xi (x for the
Cartesian metric, the latitude phi for spherical/elliptical); 2D scenarios by
the chart pair (x1, x2). ``classical_swe_step_1d`` is an independent
MUSCL-Hancock step of the classical 3-variable shallow-water system used as
the flat-metric cross-check oracle.
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Union

import numpy as np

from .errors import MissingExactSolution, NonPositiveDepth
from .geometry import GRAVITY, MetricSpec
from .metrics_io import l2_error_1d, l2_error_2d

_NAMED_METRICS = {
    "cartesian": MetricSpec("cartesian"),
    "spherical": MetricSpec("spherical", R=1.0),
    "elliptical": MetricSpec("elliptical", K=1.0, beta=2.0),
}

DEFAULT_NOISE_AMP = 0.1
DEFAULT_NOISE_SEED = 42


@dataclass(frozen=True)
class Scenario:
    """A complete problem definition: domain, metric, data, boundary rule."""

    name: str
    dimension: int
    bounds: tuple                      # (lo, hi) or ((x0, x1), (y0, y1))
    metric: MetricSpec
    bathymetry: Callable               # b(xi) or b(x1, x2)
    initial_eta: Callable              # eta(xi) or eta(x1, x2)
    initial_u: Callable                # u(xi) -> scalar, or u(x1, x2) -> (u1, u2)
    boundary: str = "transmissive"     # transmissive | dirichlet | periodic
    exact: Optional[Callable] = None   # (xi or x1,x2, t) -> (h, u...) at any time
    bathymetry_grad: Optional[Callable] = None
    noise: Optional[tuple] = None      # (amplitude, seed)
    metric_locked: bool = False        # metric is part of the test definition
    description: str = ""

    def with_metric(self, metric: MetricSpec) -> "Scenario":
        if self.metric_locked and metric.kind != self.metric.kind:
            raise ValueError(f"scenario {self.name} is defined for the "
                             f"{self.metric.kind} metric only")
        return replace(self, metric=metric)

    def with_noise(self, amplitude: float, seed: int) -> "Scenario":
        return replace(self, noise=(float(amplitude), int(seed)))

    @property
    def axis(self) -> int:
        """Chart direction of 1D problems: x for Cartesian, phi otherwise."""
        return 0 if self.metric.kind == "cartesian" else 1


def _step(x):
    return 1.0 if x <= 0.0 else 0.0


def _bump_2d(x1, x2):
    r2 = x1 * x1 + x2 * x2
    return math.exp(-1.0 / (1.0 - r2)) if r2 < 1.0 else 0.0


def catalog() -> dict:
    """All named scenarios with their default metrics."""
    g = GRAVITY
    cart = MetricSpec("cartesian")
    sph = MetricSpec("spherical", R=1.0)
    ell = MetricSpec("elliptical", K=1.0, beta=2.0)

    def rest1(b, eta):
        return (lambda xi, t, b=b, eta=eta: (eta - b(xi), 0.0))

    def rest2(b, eta):
        return (lambda x1, x2, t, b=b, eta=eta: (eta - b(x1, x2), 0.0, 0.0))

    scenarios = {}

    def add(s: Scenario):
        scenarios[s.name] = s

    b_bump1 = lambda xi: math.exp(-xi * xi)
    add(Scenario(
        name="wr_bump_1d", dimension=1, bounds=(-0.5, 0.5), metric=cart,
        bathymetry=b_bump1, initial_eta=lambda xi: 3.0,
        initial_u=lambda xi: 0.0, exact=rest1(b_bump1, 3.0),
        bathymetry_grad=lambda xi: -2.0 * xi * math.exp(-xi * xi),
        description="water at rest over a Gaussian bump (any metric)"))

    add(Scenario(
        name="wr_bump_2d", dimension=2, bounds=((-1.1, 1.1), (-1.1, 1.1)),
        metric=cart, bathymetry=_bump_2d, initial_eta=lambda x1, x2: 3.0,
        initial_u=lambda x1, x2: (0.0, 0.0), exact=rest2(_bump_2d, 3.0),
        description="2D water at rest over a compact smooth bump (any metric)"))

    b_step1 = _step
    add(Scenario(
        name="step_1d_cart", dimension=1, bounds=(-1.0, 1.0), metric=cart,
        bathymetry=b_step1, initial_eta=lambda xi: 2.0,
        initial_u=lambda xi: 0.0, exact=rest1(b_step1, 2.0),
        metric_locked=True,
        description="water at rest over a bathymetry step at x = 0"))

    b_noisy_lin = lambda xi: xi + _step(xi)
    add(Scenario(
        name="noisy_linear_1d_cart", dimension=1, bounds=(-1.0, 1.0),
        metric=cart, bathymetry=b_noisy_lin, initial_eta=lambda xi: 3.0,
        initial_u=lambda xi: 0.0, exact=rest1(b_noisy_lin, 3.0),
        noise=(DEFAULT_NOISE_AMP, DEFAULT_NOISE_SEED), metric_locked=True,
        description="rest over a noised linear bathymetry with a step"))

    b_noisy_sin = lambda xi: math.sin(xi) + 2.0 * _step(xi) + (1.0 - _step(xi))
    add(Scenario(
        name="noisy_sine_1d_sph", dimension=1, bounds=(-0.5, 0.5), metric=sph,
        bathymetry=b_noisy_sin, initial_eta=lambda xi: 3.0,
        initial_u=lambda xi: 0.0, exact=rest1(b_noisy_sin, 3.0),
        noise=(DEFAULT_NOISE_AMP, DEFAULT_NOISE_SEED), metric_locked=True,
        description="rest over a noised sine bathymetry with a step (sphere)"))

    b_ell = lambda x1, x2: x1 + x2 + (1.0 if x1 + x2 >= 0.0 else 0.0)
    add(Scenario(
        name="wr_ellbat_2d", dimension=2, bounds=((-0.5, 0.5), (-0.5, 0.5)),
        metric=ell, bathymetry=b_ell, initial_eta=lambda x1, x2: 3.0,
        initial_u=lambda x1, x2: (0.0, 0.0), exact=rest2(b_ell, 3.0),
        metric_locked=True,
        description="2D rest over a bathymetry discontinuous along phi = -theta"))

    b_step2 = lambda x1, x2: _step(x1)
    add(Scenario(
        name="riemann_step_2d_cart", dimension=2,
        bounds=((-1.0, 1.0), (-1.0, 1.0)), metric=cart, bathymetry=b_step2,
        initial_eta=lambda x1, x2: 2.0 + _step(x1),
        initial_u=lambda x1, x2: (0.0, 0.0), metric_locked=True,
        description="2D Riemann problem over a bathymetry step"))

    add(Scenario(
        name="step_2d_cart_rest", dimension=2,
        bounds=((-1.0, 1.0), (-1.0, 1.0)), metric=cart, bathymetry=b_step2,
        initial_eta=lambda x1, x2: 2.0,
        initial_u=lambda x1, x2: (0.0, 0.0), exact=rest2(b_step2, 2.0),
        metric_locked=True,
        description="rest variant of the 2D bathymetry step"))

    h_c = lambda x: math.exp(-x)
    u_c = lambda x: math.exp(x)
    b_c = lambda x: -math.exp(2.0 * x) / (2.0 * g) - math.exp(-x)
    add(Scenario(
        name="steady_conv_1d", dimension=1, bounds=(-1.0, 0.0), metric=cart,
        bathymetry=b_c, initial_eta=lambda x: h_c(x) + b_c(x),
        initial_u=u_c, boundary="dirichlet",
        exact=lambda x, t: (h_c(x), u_c(x)),
        bathymetry_grad=lambda x: -math.exp(2.0 * x) / g + math.exp(-x),
        metric_locked=True,
        description="smooth moving steady state for convergence studies"))

    add(Scenario(
        name="riemann_flat_1d_cart", dimension=1, bounds=(-1.0, 1.0),
        metric=cart, bathymetry=lambda xi: 0.0,
        initial_eta=lambda xi: 2.0 + _step(xi), initial_u=lambda xi: 0.0,
        metric_locked=True,
        description="flat-bed dam break, the classical-SWE equivalence case"))

    add(Scenario(
        name="riemann_sph_2d", dimension=2, bounds=((-1.0, 1.0), (-1.0, 1.0)),
        metric=sph, bathymetry=lambda x1, x2: 1.0,
        initial_eta=lambda x1, x2: 2.0 + (0.5 if x1 > 0.0 else 0.0),
        initial_u=lambda x1, x2: (0.0, 0.0), metric_locked=True,
        description="spherical Riemann problem with a free-surface jump"))

    amp = 0.5 * math.exp(1.0 / 0.09)  # peak free-surface bump of 0.5
    def eta_db(x1, x2, amp=amp):
        r2 = x1 * x1 + x2 * x2
        if r2 >= 0.09:
            return 3.0
        return 3.0 + amp * math.exp(-1.0 / (0.09 - r2))
    def b_db(x1, x2):
        r2 = x1 * x1 + x2 * x2
        return 0.5 * math.cos(math.pi * r2) if r2 <= 1.0 else 0.0
    add(Scenario(
        name="dambreak_sph_2d", dimension=2,
        bounds=((-1.1, 1.1), (-1.1, 1.1)), metric=sph, bathymetry=b_db,
        initial_eta=eta_db, initial_u=lambda x1, x2: (0.0, 0.0),
        metric_locked=True,
        description="qualitative circular dam break over a sinusoidal hill"))

    return scenarios


def get_scenario(name: str, metric: Optional[Union[MetricSpec, str]] = None,
                 noise_amp: Optional[float] = None,
                 noise_seed: Optional[int] = None) -> Scenario:
    """Look up a scenario and apply metric/noise overrides.

    ``metric`` may be a :class:`MetricSpec` or one of the metric names
    ``"cartesian"``, ``"spherical"`` (R=1) or ``"elliptical"`` (K=1, beta=2).
    """
    scen = catalog().get(name)
    if scen is None:
        known = ", ".join(sorted(catalog()))
        raise KeyError(f"unknown scenario {name!r}; available: {known}")
    if isinstance(metric, str):
        if metric not in _NAMED_METRICS:
            raise KeyError(f"unknown metric {metric!r}; available: "
                           + ", ".join(sorted(_NAMED_METRICS)))
        metric = _NAMED_METRICS[metric]
    if metric is not None:
        scen = scen.with_metric(metric)
    if noise_amp is not None or noise_seed is not None:
        base_amp, base_seed = scen.noise or (DEFAULT_NOISE_AMP, DEFAULT_NOISE_SEED)
        scen = scen.with_noise(
            base_amp if noise_amp is None else noise_amp,
            base_seed if noise_seed is None else noise_seed)
    return scen


def apply_noise(values: np.ndarray, amplitude: float, seed: int) -> np.ndarray:
    """Add per-cell uniform noise in [-amplitude/2, amplitude/2] (seeded)."""
    if amplitude < 0:
        raise ValueError("noise amplitude must be nonnegative")
    rng = np.random.default_rng(seed)
    return np.asarray(values, dtype=float) + rng.uniform(
        -0.5 * amplitude, 0.5 * amplitude, np.shape(values))


def classical_swe_step_1d(averages: np.ndarray, dx: float, dt: float,
                          b_slopes: np.ndarray) -> np.ndarray:
    """One MUSCL-Hancock step of the classical 1D shallow-water system.

    ``averages`` is (n, 2) of (h, m) including two ghost layers on each side;
    ``b_slopes`` the per-cell bathymetry slopes (same padded length). Minmod
    slopes, standard Rusanov with c = sqrt(g h), and the -g h db/dx source at
    the half-step midpoint state. Interior cells 2..n-3 are updated.
    """
    g = GRAVITY
    q = np.asarray(averages, dtype=float)
    n = len(q)
    if np.any(q[:, 0] <= 0.0):
        raise NonPositiveDepth("non-positive depth in classical oracle")

    s = np.zeros_like(q)
    dr = (q[2:] - q[1:-1]) / dx
    dl = (q[1:-1] - q[:-2]) / dx
    s[1:-1] = np.where(dr * dl <= 0.0, 0.0, np.where(np.abs(dl) < np.abs(dr), dl, dr))

    def phys_flux(h, m):
        return np.stack([m, m * m / h + 0.5 * g * h * h], axis=-1)

    # predictor
    qp = q + 0.5 * dx * s
    qm = q - 0.5 * dx * s
    dtq = -(phys_flux(qp[:, 0], qp[:, 1]) - phys_flux(qm[:, 0], qm[:, 1])) / dx
    dtq[:, 1] -= g * q[:, 0] * b_slopes

    # half-step interface states: interface j sits between cells j+1 and j+2
    left = q[1:-2] + 0.5 * dx * s[1:-2] + 0.5 * dt * dtq[1:-2]
    right = q[2:-1] - 0.5 * dx * s[2:-1] + 0.5 * dt * dtq[2:-1]
    if np.any(left[:, 0] <= 0.0) or np.any(right[:, 0] <= 0.0):
        raise NonPositiveDepth("non-positive interface depth in classical oracle")
    sl = np.abs(left[:, 1] / left[:, 0]) + np.sqrt(g * left[:, 0])
    sr = np.abs(right[:, 1] / right[:, 0]) + np.sqrt(g * right[:, 0])
    smax = np.maximum(sl, sr)
    fl = 0.5 * (phys_flux(left[:, 0], left[:, 1]) + phys_flux(right[:, 0], right[:, 1]))
    fl -= 0.5 * smax[:, None] * (right - left)

    out = q.copy()
    mid = q[2:-2] + 0.5 * dt * dtq[2:-2]
    out[2:-2] -= dt / dx * (fl[1:] - fl[:-1])
    out[2:-2, 1] -= dt * g * mid[:, 0] * b_slopes[2:-2]
    if np.any(out[2:-2, 0] <= 0.0):
        raise NonPositiveDepth("non-positive depth after classical oracle step")
    return out


def exact_rest_errors(mesh, averages: np.ndarray, scenario: Scenario, t: float = 0.0):
    """Discrete L2 errors of (h, u1, u2) against the scenario's exact solution."""
    if scenario.exact is None:
        raise MissingExactSolution(f"scenario {scenario.name} has no exact solution")
    q = np.asarray(averages, dtype=float)
    h = q[:, 0]
    if scenario.dimension == 1:
        ax = scenario.axis
        u = q[:, 1 + ax] / h
        ex = [scenario.exact(x, t) for x in mesh.centers]
        h_ex = np.array([e[0] for e in ex])
        u_ex = np.array([e[1] for e in ex])
        dx = mesh.dx
        return (l2_error_1d(h - h_ex, dx), l2_error_1d(u - u_ex, dx), 0.0)
    u1 = q[:, 1] / h
    u2 = q[:, 2] / h
    ex = [scenario.exact(x[0], x[1], t) for x in mesh.centroids]
    h_ex = np.array([e[0] for e in ex])
    u1_ex = np.array([e[1] for e in ex])
    u2_ex = np.array([e[2] for e in ex])
    return (
        l2_error_2d(h - h_ex, mesh.areas),
        l2_error_2d(u1 - u1_ex, mesh.areas),
        l2_error_2d(u2 - u2_ex, mesh.areas),
    )
