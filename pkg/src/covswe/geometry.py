"""Analytic metric families and pointwise tensor algebra.

The solver treats the covariant metric as data carried in the state vector;
these helpers are used only for initialization, boundary data, embeddings for
visualization, and the analytic oracles in the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PoleSingularity

GRAVITY = 9.81
DET_FLOOR = 1e-14

CARTESIAN = "cartesian"
SPHERICAL = "spherical"
ELLIPTICAL = "elliptical"


@dataclass(frozen=True)
class MetricSpec:
    """One of the three analytic metric families.

    For the spherical family ``R`` is the sphere radius; for the elliptical
    family ``K`` is the linear eccentricity and ``beta`` the constant surface
    level. Chart coordinates are (x, y) in the Cartesian case and the
    longitude/latitude angles (theta, phi) otherwise.
    """

    kind: str
    R: float = 1.0
    K: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.kind not in (CARTESIAN, SPHERICAL, ELLIPTICAL):
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.kind == SPHERICAL and not self.R > 0:
            raise ValueError("spherical metric requires R > 0")
        if self.kind == ELLIPTICAL and not (self.K > 0 and self.beta > 0):
            raise ValueError("elliptical metric requires K > 0 and beta > 0")


@dataclass(frozen=True)
class CovariantMetric:
    """Covariant metric coefficients at a point (g21 == g12)."""

    g11: float
    g12: float
    g22: float

    @property
    def det(self) -> float:
        return self.g11 * self.g22 - self.g12 ** 2


def eval_metric(spec: MetricSpec, x, det_floor: float = DET_FLOOR) -> CovariantMetric:
    """Covariant metric coefficients at chart point ``x = (x1, x2)``."""
    g11, g12, g22 = _metric_components(spec, float(x[1]))
    g = CovariantMetric(g11, g12, g22)
    if g.det < det_floor:
        raise PoleSingularity(
            f"metric determinant {g.det:.3e} below floor {det_floor:.1e} at {tuple(x)}"
        )
    return g


def _metric_components(spec: MetricSpec, phi: float) -> tuple[float, float, float]:
    if spec.kind == CARTESIAN:
        return 1.0, 0.0, 1.0
    if spec.kind == SPHERICAL:
        c = math.cos(phi)
        return spec.R ** 2 * c * c, 0.0, spec.R ** 2
    c, s = math.cos(phi), math.sin(phi)
    ch2 = math.cosh(spec.beta) ** 2
    sh2 = math.sinh(spec.beta) ** 2
    return spec.K ** 2 * ch2 * c * c, 0.0, spec.K ** 2 * (ch2 * s * s + sh2 * c * c)


def metric_arrays(spec: MetricSpec, x2: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized metric components; only the second chart coordinate matters."""
    x2 = np.asarray(x2, dtype=float)
    if spec.kind == CARTESIAN:
        one = np.ones_like(x2)
        return one, np.zeros_like(x2), one
    if spec.kind == SPHERICAL:
        c = np.cos(x2)
        return spec.R ** 2 * c * c, np.zeros_like(x2), np.full_like(x2, spec.R ** 2)
    c, s = np.cos(x2), np.sin(x2)
    ch2 = math.cosh(spec.beta) ** 2
    sh2 = math.sinh(spec.beta) ** 2
    return (
        spec.K ** 2 * ch2 * c * c,
        np.zeros_like(x2),
        spec.K ** 2 * (ch2 * s * s + sh2 * c * c),
    )


def metric_derivatives(spec: MetricSpec, x) -> np.ndarray:
    """Exact chart derivatives of (g11, g12, g22); shape (2, 3).

    Row i holds the derivative with respect to x^{i+1}. All three families
    depend on the latitude only, so the first row is identically zero.
    """
    d = np.zeros((2, 3))
    phi = float(x[1])
    if spec.kind == SPHERICAL:
        d[1, 0] = -2.0 * spec.R ** 2 * math.cos(phi) * math.sin(phi)
    elif spec.kind == ELLIPTICAL:
        sc = math.sin(phi) * math.cos(phi)
        ch2 = math.cosh(spec.beta) ** 2
        d[1, 0] = -2.0 * spec.K ** 2 * ch2 * sc
        # cosh^2 - sinh^2 == 1
        d[1, 2] = 2.0 * spec.K ** 2 * sc
    return d


def contravariant(g, det_floor: float = DET_FLOOR) -> tuple[float, float, float, float]:
    """Inverse metric entries and determinant: (g^11, g^12, g^22, det)."""
    g11, g12, g22 = _coeffs(g)
    det = g11 * g22 - g12 * g12
    if det < det_floor:
        raise PoleSingularity(f"metric determinant {det:.3e} below floor {det_floor:.1e}")
    return g22 / det, -g12 / det, g11 / det, det


def metric_max_eigen(g, det_floor: float = DET_FLOOR) -> float:
    """Maximum of n^T [g^ij] n over unit directions n (closed form)."""
    g11, g12, g22 = _coeffs(g)
    det = g11 * g22 - g12 * g12
    if det < det_floor:
        raise PoleSingularity(f"metric determinant {det:.3e} below floor {det_floor:.1e}")
    return (g11 + g22 + math.hypot(g11 - g22, 2.0 * g12)) / (2.0 * det)


def _coeffs(g) -> tuple[float, float, float]:
    if isinstance(g, CovariantMetric):
        return g.g11, g.g12, g.g22
    g11, g12, g22 = g
    return float(g11), float(g12), float(g22)


def embed(spec: MetricSpec, x, height: float = 0.0) -> np.ndarray:
    """Map a chart point to 3D, offset by ``height`` along the surface normal.

    Visualization only; the solver never consumes embedded coordinates.
    """
    p = _surface_point(spec, x)
    return p + float(height) * _unit_normal(spec, x)


def _surface_point(spec: MetricSpec, x) -> np.ndarray:
    x1, x2 = float(x[0]), float(x[1])
    if spec.kind == CARTESIAN:
        return np.array([x1, x2, 0.0])
    if spec.kind == SPHERICAL:
        return spec.R * np.array(
            [math.cos(x1) * math.cos(x2), math.sin(x1) * math.cos(x2), math.sin(x2)]
        )
    return spec.K * np.array(
        [
            math.cosh(spec.beta) * math.cos(x1) * math.cos(x2),
            math.cosh(spec.beta) * math.sin(x1) * math.cos(x2),
            math.sinh(spec.beta) * math.sin(x2),
        ]
    )


def _unit_normal(spec: MetricSpec, x) -> np.ndarray:
    if spec.kind == CARTESIAN:
        return np.array([0.0, 0.0, 1.0])
    x1, x2 = float(x[0]), float(x[1])
    eps = 1e-6
    t1 = (_surface_point(spec, (x1 + eps, x2)) - _surface_point(spec, (x1 - eps, x2))) / (2 * eps)
    t2 = (_surface_point(spec, (x1, x2 + eps)) - _surface_point(spec, (x1, x2 - eps))) / (2 * eps)
    n = np.cross(t1, t2)
    nrm = np.linalg.norm(n)
    if nrm == 0.0:
        raise PoleSingularity(f"degenerate tangent frame at {tuple(x)}")
    n /= nrm
    # orient outward: positive projection on the position vector
    if np.dot(n, _surface_point(spec, x)) < 0:
        n = -n
    return n


def contravariant_derivatives(spec: MetricSpec, x) -> np.ndarray:
    """Exact chart derivatives of the inverse metric; dgu[l] = d_l [g^ij]."""
    g = eval_metric(spec, x)
    gu11, gu12, gu22, _ = contravariant(g)
    ginv = np.array([[gu11, gu12], [gu12, gu22]])
    d = metric_derivatives(spec, x)
    out = np.empty((2, 2, 2))
    for l in range(2):
        dg = np.array([[d[l, 0], d[l, 1]], [d[l, 1], d[l, 2]]])
        out[l] = -ginv @ dg @ ginv
    return out


def christoffel_symbols(spec: MetricSpec, x) -> np.ndarray:
    """Second-kind Christoffel symbols Gamma[i, j, k] from exact metric derivatives."""
    g = eval_metric(spec, x)
    gu11, gu12, gu22, _ = contravariant(g)
    ginv = np.array([[gu11, gu12], [gu12, gu22]])
    d = metric_derivatives(spec, x)
    # dg[c][a, b] = d g_ab / d x^{c+1}
    dg = np.array(
        [
            [[d[0, 0], d[0, 1]], [d[0, 1], d[0, 2]]],
            [[d[1, 0], d[1, 1]], [d[1, 1], d[1, 2]]],
        ]
    )
    gam = np.zeros((2, 2, 2))
    for i in range(2):
        for j in range(2):
            for k in range(2):
                gam[i, j, k] = 0.5 * sum(
                    ginv[i, m] * (dg[j][k, m] + dg[k][j, m] - dg[m][j, k]) for m in range(2)
                )
    return gam
