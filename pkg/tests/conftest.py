"""Shared fixtures and random-state helpers for the test suite."""

import numpy as np
import pytest

from covswe.geometry import MetricSpec, metric_arrays

METRIC_SPECS = {
    "cartesian": MetricSpec("cartesian"),
    "spherical": MetricSpec("spherical", R=1.0),
    "elliptical": MetricSpec("elliptical", K=1.0, beta=2.0),
}

# Latitude range safely away from the spherical poles.
PHI_RANGE = (-1.2, 1.2)


def random_point(rng) -> np.ndarray:
    """A chart point with the second coordinate away from metric poles."""
    return np.array([rng.uniform(-2.0, 2.0),
                     rng.uniform(*PHI_RANGE)])


def random_state(rng, spec: MetricSpec, x=None) -> np.ndarray:
    """A physically admissible 7-state with metric data consistent at x."""
    if x is None:
        x = random_point(rng)
    g11, g12, g22 = metric_arrays(spec, np.array([x[1]]))
    q = np.empty(7)
    q[0] = rng.uniform(0.5, 3.0)
    q[1] = rng.uniform(-1.0, 1.0)
    q[2] = rng.uniform(-1.0, 1.0)
    q[3] = rng.uniform(-1.0, 1.0)
    q[4] = g11[0]
    q[5] = g12[0]
    q[6] = g22[0]
    return q


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260826)
