"""Scenario catalog: initial data sanity, noise, and the steady ODE."""

import math

import numpy as np
import pytest

from covswe.geometry import GRAVITY
from covswe.mesh import build_1d
from covswe.scenarios import (DEFAULT_NOISE_AMP, apply_noise, catalog,
                              get_scenario)


def test_catalog_names_and_dimensions():
    cat = catalog()
    assert len(cat) == 12
    for name, sc in cat.items():
        assert sc.name == name
        assert sc.dimension in (1, 2)
        assert sc.description


def test_get_scenario_unknown():
    with pytest.raises(KeyError):
        get_scenario("not_a_scenario")
    with pytest.raises(KeyError):
        get_scenario("wr_bump_1d", metric="not_a_metric")


def test_metric_override_by_name():
    sc = get_scenario("wr_bump_1d", metric="elliptical")
    assert sc.metric.kind == "elliptical"
    assert sc.metric.K == 1.0 and sc.metric.beta == 2.0


def test_initial_depth_positive_everywhere():
    for name, sc in catalog().items():
        if sc.dimension == 1:
            xs = np.linspace(sc.bounds[0], sc.bounds[1], 201)
            hs = [sc.initial_eta(x) - sc.bathymetry(x) for x in xs]
        else:
            (x0, x1), (y0, y1) = sc.bounds
            hs = [sc.initial_eta(x, y) - sc.bathymetry(x, y)
                  for x in np.linspace(x0, x1, 31)
                  for y in np.linspace(y0, y1, 31)]
        assert min(hs) > 0.0, name


def test_steady_solution_satisfies_the_ode():
    """db/dx = (u^2/(g h) - 1) dh/dx, checked analytically at 1e3 points."""
    sc = get_scenario("steady_conv_1d")
    xs = np.linspace(sc.bounds[0], sc.bounds[1], 1000)
    worst = 0.0
    for x in xs:
        h = math.exp(-x)
        u = math.exp(x)
        dh = -math.exp(-x)
        db = sc.bathymetry_grad(x)
        worst = max(worst, abs(db - (u * u / (GRAVITY * h) - 1.0) * dh))
    assert worst <= 1e-12
    # discharge h u is constant (here exactly 1)
    for x in xs[::100]:
        h_ex, u_ex = sc.exact(x, 0.0)
        assert h_ex * u_ex == pytest.approx(1.0, rel=1e-14)


def test_noise_is_deterministic_and_bounded():
    vals = np.zeros(1000)
    a = apply_noise(vals, 0.1, seed=42)
    b = apply_noise(vals, 0.1, seed=42)
    c = apply_noise(vals, 0.1, seed=43)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert np.max(np.abs(a)) <= 0.05
    assert abs(a.mean()) <= 0.01


def test_noise_rejects_negative_amplitude():
    with pytest.raises(ValueError):
        apply_noise(np.zeros(3), -1.0, seed=0)


def test_noisy_scenarios_carry_default_noise():
    for name in ("noisy_linear_1d_cart", "noisy_sine_1d_sph"):
        sc = get_scenario(name)
        assert sc.noise is not None
        amp, seed = sc.noise
        assert amp == DEFAULT_NOISE_AMP
    sc = get_scenario("noisy_linear_1d_cart", noise_amp=0.3, noise_seed=7)
    assert sc.noise == (0.3, 7)


def test_scenario_bounds_cover_mesh():
    sc = get_scenario("wr_bump_1d")
    mesh = build_1d(sc.bounds[0], sc.bounds[1], 20)
    assert mesh.dx == pytest.approx(0.05)
