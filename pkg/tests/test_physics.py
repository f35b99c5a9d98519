"""Flux, nonconservative products, Rusanov flux and the Christoffel oracle."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covswe import _kernels, physics
from covswe.errors import NonPositiveDepth
from covswe.geometry import metric_arrays, metric_derivatives

from conftest import METRIC_SPECS, random_point, random_state


def _random_gradients(rng):
    dh = rng.uniform(-1.0, 1.0, 2)
    dm = rng.uniform(-1.0, 1.0, (2, 2))
    db = rng.uniform(-1.0, 1.0, 2)
    return dh, dm, db


def _full_gradient(spec, x, dh, dm, db):
    """Assemble the 7x2 chart gradient with exact metric derivatives."""
    grad = np.zeros((7, 2))
    grad[0] = dh
    grad[1] = dm[0]
    grad[2] = dm[1]
    grad[3] = db
    dgam = metric_derivatives(spec, x)  # (2, 3): deriv index, component
    grad[4:7, 0] = dgam[0]
    grad[4:7, 1] = dgam[1]
    return grad


@pytest.mark.parametrize("name", sorted(METRIC_SPECS))
def test_oracle_equivalence(name, rng):
    """A(q, e1) d1q + A(q, e2) d2q equals the Christoffel-form residual."""
    spec = METRIC_SPECS[name]
    worst = 0.0
    for _ in range(200):
        x = random_point(rng)
        q = random_state(rng, spec, x)
        dh, dm, db = _random_gradients(rng)
        grad = _full_gradient(spec, x, dh, dm, db)
        res_b = (physics.jacobian(q, (1.0, 0.0)) @ grad[:, 0]
                 + physics.jacobian(q, (0.0, 1.0)) @ grad[:, 1])
        res_chris = physics.christoffel_residual(
            spec, x, q[0], q[1:3], q[3], dh, dm, db)
        scale = max(1.0, np.abs(res_chris).max())
        worst = max(worst, np.abs(res_b[:3] - res_chris[:3]).max() / scale)
    assert worst <= 1e-11


def test_flux_is_purely_kinetic(rng):
    q = random_state(rng, METRIC_SPECS["spherical"])
    f1, f2 = physics.flux(q)
    assert f1[0] == q[1] and f2[0] == q[2]
    assert np.allclose(f1[1:3], q[1:3] * q[1] / q[0])
    assert np.allclose(f2[1:3], q[1:3] * q[2] / q[0])
    assert np.all(f1[3:] == 0.0) and np.all(f2[3:] == 0.0)


def test_static_rows_have_no_dynamics(rng):
    q = random_state(rng, METRIC_SPECS["elliptical"])
    B1, B2 = physics.b_matrices(q)
    assert np.all(B1[3:] == 0.0) and np.all(B2[3:] == 0.0)


def test_rusanov_consistency(rng):
    """F(q, q, n) = F(q) . n for both modes, 1000 random states."""
    for _ in range(1000):
        name = ("cartesian", "spherical", "elliptical")[int(rng.integers(3))]
        q = random_state(rng, METRIC_SPECS[name])
        ang = rng.uniform(0.0, 2.0 * np.pi)
        n = (np.cos(ang), np.sin(ang))
        f1, f2 = physics.flux(q)
        exact = n[0] * f1 + n[1] * f2
        for mode in ("standard", "well_balanced"):
            num = physics.rusanov(q, q, n, mode=mode)
            assert np.max(np.abs(num - exact)) <= 1e-13


def test_rusanov_wb_rest_pair_mass_flux(rng):
    """Equal eta, zero velocity, jumping b: no mass exchange in wb mode."""
    spec = METRIC_SPECS["spherical"]
    for _ in range(100):
        x = random_point(rng)
        qm = random_state(rng, spec, x)
        qm[1] = qm[2] = 0.0
        qp = qm.copy()
        delta = rng.uniform(-0.3, 0.3)
        qp[3] += delta   # b jumps ...
        qp[0] -= delta   # ... eta = h + b stays equal
        num = physics.rusanov(qm, qp, (1.0, 0.0), mode="well_balanced")
        assert abs(num[0]) <= 1e-14
        standard = physics.rusanov(qm, qp, (1.0, 0.0), mode="standard")
        assert abs(standard[0]) > 0.0


def test_eigenvalues_match_assembled_jacobian(rng):
    for name, spec in METRIC_SPECS.items():
        for _ in range(50):
            q = random_state(rng, spec)
            ang = rng.uniform(0.0, 2.0 * np.pi)
            n = (np.cos(ang), np.sin(ang))
            lam = physics.eigenvalues(q, n)
            full = np.sort_complex(np.linalg.eigvals(physics.jacobian(q, n)))
            scale = max(1.0, np.abs(lam).max())
            for lv in lam:
                assert np.min(np.abs(full - lv)) <= 1e-9 * scale
            # four static eigenvalues at zero
            assert np.sum(np.abs(full) <= 1e-9 * scale) >= 4


def test_ncp_linear_in_gradient(rng):
    spec = METRIC_SPECS["elliptical"]
    q = random_state(rng, spec)
    g1 = rng.uniform(-1.0, 1.0, (7, 2))
    g2 = rng.uniform(-1.0, 1.0, (7, 2))
    lhs = physics.ncp_apply(q, 2.0 * g1 - 3.0 * g2)
    rhs = 2.0 * physics.ncp_apply(q, g1) - 3.0 * physics.ncp_apply(q, g2)
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.abs(rhs).max())


def test_path_jump_zero_on_equal_states(rng):
    q = random_state(rng, METRIC_SPECS["spherical"])
    d = physics.path_jump(q, q, (0.6, 0.8))
    assert np.max(np.abs(d)) == 0.0


def test_path_jump_sums_to_path_integral(rng):
    """Splitting the segment at its midpoint reproduces the full jump."""
    spec = METRIC_SPECS["elliptical"]
    x = random_point(rng)
    qm = random_state(rng, spec, x)
    qp = random_state(rng, spec, x)
    qmid = 0.5 * (qm + qp)
    n = (0.6, 0.8)
    whole = physics.path_jump(qm, qp, n)
    split = physics.path_jump(qm, qmid, n) + physics.path_jump(qmid, qp, n)
    assert np.max(np.abs(whole - split)) <= 1e-11 * max(1.0, np.abs(whole).max())


def test_nonpositive_depth_raises():
    q = np.array([0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0])
    with pytest.raises(NonPositiveDepth):
        physics.flux(q)
    with pytest.raises(NonPositiveDepth):
        physics.eigenvalues(q, (1.0, 0.0))


# ---------------------------------------------------------------------------
# kernel <-> reference parity


def test_kernels_match_reference(rng):
    for _ in range(200):
        name = ("cartesian", "spherical", "elliptical")[int(rng.integers(3))]
        spec = METRIC_SPECS[name]
        x = random_point(rng)
        qm = random_state(rng, spec, x)
        qp = random_state(rng, spec, x)
        ang = rng.uniform(0.0, 2.0 * np.pi)
        n1, n2 = np.cos(ang), np.sin(ang)
        out = np.zeros(7)

        _kernels.flux_n(qm, n1, n2, out)
        f1, f2 = physics.flux(qm)
        assert np.allclose(out, n1 * f1 + n2 * f2, atol=1e-14)

        lam = _kernels.lam_dir(qm, n1, n2)
        assert lam == pytest.approx(physics.max_wave_speed(qm, (n1, n2)),
                                    rel=1e-13)

        etam = qm[0] + qm[3]
        etap = qp[0] + qp[3]
        for wb, mode in ((0, "standard"), (1, "well_balanced")):
            _kernels.rusanov_edge(qm, qp, n1, n2, etam, etap, wb, out)
            ref = physics.rusanov(qm, qp, (n1, n2), mode=mode)
            assert np.max(np.abs(out - ref)) <= 1e-12 * max(1.0, np.abs(ref).max())

        _kernels.path_jump_edge(qm, qp, n1, n2, etam, etap, out)
        ref = physics.path_jump(qm, qp, (n1, n2))
        assert np.max(np.abs(out - ref)) <= 1e-12 * max(1.0, np.abs(ref).max())


def test_kernel_ncp_matches_reference(rng):
    spec = METRIC_SPECS["spherical"]
    x = random_point(rng)
    q = random_state(rng, spec, x)
    grad = rng.uniform(-1.0, 1.0, (7, 2))
    out = np.zeros(7)
    _kernels.ncp_action(q, grad[4:7, 0].copy(), grad[4:7, 1].copy(),
                        grad[0, 0] + grad[3, 0], grad[0, 1] + grad[3, 1],
                        1.0, out)
    ref = physics.ncp_apply(q, grad)
    assert np.max(np.abs(out - ref)) <= 1e-12 * max(1.0, np.abs(ref).max())


# ---------------------------------------------------------------------------
# property-based checks


@given(h=st.floats(0.1, 10.0), u=st.floats(-5.0, 5.0),
       b=st.floats(-2.0, 2.0))
@settings(max_examples=100, deadline=None)
def test_eigenvalue_ordering(h, u, b):
    q = np.array([h, h * u, 0.0, b, 1.0, 0.0, 1.0])
    lam = physics.eigenvalues(q, (1.0, 0.0))
    assert lam[2] <= lam[0] <= lam[1]
    assert lam[1] - lam[2] == pytest.approx(
        2.0 * np.sqrt(physics.GRAVITY * h), rel=1e-12)


@given(h=st.floats(0.1, 10.0), m=st.floats(-5.0, 5.0))
@settings(max_examples=100, deadline=None)
def test_rusanov_symmetry_flat(h, m):
    """Swapping the states and the normal negates the numerical flux."""
    qa = np.array([h, m, 0.0, 0.0, 1.0, 0.0, 1.0])
    qb = np.array([h + 0.1, -m, 0.0, 0.0, 1.0, 0.0, 1.0])
    fab = physics.rusanov(qa, qb, (1.0, 0.0))
    fba = physics.rusanov(qb, qa, (-1.0, 0.0))
    assert np.max(np.abs(fab + fba)) <= 1e-12 * max(1.0, np.abs(fab).max())
