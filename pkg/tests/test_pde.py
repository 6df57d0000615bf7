"""Reciprocal-heat-equation solver: RHS assembly, blow-up detection,
reconstruction, continuation plumbing."""

import math

import numpy as np
import pytest

from blowup_lab.integrator import IntegratorConfig
from blowup_lab.pde import (ModelParams, blowup_event, continue_past_blowup,
                            flatness, initial_field, make_rhs,
                            seed_imaginary_noise, solve_to_blowup, u_from_v,
                            v_rhs)
from blowup_lab.spectral import (EVEN_REAL, FourierField, analyze, GridValues,
                                 grid_points, padded_size, synthesize)

FAST = IntegratorConfig(rtol=1e-10, atol=1e-10, h_init=1e-4)


def small_params(n_modes=32, alpha=0.25, epsilon=0.1):
    return ModelParams(alpha=alpha, epsilon=epsilon, n_modes=n_modes,
                       integrator=FAST)


def test_model_params_validation():
    with pytest.raises(ValueError):
        ModelParams(alpha=0.1, epsilon=0.2)       # epsilon >= alpha
    with pytest.raises(ValueError):
        ModelParams(alpha=1.0, epsilon=-0.1)
    with pytest.raises(ValueError):
        ModelParams(alpha=1.0, epsilon=0.1, n_modes=4)


def test_initial_field_coefficients():
    f = initial_field(small_params())
    assert f.coeff(0) == pytest.approx(0.25)
    assert f.coeff(1) == pytest.approx(-0.05)
    assert f.coeff(-1) == pytest.approx(-0.05)
    assert abs(f.coeff(2)) == 0.0
    assert f.parity_hint == EVEN_REAL


def test_initial_field_with_custom_profile():
    p = small_params()
    f = initial_field(p, profile=lambda x: -np.cos(2 * x))
    assert f.coeff(2) == pytest.approx(-0.05)
    assert abs(f.coeff(1)) < 1e-14


def test_v_rhs_matches_pointwise_oracle():
    # analytic field with fast-decaying spectrum: v = 2 + 0.3 cos x
    # + 0.05 cos 2x; oracle evaluates v_xx - 1 - 2 v_x^2 / v pointwise on
    # a fine grid and transforms back
    n = 32
    c = np.zeros(2 * n + 1, dtype=complex)
    c[n] = 2.0
    c[n + 1] = c[n - 1] = 0.15
    c[n + 2] = c[n - 2] = 0.025
    fld = FourierField(n, c, EVEN_REAL)
    m = 4096
    x = grid_points(m)
    v = 2.0 + 0.3 * np.cos(x) + 0.05 * np.cos(2 * x)
    v_x = -0.3 * np.sin(x) - 0.1 * np.sin(2 * x)
    v_xx = -0.3 * np.cos(x) - 0.2 * np.cos(2 * x)
    oracle_vals = v_xx - 1.0 - 2.0 * v_x ** 2 / v
    oracle = analyze(GridValues(x, oracle_vals), n).coeffs
    got = v_rhs(fld).coeffs
    assert np.max(np.abs(got - oracle)) < 1e-11


def test_fast_rhs_matches_field_rhs_on_smooth_state():
    p = small_params()
    fld = initial_field(p)
    fast = make_rhs(p)(fld.coeffs, 0.0)
    ref = v_rhs(fld).coeffs
    assert np.max(np.abs(fast - ref)) < 1e-13


def test_fast_rhs_guard_returns_nan_near_zero():
    p = small_params(alpha=0.25, epsilon=0.2499999)
    c = initial_field(p).coeffs.copy()
    c[p.n_modes] = p.epsilon      # v(0) ~ 0 on the grid
    out = make_rhs(p)(c, 0.0)
    assert np.all(np.isnan(out))
    make_rhs(p, guard_floor=None)(c, 0.0)   # unguarded path must not raise


def test_blowup_event_observable_is_v_at_origin():
    f = initial_field(small_params())
    ev = blowup_event()
    assert ev.observable(f.coeffs) == pytest.approx(0.25 - 0.1)


def test_solve_to_blowup_lands_on_v0_zero():
    p = small_params()
    traj, rep = solve_to_blowup(p, with_estimates=False)
    v0 = float(np.sum(traj.states[-1]).real)
    assert abs(v0) < 1e-10
    assert 0.1 < rep.t_c < 0.25
    assert math.isnan(rep.t_hat)


def test_blowup_time_converges_in_n_modes():
    # coefficients at t_c decay only algebraically (~1/k^3), so t_c
    # converges like a power of 1/N rather than spectrally; successive
    # refinements must contract
    t_cs = []
    for n in (32, 64, 96):
        _, rep = solve_to_blowup(small_params(n_modes=n),
                                 with_estimates=False)
        t_cs.append(rep.t_c)
    d1 = abs(t_cs[1] - t_cs[0])
    d2 = abs(t_cs[2] - t_cs[1])
    assert d2 < d1 / 2
    assert d2 < 1e-6


def test_blowup_report_estimates_and_deltas():
    p = small_params(n_modes=32, alpha=0.25, epsilon=0.1)
    _, rep = solve_to_blowup(p)
    # leading-order estimate alpha - eps e^{-alpha}
    assert rep.t_hat == pytest.approx(0.25 - 0.1 * math.exp(-0.25))
    # second-order refinement: t_tilde = t_hat - (2 C1 + C2 + C3) eps^2
    from blowup_lab.asymptotics import constants
    c = constants(0.25)
    shift = (2.0 * c.C1 + c.C2 + c.C3) * 0.1 ** 2
    assert rep.t_tilde == pytest.approx(rep.t_hat - shift, rel=1e-12)
    d = rep.deltas
    assert d["t_hat - t_c"] == pytest.approx(rep.t_hat - rep.t_c)


def test_u_from_v_is_pointwise_reciprocal():
    f = initial_field(small_params())
    u_vals, u_field = u_from_v(f)
    v_vals = synthesize(f, padded_size(f.n_modes))
    assert np.max(np.abs(u_vals.values * v_vals.values - 1.0)) < 1e-13
    # reconstruction matches the closed-form reciprocal coefficients
    from blowup_lab.asymptotics import u_initial_coeff
    for k in (0, 1, 5):
        assert u_field.coeff(k).real == pytest.approx(
            u_initial_coeff(k, 0.25, 0.1), rel=1e-10)


def test_flatness_dual_route_and_positive():
    f = initial_field(small_params())
    val = flatness(f)
    # exact: 1/(alpha - eps) - 1/(alpha + eps)
    assert val == pytest.approx(1.0 / 0.15 - 1.0 / 0.35, rel=1e-12)


def test_seed_imaginary_noise_properties():
    f = initial_field(small_params())
    g1 = seed_imaginary_noise(f, amplitude=1e-10, rng_seed=7)
    g2 = seed_imaginary_noise(f, amplitude=1e-10, rng_seed=7)
    g3 = seed_imaginary_noise(f, amplitude=1e-10, rng_seed=7, negate=True)
    assert np.array_equal(g1.coeffs, g2.coeffs)          # deterministic
    pert = g1.coeffs - f.coeffs
    assert np.max(np.abs(pert.real)) == 0.0              # purely imaginary
    assert np.array_equal(pert, pert[::-1])              # even pairing
    assert np.array_equal(g3.coeffs - f.coeffs, -pert)   # negation
    assert seed_imaginary_noise(f, amplitude=0.0) is f
    with pytest.raises(ValueError):
        seed_imaginary_noise(f, amplitude=-1.0)


def test_continue_past_blowup_requires_t_end_beyond_tc():
    p = small_params()
    with pytest.raises(ValueError):
        continue_past_blowup(p, t_end=0.05, t_c=0.16)


def test_continuation_turns_complex_and_is_seed_deterministic():
    p = small_params()
    _, rep = solve_to_blowup(p, with_estimates=False)
    r1 = continue_past_blowup(p, 1.5 * rep.t_c, rng_seed=3, t_c=rep.t_c)
    r2 = continue_past_blowup(p, 1.5 * rep.t_c, rng_seed=3, t_c=rep.t_c)
    s1 = r1.trajectory.state_at(1.4 * rep.t_c)
    s2 = r2.trajectory.state_at(1.4 * rep.t_c)
    assert np.max(np.abs(s1 - s2)) == 0.0
    assert np.max(np.abs(np.imag(s1))) > 1e-10
    assert r1.branch_sign in (-1, 1)
