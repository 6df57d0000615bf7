"""The reciprocal heat equation v_t = v_xx - 1 - 2(v_x)^2/v as a spectral
ODE system: right-hand side assembly, blow-up detection, u-reconstruction,
flatness, and post-blow-up continuation (noise-seeded or complex-time path).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import asymptotics, reduced
from .integrator import (EventHit, EventSpec, IntegratorConfig, PathSegment,
                         StiffnessOrSingularity, Trajectory, integrate,
                         integrate_path, line_segment, semicircle)
from .spectral import (DIVISION_FLOOR, EVEN_REAL, GENERAL_COMPLEX,
                       DivisorTooSmall, FourierField, GridValues, analyze,
                       constant_field, divide, convolve, differentiate,
                       grid_points, grid_to_coeffs, coeffs_to_grid,
                       padded_size, synthesize)

DEFAULT_EVENT_ROOT_TOL = 1e-13


@dataclass(frozen=True)
class ModelParams:
    """One experiment: initial data v(x,0) = alpha - epsilon*cos(x)."""

    alpha: float
    epsilon: float
    n_modes: int = 128
    integrator: IntegratorConfig = field(
        default_factory=lambda: IntegratorConfig(rtol=1e-12, atol=1e-12, h_init=1e-4))

    def __post_init__(self):
        if not (0.0 <= self.epsilon < self.alpha):
            raise ValueError("require 0 <= epsilon < alpha")
        if self.n_modes < 8:
            raise ValueError("n_modes must be >= 8")


@dataclass
class BlowupReport:
    t_c: float
    state_at_tc: FourierField
    t_hat: float
    t_tilde: float
    t_c_prime: float

    @property
    def deltas(self) -> dict:
        return {
            "t_c_prime - t_c": self.t_c_prime - self.t_c,
            "t_hat - t_c": self.t_hat - self.t_c,
            "t_tilde - t_c": self.t_tilde - self.t_c,
        }


@dataclass
class ContinuationResult:
    trajectory: Trajectory
    branch_sign: int
    method: str                      # noise_seeded | complex_path
    rng_seed: Optional[int]
    t_c: float
    params: ModelParams


def initial_field(params: ModelParams,
                  profile: Optional[Callable[[np.ndarray], np.ndarray]] = None) -> FourierField:
    """v(x,0) = alpha - epsilon*cos(x), or alpha + epsilon*profile(x)."""
    n = params.n_modes
    if profile is not None:
        m = padded_size(n)
        x = grid_points(m)
        vals = params.alpha + params.epsilon * profile(x)
        return analyze(GridValues(x, vals), n)
    c = np.zeros(2 * n + 1, dtype=complex)
    c[n] = params.alpha
    c[n + 1] = -params.epsilon / 2.0
    c[n - 1] = -params.epsilon / 2.0
    return FourierField(n, c, EVEN_REAL)


def v_rhs(fld: FourierField, floor: float = DIVISION_FLOOR) -> FourierField:
    """v_xx - 1 - 2*(v_x)^2/v as a field operation (reference path)."""
    vx = differentiate(fld, 1)
    vxx = differentiate(fld, 2)
    nl = divide(convolve(vx, vx), fld, floor=floor)
    out = vxx.coeffs - 2.0 * nl.coeffs
    out[fld.n_modes] -= 1.0
    hint = EVEN_REAL if fld.parity_hint == EVEN_REAL else GENERAL_COMPLEX
    if hint == EVEN_REAL:
        out = (0.5 * (out + out[::-1])).real.astype(complex)
    return FourierField(fld.n_modes, out, hint)


def make_rhs(params: ModelParams, guard_floor: Optional[float] = DIVISION_FLOOR):
    """Fast coefficient-space RHS for the integrator.

    With guard_floor set, a state whose padded-grid values of v fall
    below the floor yields NaNs, which the stepper treats as a step
    rejection (the event machinery then resolves t_c).  With
    guard_floor=None the quotient is formed unconditionally, as needed
    for post-blow-up continuation where min |v| stays positive but the
    event is disarmed.
    """
    n = params.n_modes
    p = padded_size(n)
    k = np.arange(-n, n + 1)
    ksq = (k * k).astype(float)
    # grid starts at x = -pi, so the node shift e^{-i pi k} is (-1)^k
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    ik_sign = 1j * k * sign
    out_scale = sign / p
    nan_state = np.full(2 * n + 1, np.nan, dtype=complex)
    spec = np.zeros(p, dtype=complex)
    hi = slice(0, n + 1)        # wavenumbers 0..n
    lo = slice(p - n, p)        # wavenumbers -n..-1

    def rhs(c: np.ndarray, t) -> np.ndarray:
        spec[hi] = c[n:] * sign[n:]
        spec[lo] = c[:n] * sign[:n]
        v = np.fft.ifft(spec)
        v *= p
        if guard_floor is not None and np.min(np.abs(v)) < guard_floor:
            return nan_state
        spec[hi] = c[n:] * ik_sign[n:]
        spec[lo] = c[:n] * ik_sign[:n]
        vx = np.fft.ifft(spec)
        w = vx * vx
        w *= 2.0 * p * p
        with np.errstate(divide="ignore", invalid="ignore"):
            w /= v
        wf = np.fft.fft(w)
        out = np.empty(2 * n + 1, dtype=complex)
        out[n:] = wf[hi]
        out[:n] = wf[lo]
        out *= out_scale
        out += ksq * c
        np.negative(out, out)
        out[n] -= 1.0
        return out

    return rhs


def field_from_state(state: np.ndarray, n_modes: int) -> FourierField:
    return FourierField(n_modes, np.asarray(state, dtype=complex))


def blowup_event(root_tol: float = DEFAULT_EVENT_ROOT_TOL) -> EventSpec:
    """v(0, t) = Re(sum_k c_k) crossing zero from above."""
    return EventSpec(observable=lambda c: float(np.sum(c).real),
                     direction="decreasing", root_tol=root_tol)


def solve_to_blowup(params: ModelParams,
                    root_tol: float = DEFAULT_EVENT_ROOT_TOL,
                    with_estimates: bool = True) -> tuple[Trajectory, BlowupReport]:
    """Integrate until v(0,t) = 0 and assemble the blow-up report."""
    rhs = make_rhs(params)
    y0 = initial_field(params).coeffs
    # v(0,.) decreases by ~alpha over [0, t_c]; generous horizon
    t_hi = 2.0 * params.alpha + 1.0
    traj, hit = integrate(rhs, y0, 0.0, t_hi, params.integrator,
                          events=[blowup_event(root_tol)])
    if hit is None:
        raise StiffnessOrSingularity(traj.times[-1], traj.states[-1],
                                     "no blow-up event located")
    state = field_from_state(hit.state, params.n_modes)
    if with_estimates:
        t_hat = asymptotics.t_hat(params.alpha, params.epsilon)
        t_tilde = asymptotics.t_tilde(params.alpha, params.epsilon)
        if params.epsilon > 0.0:
            _, t_c_prime = reduced.solve_two_mode(
                "fourier", params.alpha, params.epsilon, cfg=params.integrator)
        else:
            t_c_prime = params.alpha
    else:
        t_hat = t_tilde = t_c_prime = float("nan")
    report = BlowupReport(t_c=hit.t, state_at_tc=state, t_hat=t_hat,
                          t_tilde=t_tilde, t_c_prime=t_c_prime)
    return traj, report


def u_from_v(fld: FourierField,
             floor: float = DIVISION_FLOOR) -> tuple[GridValues, FourierField]:
    """u = 1/v: pointwise reciprocal on the padded grid plus its coefficients."""
    p = padded_size(fld.n_modes)
    vals = synthesize(fld, p)
    mags = np.abs(vals.values)
    j = int(np.argmin(mags))
    if mags[j] < floor:
        raise DivisorTooSmall(float(mags[j]), float(vals.points[j]))
    u_vals = GridValues(vals.points, 1.0 / vals.values)
    return u_vals, analyze(u_vals, fld.n_modes)


def flatness(fld: FourierField, check_tol: float = 1e-10) -> float:
    """Peak height f = u(0) - u(pi), cross-checked against 4*sum of odd a_k."""
    c = fld.coeffs
    k = fld.wavenumbers
    v0 = complex(np.sum(c))
    vpi = complex(np.sum(c * (-1.0) ** k))
    f_point = (1.0 / v0 - 1.0 / vpi).real
    _, u_field = u_from_v(fld)
    a = u_field.coeffs
    n = fld.n_modes
    f_coeff = 4.0 * float(np.sum(a[n + 1::2]).real)
    if abs(f_point - f_coeff) > check_tol * max(1.0, abs(f_point)):
        raise ValueError(
            f"flatness routes disagree: pointwise {f_point:.3e} vs "
            f"coefficient sum {f_coeff:.3e}")
    return f_point


def seed_imaginary_noise(fld: FourierField, amplitude: float = 1e-16,
                         rng_seed: int = 0, negate: bool = False) -> FourierField:
    """Add a real-x-valued imaginary perturbation i*eta(x), eta even.

    Coefficients of the perturbation are i*u_k with u_k ~ U(-amp, amp)
    iid for k = 0..N and u_{-k} = u_k, which preserves the Hermitian
    pairing of a purely imaginary-valued function.  Deterministic for a
    fixed rng_seed.
    """
    if amplitude == 0.0:
        return fld
    if amplitude < 0.0:
        raise ValueError("amplitude must be >= 0")
    n = fld.n_modes
    rng = np.random.default_rng(rng_seed)
    u = rng.uniform(-amplitude, amplitude, size=n + 1)
    if negate:
        u = -u
    pert = np.concatenate([u[:0:-1], u])  # u_N..u_1, u_0, u_1..u_N
    return FourierField(n, fld.coeffs + 1j * pert, GENERAL_COMPLEX)


def _branch_sign(traj: Trajectory, t_probe: float) -> int:
    state = traj.state_at(t_probe)
    im = float(np.sum(state).imag)
    return 1 if im >= 0.0 else -1


def continue_past_blowup(params: ModelParams, t_end: float,
                         rng_seed: int = 0, amplitude: float = 1e-16,
                         negate: bool = False,
                         t_c: Optional[float] = None) -> ContinuationResult:
    """Noise-seeded integration from t = 0 through t_c to t_end.

    The event is disarmed and the division guard is off; the roundoff
    imaginary seed lets the solution pass through v = 0 and turn
    complex.  With amplitude = 0 the integrator raises
    StiffnessOrSingularity at t_c instead.
    """
    if t_c is None:
        _, report = solve_to_blowup(params, with_estimates=False)
        t_c = report.t_c
    if t_end <= t_c:
        raise ValueError("t_end must exceed t_c")
    y0 = seed_imaginary_noise(initial_field(params), amplitude,
                              rng_seed, negate).coeffs
    rhs = make_rhs(params, guard_floor=None)
    traj, _ = integrate(rhs, y0, 0.0, t_end, params.integrator)
    t_probe = min(1.25 * t_c, 0.5 * (t_c + t_end))
    return ContinuationResult(trajectory=traj,
                              branch_sign=_branch_sign(traj, t_probe),
                              method="noise_seeded", rng_seed=rng_seed,
                              t_c=t_c, params=params)


def continue_complex_path(params: ModelParams, t_end: float,
                          radius: Optional[float] = None, upper: bool = True,
                          t_c: Optional[float] = None) -> ContinuationResult:
    """Integrate around t_c on a semicircle in the complex t-plane.

    Real axis to t_c - radius, half circle of the given radius about
    t_c (upper half-plane by default), then real axis to t_end.
    """
    if t_c is None:
        _, report = solve_to_blowup(params, with_estimates=False)
        t_c = report.t_c
    if radius is None:
        radius = 0.1 * t_c
    if t_end <= t_c + radius:
        raise ValueError("t_end must exceed t_c + radius")
    y0 = initial_field(params).coeffs
    rhs = make_rhs(params, guard_floor=None)
    path = [line_segment(0.0, t_c - radius),
            semicircle(t_c, radius, upper=upper),
            line_segment(t_c + radius, t_end)]
    traj = integrate_path(rhs, y0, path, params.integrator)
    # branch sign from the junction after the semicircle
    post = [i for i, tt in enumerate(traj.path_times)
            if abs(tt.imag) < 1e-14 and tt.real > t_c]
    im = float(np.sum(traj.states[post[0]]).imag) if post else 0.0
    return ContinuationResult(trajectory=traj,
                              branch_sign=1 if im >= 0.0 else -1,
                              method="complex_path", rng_seed=None,
                              t_c=t_c, params=params)
