"""Dataset assembly behind the CLI subcommands.

Each builder runs the required solves and returns plain data
structures; the CLI layer handles argument parsing and persistence.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import asymptotics, reduced, tracker
from .integrator import IntegratorConfig, Trajectory
from .pde import (ContinuationResult, ModelParams, continue_complex_path,
                  continue_past_blowup, field_from_state, flatness,
                  solve_to_blowup, u_from_v)
from .spectral import DivisorTooSmall, FourierField, padded_size, synthesize

TABLE1_ALPHAS = (0.25, 1.0, 4.0)
TABLE1_EPSILONS = (0.1, 0.01, 0.001)


@dataclass
class Table1Row:
    alpha: float
    epsilon: float
    t_c: float
    d_two_mode: float
    d_t_hat: float
    d_t_tilde: float
    error: Optional[str] = None


def _table1_cell(args) -> Table1Row:
    alpha, epsilon, n_modes, rtol, atol = args
    try:
        params = ModelParams(alpha=alpha, epsilon=epsilon, n_modes=n_modes,
                             integrator=IntegratorConfig(rtol=rtol, atol=atol,
                                                         h_init=1e-4))
        _, rep = solve_to_blowup(params)
        return Table1Row(alpha, epsilon, rep.t_c,
                         rep.t_c_prime - rep.t_c,
                         rep.t_hat - rep.t_c,
                         rep.t_tilde - rep.t_c)
    except Exception as exc:  # per-cell failures reported per-row
        return Table1Row(alpha, epsilon, math.nan, math.nan, math.nan,
                         math.nan, error=str(exc))


def run_table1(alphas: Sequence[float] = TABLE1_ALPHAS,
               epsilons: Sequence[float] = TABLE1_EPSILONS,
               n_modes: int = 128, rtol: float = 1e-12, atol: float = 1e-12,
               jobs: int = 1) -> list[Table1Row]:
    cells = [(a, e, n_modes, rtol, atol) for a in alphas for e in epsilons]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_table1_cell, cells))
    return [_table1_cell(c) for c in cells]


@dataclass
class ErrorCurves:
    times: np.ndarray
    step_index: np.ndarray
    err_perturbation: np.ndarray    # first-timescale approximation
    err_timescale2: np.ndarray      # second-timescale approximation
    t_c: float


def run_error_curves(params: ModelParams) -> ErrorCurves:
    """Per accepted step, the max relative error over the collocation
    grid of the two analytic approximations against the solver."""
    traj, rep = solve_to_blowup(params)
    return error_curves_from_solution(traj, rep.t_c, params)


def error_curves_from_solution(traj: Trajectory, t_c: float,
                               params: ModelParams) -> ErrorCurves:
    """Error curves from an already-computed blow-up solve."""
    consts = asymptotics.constants(params.alpha)
    m = padded_size(params.n_modes)
    x = -np.pi + 2.0 * np.pi * np.arange(m) / m
    times, idx, e13, e19 = [], [], [], []
    for k_step, (t, state) in enumerate(zip(traj.times, traj.states)):
        fld = field_from_state(state, params.n_modes)
        v_ref = synthesize(fld, m).values.real
        denom = np.abs(v_ref)
        if np.min(denom) <= 0.0:
            continue
        v13 = asymptotics.perturbation_v(x, t, params.alpha, params.epsilon)
        err13 = float(np.max(np.abs(v13 - v_ref) / denom))
        log_arg_min = (t_c - t) / params.epsilon
        if log_arg_min > 0.0:
            v19 = asymptotics.v_timescale2(x, t, params.alpha, params.epsilon,
                                           t_c, consts)
            err19 = float(np.max(np.abs(v19 - v_ref) / denom))
        else:
            err19 = math.nan
        times.append(t)
        idx.append(k_step)
        e13.append(err13)
        e19.append(err19)
    return ErrorCurves(np.array(times), np.array(idx), np.array(e13),
                       np.array(e19), t_c)


@dataclass
class BlowupProfileData:
    x: np.ndarray
    v_solver: np.ndarray
    eq_global: np.ndarray
    eq_local: np.ndarray            # NaN outside |x| < 1
    k: np.ndarray
    coeff_solver: np.ndarray
    coeff_global_law: np.ndarray
    coeff_local_law: np.ndarray
    t_c: float
    x_small: np.ndarray
    v_small: np.ndarray
    eq_global_small: np.ndarray
    eq_local_small: np.ndarray


def _eval_cos_series(fld: FourierField, x: np.ndarray) -> np.ndarray:
    """Direct evaluation of sum_k c_k e^{ikx} at arbitrary real x."""
    k = fld.wavenumbers
    return (np.exp(1j * np.outer(x, k)) @ fld.coeffs).real


def run_blowup_profile(params: ModelParams, n_plot: int = 1024) -> BlowupProfileData:
    _, rep = solve_to_blowup(params)
    return profile_from_state(rep.state_at_tc, rep.t_c, params, n_plot)


def profile_from_state(fld: FourierField, t_c: float, params: ModelParams,
                       n_plot: int = 1024) -> BlowupProfileData:
    """Profile data from an already-computed state at t_c."""
    consts = asymptotics.constants(params.alpha)
    x = np.linspace(-np.pi, np.pi, n_plot + 1)
    x = x[x != 0.0]
    v_solver = _eval_cos_series(fld, x)
    eq20 = asymptotics.blowup_profile_global(x, params.alpha, params.epsilon, consts)
    eq22 = np.full_like(x, np.nan)
    inner = np.abs(x) < 1.0
    eq22[inner] = asymptotics.blowup_profile_local(x[inner], params.alpha,
                                                   params.epsilon)
    n = params.n_modes
    k = np.arange(3, n + 1)
    coeff = np.abs(fld.coeffs[n + 3:])
    law_g = asymptotics.coeff_decay_global(k, params.alpha, params.epsilon)
    law_l = asymptotics.coeff_decay_local(k)
    # small-x panel on a logarithmic lattice (roundoff caveat: v is
    # evaluated from ~1e-16-level coefficient sums near x = 0)
    x_small = np.logspace(-7, -1, 61)
    v_small = _eval_cos_series(fld, x_small)
    eq20_s = asymptotics.blowup_profile_global(x_small, params.alpha,
                                               params.epsilon, consts)
    eq22_s = asymptotics.blowup_profile_local(x_small, params.alpha,
                                              params.epsilon)
    return BlowupProfileData(x, v_solver, eq20, eq22, k, coeff, law_g, law_l,
                             t_c, x_small, v_small, eq20_s, eq22_s)


@dataclass
class SingularityData:
    track: tracker.SingularityTrack
    t_c: float
    overlays: dict


def run_singularity(params: ModelParams, stride: int = 1) -> SingularityData:
    traj, rep = solve_to_blowup(params)
    return singularity_from_solution(traj, rep.t_c, params, stride)


def singularity_from_solution(traj: Trajectory, t_c: float,
                              params: ModelParams,
                              stride: int = 1) -> SingularityData:
    """Singularity track and overlays from an already-computed solve."""
    track = tracker.build_track(traj, params.n_modes, method="both",
                                stride=stride)
    t = track.times
    a, e = params.alpha, params.epsilon
    overlays = {}

    def safe(regime, values):
        out = np.full(t.shape, np.nan)
        for i, v in enumerate(values):
            try:
                out[i] = asymptotics.singularity_y(regime, v, a, e, t_c=t_c)
            except ValueError:
                pass
        return out

    overlays["naive"] = safe("naive", t)
    overlays["early"] = safe("early", t)
    overlays["late_first_scale"] = safe("late_first_scale", t)
    big_t = (t - t_c) / e
    overlays["second_scale"] = safe("second_scale", big_t)
    overlays["third_scale"] = safe("third_scale", big_t)
    overlays["impingement"] = safe("impingement", t)
    return SingularityData(track, t_c, overlays)


FIG6_FACTORS = (0.0, 0.5, 1.0, 1.25, 1.5, 2.0, 3.0)


@dataclass
class ContinuationData:
    result: ContinuationResult
    snapshot_times: list
    snapshots: list                  # FourierField per time
    u_edge_moduli: dict              # time -> |u(pi, t)|
    asymptote_deviation: Optional[float]   # max_x |u + 1/t| * t at t_end


def run_continuation(params: ModelParams, t_end: float, rng_seed: int = 0,
                     extra_times: Sequence[float] = (),
                     method: str = "noise_seeded",
                     negate: bool = False) -> ContinuationData:
    _, rep = solve_to_blowup(params, with_estimates=False)
    t_c = rep.t_c
    if method == "noise_seeded":
        result = continue_past_blowup(params, t_end, rng_seed=rng_seed,
                                      negate=negate, t_c=t_c)
    elif method == "complex_path":
        result = continue_complex_path(params, t_end, t_c=t_c)
    else:
        raise ValueError(f"unknown method {method!r}")
    times = sorted({round(f * t_c, 12) for f in FIG6_FACTORS
                    if f * t_c <= t_end} | set(extra_times))
    snaps, edges = [], {}
    for t in times:
        state = _continuation_state_at(result, t, t_end)
        fld = field_from_state(state, params.n_modes)
        snaps.append(fld)
        edges[t] = abs(_u_at_pi(fld))
    dev = None
    if t_end > t_c:
        fld_end = field_from_state(_continuation_state_at(result, t_end, t_end),
                                   params.n_modes)
        u_vals = _u_grid(fld_end)
        dev = float(np.max(np.abs(u_vals + 1.0 / t_end)) * t_end)
    return ContinuationData(result, list(times), snaps, edges, dev)


def _continuation_state_at(result: ContinuationResult, t: float, t_end: float):
    traj = result.trajectory
    if result.method == "noise_seeded":
        return traj.state_at(t)
    # complex-path trajectories are parameterized; use nearest stored
    # real-axis sample
    tt = np.array([pt.real if abs(pt.imag) < 1e-13 else np.nan
                   for pt in traj.path_times])
    i = int(np.nanargmin(np.abs(tt - t)))
    return traj.states[i]


def _u_grid(fld: FourierField) -> np.ndarray:
    vals = synthesize(fld, padded_size(fld.n_modes)).values
    return 1.0 / vals


def _u_at_pi(fld: FourierField) -> complex:
    v_pi = complex(np.sum(fld.coeffs * (-1.0) ** fld.wavenumbers))
    return 1.0 / v_pi


@dataclass
class FlatnessData:
    times: np.ndarray
    f_solver: np.ndarray
    f_approx: np.ndarray
    rel_err: np.ndarray
    t_c: float


def run_flatness(params: ModelParams, stride: int = 1) -> FlatnessData:
    traj, rep = solve_to_blowup(params)
    return flatness_from_solution(traj, rep.t_c, params, stride)


def flatness_from_solution(traj: Trajectory, t_c: float, params: ModelParams,
                           stride: int = 1) -> FlatnessData:
    """Flatness curve from an already-computed solve."""
    times, fs, fa, re = [], [], [], []
    for i in range(0, len(traj.times), stride):
        t = traj.times[i]
        if t >= t_c or t >= params.alpha:
            continue
        fld = field_from_state(traj.states[i], params.n_modes)
        try:
            f = flatness(fld)
        except (DivisorTooSmall, ValueError):
            continue
        approx = asymptotics.flatness_approx(t, params.alpha, params.epsilon)
        times.append(t)
        fs.append(f)
        fa.append(approx)
        re.append(abs(approx - f) / abs(f) if f != 0.0 else math.nan)
    return FlatnessData(np.array(times), np.array(fs), np.array(fa),
                        np.array(re), t_c)


@dataclass
class CoeffSnapshotData:
    times: list
    k: np.ndarray
    moduli: list                     # |c_k| arrays, one per time
    local_law: np.ndarray
    t_c: float


def run_fourier_snapshots(params: ModelParams,
                          times: Optional[Sequence[float]] = None,
                          rng_seed: int = 0) -> CoeffSnapshotData:
    """Coefficient decay just before, at, and just after t_c (the
    post-t_c snapshot comes from the noise-seeded continuation)."""
    _, rep = solve_to_blowup(params, with_estimates=False)
    t_c = rep.t_c
    if times is None:
        times = [0.9 * t_c, t_c, 1.1 * t_c]
    t_end = max(times) * 1.01 if max(times) > t_c else 1.5 * t_c
    result = continue_past_blowup(params, max(t_end, 1.2 * t_c),
                                  rng_seed=rng_seed, t_c=t_c)
    n = params.n_modes
    k = np.arange(1, n + 1)
    moduli = []
    for t in times:
        state = result.trajectory.state_at(t)
        moduli.append(np.abs(np.asarray(state)[n + 1:]))
    local = np.full(k.shape, np.nan)
    local[k >= 3] = asymptotics.coeff_decay_local(k[k >= 3])
    return CoeffSnapshotData(list(times), k, moduli, local, t_c)
