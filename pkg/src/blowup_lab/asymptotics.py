"""Closed-form approximations: perturbation profile, blow-up time
estimates, quadrature constants, blow-up profiles and coefficient-decay
laws, singularity-trajectory formulas, and flatness laws.

All functions are pure and stateless.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad


@dataclass(frozen=True)
class AsymptoticConstants:
    C1: float
    C2: float
    C3: float
    beta1: float
    gamma1: float
    beta2: float
    gamma2: float
    quadrature_error_bound: float


def constants(alpha: float, quad_tol: float = 1e-12) -> AsymptoticConstants:
    """Quadrature constants of the second-order blow-up time estimate.

    C1 = e^{-2a} log a is closed form; C2 and C3 are integrals with a
    removable endpoint singularity, handled by the substitution
    s = alpha - t so the integrands become (e^{±2s} - 1)/s with finite
    limits 2 and -2 at s = 0.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    c1 = math.exp(-2.0 * alpha) * math.log(alpha)

    def f2(s):
        return 2.0 if s == 0.0 else np.expm1(2.0 * s) / s

    def f3(s):
        return -2.0 if s == 0.0 else np.expm1(-2.0 * s) / s

    i2, e2 = quad(f2, 0.0, alpha, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    i3, e3 = quad(f3, 0.0, alpha, epsabs=quad_tol, epsrel=quad_tol, limit=200)
    c2 = math.exp(-2.0 * alpha) * i2
    c3 = math.exp(-2.0 * alpha) * i3
    err = math.exp(-2.0 * alpha) * (e2 + e3)
    if err > 10.0 * quad_tol:
        raise RuntimeError(f"quadrature did not converge: error {err:.3e}")
    return AsymptoticConstants(
        C1=c1, C2=c2, C3=c3,
        beta1=-math.exp(-alpha),
        gamma1=0.5 * math.exp(-alpha),
        beta2=-(2.0 * c1 + c2 + c3),
        gamma2=2.0 * (c1 + c3),
        quadrature_error_bound=err,
    )


def perturbation_v(x, t, alpha: float, epsilon: float):
    """First-timescale approximation v ~ alpha - t - eps*e^{-t}*cos x."""
    return alpha - t - epsilon * np.exp(-t) * np.cos(x)


def t_hat(alpha: float, epsilon: float) -> float:
    """Leading-order blow-up time estimate alpha - eps*e^{-alpha}."""
    return alpha - epsilon * math.exp(-alpha)


def t_tilde(alpha: float, epsilon: float, quad_tol: float = 1e-12) -> float:
    """Second-order estimate alpha - eps*e^{-alpha} - (2C1+C2+C3)*eps^2."""
    c = constants(alpha, quad_tol)
    return t_hat(alpha, epsilon) - (2.0 * c.C1 + c.C2 + c.C3) * epsilon ** 2


def v_timescale2(x, t, alpha: float, epsilon: float, t_c: float,
                 consts: Optional[AsymptoticConstants] = None):
    """Second-timescale approximation of v for x = O(1), t <= t_c."""
    if consts is None:
        consts = constants(alpha)
    x = np.asarray(x, dtype=float)
    ea = math.exp(-alpha)
    s_half = np.sin(0.5 * x) ** 2
    s_full = np.sin(x) ** 2
    log_arg = (t_c - t) / epsilon + 2.0 * ea * s_half
    if np.any(log_arg <= 0.0):
        raise ValueError("log argument non-positive (past t_c at x = 0)")
    out = ((t_c - t)
           + 2.0 * epsilon * ea * s_half
           + 2.0 * epsilon ** 2 * math.log(epsilon) * ea ** 2 * s_full
           + epsilon * (t - t_c) * ea * np.cos(x)
           + 2.0 * epsilon ** 2 * s_full
           * (ea ** 2 * np.log(log_arg) + consts.C1 + consts.C3))
    return out if out.shape else float(out)


def blowup_profile_global(x, alpha: float, epsilon: float,
                          consts: Optional[AsymptoticConstants] = None):
    """Blow-up profile for x = O(1) (the second-timescale form at t = t_c)."""
    if consts is None:
        consts = constants(alpha)
    x = np.asarray(x, dtype=float)
    if np.any(x == 0.0):
        raise ValueError("x = 0 hits the log singularity")
    ea = math.exp(-alpha)
    s_half = np.sin(0.5 * x) ** 2
    s_full = np.sin(x) ** 2
    out = (2.0 * epsilon * ea * s_half
           + 2.0 * epsilon ** 2 * s_full
           * (ea ** 2 * np.log(2.0 * epsilon * ea * s_half)
              + consts.C1 + consts.C3))
    return out if out.shape else float(out)


def blowup_profile_local(x, alpha: float, epsilon: float):
    """Blow-up profile for exponentially small x:
    eps*e^{-a}*x^2 / (2 - 8*eps*e^{-a}*log(x^2))."""
    x = np.asarray(x, dtype=float)
    if np.any(np.abs(x) >= 1.0) or np.any(x == 0.0):
        raise ValueError("requires 0 < |x| < 1")
    ea = math.exp(-alpha)
    out = epsilon * ea * x ** 2 / (2.0 - 8.0 * epsilon * ea * np.log(x ** 2))
    return out if out.shape else float(out)


def coeff_decay_global(k, alpha: float, epsilon: float):
    """c_k(t_c) ~ 4*eps^2*e^{-2a}/k^3."""
    k = np.asarray(k, dtype=float)
    out = 4.0 * epsilon ** 2 * math.exp(-2.0 * alpha) / k ** 3
    return out if out.shape else float(out)


def coeff_decay_local(k):
    """c_k(t_c) ~ 1/(16 k^3 log^2 k), independent of eps and alpha."""
    k = np.asarray(k, dtype=float)
    out = 1.0 / (16.0 * k ** 3 * np.log(k) ** 2)
    return out if out.shape else float(out)


SINGULARITY_REGIMES = ("naive", "early", "late_first_scale",
                       "second_scale", "third_scale", "impingement")


def singularity_y(regime: str, value, alpha: float, epsilon: float,
                  t_c: Optional[float] = None):
    """Imaginary-axis singularity position y in the named regime.

    `value` is t for regimes {naive, early, late_first_scale,
    impingement} and T = (t - t_c)/epsilon (negative pre-blow-up) for
    {second_scale, third_scale}.  Regime selection is explicit; the
    formulas are overlays, not a composite.
    """
    v = np.asarray(value, dtype=float)
    if regime == "naive":
        arg = (alpha - v) * np.exp(v) / epsilon
        if np.any(arg < 1.0):
            raise ValueError("arccosh argument < 1")
        out = np.arccosh(arg)
    elif regime == "early":
        if np.any(v <= 0.0) or np.any(v >= 1.0):
            raise ValueError("requires 0 < t < 1")
        out = math.log(2.0 * alpha / epsilon) + np.sqrt(2.0 * v * np.log(1.0 / v))
    elif regime == "late_first_scale":
        if np.any(v >= alpha):
            raise ValueError("requires t < alpha")
        out = math.log(2.0 / epsilon) + alpha + np.log(alpha - v)
    elif regime == "second_scale":
        if np.any(v > 0.0):
            raise ValueError("requires T <= 0")
        mt = -v
        ea = math.exp(alpha)
        out = np.log(1.0 + ea * mt + np.sqrt(2.0 * ea * mt + ea ** 2 * mt ** 2))
    elif regime == "third_scale":
        if np.any(v >= 0.0):
            raise ValueError("requires T < 0")
        mt = -v
        out = np.sqrt(2.0 * math.exp(alpha) * mt) \
            * np.sqrt(1.0 - 4.0 * epsilon * math.exp(-alpha) * np.log(mt))
    elif regime == "impingement":
        if t_c is None:
            raise ValueError("impingement regime needs t_c")
        d = t_c - v
        if np.any(d <= 0.0) or np.any(d >= 1.0):
            raise ValueError("requires 0 < t_c - t < 1")
        out = np.sqrt(8.0 * d * np.log(1.0 / d))
    else:
        raise ValueError(f"unknown regime {regime!r}; one of {SINGULARITY_REGIMES}")
    return out if out.shape else float(out)


def flatness_approx(t, alpha: float, epsilon: float):
    """f(t) ~ 4*a_1(t) = 2*eps*e^{-t}/(alpha - t)^2, away from blow-up."""
    t = np.asarray(t, dtype=float)
    if np.any(t >= alpha):
        raise ValueError("requires t < alpha")
    out = 2.0 * epsilon * np.exp(-t) / (alpha - t) ** 2
    return out if out.shape else float(out)


def turning_time(alpha: float) -> Optional[float]:
    """Flattening-to-steepening switch at t ~ alpha - 2 (only if alpha > 2)."""
    return alpha - 2.0 if alpha > 2.0 else None


def minimal_flatness(alpha: float, epsilon: float) -> Optional[float]:
    """f(alpha - 2) ~ eps*e^{2-alpha}/2, defined when alpha > 2."""
    if alpha <= 2.0:
        return None
    return 0.5 * epsilon * math.exp(2.0 - alpha)


def u_initial_coeff(k: int, alpha: float, epsilon: float) -> float:
    """Exact initial Fourier coefficient of u = 1/(alpha - eps*cos x)
    (residue-theorem closed form)."""
    if epsilon == 0.0:
        return 1.0 / alpha if k == 0 else 0.0
    r = alpha / epsilon
    root = math.sqrt(r ** 2 - 1.0)
    rho = r + root
    return rho ** (-abs(k)) / (epsilon * root)


def taylor_case_estimates(alpha: float, epsilon: float):
    """Blow-up time and matching constants for initial data V(x) = x^2:
    t_c ~ alpha + 2*alpha*eps - 16*alpha*eps^2, (beta1, gamma1, beta2,
    gamma2) = (2a, 1, -16a, -8 log a)."""
    tc = alpha + 2.0 * alpha * epsilon - 16.0 * alpha * epsilon ** 2
    consts = (2.0 * alpha, 1.0, -16.0 * alpha, -8.0 * math.log(alpha))
    return tc, consts
