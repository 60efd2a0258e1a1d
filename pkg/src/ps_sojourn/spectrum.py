"""Pole set and dominant singularity ``theta_s`` of the sojourn transform.

The generator is similar to a symmetric tridiagonal matrix, so its
eigenvalues (the poles) are real; they are found by Sturm-sequence
bisection.  Independently, the poles are the zeros of ``H_K - H_{K-1}``,
which :func:`theta_s_via_deltaH` and :func:`delta_h_roots` locate by a sign
scan over real ``theta``.  The large-``K`` expansions of ``theta_s`` in the
three traffic regimes live here too.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.optimize import brentq

from ._backend import kernels
from .errors import CoalescentRoots, NoBracket, RegimeError
from .green import delta_h_scaled
from .model import ModelParams, generator_matrix, root_data
from .special import airy_max_root, solve_r1

EIGEN_TOL = 1e-14
ROOT_TOL = 1e-10
CRITICAL_WINDOW = 3.0
# how close the scan may get to a coalescence point before hopping over it
_HOP = 1e-7

Regime = Literal["sub", "critical", "super"]


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    theta_s: float
    method: Literal["eigen", "deltaH"]


@dataclass(frozen=True)
class AsymptoticEstimate:
    regime: Regime
    eta: float
    terms: tuple[float, ...]
    theta_s_estimate: float
    airy_root: float | None = None


# ------------------------------------------------------------- eigenvalues


def _symmetric_form(params: ModelParams) -> tuple[np.ndarray, np.ndarray, float, float]:
    gen = generator_matrix(params)
    d = np.ascontiguousarray(gen.diag, dtype=float)
    offsq = np.ascontiguousarray(gen.sub * gen.sup, dtype=float)
    b = np.sqrt(offsq)
    radius = np.zeros_like(d)
    radius[:-1] += b
    radius[1:] += b
    lo = float(np.min(d - radius)) - 1e-12
    hi = min(float(np.max(d + radius)), 0.0) + 1e-12
    return d, offsq, lo, hi


def eigen_spectrum(params: ModelParams, tol: float = EIGEN_TOL) -> Spectrum:
    """All ``K`` poles, ascending, by bisection on Sturm counts."""
    d, offsq, lo, hi = _symmetric_form(params)
    ev = np.asarray(kernels.tridiag_eigvals(d, offsq, lo, hi, tol))
    return Spectrum(ev, float(ev[-1]), "eigen")


def dominant_pole(params: ModelParams, tol: float = EIGEN_TOL) -> float:
    """``theta_s`` alone: a single bisection for the largest eigenvalue, O(K) per step."""
    d, offsq, lo, hi = _symmetric_form(params)
    return float(kernels.tridiag_eigval(d, offsq, params.capacity - 1, lo, hi, tol))


def spectral_gap(params: ModelParams) -> float:
    """Distance between the two least negative poles (inf for ``K = 1``)."""
    if params.capacity == 1:
        return math.inf
    d, offsq, lo, hi = _symmetric_form(params)
    K = params.capacity
    top = kernels.tridiag_eigval(d, offsq, K - 1, lo, hi, EIGEN_TOL)
    second = kernels.tridiag_eigval(d, offsq, K - 2, lo, hi, EIGEN_TOL)
    return float(top - second)


# ------------------------------------------------------- roots of dH_K


def _dh_value(params: ModelParams, theta: float) -> tuple[float, float, float]:
    """``(mantissa, log_scale, noise)`` of ``H_K - H_{K-1}`` (nudged off coalescence)."""
    for _ in range(4):
        try:
            rd = root_data(params, theta)
        except CoalescentRoots:
            theta -= 10 * _HOP * (1.0 + abs(theta))
            continue
        return delta_h_scaled(rd, params.capacity)
    raise NoBracket(f"cannot evaluate H_K - H_(K-1) near theta={theta}")


def _dh_sign(params: ModelParams, theta: float) -> float:
    """Sign of ``H_K - H_{K-1}`` at real ``theta``; 0 below quadrature noise."""
    value, _, noise = _dh_value(params, theta)
    if abs(value) <= noise:
        return 0.0
    return math.copysign(1.0, value)


def _next_theta(params: ModelParams, theta: float, base: float) -> float:
    """One downward scan step: ``min(base, distance to coalescence / 10)``."""
    step = base
    for c in (params.coalescence(), params.lower_coalescence()):
        dist = theta - c
        if dist > 0:
            if dist <= _HOP * (1.0 + abs(c)):
                return c - _HOP * (1.0 + abs(c))
            step = min(step, dist / 10.0)
    return theta - step


def _scan_step(params: ModelParams) -> float:
    # neighbouring poles are at least ~3 sqrt(rho) K^(-4/3) apart (closest near
    # the ends of the spectrum); this step keeps several samples per gap
    return 0.5 * math.sqrt(params.rho) * params.capacity ** (-4.0 / 3.0)


def _refine(params: ModelParams, hi: float, lo: float, tol: float) -> float:
    """Zero of ``H_K - H_{K-1}`` in a sign-change bracket ``[lo, hi]``."""
    _, ref, _ = _dh_value(params, hi)

    def f(theta: float) -> float:
        value, scale, _ = _dh_value(params, theta)
        return value * math.exp(scale - ref)

    return float(brentq(f, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps))


def _start(params: ModelParams) -> tuple[float, float]:
    theta = 0.0
    c = params.coalescence()
    if abs(theta - c) <= _HOP * (1.0 + abs(c)):
        theta = c - _HOP * (1.0 + abs(c))
    return theta, _dh_sign(params, theta)


def theta_s_via_deltaH(params: ModelParams, tol: float = ROOT_TOL) -> float:
    """Least negative zero of ``H_K - H_{K-1}`` found by scanning down from 0."""
    if params.capacity > 200:
        raise ValueError("theta_s_via_deltaH is supported for capacity <= 200")
    floor = params.lower_coalescence() - 1.0
    base = _scan_step(params)
    hi, s_hi = _start(params)
    while hi > floor:
        lo = _next_theta(params, hi, base)
        s_lo = _dh_sign(params, lo)
        if s_lo == 0.0:
            return lo
        if s_lo != s_hi:
            return _refine(params, hi, lo, tol)
        hi, s_hi = lo, s_lo
    raise NoBracket(f"no sign change of H_K - H_(K-1) scanning [{floor:.6g}, 0]")


def delta_h_roots(params: ModelParams, lower: float | None = None,
                  tol: float = ROOT_TOL) -> np.ndarray:
    """All zeros of ``H_K - H_{K-1}`` in ``[lower, 0)``, ascending.

    ``lower`` defaults to just below ``-(1+sqrt(rho))^2``, which bounds the
    spectrum from below.
    """
    if lower is None:
        lower = params.lower_coalescence() - 0.05
    base = _scan_step(params)
    hi, s_hi = _start(params)
    roots = []
    while hi > lower:
        lo = max(_next_theta(params, hi, base), lower)
        s_lo = _dh_sign(params, lo)
        if s_lo != s_hi and s_lo != 0.0 and s_hi != 0.0:
            roots.append(_refine(params, hi, lo, tol))
        elif s_lo == 0.0:
            roots.append(lo)
        if lo <= lower:
            break
        hi, s_hi = lo, (s_lo if s_lo != 0.0 else -s_hi)
    return np.array(sorted(roots))


def deltah_spectrum(params: ModelParams) -> Spectrum:
    roots = delta_h_roots(params)
    if roots.size == 0:
        raise NoBracket("no zeros of H_K - H_(K-1) found")
    return Spectrum(roots, float(roots[-1]), "deltaH")


# -------------------------------------------------------------- asymptotics


def eta_of(params: ModelParams) -> float:
    return (params.rho - 1.0) * params.capacity ** (2.0 / 3.0)


def _estimate(regime: Regime, eta: float, terms: list[float], root: float | None) -> AsymptoticEstimate:
    return AsymptoticEstimate(regime, eta, tuple(terms), math.fsum(terms), root)


def asymp_subcritical(params: ModelParams) -> AsymptoticEstimate:
    """Four-term expansion of ``theta_s`` for ``rho < 1``."""
    rho, K = params.rho, params.capacity
    if rho >= 1.0:
        raise RegimeError(f"sub-critical expansion needs rho < 1, got {rho}")
    sr = math.sqrt(rho)
    r0 = airy_max_root()
    terms = [
        -(1.0 - sr) ** 2,
        -sr / K,
        sr * r0 / K ** (4.0 / 3.0),
        -8.0 * sr * r0 * r0 / (15.0 * K ** (5.0 / 3.0)),
    ]
    return _estimate("sub", eta_of(params), terms, r0)


def critical_numerator(eta: float, r1: float) -> float:
    return 16 * r1 ** 3 + 8 * eta ** 2 * r1 ** 2 + (eta ** 4 + 19 * eta) * r1 + eta ** 3 + 9


def asymp_critical(params: ModelParams, window: float = CRITICAL_WINDOW) -> AsymptoticEstimate:
    """Three-term expansion of ``theta_s`` for ``rho = 1 + eta K^(-2/3)``, ``|eta| <= window``."""
    K = params.capacity
    eta = eta_of(params)
    if abs(eta) > window:
        raise RegimeError(f"|eta|={abs(eta):.4g} outside the critical window {window}")
    r1 = solve_r1(eta)
    terms = [
        -1.0 / K,
        r1 / K ** (4.0 / 3.0),
        -critical_numerator(eta, r1) / (30.0 * r1 * K ** (5.0 / 3.0)),
    ]
    return _estimate("critical", eta, terms, r1)


def asymp_supercritical(params: ModelParams) -> AsymptoticEstimate:
    """Four-term expansion of ``theta_s`` in powers of ``1/K`` for ``rho > 1``."""
    rho, K = params.rho, params.capacity
    if rho <= 1.0:
        raise RegimeError(f"super-critical expansion needs rho > 1, got {rho}")
    d = rho - 1.0
    terms = [
        -1.0 / K,
        -1.0 / (d * K ** 2),
        -1.0 / (d * d * K ** 3),
        (rho * rho + 1.0) / (d ** 4 * K ** 4),
    ]
    return _estimate("super", eta_of(params), terms, None)


def regime_of(params: ModelParams, window: float = CRITICAL_WINDOW) -> Regime:
    eta = eta_of(params)
    if abs(eta) <= window:
        return "critical"
    return "sub" if eta < 0 else "super"


def asymptotic_estimate(params: ModelParams, regime: Regime | None = None,
                        window: float = CRITICAL_WINDOW) -> AsymptoticEstimate:
    regime = regime or regime_of(params, window)
    if regime == "sub":
        return asymp_subcritical(params)
    if regime == "super":
        return asymp_supercritical(params)
    return asymp_critical(params, window)


def applicable_estimates(params: ModelParams, window: float = CRITICAL_WINDOW) -> list[AsymptoticEstimate]:
    """Every expansion whose precondition holds (the critical one within ``window``)."""
    out = []
    for fn in (asymp_subcritical, asymp_critical, asymp_supercritical):
        try:
            out.append(fn(params, window) if fn is asymp_critical else fn(params))
        except RegimeError:
            pass
    return out


def theta_s_auto(params: ModelParams, window: float = CRITICAL_WINDOW) -> tuple[float, AsymptoticEstimate]:
    """Exact ``theta_s`` with the estimate of the regime picked by ``eta``."""
    if params.capacity < 2:
        raise ValueError("theta_s_auto needs capacity >= 2")
    return dominant_pole(params), asymptotic_estimate(params, None, window)
