"""Gamma and Airy kernels, and the Airy-type roots used by the pole asymptotics.

Airy values come from three regions:

* ``-3 <= x <= 1``: the Maclaurin pair ``f, g`` summed with ``math.fsum``;
* ``x < -3``: Taylor re-expansion of ``y'' = x y`` in steps of at most 0.5,
  started from the Maclaurin values at ``x = -3`` (both solutions oscillate
  there, so the continuation does not amplify error);
* ``x > 1``: the integral along the vertical line through the saddle
  ``t = sqrt(x)``, which turns the oscillatory definition into a Gaussian
  integral handled by the trapezoid rule.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConvergenceError, DomainError

def gamma_fn(x: float) -> float:
    """Gamma function for real ``x > 0``."""
    if not x > 0:
        raise DomainError(f"gamma_fn needs x > 0, got {x!r}")
    return math.gamma(x)


@dataclass(frozen=True)
class AiryValue:
    x: float
    ai: float
    ai_prime: float


_SERIES_LIMIT = 3.0
_SADDLE_FROM = 1.0
_TAYLOR_STEP = 0.5
# Ai(0) and -Ai'(0)
_C1 = 3.0 ** (-2.0 / 3.0) / gamma_fn(2.0 / 3.0)
_C2 = 3.0 ** (-1.0 / 3.0) / gamma_fn(1.0 / 3.0)

_TRAP_H = 0.05
_TRAP_V = np.arange(0.0, 7.0 + _TRAP_H / 2, _TRAP_H)
_TRAP_W = np.full(_TRAP_V.shape, _TRAP_H)
_TRAP_W[0] = _TRAP_H / 2


def _maclaurin(x: float) -> tuple[float, float]:
    x3 = x * x * x
    f, fp, g, gp = [1.0], [0.0], [x], [1.0]
    t, d, s, e = 1.0, 0.0, x, 1.0
    for k in range(1, 200):
        t *= x3 / ((3 * k - 1) * (3 * k))
        d = x * x / 2.0 if k == 1 else d * x3 / (3.0 * (3 * k - 1) * (k - 1))
        s *= x3 / ((3 * k) * (3 * k + 1))
        e *= x3 / ((3 * k) * (3 * k - 2))
        f.append(t)
        fp.append(d)
        g.append(s)
        gp.append(e)
        if max(abs(t), abs(d), abs(s), abs(e)) < 1e-20:
            break
    ai = _C1 * math.fsum(f) - _C2 * math.fsum(g)
    aip = _C1 * math.fsum(fp) - _C2 * math.fsum(gp)
    return ai, aip


def _taylor_step(x0: float, y: float, yp: float, h: float) -> tuple[float, float]:
    # y'' = x y about x0:  (k+1)(k+2) a[k+2] = x0 a[k] + a[k-1]
    a = [y, yp]
    for k in range(200):
        a.append((x0 * a[k] + (a[k - 1] if k else 0.0)) / ((k + 1) * (k + 2)))
        if k > 8 and abs(a[-1]) * abs(h) ** (k + 2) < 1e-22 and abs(a[-2]) * abs(h) ** (k + 1) < 1e-22:
            break
    val = math.fsum(c * h ** i for i, c in enumerate(a))
    der = math.fsum(i * c * h ** (i - 1) for i, c in enumerate(a) if i)
    return val, der


def _continue_left(x: float) -> tuple[float, float]:
    x0 = -_SERIES_LIMIT
    y, yp = _maclaurin(x0)
    nsteps = max(1, math.ceil((x0 - x) / _TAYLOR_STEP))
    h = (x - x0) / nsteps
    for i in range(nsteps):
        y, yp = _taylor_step(x0 + i * h, y, yp, h)
    return y, yp


def _saddle_integral(x: float) -> tuple[float, float]:
    """``exp(zeta) Ai(x)`` and ``exp(zeta) Ai'(x)`` for ``x > 0``."""
    q = x ** 0.25
    c = 1.0 / (3.0 * q * q * q)
    v = _TRAP_V
    cv = c * v * v * v
    gauss = np.exp(-v * v)
    ic = float(np.dot(_TRAP_W, gauss * np.cos(cv)))
    isn = float(np.dot(_TRAP_W, gauss * v * np.sin(cv)))
    ai = ic / (math.pi * q)
    aip = -(math.sqrt(x) * ic + isn / q) / (math.pi * q)
    return ai, aip


def airy_scaled(x: float) -> tuple[float, float]:
    """``(Ai, Ai')`` times ``exp(2/3 x^1.5)`` for ``x > 0``; plain values otherwise.

    Usable far beyond the range of :func:`airy` because the exponential
    factor is never formed.
    """
    if x > _SADDLE_FROM:
        return _saddle_integral(x)
    ai, aip = _airy_raw(x)
    if x > 0:
        z = math.exp(2.0 / 3.0 * x ** 1.5)
        return ai * z, aip * z
    return ai, aip


def _airy_raw(x: float) -> tuple[float, float]:
    if x > _SADDLE_FROM:
        ai, aip = _saddle_integral(x)
        z = math.exp(-2.0 / 3.0 * x ** 1.5)
        return ai * z, aip * z
    if x < -_SERIES_LIMIT:
        return _continue_left(x)
    return _maclaurin(x)


def airy(x: float) -> AiryValue:
    """Ai and Ai' at real ``x``, ``|x| <= 20``."""
    x = float(x)
    if not abs(x) <= 20.0:
        raise DomainError(f"airy is provided for |x| <= 20, got {x!r}")
    ai, aip = _airy_raw(x)
    return AiryValue(x=x, ai=ai, ai_prime=aip)


def bracket_root(f: Callable[[float], float], a: float, b: float, fa: float | None = None,
                 fb: float | None = None, xtol: float = 1e-14, maxiter: int = 200) -> float:
    """Root of ``f`` in ``[a, b]`` given a sign change; bisection with secant steps."""
    fa = f(a) if fa is None else fa
    fb = f(b) if fb is None else fb
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise ConvergenceError(f"no sign change on [{a}, {b}]")
    for it in range(maxiter):
        if abs(b - a) <= xtol * max(1.0, abs(a), abs(b)):
            break
        # a secant step when it lands well inside the bracket, bisection otherwise
        m = b - fb * (b - a) / (fb - fa) if it % 2 == 0 and fb != fa else 0.5 * (a + b)
        lo, hi = min(a, b), max(a, b)
        if not (lo + 0.01 * (hi - lo) < m < hi - 0.01 * (hi - lo)):
            m = 0.5 * (a + b)
        fm = f(m)
        if fm == 0.0:
            return m
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    return a if abs(fa) < abs(fb) else b


def _largest_zero(f: Callable[[float], float], start: float, stop: float, step: float = 0.05) -> float:
    x_hi, f_hi = start, f(start)
    x = start
    while x > stop:
        x_lo = round(x - step, 12)
        f_lo = f(x_lo)
        if f_lo == 0.0:
            return x_lo
        if (f_lo > 0) != (f_hi > 0):
            return bracket_root(f, x_lo, x_hi, f_lo, f_hi)
        x, x_hi, f_hi = x_lo, x_lo, f_lo
    raise ConvergenceError(f"no sign change found scanning [{stop}, {start}]")


def airy_max_root() -> float:
    """Largest zero of Ai, about -2.33811."""
    return _AIRY_ROOTS["ai"]


def airy_prime_max_root() -> float:
    """Largest zero of Ai', about -1.01879."""
    return _AIRY_ROOTS["aip"]


def _compute_roots() -> dict[str, float]:
    return {
        "ai": _largest_zero(lambda x: _airy_raw(x)[0], 0.0, -20.0),
        "aip": _largest_zero(lambda x: _airy_raw(x)[1], 0.0, -20.0),
    }


_AIRY_ROOTS = _compute_roots()


def r1_residual(eta: float, r1: float) -> float:
    """``Ai'(x)/Ai(x) + eta/2`` at ``x = r1 + eta^2/4``."""
    ai, aip = airy_scaled(r1 + eta * eta / 4.0)
    return aip / ai + eta / 2.0


def solve_r1(eta: float) -> float:
    """Largest ``r1`` with ``Ai'(r1 + eta^2/4) / Ai(r1 + eta^2/4) = -eta/2``.

    The log-derivative decreases monotonically to the right of the largest
    Ai zero, so the root is bracketed between that zero (where ``Ai' +
    (eta/2) Ai > 0``) and a point where the log-derivative is already below
    ``-eta/2``.
    """
    eta = float(eta)
    if not abs(eta) <= 50.0:
        raise DomainError(f"solve_r1 is provided for |eta| <= 50, got {eta!r}")

    def g(x: float) -> float:
        ai, aip = airy_scaled(x)
        return aip + 0.5 * eta * ai

    start = (max(eta, 0.0) / 2.0 + 1.0) ** 2
    try:
        x = _largest_zero(g, start, airy_max_root())
    except ConvergenceError as exc:
        raise ConvergenceError(
            f"solve_r1(eta={eta}): no sign change in window [{airy_max_root():.6f}, {start:.6f}]"
        ) from exc
    return x - eta * eta / 4.0
