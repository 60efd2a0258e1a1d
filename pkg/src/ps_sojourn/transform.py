"""Laplace transform of the conditional sojourn density.

Two independent routes:

* :func:`transform_theorem21` assembles ``p_n(theta)`` from the Green's
  function pair ``G_n, H_n`` (real ``theta`` above the coalescence point);
* :func:`resolvent_solve` solves ``(theta I - A) p = p(0)`` directly and is
  valid for any complex ``theta`` off the spectrum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Sequence

import numpy as np

from ._backend import kernels
from .errors import DegenerateAlpha, DomainError, NearPole, SingularSystem
from .green import Scaled, delta_g, delta_h, g_integral, h_contour
from .model import ModelParams, generator_matrix, initial_density, root_data

PIVOT_TOL = 1e-13
NEAR_POLE_TOL = 1e-12
INTEGER_ALPHA_TOL = 1e-6

Method = Literal["theorem21", "resolvent"]


@dataclass(frozen=True)
class TransformVector:
    theta: complex
    values: np.ndarray
    method: Method


# ------------------------------------------------------------------ resolvent


def resolvent_batch(params: ModelParams, thetas: Sequence[complex],
                    rhs: np.ndarray | None = None) -> np.ndarray:
    """Rows ``(theta I - A)^{-1} rhs`` for each theta (rhs defaults to ``p(0)``)."""
    gen = generator_matrix(params)
    b = initial_density(params.capacity) if rhs is None else np.asarray(rhs, dtype=float)
    th = np.atleast_1d(np.asarray(thetas, dtype=complex))
    x, piv = kernels.shifted_solve(th, np.ascontiguousarray(gen.sub), np.ascontiguousarray(gen.diag),
                                   np.ascontiguousarray(gen.sup), np.ascontiguousarray(b))
    bad = np.flatnonzero(piv < PIVOT_TOL)
    if bad.size:
        raise SingularSystem(
            f"pivot {piv[bad[0]]:.2e} below {PIVOT_TOL:g} at theta={th[bad[0]]} (at or near a pole)")
    return x


def resolvent_solve(params: ModelParams, theta: complex) -> TransformVector:
    """``p_n(theta)`` for ``n = 0..K-1`` by tridiagonal elimination, O(K)."""
    x = resolvent_batch(params, [theta])[0]
    values = x.real.copy() if complex(theta).imag == 0.0 else x
    return TransformVector(complex(theta), values, "resolvent")


def conditional_moments(params: ModelParams, order: int = 1) -> np.ndarray:
    """``E[V^order | N(0-) = n]`` for ``order`` in {1, 2}.

    ``(-A) m1 = 1`` and ``(-A) m2 = 2 m1``: successive resolvent solves at 0.
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    K = params.capacity
    m1 = resolvent_batch(params, [0.0], np.ones(K))[0].real
    if order == 1:
        return m1
    return resolvent_batch(params, [0.0], 2.0 * m1)[0].real


# ------------------------------------------------------------ Green's route


def _add(terms: list[tuple[float, float]]) -> tuple[float, float]:
    """Sum of ``sign * exp(log)`` terms, returned as ``(sign, log|sum|)``."""
    live = [(s, lg) for s, lg in terms if s != 0.0 and lg > -math.inf]
    if not live:
        return 0.0, -math.inf
    top = max(lg for _, lg in live)
    total = math.fsum(s * math.exp(lg - top) for s, lg in live)
    if total == 0.0:
        return 0.0, -math.inf
    return math.copysign(1.0, total), top + math.log(abs(total))


def _sl(x: Scaled) -> tuple[float, float]:
    return x.sign, x.log_abs


def transform_theorem21(params: ModelParams, theta: float,
                        last_row: Literal["closed", "general"] = "closed") -> TransformVector:
    """``p_n(theta)`` from the Green's-function representation.

    ``last_row="closed"`` uses the separate closed form for ``n = K-1``;
    ``"general"`` evaluates the generic three-sum expression there too (the
    two agree through the Wronskian identity).

    Raises
    ------
    DegenerateAlpha
        ``alpha`` within 1e-6 of an integer; use :func:`resolvent_solve`.
    NearPole
        ``|H_K - H_{K-1}|`` negligible against ``H_{K-1}``.
    """
    theta = float(theta)
    if theta <= params.coalescence():
        raise DomainError(f"theta={theta} is not above the coalescence point {params.coalescence()}")
    rd = root_data(params, theta)
    alpha = rd.alpha.real
    if abs(alpha - round(alpha)) < INTEGER_ALPHA_TOL:
        raise DegenerateAlpha(f"alpha={alpha!r} is within {INTEGER_ALPHA_TOL:g} of an integer")
    K, rho = params.capacity, params.rho
    log_rho = math.log(rho)
    log_m = rd.log_m.real

    G = [_sl(g_integral(rd, l)) for l in range(K)]
    H = [_sl(h_contour(rd, l)) for l in range(K)]
    dG = _sl(delta_g(rd, K))
    dH = _sl(delta_h(rd, K))
    if dH[0] == 0.0 or dH[1] - H[-1][1] < math.log(NEAR_POLE_TOL):
        raise NearPole(f"theta={theta} is at or near a pole (|dH_K/H_(K-1)| < {NEAR_POLE_TOL:g})")

    rh = [(s, lg + l * log_rho) for l, (s, lg) in enumerate(H)]
    rg = [(s, lg + l * log_rho) for l, (s, lg) in enumerate(G)]
    s1 = []  # sum_{l <= n} rho^l H_l
    acc = (0.0, -math.inf)
    for term in rh:
        acc = _add([acc, term])
        s1.append(acc)
    s2 = [(0.0, -math.inf)] * K  # sum_{l > n} rho^l G_l
    acc = (0.0, -math.inf)
    for n in range(K - 2, -1, -1):
        acc = _add([acc, rg[n + 1]])
        s2[n] = acc
    s_all = s1[-1]
    ratio = (dG[0] * dH[0], dG[1] - dH[1])

    out = np.empty(K)
    for n in range(K):
        if n == K - 1 and last_row == "closed":
            sign = s_all[0] * dH[0]
            out[n] = sign * math.exp(s_all[1] - math.log(K) - K * log_rho - dH[1])
            continue
        t1 = (G[n][0] * s1[n][0], log_m + G[n][1] + s1[n][1])
        t2 = (H[n][0] * s2[n][0], log_m + H[n][1] + s2[n][1])
        t3 = (-ratio[0] * H[n][0] * s_all[0], log_m + ratio[1] + H[n][1] + s_all[1])
        s, lg = _add([t1, t2, t3])
        out[n] = s * math.exp(lg) if s else 0.0
    return TransformVector(complex(theta), out, "theorem21")


def relative_discrepancy(a: TransformVector, b: TransformVector) -> np.ndarray:
    return np.abs(np.asarray(a.values) - np.asarray(b.values)) / np.abs(np.asarray(b.values))
