"""Time-domain density ``p_n(t)`` and survival ``q_n(t) = Pr[V > t | N(0-) = n]``.

Three routes:

* :func:`ode_evolve` steps ``p' = A p`` with classical RK4;
* :func:`spectral_expand` sums eigenmodes of the symmetrised generator;
* :func:`invert_transform` applies the fixed Talbot rule to the resolvent.

Survival obeys the same system: integrating ``p' = A p`` over ``(t, inf)``
with ``p(inf) = 0`` gives ``q' = A q`` and ``q(0) = 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import brentq

from ._backend import kernels
from .errors import ContourCollision, IllConditioned, StepUnderflow, WindowTooEarly
from .model import ModelParams, generator_matrix, initial_density
from .spectrum import dominant_pole, eigen_spectrum
from .transform import resolvent_batch

Quantity = Literal["density", "survival"]

LOCAL_ERROR = 1e-12
TALBOT_NODES = 32
COND_LIMIT = 1e10
COLLISION_TOL = 1e-6
MAX_TAIL_BIAS = 0.01


@dataclass(frozen=True)
class TimeGridSolution:
    params: ModelParams
    t_grid: np.ndarray
    density: np.ndarray | None  # shape (T, K)
    survival: np.ndarray | None
    method: Literal["ode", "spectral", "inversion"]


def default_time_grid(params: ModelParams, points: int = 200) -> np.ndarray:
    """``0`` followed by a geometric grid from 1e-2 to ``10/|theta_s|``."""
    top = 10.0 / abs(dominant_pole(params))
    return np.concatenate(([0.0], np.geomspace(1e-2, top, points)))


def _check_grid(t_grid) -> np.ndarray:
    t = np.asarray(t_grid, dtype=float)
    if t.ndim != 1 or t.size == 0 or t[0] != 0.0:
        raise ValueError("t_grid must be one-dimensional and start at 0")
    if np.any(np.diff(t) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    return t


def _wanted(quantity: str) -> tuple[bool, bool]:
    if quantity not in ("density", "survival", "both"):
        raise ValueError(f"quantity must be density, survival or both, got {quantity!r}")
    return quantity in ("density", "both"), quantity in ("survival", "both")


def ode_step_limit(params: ModelParams) -> float:
    """Largest RK4 step: ``0.1/||A||`` tightened so ``(h||A||)^5/120`` meets the local target."""
    norm = generator_matrix(params).inf_norm()
    return min(0.1, (120.0 * LOCAL_ERROR) ** 0.2) / norm


def ode_evolve(params: ModelParams, t_grid, quantity: str = "both") -> TimeGridSolution:
    t = _check_grid(t_grid)
    want_p, want_q = _wanted(quantity)
    h = ode_step_limit(params)
    if h < 1e-12:
        raise StepUnderflow(f"required step {h:.3e} is below 1e-12")
    gen = generator_matrix(params)
    K = params.capacity

    def run(y0):
        return np.asarray(kernels.rk4_tridiag(gen.sub, gen.diag, gen.sup, y0, t, h))

    p = run(initial_density(K)) if want_p else None
    q = run(np.ones(K)) if want_q else None
    return TimeGridSolution(params, t, p, q, "ode")


# ------------------------------------------------------------------ spectral


@dataclass(frozen=True)
class Modes:
    """Eigenpairs ``A = S V diag(lam) V^T S^-1`` with ``S = diag(scales)``."""

    eigenvalues: np.ndarray
    vectors: np.ndarray
    scales: np.ndarray

    def coefficients(self, y0: np.ndarray) -> np.ndarray:
        return self.vectors.T @ (y0 / self.scales)

    def evaluate(self, coeffs: np.ndarray, t: np.ndarray) -> np.ndarray:
        growth = np.exp(np.outer(t, self.eigenvalues)) * coeffs
        return (growth @ self.vectors.T) * self.scales


def eigenmodes(params: ModelParams) -> Modes:
    if params.capacity > 2000:
        raise ValueError("spectral expansion is provided for capacity <= 2000")
    gen = generator_matrix(params)
    log_s = gen.log_similarity_scales()
    spread = float(log_s.max() - log_s.min())
    if spread > math.log(COND_LIMIT):
        raise IllConditioned(f"eigenvector basis condition ~ e^{spread:.1f} exceeds {COND_LIMIT:g}")
    if params.capacity == 1:
        lam, vec = np.array(gen.diag, dtype=float), np.ones((1, 1))
    else:
        lam, vec = eigh_tridiagonal(np.array(gen.diag), gen.symmetric_offdiag())
    # centred log-scales: the extreme entries are reciprocals of each other
    scales = np.exp(log_s - 0.5 * (log_s.max() + log_s.min()))
    return Modes(lam, vec, scales)


def spectral_expand(params: ModelParams, t_grid, quantity: str = "both") -> TimeGridSolution:
    t = _check_grid(t_grid)
    want_p, want_q = _wanted(quantity)
    modes = eigenmodes(params)
    K = params.capacity
    p = modes.evaluate(modes.coefficients(initial_density(K)), t) if want_p else None
    q = modes.evaluate(modes.coefficients(np.ones(K)), t) if want_q else None
    return TimeGridSolution(params, t, p, q, "spectral")


# ----------------------------------------------------------------- inversion


def _talbot_nodes(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    k = np.arange(1, nodes)
    phi = k * np.pi / nodes
    cot = 1.0 / np.tan(phi)
    return phi * (cot + 1j), phi + (phi * cot - 1.0) * cot


def _talbot(params: ModelParams, t: np.ndarray, rhs: np.ndarray, nodes: int,
            poles: np.ndarray) -> np.ndarray:
    """Fixed Talbot inversion for every component; returns shape (T, K)."""
    shape, sigma = _talbot_nodes(nodes)
    r = 2.0 * nodes / (5.0 * t)  # one contour per time point
    s = np.concatenate([r[:, None], r[:, None] * shape[None, :]], axis=1)
    flat = s.ravel()
    gap = np.min(np.abs(flat[:, None] - poles[None, :]))
    if gap < COLLISION_TOL:
        raise ContourCollision(f"contour node within {gap:.2e} of a pole")
    F = resolvent_batch(params, flat, rhs).reshape(s.shape + (-1,))
    ets = np.exp(t[:, None] * s)
    head = 0.5 * (ets[:, 0, None] * F[:, 0, :]).real
    weights = ets[:, 1:] * (1.0 + 1j * sigma[None, :])
    body = np.einsum("tk,tkn->tn", weights, F[:, 1:, :]).real
    return (r / nodes)[:, None] * (head + body)


def invert_transform(params: ModelParams, n: int, t_grid, quantity: str = "density",
                     nodes: int = TALBOT_NODES) -> np.ndarray:
    """``p_n(t)`` (or ``q_n(t)``) at ``t > 0`` by numerical inversion of the resolvent."""
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0):
        raise ValueError("invert_transform needs t > 0")
    if not 0 <= n < params.capacity:
        raise ValueError(f"n must lie in 0..{params.capacity - 1}")
    want_p, _ = _wanted(quantity)
    K = params.capacity
    rhs = initial_density(K) if want_p else np.ones(K)
    poles = eigen_spectrum(params).eigenvalues
    return _talbot(params, t, rhs, nodes, poles)[:, n]


def inversion_solution(params: ModelParams, t_grid, quantity: str = "both",
                       nodes: int = TALBOT_NODES) -> TimeGridSolution:
    """All components by inversion; the ``t = 0`` row is the initial condition."""
    t = _check_grid(t_grid)
    want_p, want_q = _wanted(quantity)
    K = params.capacity
    poles = eigen_spectrum(params).eigenvalues
    pos = t[1:]

    def run(y0):
        out = np.empty((t.size, K))
        out[0] = y0
        if pos.size:
            out[1:] = _talbot(params, pos, y0, nodes, poles)
        return out

    p = run(initial_density(K)) if want_p else None
    q = run(np.ones(K)) if want_q else None
    return TimeGridSolution(params, t, p, q, "inversion")


# ------------------------------------------------------------------ tail fit


def tail_bias(params: ModelParams, t1: float, n: int = 0) -> float:
    """Relative slope bias at ``t1`` from the second mode of ``q_n``.

    ``q_n ~ c1 e^{l1 t} (1 + (c2/c1) e^{-gap t})``, so the local slope is off by
    about ``gap |c2/c1| e^{-gap t}``; relative to ``|l1|``.
    """
    if params.capacity == 1:
        return 0.0
    modes = eigenmodes(params)
    coeffs = modes.coefficients(np.ones(params.capacity))
    amp = coeffs * modes.vectors[n] * modes.scales[n]
    l1, l2 = modes.eigenvalues[-1], modes.eigenvalues[-2]
    gap = l1 - l2
    ratio = abs(amp[-2] / amp[-1]) if amp[-1] != 0 else math.inf
    return gap * ratio * math.exp(-gap * t1) / abs(l1)


def earliest_tail_start(params: ModelParams, n: int = 0, max_bias: float = MAX_TAIL_BIAS) -> float:
    """Smallest ``t1`` at which :func:`tail_bias` drops to ``max_bias``."""
    if tail_bias(params, 0.0, n) <= max_bias:
        return 0.0
    hi = 1.0
    while tail_bias(params, hi, n) > max_bias:
        hi *= 2.0
    return float(brentq(lambda t: tail_bias(params, t, n) - max_bias, 0.0, hi, xtol=1e-10))


def tail_fit(solution: TimeGridSolution, window: tuple[float, float], n: int = 0,
             check_bias: bool = True) -> tuple[float, float]:
    """Least-squares line through ``log q_n(t)`` on ``window``; the slope estimates ``theta_s``."""
    if solution.survival is None:
        raise ValueError("solution carries no survival function")
    t1, t2 = window
    if not t2 > t1:
        raise ValueError("window must satisfy t1 < t2")
    mask = (solution.t_grid >= t1) & (solution.t_grid <= t2)
    if mask.sum() < 2:
        raise ValueError("fewer than two grid points fall inside the window")
    q = solution.survival[mask, n]
    if np.any(q <= 0):
        raise ValueError("survival must be positive on the window")
    if check_bias and solution.params.capacity <= 2000:
        bias = tail_bias(solution.params, t1, n)
        if bias > MAX_TAIL_BIAS * (1.0 + 1e-9):
            raise WindowTooEarly(
                f"second mode biases the slope by ~{100 * bias:.2g}% at t1={t1:g}; start later")
    slope, intercept = np.polyfit(solution.t_grid[mask], np.log(q), 1)
    return float(slope), float(intercept)
