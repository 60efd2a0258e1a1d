"""Queue parameters, characteristic roots and the tridiagonal generator.

The service rate is fixed at 1, so ``rho`` is the arrival rate.  The
conditional sojourn densities ``p_n(t)`` (``n`` = customers already present)
obey ``p' = A p`` with ``A`` tridiagonal; the Laplace variable is ``theta``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CoalescentRoots

#: relative gap below which the two characteristic roots count as merged
COALESCENCE_TOL = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """One finite-capacity M/M/1-PS queue (service rate 1)."""

    rho: float
    capacity: int

    def __post_init__(self) -> None:
        if not (self.rho > 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be positive and finite, got {self.rho!r}")
        if int(self.capacity) != self.capacity or self.capacity < 1:
            raise ValueError(f"capacity must be an integer >= 1, got {self.capacity!r}")
        object.__setattr__(self, "rho", float(self.rho))
        object.__setattr__(self, "capacity", int(self.capacity))

    @property
    def K(self) -> int:
        return self.capacity

    @property
    def eta(self) -> float:
        """Heavy-traffic coordinate ``(rho - 1) K^(2/3)``."""
        return (self.rho - 1.0) * self.capacity ** (2.0 / 3.0)

    def coalescence(self) -> float:
        """Upper coalescence point ``-(1 - sqrt(rho))^2`` of the roots."""
        return -((1.0 - math.sqrt(self.rho)) ** 2)

    def lower_coalescence(self) -> float:
        return -((1.0 + math.sqrt(self.rho)) ** 2)


@dataclass(frozen=True)
class RootData:
    theta: complex
    z_minus: complex
    z_plus: complex
    alpha: complex
    m_factor: complex

    @property
    def is_real(self) -> bool:
        """True when both roots are real (theta real, outside the band)."""
        return self.z_minus.imag == 0.0 and self.z_plus.imag == 0.0

    @property
    def log_m(self) -> complex:
        """Principal-branch ``log M`` (avoids overflow of ``M`` itself)."""
        return cmath.log(self.z_minus) + self.alpha * cmath.log(self.z_plus / self.z_minus)


def characteristic_roots(params: ModelParams, theta: complex) -> tuple[complex, complex]:
    """Roots of ``rho z^2 - (1 + rho + theta) z + 1 = 0``.

    For real ``theta`` with real roots the larger one is ``z_plus``; for a
    complex pair ``z_plus`` is the root in the upper half plane.  Returned as
    floats when ``theta`` is real and the roots are real.
    """
    rho = params.rho
    b = 1.0 + rho + theta
    real_input = isinstance(theta, (int, float, np.floating, np.integer)) or (
        isinstance(theta, complex) and theta.imag == 0.0
    )
    if real_input:
        b = float(b.real if isinstance(b, complex) else b)
        disc = b * b - 4.0 * rho
        if disc >= 0.0:
            s = math.sqrt(disc)
            # the larger-magnitude root first, the other one from the product
            big = (b + s) / (2.0 * rho) if b >= 0.0 else (b - s) / (2.0 * rho)
            other = 1.0 / (rho * big)
            return (min(big, other), max(big, other))
        b = complex(b)
    s = cmath.sqrt(b * b - 4.0 * rho)
    r1 = (b + s) / (2.0 * rho) if abs(b + s) >= abs(b - s) else (b - s) / (2.0 * rho)
    r2 = 1.0 / (rho * r1)
    if r1.imag > r2.imag or (r1.imag == r2.imag and r1.real >= r2.real):
        return (r2, r1)
    return (r1, r2)


def root_data(params: ModelParams, theta: complex, tol: float = COALESCENCE_TOL) -> RootData:
    """Roots, exponent ``alpha = z+/(z+ - z-)`` and ``M = z- (z+/z-)^alpha``."""
    zm, zp = characteristic_roots(params, theta)
    gap = zp - zm
    if abs(gap) < tol * (1.0 + abs(zp)):
        raise CoalescentRoots(
            f"roots coalesce at theta={theta!r} (|z+ - z-| = {abs(gap):.3e}); perturb theta"
        )
    zm_c, zp_c = complex(zm), complex(zp)
    alpha = zp_c / gap
    m_factor = zm_c * (zp_c / zm_c) ** alpha
    return RootData(
        theta=complex(theta),
        z_minus=zm_c,
        z_plus=zp_c,
        alpha=complex(alpha),
        m_factor=complex(m_factor),
    )


def _readonly(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class GeneratorMatrix:
    """Tridiagonal ``A`` with ``p'(t) = A p(t)``.

    ``sub[n-1]`` is ``A[n, n-1] = n/(n+1)``, ``sup[n]`` is ``A[n, n+1] = rho``
    and the last diagonal entry carries the reflecting fold ``-1``.
    """

    capacity: int
    rho: float
    sub: np.ndarray = field(repr=False)
    diag: np.ndarray = field(repr=False)
    sup: np.ndarray = field(repr=False)

    def dense(self) -> np.ndarray:
        K = self.capacity
        a = np.diag(self.diag.astype(float))
        if K > 1:
            a[np.arange(1, K), np.arange(K - 1)] = self.sub
            a[np.arange(K - 1), np.arange(1, K)] = self.sup
        return a

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = self.diag * x
        if self.capacity > 1:
            y[1:] += self.sub * x[:-1]
            y[:-1] += self.sup * x[1:]
        return y

    def inf_norm(self) -> float:
        row = np.abs(self.diag).astype(float)
        if self.capacity > 1:
            row[1:] += np.abs(self.sub)
            row[:-1] += np.abs(self.sup)
        return float(row.max())

    def symmetric_offdiag(self) -> np.ndarray:
        """Off-diagonal of the similar symmetric matrix, ``sqrt(rho n/(n+1))``."""
        return np.sqrt(self.sub * self.sup)

    def similarity_scales(self) -> np.ndarray:
        """Diagonal ``s`` with ``diag(s)^-1 A diag(s)`` symmetric, ``s[0] = 1``.

        Kept in log form internally; large ``K`` with ``rho != 1`` overflows.
        """
        return np.exp(self.log_similarity_scales())

    def log_similarity_scales(self) -> np.ndarray:
        K = self.capacity
        out = np.zeros(K)
        if K > 1:
            out[1:] = np.cumsum(0.5 * (np.log(self.sub) - np.log(self.sup)))
        return out


def initial_density(capacity: int) -> np.ndarray:
    """``p_n(0) = 1/(n+1)``: the tagged customer shares with ``n`` others."""
    return 1.0 / np.arange(1, capacity + 1, dtype=float)


def generator_matrix(params: ModelParams) -> GeneratorMatrix:
    K, rho = params.capacity, params.rho
    n = np.arange(1, K, dtype=float)
    sub = n / (n + 1.0)
    diag = np.full(K, -(1.0 + rho))
    diag[-1] = -1.0
    sup = np.full(K - 1, rho)
    return GeneratorMatrix(
        capacity=K, rho=rho, sub=_readonly(sub), diag=_readonly(diag), sup=_readonly(sup)
    )
