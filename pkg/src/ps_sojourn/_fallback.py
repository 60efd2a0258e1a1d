"""Pure-Python/numpy versions of the compiled kernels in ``_kernels.pyx``.

Every function here has the same signature and (for the simulators and the
generator) bit-identical results as its compiled twin; the test-suite
checks this whenever the extension is importable.
"""
from __future__ import annotations

import math

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_TWO_M53 = 2.0 ** -53


def mix64(z: int) -> int:
    z &= MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def stream_key(seed: int, rep: int) -> int:
    return mix64((seed & MASK) ^ mix64(rep + 1))


def uniforms(seed: int, rep: int, count: int) -> np.ndarray:
    key = stream_key(seed, rep)
    return np.array(
        [(mix64(key + (j + 1) * GOLDEN) >> 11) * _TWO_M53 for j in range(count)]
    )


# ------------------------------------------------------------ eigenvalues


def sturm_count(diag: np.ndarray, offsq: np.ndarray, x: float) -> int:
    """Number of eigenvalues below ``x`` (LDL^T inertia)."""
    pivmin = 1e-300
    count = 0
    q = 1.0
    for i in range(len(diag)):
        q = diag[i] - x - (offsq[i - 1] / q if i else 0.0)
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0:
            count += 1
    return count


def tridiag_eigval(diag: np.ndarray, offsq: np.ndarray, k: int, lo: float, hi: float,
                   tol: float) -> float:
    """The ``k``-th smallest eigenvalue by bisection on ``[lo, hi]``."""
    diag = [float(v) for v in diag]
    offsq = [float(v) for v in offsq]
    while hi - lo > tol + 4e-16 * max(abs(lo), abs(hi)):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if sturm_count(diag, offsq, mid) > k:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def tridiag_eigvals(diag: np.ndarray, offsq: np.ndarray, lo: float, hi: float,
                    tol: float) -> np.ndarray:
    """All eigenvalues, ascending; the bisections run side by side."""
    n = len(diag)
    idx = np.arange(n)
    a = np.full(n, lo)
    b = np.full(n, hi)
    for _ in range(200):
        if np.all(b - a <= tol + 4e-16 * np.maximum(np.abs(a), np.abs(b))):
            break
        mid = 0.5 * (a + b)
        count = np.zeros(n, dtype=np.int64)
        q = np.ones(n)
        for i in range(n):
            q = diag[i] - mid - (offsq[i - 1] / q if i else 0.0)
            q = np.where(np.abs(q) < 1e-300, -1e-300, q)
            count += q < 0
        above = count > idx
        b = np.where(above, mid, b)
        a = np.where(above, a, mid)
    return 0.5 * (a + b)


# --------------------------------------------------------- linear systems


def shifted_solve(thetas: np.ndarray, sub: np.ndarray, diag: np.ndarray, sup: np.ndarray,
                  rhs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``(theta I - A) x = rhs`` for every ``theta`` (no pivoting).

    Returns the solutions, one row per theta, and the smallest pivot
    magnitude of each elimination relative to its row scale.
    """
    thetas = np.asarray(thetas, dtype=complex)
    K = len(diag)
    B = thetas.shape[0]
    cp = np.zeros((B, K), dtype=complex)
    dp = np.zeros((B, K), dtype=complex)
    minpiv = np.full(B, np.inf)
    for i in range(K):
        bi = thetas - diag[i]
        scale = np.abs(bi) + (abs(sub[i - 1]) if i > 0 else 0.0) + (abs(sup[i]) if i < K - 1 else 0.0)
        if i > 0:
            # row i of (theta I - A) has -sub[i-1] left of the diagonal
            bi = bi + sub[i - 1] * cp[:, i - 1]
            r = rhs[i] + sub[i - 1] * dp[:, i - 1]
        else:
            r = np.full(B, rhs[0], dtype=complex)
        minpiv = np.minimum(minpiv, np.abs(bi) / scale)
        safe = np.where(bi == 0, 1.0, bi)
        if i < K - 1:
            cp[:, i] = -sup[i] / safe
        dp[:, i] = r / safe
    x = np.zeros((B, K), dtype=complex)
    x[:, K - 1] = dp[:, K - 1]
    for i in range(K - 2, -1, -1):
        x[:, i] = dp[:, i] - cp[:, i] * x[:, i + 1]
    return x, minpiv


# ------------------------------------------------------------- ODE stepping


def rk4_tridiag(sub: np.ndarray, diag: np.ndarray, sup: np.ndarray, y0: np.ndarray,
                t_grid: np.ndarray, hmax: float) -> np.ndarray:
    def f(y):
        out = diag * y
        out[1:] += sub * y[:-1]
        out[:-1] += sup * y[1:]
        return out

    out = np.empty((len(t_grid), len(y0)))
    y = np.array(y0, dtype=float)
    out[0] = y
    for j in range(1, len(t_grid)):
        span = t_grid[j] - t_grid[j - 1]
        nsub = max(1, math.ceil(span / hmax))
        h = span / nsub
        for _ in range(nsub):
            k1 = f(y)
            k2 = f(y + 0.5 * h * k1)
            k3 = f(y + 0.5 * h * k2)
            k4 = f(y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        out[j] = y
    return out


# --------------------------------------------------------------- simulators


def simulate_conditional(rho: float, K: int, n: int, start: int, stop: int,
                         seed: int) -> np.ndarray:
    """Sojourn of a tagged arrival that finds ``n`` others; replications ``start..stop-1``.

    With ``m`` customers present the total PS completion rate is 1 and each
    completion hits any one of them with probability ``1/m``.
    """
    out = np.empty(stop - start)
    for r in range(start, stop):
        key = stream_key(seed, r)
        j = 0
        m = n + 1
        t = 0.0
        while True:
            a_rate = rho if m < K else 0.0
            total = 1.0 + a_rate
            j += 1
            u = (mix64(key + j * GOLDEN) >> 11) * _TWO_M53
            t += -math.log1p(-u) / total
            j += 1
            v = (mix64(key + j * GOLDEN) >> 11) * _TWO_M53 * total
            if v < a_rate:
                m += 1
            elif int((v - a_rate) * m) == 0:
                break
            else:
                m -= 1
        out[r - start] = t
    return out


def simulate_stationary(rho: float, K: int, count: int, seed: int,
                        burn_in: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Tag the first ``count`` admitted arrivals after ``burn_in``.

    Returns sojourns (in arrival order), the number each tagged arrival found
    in the system, and the number of arrivals blocked while tagging.
    """
    key = stream_key(seed, 0)
    arrived = [0.0] * K
    tag = [-1] * K
    samples = np.empty(count)
    seen = np.empty(count, dtype=np.int64)
    m = 0
    t = 0.0
    j = 0
    tagged = 0
    outstanding = 0
    blocked = 0
    while tagged < count or outstanding > 0:
        total = rho + (1.0 if m > 0 else 0.0)
        j += 1
        u = (mix64(key + j * GOLDEN) >> 11) * _TWO_M53
        t += -math.log1p(-u) / total
        j += 1
        v = (mix64(key + j * GOLDEN) >> 11) * _TWO_M53 * total
        if v < rho:
            tagging = t >= burn_in and tagged < count
            if m == K:
                if tagging:
                    blocked += 1
                continue
            arrived[m] = t
            if tagging:
                tag[m] = tagged
                seen[tagged] = m
                tagged += 1
                outstanding += 1
            else:
                tag[m] = -1
            m += 1
        else:
            i = min(int((v - rho) * m), m - 1)  # guard rounding at v -> total
            if tag[i] >= 0:
                samples[tag[i]] = t - arrived[i]
                outstanding -= 1
            arrived[i] = arrived[m - 1]
            tag[i] = tag[m - 1]
            m -= 1
    return samples, seen, blocked
