"""The two homogeneous solutions ``G_n`` (decaying) and ``H_n`` (growing).

Both solve ``(n+1) rho y[n+1] - (n+1)(1+rho+theta) y[n] + n y[n-1] = 0``.

``G_n`` is a real integral over ``[0, z-]``, evaluated by Gauss-Jacobi
quadrature with the endpoint factor ``(z- - z)^(alpha-1)`` as weight.

``H_n`` is the contour integral ``(1/2 pi i) \\oint z^n (z-z-)^(-1)
[(z-z-)/(z-z+)]^alpha dz`` around the segment joining the roots.  The
principal power of the ratio has its cut exactly on that segment, so the
integrand is single valued on any enclosing contour.  The contour is an
ellipse confocal with the segment; its size is picked to minimise the peak
of the integrand (the answer does not depend on it, but rounding does) and
the periodic trapezoid rule is refined by doubling.

Values are returned as :class:`Scaled` (``mantissa * exp(log_scale)``) since
``z+^n`` leaves double range long before the quadrature gets inaccurate.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_jacobi

from .errors import ContourError, DomainError
from .model import RootData

REL_TOL = 1e-10
MAX_NODES = 2 ** 14
MIN_NODES = 32
DEFAULT_MARGIN = 0.25  # fraction of the segment length
# scipy's Jacobi nodes lose accuracy for large exponents at high order
JACOBI_MAX_ALPHA = 64.0


@dataclass(frozen=True)
class Scaled:
    """``mantissa * exp(log_scale)`` with ``|mantissa|`` kept near 1."""

    mantissa: complex
    log_scale: float

    @classmethod
    def make(cls, value: complex, log_scale: float) -> "Scaled":
        mag = abs(value)
        if mag == 0.0 or not math.isfinite(mag):
            return cls(value, log_scale)
        log_mag = math.log(mag)
        shift = round(log_mag)
        # through the unit phase, so subnormal magnitudes do not overflow exp
        return cls((value / mag) * math.exp(log_mag - shift), log_scale + shift)

    @property
    def real(self) -> "Scaled":
        return Scaled(complex(self.mantissa).real, self.log_scale)

    def value(self) -> complex:
        return self.mantissa * math.exp(self.log_scale)

    def __float__(self) -> float:
        return float(complex(self.mantissa).real * math.exp(self.log_scale))

    @property
    def sign(self) -> float:
        return float(np.sign(complex(self.mantissa).real))

    @property
    def log_abs(self) -> float:
        mag = abs(self.mantissa)
        return math.log(mag) + self.log_scale if mag > 0 else -math.inf


@dataclass(frozen=True)
class GreenPair:
    n: int
    g_value: float
    h_value: float
    log_scale_g: float
    log_scale_h: float

    @property
    def g(self) -> float:
        return self.g_value * math.exp(self.log_scale_g)

    @property
    def h(self) -> float:
        return self.h_value * math.exp(self.log_scale_h)


@dataclass(frozen=True)
class ContourResult:
    value: Scaled
    nodes: int
    margin: float
    cancellation: float
    imag_residual: float


# --------------------------------------------------------------------- G_n


@lru_cache(maxsize=256)
def _jacobi_rule(npts: int, a: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_jacobi(npts, a, 0.0)
    return x, w


def _require_real(rd: RootData) -> tuple[float, float, float]:
    if not rd.is_real or rd.alpha.imag != 0.0:
        raise DomainError("G_n is only represented for real, distinct characteristic roots")
    zm, zp, a = rd.z_minus.real, rd.z_plus.real, rd.alpha.real
    if not (zp > zm > 0.0 and a > 0.0):
        raise DomainError(f"G_n needs z+ > z- > 0 (got z-={zm}, z+={zp})")
    return zm, zp, a


@lru_cache(maxsize=16)
def _legendre_rule(npts: int) -> tuple[np.ndarray, np.ndarray]:
    return np.polynomial.legendre.leggauss(npts)


def _legendre_sum(rd: RootData, power: int, times_z_minus_one: bool) -> Scaled:
    """Large ``alpha``: the endpoint factor vanishes to high order, so plain
    Gauss-Legendre on the whole (log-evaluated) integrand converges."""
    zm, zp, a = _require_real(rd)
    prev = None
    npts = 64
    while True:
        x, w = _legendre_rule(npts)
        z = 0.5 * zm * (1.0 + x)
        logf = power * np.log(z) - a * np.log(zp - z) + (a - 1.0) * np.log(zm - z)
        top = float(np.max(logf))
        terms = w * np.exp(logf - top)
        if times_z_minus_one:
            terms = terms * (z - 1.0)
        total = math.fsum(terms)
        cur = Scaled.make(total, top + math.log(0.5 * zm))
        if prev is not None:
            diff = abs(cur.mantissa - prev.mantissa * math.exp(prev.log_scale - cur.log_scale))
            floor = 1e-15 * float(np.abs(terms).sum()) / abs(total) * abs(cur.mantissa) if total else 0.0
            if diff <= 1e-13 * abs(cur.mantissa) or diff <= floor:
                return cur
        if npts >= 4096:
            return cur
        prev = cur
        npts *= 2


def _jacobi_sum(rd: RootData, power: int, times_z_minus_one: bool) -> Scaled:
    zm, zp, a = _require_real(rd)
    if a > JACOBI_MAX_ALPHA:
        return _legendre_sum(rd, power, times_z_minus_one)
    log_pref = a * math.log(0.5 * zm)
    prev = None
    npts = 16
    while True:
        x, w = _jacobi_rule(npts, a - 1.0)
        z = 0.5 * zm * (1.0 + x)
        logf = power * np.log(z) - a * np.log(zp - z)
        top = float(np.max(logf))
        terms = w * np.exp(logf - top)
        if times_z_minus_one:
            terms = terms * (z - 1.0)
        if not np.all(np.isfinite(terms)):
            raise DomainError(f"Gauss-Jacobi weights out of range for alpha={a:.6g}")
        total = math.fsum(terms)
        cur = Scaled.make(total, top + log_pref)
        if prev is not None:
            diff = abs(cur.mantissa - prev.mantissa * math.exp(prev.log_scale - cur.log_scale))
            # summation noise: 1e-15 of the absolute sum, in units of the mantissa
            floor = 1e-15 * float(np.abs(terms).sum()) / abs(total) * abs(cur.mantissa) if total else 0.0
            if diff <= 1e-13 * abs(cur.mantissa) or diff <= floor:
                return cur
        if npts >= 2048:
            return cur
        prev = cur
        npts *= 2


def g_integral(rd: RootData, n: int) -> Scaled:
    """``G_n = int_0^{z-} z^n (z+ - z)^(-alpha) (z- - z)^(alpha-1) dz`` (real roots only)."""
    if n < 0:
        raise DomainError("G_n is evaluated for n >= 0")
    return _jacobi_sum(rd, n, False)


def delta_g(rd: RootData, K: int) -> Scaled:
    """``G_K - G_{K-1}`` as one integral with the factor ``z^(K-1) (z - 1)``."""
    return _jacobi_sum(rd, K - 1, True)


# --------------------------------------------------------------------- H_n


def _log_integrand(z: np.ndarray, rd: RootData, power: int, dh: bool) -> np.ndarray:
    zm, zp = rd.z_minus, rd.z_plus
    out = power * np.log(z) - np.log(z - zm) + rd.alpha * np.log((z - zm) / (z - zp))
    if dh:
        out = out + np.log(z - 1.0)
    return out


def _ellipse(rd: RootData, u: float, npts: int) -> tuple[np.ndarray, np.ndarray]:
    c = 0.5 * (rd.z_plus + rd.z_minus)
    h = 0.5 * (rd.z_plus - rd.z_minus)
    phi = 2.0 * np.pi * np.arange(npts) / npts
    arg = phi - 1j * u
    return c + h * np.cos(arg), -h * np.sin(arg)


def _peak(rd: RootData, u: float, power: int, dh: bool, npts: int = 256) -> float:
    z, dz = _ellipse(rd, u, npts)
    with np.errstate(divide="ignore", invalid="ignore"):
        lf = _log_integrand(z, rd, power, dh).real + np.log(np.abs(dz))
    lf = lf[np.isfinite(lf)]
    return float(lf.max()) if lf.size else math.inf


def _lowest_peak_u(rd: RootData, power: int, dh: bool, npts: int = 64) -> float:
    """Ellipse parameter ``u`` with the lowest integrand peak over the overhang grid."""
    s = 2.0 * DEFAULT_MARGIN * 2.0 ** np.arange(-16, 14)
    u = np.arccosh(1.0 + s)[:, None]
    c = 0.5 * (rd.z_plus + rd.z_minus)
    h = 0.5 * (rd.z_plus - rd.z_minus)
    arg = 2.0 * np.pi * np.arange(npts) / npts - 1j * u
    z = c + h * np.cos(arg)
    with np.errstate(divide="ignore", invalid="ignore"):
        lf = _log_integrand(z, rd, power, dh).real + np.log(np.abs(h * np.sin(arg)))
    lf = np.where(np.isfinite(lf), lf, -np.inf)
    return float(u[int(np.argmin(lf.max(axis=1))), 0])


def _trapezoid(rd: RootData, u: float, power: int, dh: bool):
    prev = None
    npts = MIN_NODES
    while npts <= MAX_NODES:
        z, dz = _ellipse(rd, u, npts)
        with np.errstate(divide="ignore", invalid="ignore"):
            lf = _log_integrand(z, rd, power, dh) + np.log(dz)
        good = np.isfinite(lf.real)
        top = float(lf.real[good].max())
        terms = np.where(good, np.exp(np.where(good, lf, 0.0) - top), 0.0)
        total = complex(terms.sum()) / (1j * npts)
        absum = float(np.abs(terms).sum()) / npts
        if prev is not None:
            prev_total, prev_top = prev
            diff = abs(total - prev_total * math.exp(prev_top - top))
            if diff <= REL_TOL * abs(total) or diff <= 1e-14 * absum:
                return total, top, npts, absum
        prev = (total, top)
        npts *= 2
    return None


def _contour(rd: RootData, power: int, dh: bool, margin: float | None = None) -> ContourResult:
    real_theta = rd.theta.imag == 0.0
    half = abs(0.5 * (rd.z_plus - rd.z_minus))
    default = 2.0 * DEFAULT_MARGIN
    if margin is not None:
        candidates = [margin / half]
    else:
        # relative overhang s = delta/|h|.  The default is tried first unless its
        # integrand peak is clearly worse than the best on the grid; the rest
        # follow in order of peak height.
        grid = [default * 2.0 ** k for k in range(-16, 14)]
        peaks = {s: _peak(rd, math.acosh(1.0 + s), power, dh) for s in grid}
        best = min(peaks.values())
        candidates = sorted((s for s in grid if peaks[s] <= best + 4.0), key=peaks.__getitem__)
        if default in candidates and peaks[default] <= best + 1.0:
            candidates.remove(default)
            candidates.insert(0, default)
    fallback = None
    worst_imag = None
    for s in candidates:
        got = _trapezoid(rd, math.acosh(1.0 + s), power, dh)
        if got is None:
            continue
        total, top, npts, absum = got
        mag = abs(total)
        cancel = absum / mag if mag > 0 else math.inf
        imag_res = abs(total.imag) / mag if mag > 0 else 0.0
        res = ContourResult(Scaled.make(total.real if real_theta else total, top),
                            npts, s * half, cancel, imag_res)
        if real_theta and abs(total.imag) > 1e-9 * mag + 1e-13 * absum:
            worst_imag = imag_res if worst_imag is None else max(worst_imag, imag_res)
            continue
        if cancel <= 1e4:
            return res
        if fallback is None or cancel < fallback.cancellation:
            fallback = res
    if fallback is not None:
        return fallback
    if worst_imag is not None:
        raise ContourError(f"realness check failed at theta={rd.theta}: |Im|/|H| = {worst_imag:.3e}")
    raise ContourError(f"trapezoid rule did not converge within {MAX_NODES} nodes (theta={rd.theta})")


def h_contour_detail(rd: RootData, n: int, margin: float | None = None) -> ContourResult:
    if n < 0:
        raise ContourError("H_n is evaluated for n >= 0 only (z = 0 must stay outside)")
    return _contour(rd, n, False, margin)


def h_contour(rd: RootData, n: int, margin: float | None = None) -> Scaled:
    """``H_n`` by contour quadrature; real-valued (as a Scaled) for real theta.

    ``margin`` fixes the distance by which the ellipse overhangs each root;
    by default it is chosen automatically.
    """
    return h_contour_detail(rd, n, margin).value


def delta_h_detail(rd: RootData, K: int, margin: float | None = None) -> ContourResult:
    if K < 1:
        raise ContourError("capacity must be >= 1")
    return _contour(rd, K - 1, True, margin)


def delta_h(rd: RootData, K: int, margin: float | None = None) -> Scaled:
    """``H_K - H_{K-1}`` from a single contour integral with ``z^(K-1)(z-1)``."""
    return delta_h_detail(rd, K, margin).value


def delta_h_scaled(rd: RootData, K: int) -> tuple[float, float, float]:
    """``H_K - H_{K-1}`` at real theta as ``(mantissa, log_scale, noise)``.

    Uses only the lowest-peak contour, which is all sign tests and root
    refinement need; near a zero the full search in :func:`delta_h` would
    spend its whole node budget chasing relative accuracy that cannot be had.
    ``noise`` is the quadrature rounding level on the mantissa's scale.
    """
    if K < 1:
        raise ContourError("capacity must be >= 1")
    got = _trapezoid(rd, _lowest_peak_u(rd, K - 1, True), K - 1, True)
    if got is None:
        raise ContourError(f"trapezoid rule did not converge within {MAX_NODES} nodes (theta={rd.theta})")
    total, top, _, absum = got
    return total.real, top, 1e-12 * absum


def delta_h_sign(rd: RootData, K: int) -> int:
    """Sign of ``H_K - H_{K-1}`` at real theta; 0 when it is below quadrature noise."""
    value, _, noise = delta_h_scaled(rd, K)
    if abs(value) <= noise:
        return 0
    return 1 if value > 0 else -1


# --------------------------------------------------- branch-cut form (band)


def _band_setup(rd: RootData, power: int, dh: bool, step: float, tmax: float):
    """Segment form in the complex-root band, with ``w = tanh(t/2)``.

    On the segment ``xi = c + h w`` the weight ``(1+w)^(alpha-1)(1-w)^(-alpha) dw``
    becomes ``exp((alpha - 1/2) t) / (2 cosh(t/2)) dt``; with ``Re alpha = 1/2``
    this is bounded and decays like ``exp(-|t|/2)``.
    """
    c = 0.5 * (rd.z_plus + rd.z_minus)
    h = 0.5 * (rd.z_plus - rd.z_minus)
    t = np.arange(-tmax, tmax + step / 2, step)
    xi = c + h * np.tanh(0.5 * t)
    lf = power * np.log(xi) + (rd.alpha - 0.5) * t - np.log(2.0 * np.cosh(0.5 * t))
    if dh:
        lf = lf + np.log(xi - 1.0)
    return lf


def _band_integral(rd: RootData, power: int, dh: bool) -> Scaled:
    if rd.is_real or abs(rd.alpha.real - 0.5) > 1e-9:
        raise DomainError("branch-cut form is only used inside the complex-root band")
    pref = cmath.sin(math.pi * rd.alpha) / math.pi
    prev = None
    step = 0.2
    while step > 1e-3:
        lf = _band_setup(rd, power, dh, step, 80.0)
        top = float(lf.real.max())
        total = complex(np.exp(lf - top).sum()) * step * pref
        if prev is not None:
            ptot, ptop = prev
            if abs(total - ptot * math.exp(ptop - top)) <= 1e-11 * abs(total):
                break
        prev = (total, top)
        step /= 2
    return Scaled.make(total.real, top)


def h_branch_cut(rd: RootData, n: int) -> Scaled:
    """``H_n = sin(pi alpha)/pi int_{z-}^{z+} xi^n (xi-z-)^(alpha-1) (z+-xi)^(-alpha) dxi``.

    Only convergent for ``Re alpha < 1``, i.e. inside the band where the roots
    are complex conjugates; used there as an independent check of the contour.
    """
    return _band_integral(rd, n, False)


def delta_h_branch_cut(rd: RootData, K: int) -> Scaled:
    return _band_integral(rd, K - 1, True)


# ------------------------------------------------------------- utilities


def green_pair(rd: RootData, n: int) -> GreenPair:
    g = g_integral(rd, n)
    h = h_contour(rd, n)
    return GreenPair(n, float(complex(g.mantissa).real), float(complex(h.mantissa).real),
                     g.log_scale, h.log_scale)


def rho_of(rd: RootData) -> float:
    """Recover ``rho`` from the root product ``z- z+ = 1/rho``."""
    return float((1.0 / (rd.z_minus * rd.z_plus)).real)


def h_recurrence(rd: RootData, nmax: int) -> np.ndarray:
    """``H_0..H_nmax`` from ``H_0 = 1`` and the forward recurrence.

    ``H_0 = 1`` for every contour (residue at infinity), and the recurrence at
    ``n = 0`` has no ``H_{-1}`` term, so this is an independent route.
    """
    rho = rho_of(rd)
    b = 1.0 + rho + rd.theta
    out = np.zeros(nmax + 1, dtype=complex)
    out[0] = 1.0
    if nmax >= 1:
        out[1] = b / rho
    for n in range(1, nmax):
        out[n + 1] = ((n + 1) * b * out[n] - n * out[n - 1]) / ((n + 1) * rho)
    return out if rd.theta.imag != 0.0 else out.real


def wronskian_check(rd: RootData, l: int) -> float:
    """Relative residual of ``G_l H_{l+1} - G_{l+1} H_l = 1/(rho M (l+1) rho^l)``."""
    rho = rho_of(rd)
    g0, g1 = g_integral(rd, l), g_integral(rd, l + 1)
    h0, h1 = h_contour(rd, l), h_contour(rd, l + 1)
    # log of the right-hand side; everything else relative to it
    log_rhs = -(math.log(rho) + rd.log_m.real + math.log(l + 1) + l * math.log(rho))
    a = g0.mantissa * h1.mantissa * math.exp(g0.log_scale + h1.log_scale - log_rhs)
    b = g1.mantissa * h0.mantissa * math.exp(g1.log_scale + h0.log_scale - log_rhs)
    return abs(complex(a - b).real - 1.0)
